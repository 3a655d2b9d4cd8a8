"""Geometry of the unit-frequency Mehler phase

    P(x, y, s) = s/2 + (|x|^2 + |y|^2)/2 cot s - <x, y> csc s.

Everything here depends on ``x`` and ``y`` only through ``|x|^2 + |y|^2`` and
``<x, y>`` (plus ``|x + y|`` and ``|x - y|``), so all functions take arrays with
a trailing coordinate axis and broadcast over the leading ones.

Notation
--------
D(x, y)       = 1 + <x,y>^2 - |x|^2 - |y|^2
Q(x, y, tau)  = (tau - <x,y>)^2 - D(x, y)
R(x, y, tau)  = tau^2 - (|x|^2 + |y|^2)/<x,y> tau + 1
tau_pm        = roots of R, ``(|x|^2+|y|^2 +- |x+y||x-y|) / (2<x,y>)``
S_c           = arccos(tau_minus), the zero of d^2P/ds^2 in (0, pi/2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateInputError, DomainError, InputError, SingularityError

EPS = np.finfo(float).eps


def _pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise InputError(f"x and y must have the same shape, got {x.shape} and {y.shape}")
    if x.ndim == 0:
        x, y = x[None], y[None]
    return x, y


def _invariants(x, y):
    x, y = _pair(x, y)
    s2 = np.sum(x * x, axis=-1) + np.sum(y * y, axis=-1)
    xy = np.sum(x * y, axis=-1)
    return s2, xy


def _plus_minus(x, y):
    x, y = _pair(x, y)
    return np.linalg.norm(x + y, axis=-1), np.linalg.norm(x - y, axis=-1)


def _sin_checked(s):
    s = np.asarray(s, dtype=float)
    sn = np.sin(s)
    if np.any(sn == 0.0) or np.any(s == 0.0):
        raise SingularityError("sin s = 0: the phase is singular there")
    return sn


# --------------------------------------------------------------------------
# the phase and its s-derivatives


def phase_P(x, y, s):
    """``s/2 + (|x|^2+|y|^2)/2 cot s - <x,y> csc s``."""
    s2, xy = _invariants(x, y)
    sn = _sin_checked(s)
    return 0.5 * np.asarray(s) + (0.5 * s2 * np.cos(s) - xy) / sn


def discriminant_D(x, y):
    """``1 + <x,y>^2 - |x|^2 - |y|^2``."""
    s2, xy = _invariants(x, y)
    return 1.0 + xy * xy - s2


def discriminant_D_angle(x, y):
    """Same quantity written as ``-|x|^2|y|^2 sin^2(angle) + (1-|x|^2)(1-|y|^2)``.

    ``|x|^2|y|^2 sin^2`` is computed as ``|x|^2|y|^2 - <x,y>^2``.
    """
    x, y = _pair(x, y)
    nx = np.sum(x * x, axis=-1)
    ny = np.sum(y * y, axis=-1)
    xy = np.sum(x * y, axis=-1)
    return -(nx * ny - xy * xy) + (1.0 - nx) * (1.0 - ny)


def Q_of(x, y, tau):
    """``(tau - <x,y>)^2 - D(x, y)``."""
    _, xy = _invariants(x, y)
    return (np.asarray(tau, dtype=float) - xy) ** 2 - discriminant_D(x, y)


def dP_ds(x, y, s):
    """``-Q(x, y, cos s) / (2 sin^2 s)``."""
    sn = _sin_checked(s)
    return -Q_of(x, y, np.cos(s)) / (2.0 * sn * sn)


def d2P_ds2(x, y, s):
    """Second s-derivative of the phase.

    Uses the factored form ``-<x,y>(cos S_c - cos s)(tau_plus - cos s)/sin^3 s``
    when ``<x,y> != 0`` and the expanded form
    ``((|x|^2+|y|^2) cos s - <x,y>(1 + cos^2 s)) / sin^3 s`` otherwise.
    """
    s2, xy = _invariants(x, y)
    sn = _sin_checked(s)
    c = np.cos(s)
    expanded = (s2 * c - xy * (1.0 + c * c)) / sn ** 3
    ok = xy != 0.0
    if not np.any(ok):
        return expanded
    xy_safe = np.where(ok, xy, 1.0)
    a, b = _plus_minus(x, y)
    tp = (s2 + a * b) / (2.0 * xy_safe)
    tm = _tau_minus(a, b)
    factored = -xy_safe * (tm - c) * (tp - c) / sn ** 3
    return np.where(ok, factored, expanded)


def d2P_ds2_expanded(x, y, s):
    """Unfactored second derivative (the derivative of :func:`dP_ds`)."""
    s2, xy = _invariants(x, y)
    sn = _sin_checked(s)
    c = np.cos(s)
    return (s2 * c - xy * (1.0 + c * c)) / sn ** 3


# --------------------------------------------------------------------------
# roots of R and the critical time


def _tau_minus(a, b):
    # (s2 - ab) / (2<x,y>) simplifies to (a - b)/(a + b) with a = |x+y|, b = |x-y|
    return (a - b) / (a + b)


def tau_pm(x, y) -> Tuple[np.ndarray, np.ndarray]:
    """Roots ``(tau_plus, tau_minus)`` of ``R(x, y, .)``.

    The discriminant of ``R`` is ``(|x+y||x-y|/<x,y>)^2 >= 0``, so both roots
    are real whenever ``<x, y> != 0``.  ``tau_plus * tau_minus = 1``; for
    ``<x,y> > 0`` this means ``tau_plus >= 1 >= tau_minus > 0``.

    Raises
    ------
    DomainError
        If ``<x, y> = 0``.
    """
    s2, xy = _invariants(x, y)
    if np.any(xy == 0.0):
        raise DomainError("tau_pm needs <x, y> != 0")
    a, b = _plus_minus(x, y)
    tp = (s2 + a * b) / (2.0 * xy)
    tm = _tau_minus(a, b)
    return tp, tm


def R_of(x, y, tau):
    """``tau^2 - (|x|^2+|y|^2)/<x,y> tau + 1``."""
    s2, xy = _invariants(x, y)
    if np.any(xy == 0.0):
        raise DomainError("R is undefined for <x, y> = 0")
    tau = np.asarray(tau, dtype=float)
    return tau * tau - s2 / xy * tau + 1.0


def one_minus_cos_Sc(x, y):
    """``1 - cos S_c = 2|x-y| / (|x+y| + |x-y|)`` (no subtraction)."""
    a, b = _plus_minus(x, y)
    return 2.0 * b / (a + b)


def S_c(x, y):
    """Critical time ``arccos(tau_minus)`` in ``[0, pi/2)``.

    Evaluated as ``2 arcsin(sqrt((1 - cos S_c)/2))`` so that nearly equal
    ``x, y`` lose no digits.

    Raises
    ------
    DomainError
        If ``<x, y> <= 0`` (then ``tau_minus <= 0`` and ``S_c`` leaves
        ``(0, pi/2)``) or ``x = y = 0``.
    """
    _, xy = _invariants(x, y)
    a, b = _plus_minus(x, y)
    if np.any(xy <= 0.0) or np.any(a + b == 0.0):
        raise DomainError("S_c needs <x, y> > 0")
    return 2.0 * np.arcsin(np.sqrt(b / (a + b)))


def grad_Sc(x, y) -> Tuple[np.ndarray, np.ndarray]:
    """``(d S_c/dx, d S_c/dy)`` in closed form.

    ``d S_c/dx = G (2x - A y)`` with ``A = (|x|^2+|y|^2)/<x,y>`` and
    ``G = cos S_c / (sin S_c |x+y| |x-y|)``; the y-gradient follows by swapping
    ``x`` and ``y``.

    Raises
    ------
    DomainError
        If ``x = +-y`` or ``<x, y> <= 0``.
    """
    x, y = _pair(x, y)
    s2, xy = _invariants(x, y)
    a, b = _plus_minus(x, y)
    if np.any(a == 0.0) or np.any(b == 0.0):
        raise DomainError("grad_Sc is singular at x = +-y")
    if np.any(xy <= 0.0):
        raise DomainError("grad_Sc needs <x, y> > 0")
    sc = S_c(x, y)
    A = (s2 / xy)[..., None]
    G = (np.cos(sc) / (np.sin(sc) * a * b))[..., None]
    return G * (2.0 * x - A * y), G * (2.0 * y - A * x)


def sc_identity_residuals(x, y):
    """Residuals of the identities tying ``S_c`` to ``tau_pm``.

    Returns a dict of arrays:

    ``vieta_product``  tau_plus tau_minus - 1
    ``vieta_sum``      tau_plus + tau_minus - (|x|^2+|y|^2)/<x,y>
    ``gap``            (tau_plus - cos S_c) - |x+y||x-y|/<x,y>
    ``gap_sin``        |x+y||x-y|/<x,y> - sin^2 S_c / cos S_c
    ``one_minus_cos``  (1 - tau_minus) - 2|x-y|/(|x+y|+|x-y|), with tau_minus
                       from the quadratic formula
    ``R_at_roots``     max(|R(tau_plus)|, |R(tau_minus)|) / (1 + tau_plus^2)

    Each is normalised by the magnitude of the terms involved.
    """
    s2, xy = _invariants(x, y)
    a, b = _plus_minus(x, y)
    tp, _ = tau_pm(x, y)
    tm_quad = (s2 - a * b) / (2.0 * xy)
    sc = S_c(x, y)
    cs, sn = np.cos(sc), np.sin(sc)
    gap = a * b / xy
    return {
        "vieta_product": (tp * _tau_minus(a, b) - 1.0),
        "vieta_sum": (tp + _tau_minus(a, b) - s2 / xy) / (1.0 + np.abs(s2 / xy)),
        "gap": (tp - cs - gap) / (1.0 + np.abs(tp)),
        "gap_sin": (gap - sn * sn / cs) / (1.0 + np.abs(gap)),
        "one_minus_cos": ((1.0 - tm_quad) - one_minus_cos_Sc(x, y)),
        "R_at_roots": np.maximum(np.abs(R_of(x, y, tp)), np.abs(R_of(x, y, _tau_minus(a, b)))) / (1.0 + tp * tp),
    }


@dataclass(frozen=True)
class PhaseState:
    """A configuration ``(x, y, s)`` with its cached geometry.

    ``S_c`` is ``None`` outside the regime ``<x, y> > 0``.  ``q_roots_real``
    tells whether ``Q(x, y, .)`` has real roots (``D >= 0``); the case
    ``D < 0`` is kept and flagged, never projected.
    """

    x: np.ndarray
    y: np.ndarray
    s: float
    D: float
    Q: float
    tau_plus: Optional[float]
    tau_minus: Optional[float]
    S_c: Optional[float]
    q_roots_real: bool


def phase_state(x, y, s: float) -> PhaseState:
    x, y = _pair(x, y)
    if not 0.0 < s < math.pi:
        raise InputError(f"s must lie in (0, pi), got {s}")
    D = float(discriminant_D(x, y))
    Q = float(Q_of(x, y, math.cos(s)))
    _, xy = _invariants(x, y)
    tp = tm = sc = None
    if float(xy) != 0.0:
        tp_a, tm_a = tau_pm(x, y)
        tp, tm = float(tp_a), float(tm_a)
    if float(xy) > 0.0:
        sc = float(S_c(x, y))
    return PhaseState(x=x.copy(), y=y.copy(), s=float(s), D=D, Q=Q, tau_plus=tp,
                      tau_minus=tm, S_c=sc, q_roots_real=D >= 0.0)


# --------------------------------------------------------------------------
# finite differences


def richardson_derivative(f: Callable, t, h):
    """Central difference of ``f`` at ``t`` with one Richardson level.

    ``f`` must broadcast over ``t``; ``h`` may be an array.
    """
    t = np.asarray(t, dtype=float)
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0.0):
        raise InputError("finite-difference step must be positive")
    d1 = (f(t + h) - f(t - h)) / (2.0 * h)
    d2 = (f(t + 0.5 * h) - f(t - 0.5 * h)) / h
    return (4.0 * d2 - d1) / 3.0


def fd_step(scale, order: int = 1):
    """Default step ``eps^(1/(order+2)) * scale`` (``cbrt(eps)`` for first derivatives)."""
    return EPS ** (1.0 / (order + 2)) * np.maximum(np.abs(scale), 1e-3)


def fd_grad(f: Callable, x, h=None):
    """Richardson-extrapolated central-difference gradient over the trailing axis."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    if h is None:
        h = fd_step(np.linalg.norm(x, axis=-1))
    h = np.broadcast_to(np.asarray(h, dtype=float), x.shape[:-1])
    out = np.empty_like(x)
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0

        def g(step, e=e):
            return f(x + step[..., None] * e)

        def diff(hh):
            return (g(hh) - g(-hh)) / (2.0 * hh)

        out[..., i] = (4.0 * diff(0.5 * h) - diff(h)) / 3.0
    return out


def fd_mixed_hessian(f: Callable, x, y, h: float):
    """``d^2 f / dx_i dy_j`` by the 4-point cross stencil, one Richardson level."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x.size

    def stencil(hh):
        H = np.empty((d, d))
        for i in range(d):
            ei = np.zeros(d)
            ei[i] = hh
            for j in range(d):
                ej = np.zeros(d)
                ej[j] = hh
                H[i, j] = (f(x + ei, y + ej) - f(x + ei, y - ej)
                           - f(x - ei, y + ej) + f(x - ei, y - ej)) / (4.0 * hh * hh)
        return H

    return (4.0 * stencil(0.5 * h) - stencil(h)) / 3.0


# --------------------------------------------------------------------------
# mixed Hessian of the critical-time phase


def shifted_phase(x, y, s: float, l_scale: float):
    """``Phi_s(x, y) = P(x, y, S_c^l)`` with ``S_c^l = l_scale * s + S_c(x, y)``."""
    t = l_scale * s + S_c(x, y)
    return phase_P(x, y, t)


def mixed_hessian(x, y, l_scale: float, s: float = 0.5, step: Optional[float] = None) -> np.ndarray:
    """``-sin(S_c^l) * d_x d_y^T Phi_s(x, y)`` by finite differences."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise InputError("mixed_hessian takes a single pair of points")
    if not 0.25 <= abs(s) <= 1.0:
        raise InputError(f"s must satisfy 1/4 <= |s| <= 1, got {s}")
    if not 0.0 < l_scale <= 1.0:
        raise InputError(f"l_scale must lie in (0, 1], got {l_scale}")
    if float(x @ y) <= 0.0:
        raise DomainError("mixed_hessian needs <x, y> > 0")
    gap = float(np.linalg.norm(x - y))
    if gap == 0.0:
        raise DomainError("mixed_hessian is singular at x = y")
    if step is None:
        step = EPS ** 0.25 * gap
    if step < 1e3 * EPS:
        raise DegenerateInputError(f"finite-difference step {step:.3g} underflows")

    def f(a, b):
        return float(shifted_phase(a, b, s, l_scale))

    t = l_scale * s + float(S_c(x, y))
    return -math.sin(t) * fd_mixed_hessian(f, x, y, step)


def mixed_hessian_dets(x, y, l_scale: float, s: float = 0.5, step: Optional[float] = None) -> Tuple[float, float]:
    """Determinant of the mixed Hessian and of its (1, 1) minor.

    The (1, 1) minor is the block with the first row and column removed.
    """
    M = mixed_hessian(x, y, l_scale, s, step)
    minor = M[1:, 1:]
    det_minor = float(np.linalg.det(minor)) if minor.size else 1.0
    return float(np.linalg.det(M)), det_minor


def aligned_pair(mu: float, mu_tilde: float, d: int = 3, r_frac: float = 1.5,
                 rho_frac: float = 1.5, h_frac: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """``x = (r, 0, ...)``, ``y = (rho, h, 0, ...)`` with ``1 - r = r_frac * mu``,
    ``1 - rho = rho_frac * mu_tilde`` and ``h = h_frac * sqrt((1-r^2)(1-rho^2))``.

    ``h_frac = 1`` puts the pair on ``D(x, y) = 0``.
    """
    if d < 2:
        raise InputError("aligned_pair needs d >= 2")
    r = 1.0 - r_frac * mu
    rho = 1.0 - rho_frac * mu_tilde
    h = h_frac * math.sqrt((1.0 - r * r) * (1.0 - rho * rho))
    x = np.zeros(d)
    y = np.zeros(d)
    x[0] = r
    y[0], y[1] = rho, h
    return x, y


# --------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class AdmissiblePair:
    x: np.ndarray
    y: np.ndarray
    mu: float
    mu_tilde: float


def random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random orthogonal matrix (QR of a Gaussian matrix, sign-fixed)."""
    z = rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * np.sign(np.diag(r))


def sample_admissible(n: int, d: int, rng: np.random.Generator, shell_cap: float = 1.0 / 64.0,
                      min_level: int = 10, angle_factor: float = 4.0):
    """Random pairs with ``1-|x| in [mu, 2mu]``, ``1-|y| in [mu_t, 2mu_t]``, ``<x,y> > 0``.

    ``mu >= mu_t`` are dyadic, between ``2^-min_level`` and ``shell_cap``.  The
    angle between ``x`` and ``y`` is uniform on ``[0, angle_factor * sqrt(mu)]``,
    which straddles the curve ``D = 0``.

    Returns
    -------
    X, Y : ndarray, shape (n, d)
    mu, mu_tilde : ndarray, shape (n,)
    """
    if d < 1:
        raise InputError("d must be >= 1")
    top = int(math.ceil(-math.log2(shell_cap)))
    if min_level < top:
        raise InputError("min_level must be at least -log2(shell_cap)")
    lev = rng.integers(top, min_level + 1, size=(n, 2))
    lev.sort(axis=1)
    mu = 2.0 ** -lev[:, 0].astype(float)
    mu_t = 2.0 ** -lev[:, 1].astype(float)
    rx = 1.0 - mu * (1.0 + rng.random(n))
    ry = 1.0 - mu_t * (1.0 + rng.random(n))
    ux = rng.standard_normal((n, d))
    ux /= np.linalg.norm(ux, axis=1, keepdims=True)
    if d == 1:
        uy = ux.copy()
    else:
        w = rng.standard_normal((n, d))
        w -= np.sum(w * ux, axis=1, keepdims=True) * ux
        w /= np.linalg.norm(w, axis=1, keepdims=True)
        theta = rng.random(n) * np.minimum(angle_factor * np.sqrt(mu), 1.0)
        uy = np.cos(theta)[:, None] * ux + np.sin(theta)[:, None] * w
    return rx[:, None] * ux, ry[:, None] * uy, mu, mu_t


def perturbed_aligned_pairs(mu: float, mu_tilde: float, n: int, rng: np.random.Generator, d: int = 3,
                            h_range: Tuple[float, float] = (0.8, 1.25)):
    """Random pairs around :func:`aligned_pair` together with times ``s``.

    ``1 - r`` and ``1 - rho`` range over ``[mu, 2mu]`` and
    ``[mu_tilde, 2mu_tilde]``, where ``rho`` is the first coordinate of ``y``
    (so ``1 - |y|`` is comparable to ``mu_tilde`` but may leave that interval); ``h_frac`` over ``h_range``, which keeps
    ``<x, y>`` within a fraction of ``sqrt(mu mu_tilde)`` of ``cos S_c``;
    ``|s|`` over ``[1/4, 1]`` with random sign.  A random rotation fixing the
    first axis is applied, so the (1, 1) minor keeps its meaning.

    Yields
    ------
    (x, y, s)
    """
    for _ in range(n):
        x, y = aligned_pair(mu, mu_tilde, d, r_frac=rng.uniform(1.0, 2.0),
                            rho_frac=rng.uniform(1.0, 2.0), h_frac=rng.uniform(*h_range))
        U = np.eye(d)
        if d > 2:
            U[1:, 1:] = random_rotation(d - 1, rng)
        elif rng.random() < 0.5:
            U[1, 1] = -1.0
        s = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.25, 1.0))
        yield U @ x, U @ y, s


# --------------------------------------------------------------------------
# identity suites


def _dP_scale(x, y, s):
    s2, xy = _invariants(x, y)
    sn2 = np.sin(s) ** 2
    return 0.5 + 0.5 * s2 / sn2 + np.abs(xy * np.cos(s)) / sn2


def _d2P_scale(x, y, s):
    s2, xy = _invariants(x, y)
    c = np.cos(s)
    return (s2 * np.abs(c) + np.abs(xy) * (1.0 + c * c)) / np.abs(np.sin(s)) ** 3


def identity_suite(n: int = 1000, d: int = 3, seed: int = 0, shell_cap: float = 1.0 / 64.0) -> dict:
    """Maximum errors of every closed-form identity over ``n`` random states.

    Algebraic identities report absolute errors of quantities that are O(1)
    by construction.  Derivatives report ``|analytic - finite difference|``
    divided by the sum of magnitudes of the terms in the closed form (for the
    gradient, relative to its norm).

    Returns
    -------
    dict
        name -> {"max_error": float, "tolerance": float, "passed": bool, "worst": index}
    """
    if n < 1:
        raise InputError(f"sample count must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    X, Y, mu, mt = sample_admissible(n, d, rng, shell_cap=shell_cap)
    s = rng.uniform(0.1, math.pi - 0.1, n)
    out = {}

    def record(name, err, tol):
        err = np.abs(np.asarray(err, dtype=float))
        i = int(np.argmax(err))
        out[name] = {"max_error": float(err[i]), "tolerance": tol, "passed": bool(err[i] <= tol), "worst": i}

    record("D_angle_form", discriminant_D(X, Y) - discriminant_D_angle(X, Y), 1e-12)
    res = sc_identity_residuals(X, Y)
    record("tau_product", res["vieta_product"], 1e-12)
    record("tau_sum", res["vieta_sum"], 1e-12)
    record("tau_plus_gap", res["gap"], 1e-12)
    record("tau_plus_gap_sin", res["gap_sin"], 1e-12)
    record("one_minus_cos_Sc", res["one_minus_cos"], 1e-12)

    h1 = fd_step(1.0, order=1)
    fd = richardson_derivative(lambda t: phase_P(X, Y, t), s, h1)
    record("dP_ds", (fd - dP_ds(X, Y, s)) / _dP_scale(X, Y, s), 1e-6)
    fd2 = richardson_derivative(lambda t: dP_ds(X, Y, t), s, h1)
    record("d2P_ds2", (fd2 - d2P_ds2(X, Y, s)) / _d2P_scale(X, Y, s), 1e-6)

    gx, gy = grad_Sc(X, Y)
    h = fd_step(np.linalg.norm(X - Y, axis=1) / np.maximum(np.linalg.norm(X, axis=1), 1e-300), order=1)
    fx = fd_grad(lambda z: S_c(z, Y), X, h)
    fy = fd_grad(lambda z: S_c(X, z), Y, h)
    rel = np.maximum(np.linalg.norm(gx - fx, axis=1) / np.linalg.norm(gx, axis=1),
                     np.linalg.norm(gy - fy, axis=1) / np.linalg.norm(gy, axis=1))
    record("grad_Sc", rel, 1e-6)

    sc = S_c(X, Y)
    record("d2P_zero_at_Sc", d2P_ds2(X, Y, sc) / _d2P_scale(X, Y, sc), 1e-12)
    stat = dP_ds(X, Y, sc) * 2.0 * np.sin(sc) ** 2 + Q_of(X, Y, np.cos(sc))
    record("dP_at_Sc", stat / (1.0 + np.abs(Q_of(X, Y, np.cos(sc)))), 1e-12)
    return out


MINOR_BAND = (0.2, 5.0)
FULL_BAND = (0.05, 20.0)


def hessian_band_check(n: int = 100, seed: int = 0, mu: float = 2.0 ** -4,
                       mu_tildes: Sequence[float] = (2.0 ** -6, 2.0 ** -8), l_scale: float = 2.0 ** -7,
                       minor_band: Tuple[float, float] = MINOR_BAND,
                       full_band: Tuple[float, float] = FULL_BAND) -> dict:
    """Band checks on the mixed-Hessian determinants over perturbed aligned pairs.

    ``det_minor`` is checked at the thinnest ``mu_tilde``; ``det_full / (mu_tilde / mu)``
    at every ``mu_tilde``.  Pairs come from :func:`perturbed_aligned_pairs`
    with a generator seeded once by ``seed``.

    Returns
    -------
    dict
        Pinned values at the aligned pair (``s = 1/2``), sampled ranges per
        ``mu_tilde`` and a ``passed`` flag.
    """
    if n < 1:
        raise InputError(f"sample count must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    thinnest = min(mu_tildes)
    out = {"mu": mu, "l_scale": l_scale, "minor_band": list(minor_band), "full_band": list(full_band),
           "samples": n, "by_mu_tilde": []}
    ok = True
    for mt in mu_tildes:
        ratio = mt / mu
        x0, y0 = aligned_pair(mu, mt)
        f0, m0 = mixed_hessian_dets(x0, y0, l_scale)
        full, minor = [], []
        for x, y, s in perturbed_aligned_pairs(mu, mt, n, rng):
            f, m = mixed_hessian_dets(x, y, l_scale, s)
            full.append(f / ratio)
            minor.append(m)
        full_ok = full_band[0] <= min(full) and max(full) <= full_band[1] and full_band[0] <= f0 / ratio <= full_band[1]
        entry = {"mu_tilde": mt, "pinned_full_over_ratio": f0 / ratio, "pinned_minor": m0,
                 "full_over_ratio_range": [min(full), max(full)], "minor_range": [min(minor), max(minor)],
                 "full_passed": bool(full_ok)}
        ok &= full_ok
        if mt == thinnest:
            minor_ok = minor_band[0] <= min(minor) and max(minor) <= minor_band[1] and minor_band[0] <= m0 <= minor_band[1]
            entry["minor_passed"] = bool(minor_ok)
            ok &= minor_ok
        out["by_mu_tilde"].append(entry)
    out["passed"] = bool(ok)
    return out
