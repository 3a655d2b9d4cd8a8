"""Kernel of the spectral projection from Mehler's formula and from the eigenbasis.

Oscillatory-integral route
--------------------------
``Pi_lam(x, y) = (1/2pi) int_{-pi}^{pi} a(t) exp(i phi_lam(x, y, t)) dt`` is split
with a smooth dyadic partition of unity in ``t`` away from the singular times
``0`` and ``+-pi``.  Each piece is integrated with Gauss-Legendre panels whose
breakpoints are spread evenly in accumulated phase, so the panel count follows
the local oscillation.  Pieces whose phase is non-stationary and oscillates
many times across the support are skipped: their contribution is below
``1e-12`` of the piece's mass.

Levels finer than ``j_max`` are not summed one by one.  Their total is a
one-sided integral near each singular time which, after expanding ``sin``,
``cot`` and ``csc`` to second order, reduces to upper incomplete gamma
functions (evaluated with mpmath) plus one smooth ramp that is integrated
numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

import mpmath
import numpy as np

from .basis import eigen_level, eval_level
from .errors import AccuracyError, InputError, SingularityError

KAPPAS = ("0", "+", "-", "+pi", "-pi")
J_MIN = 4

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
# phase change (radians) budgeted per Gauss-Legendre panel
_PHASE_PER_PANEL = 4.0
# min|phi'| * (support length / 0.75) beyond which a non-stationary piece is dropped
_NEGLIGIBLE_XI = 1500.0
_COARSE = 257
_CHUNK_NODES = 1 << 21


# --------------------------------------------------------------------------
# cutoffs


def _exp_bump(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(u):
    """C-infinity step: 0 for ``u <= 0``, 1 for ``u >= 1``."""
    a = _exp_bump(u)
    b = _exp_bump(1.0 - np.asarray(u, dtype=float))
    return a / (a + b)


def phi0(t):
    """Smooth cutoff equal to 1 on ``t <= 1/2`` and 0 on ``t >= 1``."""
    return smooth_step(2.0 - 2.0 * np.asarray(t, dtype=float))


def psi(t):
    """Bump on ``[1/4, 1]`` with ``sum_j psi(2^j t) = 1`` for ``t > 0``.

    ``psi(t) = phi0(t) - phi0(2t)`` so dyadic sums telescope.
    """
    t = np.asarray(t, dtype=float)
    return phi0(t) - phi0(2.0 * t)


@dataclass(frozen=True)
class CutoffBank:
    """The dyadic family ``psi_j^kappa`` together with ``psi^0``.

    Partial sums telescope: ``sum_{j=4}^{J} psi(2^j t) = phi0(16 t) - phi0(2^{J+1} t)``.
    """

    j_max: int = 14
    j_min: int = J_MIN

    def __post_init__(self):
        if self.j_max < self.j_min:
            raise InputError(f"j_max={self.j_max} must be >= {self.j_min}")

    def piece(self, kappa: str, j: int, t):
        t = np.asarray(t, dtype=float)
        _check_piece(kappa, j)
        if kappa == "0":
            return self.psi_zero(t)
        s = 2.0 ** j
        if kappa == "+":
            return psi(s * t)
        if kappa == "-":
            return psi(-s * t)
        if kappa == "+pi":
            return psi(s * (math.pi - t))
        return psi(s * (math.pi + t))

    @staticmethod
    def psi_zero(t):
        a = np.abs(np.asarray(t, dtype=float))
        out = 1.0 - phi0(16.0 * a) - phi0(16.0 * (math.pi - a))
        return np.where((a > 0) & (a < math.pi), out, 0.0)

    def support(self, kappa: str, j: int) -> List[Tuple[float, float]]:
        _check_piece(kappa, j)
        if kappa == "0":
            lo, hi = 1.0 / 32.0, math.pi - 1.0 / 32.0
            return [(-hi, -lo), (lo, hi)]
        lo, hi = 2.0 ** (-j) / 4.0, 2.0 ** (-j)
        return [{
            "+": (lo, hi),
            "-": (-hi, -lo),
            "+pi": (math.pi - hi, math.pi - lo),
            "-pi": (-math.pi + lo, -math.pi + hi),
        }[kappa]]

    def pieces(self):
        yield "0", self.j_min
        for kappa in KAPPAS[1:]:
            for j in range(self.j_min, self.j_max + 1):
                yield kappa, j

    def partition_sum(self, t):
        """Sum of all pieces with ``j <= j_max``."""
        t = np.asarray(t, dtype=float)
        total = self.psi_zero(t)
        for kappa, j in self.pieces():
            if kappa != "0":
                total = total + self.piece(kappa, j, t)
        return total

    def covered(self, t):
        """Mask of times where the truncated family already sums to one."""
        a = np.abs(np.asarray(t, dtype=float))
        edge = 2.0 ** (-self.j_max - 1)
        return (a >= edge) & (math.pi - a >= edge)


def _check_piece(kappa, j):
    if kappa not in KAPPAS:
        raise InputError(f"kappa must be one of {KAPPAS}, got {kappa!r}")
    if kappa == "0" and j != J_MIN:
        raise InputError("psi^0 only exists at j = 4")
    if j < J_MIN:
        raise InputError(f"dyadic level must be >= {J_MIN}, got {j}")


@dataclass(frozen=True)
class OscIntegralSpec:
    """Accuracy controls for the oscillatory-integral route.

    Attributes
    ----------
    panels : int
        Minimum number of Gauss-Legendre panels per dyadic piece.
    tolerance : float
        Relative quadrature tolerance, measured against ``int |integrand|``.
    j_max : int
        Finest dyadic level summed explicitly.
    tail : bool
        Close the levels beyond ``j_max`` with the asymptotic tail integral.
    max_panels : int
        Cap on panel doubling before an AccuracyError is raised.
    """

    panels: int = 32
    tolerance: float = 1e-9
    j_max: int = 14
    tail: bool = True
    max_panels: int = 1 << 16

    def __post_init__(self):
        if self.panels < 8:
            raise InputError(f"panels must be >= 8, got {self.panels}")
        if not 0.0 < self.tolerance < 1.0:
            raise InputError(f"tolerance must lie in (0, 1), got {self.tolerance}")
        if self.j_max < J_MIN:
            raise InputError(f"j_max must be >= {J_MIN}, got {self.j_max}")


# --------------------------------------------------------------------------
# phase and amplitude


def _sin_or_raise(t):
    t = np.asarray(t, dtype=float)
    s = np.sin(t)
    bad = (t == 0.0) | (np.abs(np.abs(t) - math.pi) < 1e-300) | (s == 0.0)
    if np.any(bad):
        raise SingularityError("sin t = 0: the Mehler kernel is singular at t in {0, +-pi}")
    return s


def mehler_phase(lam, x, y, t):
    """``lam t/2 + (|x|^2+|y|^2)/2 cot t - <x,y> csc t``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise InputError(f"x and y must have the same shape, got {x.shape} and {y.shape}")
    s = _sin_or_raise(t)
    t = np.asarray(t, dtype=float)
    s2 = float(x @ x + y @ y)
    xy = float(x @ y)
    return lam * t / 2.0 + (0.5 * s2 * np.cos(t) - xy) / s


def amplitude(t, d: int):
    """``(2 pi i sin t)^{-d/2} exp(i pi d/4)`` on the principal branch.

    This is the amplitude as written in the literature; the propagator itself
    carries ``(2 pi i sin t)^{-d/2}`` only, and the kernel routines below use
    that normalisation so the projection kernel comes out real.
    """
    s = _sin_or_raise(t)
    return (2j * math.pi * s) ** (-d / 2.0) * np.exp(1j * math.pi * d / 4.0)


def propagator_amplitude(t, d: int):
    """``(2 pi i sin t)^{-d/2}``, principal branch."""
    s = _sin_or_raise(t)
    return (2j * math.pi * s) ** (-d / 2.0)


def _phase(lam, s2, xy, t):
    return lam * t / 2.0 + (0.5 * s2 * np.cos(t) - xy) / np.sin(t)


def _dphase(lam, s2, xy, t):
    s = np.sin(t)
    return lam / 2.0 - (0.5 * s2 - xy * np.cos(t)) / (s * s)


# --------------------------------------------------------------------------
# panel quadrature


@dataclass
class _PieceResult:
    value: np.ndarray
    error: np.ndarray
    skipped: np.ndarray


def _integrate_interval(lam, d, s2, xy, a, b, weight: Callable, spec: OscIntegralSpec,
                        phase_sign=1.0, width=None):
    """Integrate ``weight(t) a(t) exp(i phi)`` over ``[a, b]`` for a batch of pairs.

    ``s2`` and ``xy`` are arrays of ``|x|^2 + |y|^2`` and ``<x, y>``.
    """
    P = s2.size
    u = 0.5 * (1.0 - np.cos(np.pi * np.linspace(0.0, 1.0, _COARSE)))
    tc = a + (b - a) * u
    ph = _phase(lam, s2[:, None], xy[:, None], tc[None, :])
    dph = _dphase(lam, s2[:, None], xy[:, None], tc[None, :])
    cum = np.concatenate([np.zeros((P, 1)), np.cumsum(np.abs(np.diff(ph, axis=1)), axis=1)], axis=1)
    variation = cum[:, -1]
    stationary = np.any(np.sign(dph[:, 1:]) != np.sign(dph[:, :-1]), axis=1)
    width = (b - a) if width is None else width
    xi = np.min(np.abs(dph), axis=1) * width / 0.75
    skip = (~stationary) & (xi >= _NEGLIGIBLE_XI)

    value = np.zeros(P, dtype=complex)
    error = np.zeros(P)
    todo = np.flatnonzero(~skip)
    if todo.size == 0:
        return _PieceResult(value, error, skip)

    need = np.maximum(spec.panels, np.ceil(variation[todo] / _PHASE_PER_PANEL)).astype(int)
    n_panels = 2 ** np.ceil(np.log2(need)).astype(int)
    while todo.size:
        retry = []
        for n in np.unique(n_panels):
            if n > spec.max_panels:
                idx = todo[n_panels == n]
                raise AccuracyError(
                    f"oscillatory quadrature needs more than {spec.max_panels} panels",
                    achieved=float(np.max(error[idx])) if idx.size else None,
                )
            grp = todo[n_panels == n]
            chunk = max(1, _CHUNK_NODES // (n * _GL_NODES.size))
            for start in range(0, grp.size, chunk):
                sel = grp[start:start + chunk]
                v, e, mass = _panel_rule(lam, d, s2[sel], xy[sel], cum[sel], variation[sel],
                                         u, a, b, n, weight, phase_sign)
                value[sel] = v
                error[sel] = e
                bad = e > spec.tolerance * np.maximum(mass, 1e-300)
                retry.extend((sel[bad]).tolist())
        if not retry:
            break
        retry = np.array(sorted(retry))
        n_old = dict(zip(todo.tolist(), n_panels.tolist()))
        todo = retry
        n_panels = np.array([2 * n_old[i] for i in retry])
    return _PieceResult(value, error, skip)


def _panel_rule(lam, d, s2, xy, cum, variation, u, a, b, n, weight, phase_sign):
    # breakpoints evenly spaced in 0.5 * (normalised accumulated phase) + 0.5 * u
    P = s2.size
    var = np.where(variation > 0, variation, 1.0)
    F = 0.5 * cum / var[:, None] + 0.5 * u[None, :]
    targets = np.linspace(0.0, 1.0, n + 1)
    ub = np.empty((P, n + 1))
    for i in range(P):
        ub[i] = np.interp(targets, F[i], u)
    tb = a + (b - a) * ub

    def rule(breaks):
        lo, hi = breaks[:, :-1], breaks[:, 1:]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        t = mid[:, :, None] + half[:, :, None] * _GL_NODES[None, None, :]
        w = half[:, :, None] * _GL_WEIGHTS[None, None, :]
        g = weight(t) * propagator_amplitude_unchecked(t, d) * np.exp(
            1j * phase_sign * _phase(lam, s2[:, None, None], xy[:, None, None], t))
        return np.sum(g * w, axis=(1, 2)), np.sum(np.abs(g) * w, axis=(1, 2))

    fine, mass = rule(tb)
    coarse, _ = rule(tb[:, ::2])
    return fine, np.abs(fine - coarse), mass


def propagator_amplitude_unchecked(t, d):
    return (2j * math.pi * np.sin(t)) ** (-d / 2.0)


# --------------------------------------------------------------------------
# pieces and the assembled kernel


def _pair_invariants(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 1:
        x, y = x[None, :], y[None, :]
    if x.shape != y.shape:
        raise InputError(f"x and y must have matching shapes, got {x.shape} and {y.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InputError("kernel arguments must be finite")
    return x.shape[1], np.sum(x * x, axis=1) + np.sum(y * y, axis=1), np.sum(x * y, axis=1)


def _piece_batch(lam, d, s2, xy, kappa, j, spec: OscIntegralSpec, bank: CutoffBank):
    total = np.zeros(s2.size, dtype=complex)
    err = np.zeros(s2.size)
    for a, b in bank.support(kappa, j):
        width = 2.0 ** (-j) * 0.75 if kappa != "0" else 1.0 / 32.0
        res = _integrate_interval(lam, d, s2, xy, a, b,
                                  lambda t, k=kappa, jj=j: bank.piece(k, jj, t), spec, width=width)
        total += res.value
        err += res.error
    return total / (2.0 * math.pi), err / (2.0 * math.pi)


def kernel_piece(lam, j: int, kappa: str, x, y, spec: OscIntegralSpec = OscIntegralSpec()) -> complex:
    """``(1/2pi) int psi_j^kappa(t) a(t) exp(i phi_lam(x, y, t)) dt`` for one pair.

    Raises
    ------
    AccuracyError
        If the panel quadrature cannot meet ``spec.tolerance``.
    """
    _check_piece(kappa, j)
    d, s2, xy = _pair_invariants(x, y)
    val, _ = _piece_batch(float(lam), d, s2, xy, kappa, j, spec, CutoffBank(max(spec.j_max, j)))
    return complex(val[0])


@dataclass
class MehlerResult:
    """Kernel values from the oscillatory route plus diagnostics."""

    values: np.ndarray
    quad_error: np.ndarray
    tail: np.ndarray
    imag_residual: float = field(init=False)

    def __post_init__(self):
        self.imag_residual = float(np.max(np.abs(self.values.imag))) if self.values.size else 0.0


def kernel_mehler_batch(lam, X, Y, spec: OscIntegralSpec = OscIntegralSpec()) -> MehlerResult:
    """Oscillatory-route kernel at the pairs ``(X[i], Y[i])``."""
    d, s2, xy = _pair_invariants(X, Y)
    lam = float(lam)
    bank = CutoffBank(spec.j_max)
    total = np.zeros(s2.size, dtype=complex)
    err = np.zeros(s2.size)
    for kappa, j in bank.pieces():
        v, e = _piece_batch(lam, d, s2, xy, kappa, j, spec, bank)
        total += v
        err += e
    tail = np.zeros(s2.size)
    if spec.tail:
        tail = tail_closure(lam, d, s2, xy, spec.j_max, spec)
        total = total + tail
    return MehlerResult(values=total, quad_error=err, tail=tail)


def kernel_mehler(lam, x, y, spec: OscIntegralSpec = OscIntegralSpec()) -> complex:
    """Projection kernel ``Pi_lam(x, y)`` by the oscillatory-integral route.

    The sum runs over every piece with ``j <= spec.j_max``; with ``spec.tail``
    set, the finer levels are added through :func:`tail_closure`.  The result
    is complex; its imaginary part measures the quadrature error.
    """
    return complex(kernel_mehler_batch(lam, np.atleast_1d(x), np.atleast_1d(y), spec).values[0])


# --------------------------------------------------------------------------
# levels finer than j_max


def _upper_integral(s, A, V):
    """``int_V^inf v^{s-1} exp(i A v) dv`` (oscillatory for A != 0)."""
    if A == 0.0:
        if s >= 0:
            raise AccuracyError("non-oscillatory tail diverges for s >= 0")
        return complex(-(V ** s) / s)
    z = mpmath.mpc(0, -A)
    return complex(z ** (-s) * mpmath.gammainc(s, z * V))


def _core_tail(d, A, beta, V, sign):
    """``int_0^{1/V} (2 pi i u)^{-d/2} (1 + d u^2/12) exp(i sign (A/u + beta u)) du``."""
    # exp(i sign beta u) (1 + d u^2 / 12) = 1 + i sign beta u + (d/12 - beta^2/2) u^2 + O(u^3)
    coeffs = (1.0, 1j * sign * beta, d / 12.0 - 0.5 * beta * beta)
    total = 0j
    A_eff = sign * A
    if abs(A) * V < 1e-12 and d >= 2:
        A_eff = sign * 1e-12 / V
    for m, c in enumerate(coeffs):
        s = d / 2.0 - m - 1.0
        total += c * _upper_integral(s, A_eff, V)
    return (2j * math.pi) ** (-d / 2.0) * total


def tail_closure(lam, d, s2, xy, j_max, spec: OscIntegralSpec = OscIntegralSpec()):
    """Contribution of all dyadic levels ``j > j_max`` (near 0 and near +-pi).

    Near ``t = 0`` the two one-sided remainders are complex conjugates, so
    their sum is ``2 Re`` of one of them; near ``+-pi`` the reflection
    ``phi_lam(x, y, pi - u) = lam pi/2 - phi_lam(x, -y, u)`` reduces the
    integral to the same form with ``y -> -y``.
    """
    s2 = np.atleast_1d(np.asarray(s2, dtype=float))
    xy = np.atleast_1d(np.asarray(xy, dtype=float))
    lam = float(lam)
    t1 = 2.0 ** (-j_max - 2)
    V = 1.0 / t1
    ramp = lambda t: phi0(2.0 ** (j_max + 1) * np.abs(t)) * (np.abs(t) >= t1)
    out = np.zeros(s2.size)
    for side in (0, 1):
        if side == 0:
            A = 0.5 * (s2 - 2.0 * xy)
            beta = lam / 2.0 - s2 / 6.0 - xy / 6.0
            xy_side, sign, rot = xy, 1.0, 1.0
        else:
            A = 0.5 * (s2 + 2.0 * xy)
            beta = lam / 2.0 - s2 / 6.0 + xy / 6.0
            xy_side, sign, rot = -xy, -1.0, np.exp(1j * math.pi * lam / 2.0)
        live = np.flatnonzero(A * V / 2.0 < _NEGLIGIBLE_XI)
        if live.size == 0:
            continue
        # numeric ramp on [t1, 2 t1]; phase_sign flips exp(i phi) to exp(-i phi) for the pi side
        res = _integrate_interval(lam, d, s2[live], xy_side[live], t1, 2.0 * t1, ramp, spec,
                                  phase_sign=sign)
        for n, i in enumerate(live):
            core = _core_tail(d, float(A[i]), float(beta[i]), V, sign)
            # the ramp integrand used exp(i sign phi_lam(x, +-y, u)), phi containing lam u / 2
            piece = res.value[n] + core
            out[i] += float(np.real(rot * piece)) / math.pi
    return out


# --------------------------------------------------------------------------
# direct route and rescaling


def kernel_direct(lam, x, y) -> float:
    """``sum_alpha Phi_alpha(x) Phi_alpha(y)`` over the eigenspace of ``lam``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return float(kernel_direct_batch(lam, x[None, :], y[None, :])[0])


def kernel_direct_batch(lam, X, Y) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim == 1:
        X, Y = X[:, None], Y[:, None]
    if X.shape != Y.shape:
        raise InputError(f"X and Y must have matching shapes, got {X.shape} and {Y.shape}")
    d = X.shape[1]
    eigen_level(d, lam)
    bx = eval_level(d, lam, X)
    by = eval_level(d, lam, Y)
    # fixed left-to-right order over enumerate_level
    out = np.zeros(X.shape[0])
    for m in range(bx.shape[1]):
        out += bx[:, m] * by[:, m]
    return out


def kernel_rescaled(lam, x, y, route: str = "direct", spec: OscIntegralSpec = OscIntegralSpec()):
    """Rescaled kernel ``P_lam(x, y) = Pi_lam(sqrt(lam) x, sqrt(lam) y)``."""
    r = math.sqrt(float(lam))
    x = np.atleast_1d(np.asarray(x, dtype=float)) * r
    y = np.atleast_1d(np.asarray(y, dtype=float)) * r
    if route == "direct":
        return kernel_direct(lam, x, y)
    if route == "mehler":
        return kernel_mehler(lam, x, y, spec)
    raise InputError(f"route must be 'direct' or 'mehler', got {route!r}")


def _support_rule(support, n_nodes):
    a, b = support if support is not None else (-math.pi, math.pi)
    if not -math.pi <= a < b <= math.pi:
        raise InputError(f"support must lie in [-pi, pi], got {support}")
    n_panels = max(1, n_nodes // _GL_NODES.size)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return t, w


def spectral_multiplier(lam, eta: Callable, lam_prime, n_nodes: int = 4096, support=None) -> np.ndarray:
    """Coefficients ``int eta(t) exp(i t (lam - lam')/2) dt`` for the given ``lam'``.

    ``Pi_lam[eta] = sum_{lam'} coeff(lam') Pi_{lam'}``.  ``eta`` must vanish
    outside ``support`` (default ``[-pi, pi]``); the integral uses composite
    Gauss-Legendre panels over it.
    """
    lam_prime = np.atleast_1d(np.asarray(lam_prime, dtype=float))
    t, w = _support_rule(support, n_nodes)
    e = np.asarray(eta(t), dtype=complex) * w
    return np.exp(0.5j * np.outer(float(lam) - lam_prime, t)) @ e


def eta_l1(eta: Callable, n_nodes: int = 4096, support=None) -> float:
    """``int |eta|`` over ``support`` (default ``[-pi, pi]``)."""
    t, w = _support_rule(support, n_nodes)
    return float(np.sum(np.abs(eta(t)) * w))
