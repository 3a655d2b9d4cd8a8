"""L2-normalised Hermite functions and the spectrum of ``H = -Laplacian + |x|^2``.

The one-dimensional factors are produced by the normalised three-term
recurrence

    h_{n+1}(x) = x sqrt(2/(n+1)) h_n(x) - sqrt(n/(n+1)) h_{n-1}(x),

seeded with ``h_0(x) = pi^{-1/4} exp(-x^2/2)``.  The Gaussian seed is carried
as a mantissa together with a separate base-2 exponent, so that degrees of a
few thousand can be evaluated deep in the classically forbidden region
without the seed underflowing to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import InputError, SpectrumError

MultiIndex = Tuple[int, ...]

PI_QUARTER = math.pi ** -0.25
_LN2 = math.log(2.0)
# rescale mantissas once they leave [2^-RESCALE, 2^RESCALE]
_RESCALE = 400


@dataclass(frozen=True)
class EigenLevel:
    """One eigenvalue of the Hermite operator in dimension ``d``."""

    d: int
    lam: int
    k: int
    dim: int


@dataclass(frozen=True)
class Basis1DEval:
    """Values ``h_0(x), ..., h_{n_max}(x)``.

    ``values[n]`` is the double-precision value.  ``mantissa[n] * 2**exponent[n]``
    represents the same number without underflow; use it when ``x`` lies far
    in the forbidden region.
    """

    n_max: int
    x: np.ndarray
    values: np.ndarray
    mantissa: np.ndarray
    exponent: np.ndarray


def degree(alpha: Sequence[int]) -> int:
    return int(sum(alpha))


def eigenvalue(alpha: Sequence[int]) -> int:
    """Eigenvalue ``2|alpha| + d`` of ``Phi_alpha``."""
    if any(a < 0 for a in alpha):
        raise InputError(f"multi-index entries must be nonnegative, got {tuple(alpha)}")
    return 2 * degree(alpha) + len(alpha)


def level_dimension(d: int, k: int) -> int:
    """Dimension ``C(k+d-1, d-1)`` of the eigenspace with ``|alpha| = k``."""
    if d < 1 or k < 0:
        raise InputError(f"need d >= 1 and k >= 0, got d={d}, k={k}")
    return math.comb(k + d - 1, d - 1)


def eigen_level(d: int, lam) -> EigenLevel:
    """Validate ``lam`` against the spectrum ``2*N_0 + d`` and describe the level."""
    if d < 1:
        raise InputError(f"dimension must be >= 1, got {d}")
    lam_f = float(lam)
    if not math.isfinite(lam_f) or lam_f != round(lam_f):
        raise SpectrumError(f"lambda={lam} is not an integer eigenvalue")
    lam_i = int(round(lam_f))
    if lam_i < d or (lam_i - d) % 2:
        raise SpectrumError(f"lambda={lam_i} is not in 2N_0 + {d}")
    k = (lam_i - d) // 2
    return EigenLevel(d=d, lam=lam_i, k=k, dim=level_dimension(d, k))


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=64)
def _level_indices(d: int, k: int) -> Tuple[MultiIndex, ...]:
    return tuple(_compositions(k, d))


def enumerate_level(d: int, lam) -> list:
    """All multi-indices with ``d + 2|alpha| = lam``, in lexicographic order."""
    level = eigen_level(d, lam)
    return list(_level_indices(d, level.k))


def level_index_array(d: int, lam) -> np.ndarray:
    """``enumerate_level`` as an integer array of shape ``(dim, d)``."""
    level = eigen_level(d, lam)
    return np.array(_level_indices(d, level.k), dtype=np.int64).reshape(level.dim, d)


def hermite_table(n_max: int, x) -> Tuple[np.ndarray, np.ndarray]:
    """Mantissas and base-2 exponents of ``h_0..h_{n_max}`` at the points ``x``.

    Returns
    -------
    mantissa : ndarray, shape (n_max + 1, *x.shape)
    exponent : ndarray of int64, same shape
    """
    if n_max < 0:
        raise InputError(f"n_max must be >= 0, got {n_max}")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InputError("hermite evaluation needs finite x")
    shape = x.shape
    xf = x.ravel()

    log2_seed = -xf * xf / (2.0 * _LN2)
    e = np.floor(log2_seed)
    cur = PI_QUARTER * np.exp2(log2_seed - e)
    exp_cur = e.astype(np.int64)
    prev = np.zeros_like(cur)

    mant = np.empty((n_max + 1, xf.size))
    expo = np.empty((n_max + 1, xf.size), dtype=np.int64)
    mant[0] = cur
    expo[0] = exp_cur
    big = 2.0 ** _RESCALE
    for n in range(n_max):
        nxt = xf * math.sqrt(2.0 / (n + 1)) * cur - math.sqrt(n / (n + 1.0)) * prev
        prev, cur = cur, nxt
        over = np.abs(cur) > big
        if over.any():
            cur[over] *= 2.0 ** -_RESCALE
            prev[over] *= 2.0 ** -_RESCALE
            exp_cur = exp_cur + np.where(over, _RESCALE, 0)
        mant[n + 1] = cur
        expo[n + 1] = exp_cur
    return mant.reshape((n_max + 1,) + shape), expo.reshape((n_max + 1,) + shape)


def _combine(mant, expo):
    # exponents below the float range flush to zero, as intended
    with np.errstate(under="ignore", over="ignore"):
        clipped = np.clip(expo, -2000, 2000)
        return np.ldexp(mant, clipped.astype(np.int32))


def hermite_eval_1d(n_max: int, x) -> Basis1DEval:
    """Evaluate the normalised Hermite functions of degree ``0..n_max`` at ``x``.

    Parameters
    ----------
    n_max : int
        Highest degree, ``n_max >= 0``.
    x : float or array_like
        Evaluation point(s); must be finite.

    Returns
    -------
    Basis1DEval
        ``values`` has shape ``(n_max + 1,) + shape(x)``.
    """
    mant, expo = hermite_table(n_max, x)
    return Basis1DEval(
        n_max=n_max,
        x=np.asarray(x, dtype=float),
        values=_combine(mant, expo),
        mantissa=mant,
        exponent=expo,
    )


def hermite_values(n_max: int, x) -> np.ndarray:
    """Shortcut for ``hermite_eval_1d(n_max, x).values``."""
    mant, expo = hermite_table(n_max, x)
    return _combine(mant, expo)


def phi_eval(alpha: Sequence[int], x) -> float:
    """``Phi_alpha(x) = prod_i h_{alpha_i}(x_i)`` at a single point ``x``."""
    alpha = tuple(int(a) for a in alpha)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.size != len(alpha):
        raise InputError(f"multi-index of length {len(alpha)} needs a point in R^{len(alpha)}, got shape {x.shape}")
    if any(a < 0 for a in alpha):
        raise InputError(f"multi-index entries must be nonnegative, got {alpha}")
    out = 1.0
    for a, xi in zip(alpha, x):
        out *= float(hermite_values(a, xi)[a])
    return out


def eval_level(d: int, lam, points) -> np.ndarray:
    """Matrix ``B[i, m] = Phi_{alpha_m}(points[i])`` over the whole eigenspace.

    The columns follow ``enumerate_level`` order.
    """
    level = eigen_level(d, lam)
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None] if d == 1 else pts[None, :]
    if pts.shape[-1] != d:
        raise InputError(f"points must have trailing dimension {d}, got {pts.shape}")
    idx = level_index_array(d, level.lam)
    out = np.ones((pts.shape[0], level.dim))
    for i in range(d):
        tab = hermite_values(level.k, pts[:, i])  # (k+1, N)
        out *= tab[idx[:, i]].T
    return out


def gauss_hermite_nodes(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ``int f(x) exp(-x^2) dx`` (Golub-Welsch).

    Exact for polynomials of degree ``<= 2n - 1``.  Nodes are eigenvalues of
    the Jacobi matrix, polished by one Newton step on ``h_n``.  Weights use
    the Christoffel form ``exp(-x^2) / (n h_{n-1}(x)^2)`` because the first
    eigenvector components lose relative accuracy at the outer nodes.
    """
    if n < 1:
        raise InputError(f"node count must be >= 1, got {n}")
    if n == 1:
        return np.zeros(1), np.array([math.sqrt(math.pi)])
    off = np.sqrt(np.arange(1, n) / 2.0)
    nodes = eigh_tridiagonal(np.zeros(n), off, eigvals_only=True)
    # symmetrise: the rule is exactly symmetric in exact arithmetic
    nodes = 0.5 * (nodes - nodes[::-1])
    h = hermite_values(n, nodes)
    # h_n' = sqrt(2n) h_{n-1} - x h_n, and h_n = 0 at a node
    nodes = nodes - h[n] / (math.sqrt(2.0 * n) * h[n - 1] - nodes * h[n])
    nodes = 0.5 * (nodes - nodes[::-1])
    h_prev = hermite_values(n - 1, nodes)[n - 1]
    with np.errstate(under="ignore"):
        weights = np.exp(-nodes * nodes) / (n * h_prev * h_prev)
    weights = 0.5 * (weights + weights[::-1])
    return nodes, weights


def all_levels(d: int, k_max: int):
    """Iterate multi-indices of all degrees ``0..k_max`` (grouped by degree)."""
    for k in range(k_max + 1):
        yield from _level_indices(d, k)


def sup_norm_1d(k: int, zooms: int = 3) -> Tuple[float, float]:
    """``max_x |h_k(x)|`` and its location.

    The global maximum of ``|h_k|`` sits at the last extremum before the turning
    point ``sqrt(2k+1)``.  A coarse scan of the outer oscillatory region brackets
    it, a few zoom passes narrow the bracket, and a parabola through the best
    three samples gives the final value.
    """
    if k < 0:
        raise InputError(f"degree must be >= 0, got {k}")
    if k == 0:
        return PI_QUARTER, 0.0
    turn = math.sqrt(2 * k + 1)
    airy = (2 * k + 1) ** (-1.0 / 6.0)
    a, b = max(0.0, turn - 12.0 * airy - 2.0), turn + 2.0 * airy
    for _ in range(zooms + 1):
        xs = np.linspace(a, b, 401)
        vals = np.abs(hermite_values(k, xs)[k])
        i = int(np.clip(np.argmax(vals), 1, xs.size - 2))
        a, b = xs[i - 1], xs[i + 1]
    y0, y1, y2 = vals[i - 1], vals[i], vals[i + 1]
    h = xs[1] - xs[0]
    denom = y0 - 2.0 * y1 + y2
    shift = 0.5 * (y0 - y2) / denom if denom < 0 else 0.0
    peak = y1 - 0.25 * (y0 - y2) * shift
    return float(peak), float(xs[i] + shift * h)
