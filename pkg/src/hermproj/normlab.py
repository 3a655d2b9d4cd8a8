"""Discretised localized projections and their L^p -> L^q norms.

Operators are built at unit scale from the L^2-normalised functions

    Psi_alpha(x) = lam^{d/4} Phi_alpha(sqrt(lam) x),      d + 2|alpha| = lam,

so the projection onto their span is unitarily equivalent to ``Pi_lam``.  The
rescaled operator with kernel ``Pi_lam(sqrt(lam) x, sqrt(lam) y)`` is
``lam^{-d/2}`` times that projection.  Norms transform as

    ||Pi_lam||_{p->q} = lam^{-(d/2)(1/p - 1/q - 1)} ||rescaled||_{p->q}.

Only the factors ``B[i, alpha] = Psi_alpha(x_i)`` are stored; for Cartesian
tensor grids they are applied axis by axis and never formed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import stats
from scipy.linalg import eigh

from .basis import eigen_level, hermite_values, level_index_array, sup_norm_1d
from .errors import (AccuracyError, DegenerateInputError, InputError, RegimeError)
from .localization import (DEFAULT_BUDGET, DEFAULT_RESOLUTION, AnnulusSpec, Grid,
                           build_annulus_grid, build_tensor_grid)

NORMALIZATIONS = ("projection", "rescaled")


# --------------------------------------------------------------------------
# grid functions


@dataclass
class GridFunction:
    """Samples on a grid; ``norm(p) = (sum_i w_i |f_i|^p)^(1/p)``."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.grid.size,):
            raise InputError(f"grid function has {self.values.shape} values for a grid of {self.grid.size}")

    def norm(self, p: float) -> float:
        return weighted_norm(self.values, self.grid.weights, p)


def weighted_norm(values, weights, p: float) -> float:
    a = np.abs(values)
    if math.isinf(p):
        return float(np.max(a[weights > 0])) if np.any(weights > 0) else 0.0
    return float(np.sum(weights * a ** p) ** (1.0 / p))


def conjugate(p: float) -> float:
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _dual_values(values, weights, q: float):
    nrm = weighted_norm(values, weights, q)
    if nrm == 0.0 or not math.isfinite(nrm):
        raise DegenerateInputError("the norming element of a zero function is undefined")
    a = np.abs(values)
    if q == 2.0:
        return values / nrm
    with np.errstate(divide="ignore", invalid="ignore"):
        phase = np.where(a > 0, values / np.where(a > 0, a, 1.0), 0.0)
    return phase * (a / nrm) ** (q - 1.0)


def dual_q(g: GridFunction, q: float) -> GridFunction:
    """Norming element of ``g`` in ``L^q``.

    Returns ``u = |g|^{q-1} sgn(g) / ||g||_q^{q-1}``, so that
    ``sum_i w_i u_i g_i = ||g||_q`` and ``||u||_{q'} = 1``.

    Raises
    ------
    DegenerateInputError
        If ``g`` vanishes on the grid.
    """
    if not 1.0 < q < math.inf:
        raise InputError(f"q must lie in (1, inf), got {q}")
    return GridFunction(_dual_values(g.values, g.grid.weights, q), g.grid)


# --------------------------------------------------------------------------
# factors


class DenseFactor:
    """Stored matrix ``B`` of shape ``(points, rank)``."""

    def __init__(self, B: np.ndarray):
        self.B = np.ascontiguousarray(B)
        self.shape = B.shape

    def matvec(self, c):
        return self.B @ c

    def rmatvec(self, v):
        return self.B.T @ v

    def gram(self, weights) -> np.ndarray:
        return self.B.T @ (weights[:, None] * self.B)


class TensorFactor:
    """``B[i, alpha] = prod_axis T_axis[i_axis, alpha_axis]`` on a Cartesian grid.

    ``tables[a]`` has shape ``(n_a, k + 1)``; ``index`` lists the multi-indices
    (the columns of ``B``).
    """

    def __init__(self, tables: Sequence[np.ndarray], index: np.ndarray):
        self.tables = [np.ascontiguousarray(t) for t in tables]
        self.index = np.asarray(index)
        self.d = len(self.tables)
        self.k1 = self.tables[0].shape[1]
        self.dims = tuple(t.shape[0] for t in self.tables)
        self.shape = (int(np.prod(self.dims)), self.index.shape[0])
        self._flat = np.ravel_multi_index(self.index.T, (self.k1,) * self.d)

    def matvec(self, c):
        C = np.zeros(self.k1 ** self.d)
        C[self._flat] = c
        Y = C.reshape((self.k1,) * self.d)
        # contract the last coefficient axis first; the result axes rotate to the front
        for T in reversed(self.tables):
            Y = np.tensordot(T, Y, axes=([1], [self.d - 1]))
        return Y.reshape(-1)

    def rmatvec(self, v):
        Y = np.asarray(v, dtype=float).reshape(self.dims)
        for T in reversed(self.tables):
            Y = np.tensordot(T, Y, axes=([0], [self.d - 1]))
        return Y.reshape(-1)[self._flat]

    def gram(self, weights) -> np.ndarray:
        """Exact Gram for separable weights, else a chunked accumulation."""
        sep = _separable_weights(np.asarray(weights).reshape(self.dims))
        if sep is not None:
            G = np.ones((self.index.shape[0], self.index.shape[0]))
            for a, (T, wa) in enumerate(zip(self.tables, sep)):
                Ga = T.T @ (wa[:, None] * T)
                G *= Ga[np.ix_(self.index[:, a], self.index[:, a])]
            return G
        return self._gram_chunked(np.asarray(weights).ravel())

    def _gram_chunked(self, weights):
        r = self.index.shape[0]
        G = np.zeros((r, r))
        n0 = self.dims[0]
        rest = int(np.prod(self.dims[1:]))
        tail = None
        if self.d > 1:
            mesh = np.meshgrid(*[np.arange(n) for n in self.dims[1:]], indexing="ij")
            tail_idx = [m.ravel() for m in mesh]
            tail = np.ones((rest, r))
            for a, ii in enumerate(tail_idx, start=1):
                tail *= self.tables[a][ii][:, self.index[:, a]]
        for i0 in range(n0):
            wrow = weights[i0 * rest:(i0 + 1) * rest]
            sel = wrow > 0
            if not np.any(sel):
                continue
            B = self.tables[0][i0, self.index[:, 0]][None, :]
            if tail is not None:
                B = tail[sel] * B
            G += B.T @ (wrow[sel][:, None] * B)
        return G


def _separable_weights(w: np.ndarray):
    """Split a weight tensor into per-axis vectors if it is an outer product."""
    if np.any(w < 0):
        return None
    d = w.ndim
    flat = w.ravel()
    if flat.size == 0 or np.all(flat == 0):
        return None
    vals = np.unique(flat)
    if vals.size == 1:
        c = vals[0] ** (1.0 / d)
        return [np.full(n, c) for n in w.shape]
    return None


def level_factor(d: int, lam, grid: Grid):
    """Factor ``B[i, alpha] = Psi_alpha(x_i)`` of the level on ``grid``."""
    level = eigen_level(d, lam)
    idx = level_index_array(d, level.lam)
    s = math.sqrt(level.lam)
    amp = level.lam ** 0.25
    if grid.is_tensor:
        tables = [amp * hermite_values(level.k, s * ax).T for ax in grid.axes]
        return TensorFactor(tables, idx)
    pts = grid.points
    B = np.ones((pts.shape[0], level.dim))
    for i in range(d):
        tab = amp * hermite_values(level.k, s * pts[:, i])
        B *= tab[idx[:, i]].T
    return DenseFactor(B)


# --------------------------------------------------------------------------
# operators


@dataclass
class LowRankOperator:
    """``T f = coef * B_out (B_in^T (w_in * f))`` between two grids.

    With ``coef = 1`` this is the localized orthogonal projection; with
    ``coef = lam^{-d/2}`` the rescaled operator.
    """

    lam: int
    d: int
    out_grid: Grid
    in_grid: Grid
    out_factor: object
    in_factor: object
    coef: float = 1.0
    normalization: str = "projection"
    _gram_in: Optional[np.ndarray] = field(default=None, repr=False)
    _gram_out: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def rank(self) -> int:
        return self.in_factor.shape[1]

    @property
    def shape(self):
        return (self.out_grid.size, self.in_grid.size)

    def coefficients(self, f):
        """``coef * B_in^T (w_in * f)``."""
        return self.coef * self.in_factor.rmatvec(self.in_grid.weights * f)

    def apply(self, f):
        f = f.values if isinstance(f, GridFunction) else np.asarray(f)
        return self.out_factor.matvec(self.coefficients(f))

    def adjoint(self, u):
        """Adjoint for the weighted pairings on both grids."""
        u = u.values if isinstance(u, GridFunction) else np.asarray(u)
        return self.coef * self.in_factor.matvec(self.out_factor.rmatvec(self.out_grid.weights * u))

    def gram_in(self) -> np.ndarray:
        if self._gram_in is None:
            self._gram_in = self.in_factor.gram(self.in_grid.weights)
        return self._gram_in

    def gram_out(self) -> np.ndarray:
        if self._gram_out is None:
            if self.out_factor is self.in_factor and self.out_grid is self.in_grid:
                self._gram_out = self.gram_in()
            else:
                self._gram_out = self.out_factor.gram(self.out_grid.weights)
        return self._gram_out

    def singular_value_2(self) -> float:
        """Top singular value between the weighted L^2 spaces."""
        Gi = self.gram_in()
        Go = self.gram_out()
        root = _psd_sqrt(Gi)
        top = float(eigh(root @ Go @ root, eigvals_only=True)[-1])
        return abs(self.coef) * math.sqrt(max(top, 0.0))

    def idempotence_defect(self) -> float:
        """``||T^2 - T||_{2->2}`` for an operator from a grid to itself."""
        if self.out_grid is not self.in_grid:
            raise InputError("idempotence needs the same input and output grid")
        G = self.gram_in()
        c = self.coef
        root = _psd_sqrt(G)
        E = root @ (c * c * G - c * np.eye(G.shape[0])) @ root
        return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (E + E.T)))))


def _psd_sqrt(G):
    w, V = np.linalg.eigh(0.5 * (G + G.T))
    return (V * np.sqrt(np.maximum(w, 0.0))) @ V.T


def make_grid(spec: AnnulusSpec, d: int, lam, resolution: float = DEFAULT_RESOLUTION,
              budget: int = DEFAULT_BUDGET, tensor: bool = False) -> Grid:
    if tensor:
        return build_tensor_grid(spec, d, lam, resolution, budget)
    return build_annulus_grid(spec, d, lam, resolution, budget)


def assemble(lam, d: int, in_spec: AnnulusSpec, out_spec: AnnulusSpec = None,
             resolution: float = DEFAULT_RESOLUTION, budget: int = DEFAULT_BUDGET,
             normalization: str = "projection", tensor: bool = False) -> LowRankOperator:
    """Low-rank discretisation of ``chi_out Pi chi_in`` at unit scale.

    Parameters
    ----------
    in_spec, out_spec : AnnulusSpec
        Regions at unit scale; ``out_spec`` defaults to ``in_spec`` (and then the
        same grid object is used on both sides).
    normalization : {"projection", "rescaled"}
        ``projection`` gives the operator unitarily equivalent to ``Pi_lam``;
        ``rescaled`` multiplies by ``lam^{-d/2}``.
    tensor : bool
        Use a Cartesian grid applied axis by axis (balls only).
    """
    level = eigen_level(d, lam)
    if normalization not in NORMALIZATIONS:
        raise InputError(f"normalization must be one of {NORMALIZATIONS}")
    in_grid = make_grid(in_spec, d, level.lam, resolution, budget, tensor)
    in_factor = level_factor(d, level.lam, in_grid)
    if out_spec is None or out_spec == in_spec:
        out_grid, out_factor = in_grid, in_factor
    else:
        out_grid = make_grid(out_spec, d, level.lam, resolution, budget, tensor)
        if in_grid.size + out_grid.size > budget:
            raise_resource(in_grid.size + out_grid.size, budget)
        out_factor = level_factor(d, level.lam, out_grid)
    coef = 1.0 if normalization == "projection" else level.lam ** (-d / 2.0)
    return LowRankOperator(level.lam, d, out_grid, in_grid, out_factor, in_factor, coef, normalization)


def raise_resource(n, budget):
    from .errors import ResourceError

    raise ResourceError(f"grids need {n} points, over the budget of {budget}")


def rescale_factor(lam, d: int, p: float, q: float) -> float:
    """``||rescaled||_{p->q} / ||Pi_lam||_{p->q} = lam^{(d/2)(1/p - 1/q - 1)}``."""
    return float(lam) ** (0.5 * d * (1.0 / p - 1.0 / q - 1.0))


# --------------------------------------------------------------------------
# norm estimates


@dataclass
class NormEstimate:
    value: float
    p: float
    q: float
    iterations: int
    residual: float
    restarts_agreeing: int
    restarts: int = 1
    history: List[float] = field(default_factory=list, repr=False)

    def as_dict(self):
        out = asdict(self)
        out.pop("history")
        return out


def norm_2_2_gram(lam, d: int, spec: Optional[AnnulusSpec], resolution: float = DEFAULT_RESOLUTION,
                  budget: int = DEFAULT_BUDGET) -> NormEstimate:
    """``||chi_A Pi_lam||_{2->2}`` as the root of the top Gram eigenvalue.

    ``G[a, b] = int_A Phi_a Phi_b`` by quadrature on the region's grid; the
    eigenvalue comes from a dense symmetric solver.  ``spec=None`` means the
    whole space (a trapezoid grid over the level's effective support).
    """
    level = eigen_level(d, lam)
    if spec is None:
        grid = build_tensor_grid(AnnulusSpec("ball", radius=math.inf), d, level.lam, resolution, budget)
    else:
        grid = build_annulus_grid(spec, d, level.lam, resolution, budget)
    G = level_factor(d, level.lam, grid).gram(grid.weights)
    top = float(eigh(G, eigvals_only=True)[-1])
    return NormEstimate(value=math.sqrt(max(top, 0.0)), p=2.0, q=2.0, iterations=0, residual=0.0,
                        restarts_agreeing=1, restarts=1)


def norm_p_q_power(op: LowRankOperator, p: float, q: float, restarts: int = 8, tol: float = 1e-6,
                   seed: int = 0, max_iter: int = 500, starts: Optional[Sequence[np.ndarray]] = None
                   ) -> NormEstimate:
    """Mixed-norm power method for ``||T||_{p->q}``.

    From ``f`` the iteration forms ``g = T f``, ``u = dual_q(g)`` and
    ``f' = dual_{p'}(T* u)`` (unit ``L^p`` norm), stopping when the ratio
    ``||T f||_q / ||f||_p`` changes by less than ``tol`` (relative).  The ratio
    is non-decreasing along each run; a drop beyond rounding raises.  The
    result is the best value over all restarts, a lower bound for the norm of
    the discretised operator.

    For ``p = 2`` the iterate ``f'`` lies in the range of ``B_in`` and the loop
    runs on rank-sized coefficients using the input Gram matrix.

    Parameters
    ----------
    restarts : int
        Number of random starts; seeds derive from ``seed``.
    starts : sequence of ndarray, optional
        Extra starting functions on the input grid, run before the random ones.

    Raises
    ------
    AccuracyError
        If no run converges within ``max_iter`` iterations.
    """
    if not (1.0 < p <= 2.0 <= q < math.inf):
        raise InputError(f"need 1 < p <= 2 <= q < inf, got p={p}, q={q}")
    if tol <= 0:
        raise InputError("tol must be positive")
    if restarts < 1:
        raise InputError("restarts must be >= 1")
    child = np.random.SeedSequence(seed).spawn(restarts)
    inits = list(starts or [])
    for ss in child:
        rng = np.random.default_rng(ss)
        inits.append(rng.standard_normal(op.in_grid.size))

    best = None
    values = []
    converged_any = False
    for f0 in inits:
        if p == 2.0:
            val, it, res, hist, ok = _power_run_p2(op, q, f0, tol, max_iter)
        else:
            val, it, res, hist, ok = _power_run(op, p, q, f0, tol, max_iter)
        converged_any |= ok
        values.append(val)
        if best is None or val > best[0]:
            best = (val, it, res, hist)
    if not converged_any:
        raise AccuracyError(f"power method did not converge in {max_iter} iterations",
                            achieved=best[2], best=best[0])
    vmax = best[0]
    agree = sum(1 for v in values if abs(v - vmax) <= 2.0 * tol * vmax)
    return NormEstimate(value=vmax, p=p, q=q, iterations=best[1], residual=best[2],
                        restarts_agreeing=agree, restarts=len(values), history=best[3])


_MONOTONE_SLACK = 1e-10


def _check_monotone(hist):
    if len(hist) >= 2 and hist[-1] < hist[-2] * (1.0 - _MONOTONE_SLACK):
        raise AccuracyError(f"power iteration decreased: {hist[-2]!r} -> {hist[-1]!r}",
                            achieved=hist[-2] - hist[-1], best=max(hist))


def _power_run(op, p, q, f0, tol, max_iter):
    wi, wo = op.in_grid.weights, op.out_grid.weights
    f = _dual_values(f0, wi, conjugate(p)) if p != 2.0 else f0 / weighted_norm(f0, wi, 2.0)
    f = f / weighted_norm(f, wi, p)
    hist = []
    res = math.inf
    pp = conjugate(p)
    for it in range(1, max_iter + 1):
        g = op.apply(f)
        val = weighted_norm(g, wo, q)
        hist.append(val)
        _check_monotone(hist)
        if len(hist) >= 2:
            res = abs(hist[-1] - hist[-2]) / max(hist[-1], 1e-300)
            if res < tol:
                return val, it, res, hist, True
        u = _dual_values(g, wo, q)
        h = op.adjoint(u)
        f = _dual_values(h, wi, pp)
    return hist[-1], max_iter, res, hist, False


def _power_run_p2(op, q, f0, tol, max_iter):
    # iterates f = B_in c / ||B_in c||; T f = coef * B_out G c / sqrt(c^T G c)
    G = op.gram_in()
    wo = op.out_grid.weights
    c = op.coefficients(f0) / op.coef
    hist = []
    res = math.inf
    for it in range(1, max_iter + 1):
        nrm = math.sqrt(max(float(c @ G @ c), 0.0))
        if nrm == 0.0:
            raise DegenerateInputError("power iterate left the range of the operator")
        g = op.out_factor.matvec(op.coef * (G @ c) / nrm)
        val = weighted_norm(g, wo, q)
        hist.append(val)
        _check_monotone(hist)
        if len(hist) >= 2:
            res = abs(hist[-1] - hist[-2]) / max(hist[-1], 1e-300)
            if res < tol:
                return val, it, res, hist, True
        u = _dual_values(g, wo, q)
        c = op.out_factor.rmatvec(wo * u)
    return hist[-1], max_iter, res, hist, False


# --------------------------------------------------------------------------
# scaling fits


@dataclass
class ScalingFit:
    t: np.ndarray
    v: np.ndarray
    slope: float
    intercept: float
    stderr: float
    r_squared: float

    @property
    def residuals(self) -> np.ndarray:
        return np.log(self.v) - (self.intercept + self.slope * np.log(self.t))

    def as_dict(self):
        return {
            "t": [float(a) for a in self.t],
            "v": [float(a) for a in self.v],
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "r_squared": self.r_squared,
        }


def fit_exponent(t, v) -> ScalingFit:
    """Least squares of ``log v`` on ``log t``."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise InputError("t and v must be 1-D arrays of equal length")
    if t.size < 3:
        raise InputError(f"need at least 3 samples, got {t.size}")
    if np.any(t <= 0) or np.any(v <= 0):
        raise InputError("fit_exponent needs positive samples")
    lt, lv = np.log(t), np.log(v)
    if np.ptp(lt) == 0.0:
        raise InputError("all abscissas coincide")
    fit = stats.linregress(lt, lv)
    r2 = float(fit.rvalue ** 2) if np.ptp(lv) > 0 else 1.0
    return ScalingFit(t=t, v=v, slope=float(fit.slope), intercept=float(fit.intercept),
                      stderr=float(fit.stderr), r_squared=r2)


def q_endpoint(d: int) -> float:
    """``2(d+3)/(d+1)``."""
    return 2.0 * (d + 3) / (d + 1)


def endpoint_exponent(d: int) -> float:
    """Predicted ``lam``-exponent ``-1/(2(d+3))`` of ``||Pi_lam||_{2->q_endpoint}``."""
    return -1.0 / (2.0 * (d + 3))


def delta(r: float, s: float) -> float:
    return 1.0 / r - 1.0 / s


def asymmetry_normalizer_exponent(d: int, q: float) -> float:
    """Exponent ``1/4 - (d+3) delta(q', q)/8`` of ``mu * mu_tilde``."""
    return 0.25 - (d + 3) * delta(conjugate(q), q) / 8.0


# --------------------------------------------------------------------------
# sweeps


@dataclass
class SweepRow:
    d: int
    lam: float
    mu: Optional[float]
    mu_tilde: Optional[float]
    p: float
    q: float
    norm: float
    residual: float
    restarts_agreeing: int
    extra: dict = field(default_factory=dict)


def mu_sweep(lam, d: int, mus: Sequence[float], resolution: float = DEFAULT_RESOLUTION,
             budget: int = DEFAULT_BUDGET, strict: bool = True):
    """``||chi_{plus, mu} Pi_lam||_{2->2}`` over ``mus`` and the fitted ``mu``-exponent."""
    floor = float(lam) ** (-2.0 / 3.0)
    rows = []
    for mu in mus:
        relaxed = mu < floor
        if relaxed and strict:
            raise RegimeError(f"mu={mu} is below lam^(-2/3)={floor:.4g}")
        est = norm_2_2_gram(lam, d, AnnulusSpec("plus", mu), resolution, budget)
        rows.append(SweepRow(d, float(lam), float(mu), None, 2.0, 2.0, est.value, est.residual,
                             est.restarts_agreeing, {"regime_relaxed": relaxed}))
    fit = fit_exponent([r.mu for r in rows], [r.norm for r in rows])
    return rows, fit


def endpoint_sweep(d: int, lambda_list: Sequence[int], q: float, resolution: float = DEFAULT_RESOLUTION,
                   seed: int = 0, p: float = 2.0, restarts: int = 8, tol: float = 1e-6,
                   budget: int = DEFAULT_BUDGET, radius: float = 2.0, max_iter: int = 500):
    """``||Pi_lam||_{p->q}`` from the full-ball rescaled operator, fitted in ``lam``.

    Each operator is the rescaled one on the unit-scale ball of ``radius``
    (Cartesian grid); the reported ``norm`` has the rescaling factor removed.
    """
    rows = []
    for lam in lambda_list:
        level = eigen_level(d, lam)
        op = assemble(level.lam, d, AnnulusSpec("ball", radius=radius), resolution=resolution,
                      budget=budget, normalization="rescaled", tensor=True)
        est = norm_p_q_power(op, p, q, restarts=restarts, tol=tol, seed=seed, max_iter=max_iter)
        factor = rescale_factor(level.lam, d, p, q)
        rows.append(SweepRow(d, float(level.lam), None, None, p, q, est.value / factor, est.residual,
                             est.restarts_agreeing,
                             {"rescaled_norm": est.value, "rescale_factor": factor,
                              "grid_points": op.in_grid.size, "iterations": est.iterations}))
    fit = fit_exponent([r.lam for r in rows], [r.norm for r in rows])
    return rows, fit


def sup_norm_sweep(ks: Sequence[int]):
    """``max |h_k|`` against ``lam = 2k + 1`` (the ``d = 1``, ``q = inf`` case)."""
    rows = []
    for k in ks:
        peak, _ = sup_norm_1d(int(k))
        rows.append(SweepRow(1, 2.0 * k + 1.0, None, None, 2.0, math.inf, peak, 0.0, 1, {"k": int(k)}))
    fit = fit_exponent([r.lam for r in rows], [r.norm for r in rows])
    return rows, fit


@dataclass
class AsymmetryRow:
    mu: float
    mu_tilde: float
    estimate: NormEstimate
    normalizer: float
    ratio: float
    regime_relaxed: bool


def check_asymmetry_regime(lam, d: int, mu: float, mu_tilde_list, q: float, strict: bool):
    """Validate the asymmetric configuration; returns per-``mu_tilde`` relaxed flags."""
    if d < 2:
        raise RegimeError("the asymmetric estimate needs d >= 2")
    q_top = 2.0 * (d + 1) / (d - 1)
    if not 2.0 < q <= q_top:
        raise RegimeError(f"q={q} outside (2, {q_top:g}]")
    floor = float(lam) ** (-2.0 / 3.0)
    flags = []
    for mt in mu_tilde_list:
        if mt > mu:
            raise RegimeError(f"mu_tilde={mt} exceeds mu={mu}")
        relaxed = mt < floor or mu < floor
        if relaxed and strict:
            raise RegimeError(f"mu_tilde={mt} is below lam^(-2/3)={floor:.4g}")
        flags.append(relaxed)
    return flags


def asymmetry_profile(lam, d: int, mu: float, mu_tilde_list: Sequence[float], q: float,
                      resolution: float = DEFAULT_RESOLUTION, seed: int = 0, restarts: int = 8,
                      tol: float = 1e-6, budget: int = DEFAULT_BUDGET, strict: bool = True,
                      max_iter: int = 500) -> List[AsymmetryRow]:
    """``||chi_{plus, mu} P chi_{plus, mu_tilde}||_{q'->q}`` for each ``mu_tilde``.

    ``P`` is the rescaled operator on unit-scale shells.  ``ratio`` divides by
    ``(mu mu_tilde)^e`` with ``e = asymmetry_normalizer_exponent(d, q)``.

    With ``strict=False`` shells thinner than ``lam^{-2/3}`` are allowed and the
    rows are flagged ``regime_relaxed``; with ``strict=True`` they raise.
    """
    level = eigen_level(d, lam)
    flags = check_asymmetry_regime(level.lam, d, mu, mu_tilde_list, q, strict)
    e = asymmetry_normalizer_exponent(d, q)
    qq = conjugate(q)
    out_spec = AnnulusSpec("plus", mu)
    rows = []
    for mt, relaxed in zip(mu_tilde_list, flags):
        op = assemble(level.lam, d, AnnulusSpec("plus", mt), out_spec, resolution, budget, "rescaled")
        est = norm_p_q_power(op, qq, q, restarts=restarts, tol=tol, seed=seed, max_iter=max_iter)
        norm_ = (mu * mt) ** e
        rows.append(AsymmetryRow(mu, mt, est, norm_, est.value / norm_, relaxed))
    return rows
