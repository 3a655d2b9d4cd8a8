"""Spherical shells, the Airy-scale weights and quadrature grids.

All sets are described at unit scale, where the eigenfunctions with
eigenvalue ``lam`` live near the unit sphere after the substitution
``x -> sqrt(lam) x``.  An AnnulusSpec with ``lam`` set describes the scaled set
``{x : x / sqrt(lam) in unit set}``.

Shell kinds (``r = |x|`` at unit scale)::

    plus      1 - r in [mu, 2 mu]
    minus     r - 1 in [mu, 2 mu]
    ring      |1 - r| <= 2 mu
    exterior  r >= 1 - mu
    ball      r <= radius
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .basis import eigen_level, hermite_values
from .errors import InputError, ResourceError

KINDS = ("plus", "minus", "ring", "exterior", "ball")
DEFAULT_BUDGET = 1 << 22
DEFAULT_RESOLUTION = 4.0
# radius used for the outer edge of unbounded regions
OUTER_RADIUS = 2.0
# radial Gauss nodes never fall below this count
_MIN_RADIAL = 8


def _is_dyadic(mu: float) -> bool:
    m, e = math.frexp(mu)
    return m == 0.5


@dataclass(frozen=True)
class AnnulusSpec:
    """A shell (or ball) at unit scale, optionally tied to an eigenvalue.

    Parameters
    ----------
    kind : str
        One of ``plus``, ``minus``, ``ring``, ``exterior``, ``ball``.
    mu : float, optional
        Shell width; required (and dyadic) for ``plus``/``minus``.
    lam : float, optional
        Eigenvalue of the scaled version.  Membership of ``x`` is then the
        unit-scale membership of ``x / sqrt(lam)``.
    radius : float
        Radius of ``ball`` and outer edge used when gridding ``exterior``.
    """

    kind: str
    mu: Optional[float] = None
    lam: Optional[float] = None
    radius: float = OUTER_RADIUS

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown region kind {self.kind!r}; expected one of {KINDS}")
        if self.kind != "ball":
            if self.mu is None or not 0.0 < self.mu <= 1.0:
                raise InputError(f"{self.kind} shell needs mu in (0, 1], got {self.mu}")
            if self.kind in ("plus", "minus") and not _is_dyadic(self.mu):
                raise InputError(f"mu must be a dyadic rational 2^-n, got {self.mu}")
        if self.lam is not None and not self.lam > 0:
            raise InputError(f"lam must be positive, got {self.lam}")
        if not self.radius > 0:
            raise InputError(f"radius must be positive, got {self.radius}")

    def unit(self) -> "AnnulusSpec":
        return AnnulusSpec(self.kind, self.mu, None, self.radius)

    def scaled(self, lam: float) -> "AnnulusSpec":
        return AnnulusSpec(self.kind, self.mu, lam, self.radius)

    def contains_radius(self, r) -> np.ndarray:
        """Membership by unit-scale radius."""
        r = np.asarray(r, dtype=float)
        mu = self.mu
        if self.kind == "plus":
            t = 1.0 - r
            return (t >= mu) & (t <= 2.0 * mu)
        if self.kind == "minus":
            t = r - 1.0
            return (t >= mu) & (t <= 2.0 * mu)
        if self.kind == "ring":
            return np.abs(1.0 - r) <= 2.0 * mu
        if self.kind == "exterior":
            return r >= 1.0 - mu
        return r <= self.radius

    def radial_range(self) -> Tuple[float, float]:
        """Unit-scale radii ``[a, b]`` covered by a grid of this region."""
        mu = self.mu
        if self.kind == "plus":
            return 1.0 - 2.0 * mu, 1.0 - mu
        if self.kind == "minus":
            return 1.0 + mu, 1.0 + 2.0 * mu
        if self.kind == "ring":
            return max(0.0, 1.0 - 2.0 * mu), 1.0 + 2.0 * mu
        if self.kind == "exterior":
            return 1.0 - mu, max(self.radius, 1.0 - mu)
        return 0.0, self.radius

    def volume(self, d: int) -> float:
        """Unit-scale volume of the gridded region."""
        a, b = self.radial_range()
        return sphere_area(d) * (b ** d - a ** d) / d

    def label(self) -> str:
        if self.kind == "ball":
            return f"ball(r={self.radius:g})"
        return f"{self.kind}(mu={self.mu:g})"


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in ``R^d`` (2 for ``d = 1``)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def annulus_contains(spec: AnnulusSpec, x) -> np.ndarray:
    """Exact membership of the point(s) ``x`` (trailing axis = coordinates)."""
    x = np.asarray(x, dtype=float)
    r = np.sqrt(np.sum(x * x, axis=-1))
    if spec.lam is not None:
        r = r / math.sqrt(spec.lam)
    return spec.contains_radius(r)


# --------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class WeightSpec:
    """``w_sign(x)^exponent`` with ``w_+- = 1 + lam^{-1/3} (lam - |x|^2)_+-``."""

    lam: float
    sign: str = "+"
    exponent: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise InputError(f"lam must be positive, got {self.lam}")
        if self.sign not in ("+", "-"):
            raise InputError(f"sign must be '+' or '-', got {self.sign!r}")


def weight_w(spec: WeightSpec, x) -> np.ndarray:
    """Airy-scale weight at unscaled points ``x``."""
    x = np.asarray(x, dtype=float)
    gap = spec.lam - np.sum(x * x, axis=-1)
    part = np.maximum(gap, 0.0) if spec.sign == "+" else np.maximum(-gap, 0.0)
    return (1.0 + spec.lam ** (-1.0 / 3.0) * part) ** spec.exponent


# --------------------------------------------------------------------------
# grids


@dataclass
class Grid:
    """Quadrature points at unit scale.

    ``points`` has shape ``(N, d)``; ``weights`` are unit-scale volume weights.
    Tensor grids keep their one-dimensional nodes in ``axes`` and produce
    ``points`` lazily.
    """

    d: int
    weights: np.ndarray
    region: AnnulusSpec
    lam: float
    resolution: float
    _points: Optional[np.ndarray] = None
    axes: Optional[Tuple[np.ndarray, ...]] = None
    meta: dict = field(default_factory=dict)

    @property
    def points(self) -> np.ndarray:
        if self._points is None:
            mesh = np.meshgrid(*self.axes, indexing="ij")
            self._points = np.stack([m.ravel() for m in mesh], axis=-1)
        return self._points

    @property
    def size(self) -> int:
        return int(self.weights.size)

    @property
    def is_tensor(self) -> bool:
        return self.axes is not None

    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)


def oscillation_length(lam: float) -> float:
    """Shortest unit-scale length the level varies on.

    After ``x -> sqrt(lam) x`` the local frequency ``sqrt(lam - |x|^2)`` is at
    most ``sqrt(lam)``, so the shortest wavelength is ``2 pi / lam``.  For
    ``lam < 4 pi^2`` the Gaussian width ``lam^{-1/2}`` is shorter and is used
    instead.
    """
    return min(2.0 * math.pi / lam, lam ** -0.5)


def _check_budget(n: int, budget: int):
    if n > budget:
        raise ResourceError(f"grid needs {n} points, over the budget of {budget}")


def _sphere_rule(d: int, n_polar: int):
    """Directions and weights summing to the sphere area."""
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 2:
        n = max(2 * n_polar, 8)
        th = 2.0 * math.pi * (np.arange(n) + 0.5) / n
        return np.stack([np.cos(th), np.sin(th)], axis=1), np.full(n, 2.0 * math.pi / n)
    if d == 3:
        # Gauss-Legendre in cos(theta) times a uniform azimuth
        nt = max(n_polar, 4)
        z, wz = np.polynomial.legendre.leggauss(nt)
        nphi = 2 * nt
        phi = 2.0 * math.pi * (np.arange(nphi) + 0.5) / nphi
        zz, pp = np.meshgrid(z, phi, indexing="ij")
        rho = np.sqrt(1.0 - zz * zz)
        dirs = np.stack([(rho * np.cos(pp)).ravel(), (rho * np.sin(pp)).ravel(), zz.ravel()], axis=1)
        w = np.outer(wz, np.full(nphi, 2.0 * math.pi / nphi)).ravel()
        return dirs, w
    raise InputError(f"spherical grids are implemented for d <= 3, got d={d}")


def build_annulus_grid(spec: AnnulusSpec, d: int, lam: float, resolution: float = DEFAULT_RESOLUTION,
                       budget: int = DEFAULT_BUDGET) -> Grid:
    """Radius-times-sphere product grid of a unit-scale region.

    Radii are Gauss-Legendre nodes on the radial range (weight ``r^{d-1} dr``);
    directions use a uniform circle rule (``d = 2``) or a Gauss-Legendre by
    uniform-azimuth rule (``d = 3``).  Node spacing is at most
    ``oscillation_length(lam) / resolution`` in every direction.

    Raises
    ------
    ResourceError
        If the grid would exceed ``budget`` points.
    """
    if resolution < 2:
        raise InputError(f"resolution must be >= 2 points per oscillation, got {resolution}")
    eigen_level(d, lam)
    a, b = spec.unit().radial_range()
    h = oscillation_length(lam) / resolution
    # the widest Gauss-Legendre gap (mid-interval) is about pi/2 times the mean gap
    n_r = max(_MIN_RADIAL, int(math.ceil(0.5 * math.pi * (b - a) / h)) + 1)
    n_polar = max(2, int(math.ceil(math.pi * b / h))) if d > 1 else 1
    n_dirs = {1: 2, 2: max(2 * n_polar, 8), 3: max(n_polar, 4) * 2 * max(n_polar, 4)}[d] if d <= 3 else None
    if n_dirs is None:
        raise InputError(f"spherical grids are implemented for d <= 3, got d={d}")
    _check_budget(n_r * n_dirs, budget)
    t, wt = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * (b - a) * t + 0.5 * (a + b)
    wr = 0.5 * (b - a) * wt * r ** (d - 1)
    dirs, wd = _sphere_rule(d, n_polar)
    pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, d)
    w = np.outer(wr, wd).ravel()
    return Grid(d=d, weights=w, region=spec.unit(), lam=float(lam), resolution=float(resolution),
                _points=pts, meta={"kind": "spherical", "n_radial": n_r, "n_directions": len(wd)})


def effective_half_width(d: int, lam: float, tol: float = 1e-12) -> float:
    """Unit-scale half-width outside which every 1-D factor of the level is below
    ``tol`` times its peak."""
    level = eigen_level(d, lam)
    xs = np.linspace(0.0, 3.0 * math.sqrt(lam), 4000)
    tab = np.abs(hermite_values(level.k, xs))
    m = tab.max(axis=0)
    above = np.nonzero(m > tol * m.max())[0]
    return float(xs[min(above[-1] + 1, xs.size - 1)] / math.sqrt(lam))


def build_tensor_grid(spec: AnnulusSpec, d: int, lam: float, resolution: float = DEFAULT_RESOLUTION,
                      budget: int = DEFAULT_BUDGET, tol: float = 1e-12) -> Grid:
    """Uniform Cartesian grid (trapezoid weights) for a ball or the whole space.

    The box is cut at :func:`effective_half_width`, beyond which the level's
    eigenfunctions are negligible; points of the box outside the region get
    weight zero.  The one-dimensional nodes are kept so that operators built on
    the grid can be applied axis by axis.
    """
    if spec.kind not in ("ball",):
        raise InputError("tensor grids are built for balls only")
    if resolution < 2:
        raise InputError(f"resolution must be >= 2 points per oscillation, got {resolution}")
    half = min(effective_half_width(d, lam, tol), spec.radius)
    h = oscillation_length(lam) / resolution
    n = 2 * int(math.ceil(half / h)) + 1
    _check_budget(n ** d, budget)
    axis = np.linspace(-half, half, n)
    step = axis[1] - axis[0]
    grid = Grid(d=d, weights=np.empty(0), region=spec.unit(), lam=float(lam),
                resolution=float(resolution), axes=tuple(axis for _ in range(d)),
                meta={"kind": "tensor", "n_axis": n, "half_width": half, "cutoff_tol": tol})
    r2 = np.zeros((n,) * d)
    for i in range(d):
        shape = [1] * d
        shape[i] = n
        r2 = r2 + (axis ** 2).reshape(shape)
    inside = r2 <= spec.radius ** 2
    grid.weights = np.where(inside, step ** d, 0.0).ravel()
    return grid


def indicator_times(grid_fn, spec: AnnulusSpec):
    """Multiply a grid function by the 0/1 indicator of ``spec``."""
    from .normlab import GridFunction

    mask = spec.unit().contains_radius(grid_fn.grid.radii())
    return GridFunction(np.where(mask, grid_fn.values, 0.0 * grid_fn.values), grid_fn.grid)


def grid_to_csv(grid: Grid, path) -> None:
    """Write ``x1, ..., xd, weight`` rows (unit scale)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{i + 1}" for i in range(grid.d)] + ["weight"])
        for p, w in zip(grid.points, grid.weights):
            writer.writerow([repr(float(v)) for v in p] + [repr(float(w))])
