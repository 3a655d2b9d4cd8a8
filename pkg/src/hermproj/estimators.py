"""scikit-learn style wrappers around :mod:`hermproj.normlab`.

``SpectralProjector`` is a transformer: ``fit`` discretises a localized
projection and ``transform`` applies it to rows of grid samples.
``MixedNormEstimator`` fits ``||T||_{p->q}`` of such a projector.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import InputError
from .localization import DEFAULT_BUDGET, DEFAULT_RESOLUTION, AnnulusSpec
from .normlab import assemble, norm_p_q_power, rescale_factor


class SpectralProjector(TransformerMixin, BaseEstimator):
    """Localized projection onto one eigenspace, built at unit scale.

    Parameters
    ----------
    d : int
        Dimension.
    lam : int
        Eigenvalue, ``d + 2k``.
    region : {"ball", "plus", "minus", "ring", "exterior"}
        Input region.  ``out_region`` defaults to the same region and grid.
    mu, radius : float
        Region parameters (see :class:`~hermproj.localization.AnnulusSpec`).
    normalization : {"projection", "rescaled"}
    tensor : bool
        Cartesian grid applied axis by axis (balls only).

    Attributes
    ----------
    operator_ : LowRankOperator
    n_features_in_ : int
        Number of input grid points.
    """

    def __init__(self, d=2, lam=8, region="ball", mu=None, radius=2.0, out_region=None, out_mu=None,
                 resolution=DEFAULT_RESOLUTION, normalization="projection", tensor=False,
                 budget=DEFAULT_BUDGET):
        self.d = d
        self.lam = lam
        self.region = region
        self.mu = mu
        self.radius = radius
        self.out_region = out_region
        self.out_mu = out_mu
        self.resolution = resolution
        self.normalization = normalization
        self.tensor = tensor
        self.budget = budget

    def _specs(self):
        in_spec = AnnulusSpec(self.region, self.mu, radius=self.radius)
        if self.out_region is None:
            return in_spec, None
        return in_spec, AnnulusSpec(self.out_region, self.out_mu, radius=self.radius)

    def fit(self, X=None, y=None):
        """Build the grids and factors; ``X`` is ignored."""
        in_spec, out_spec = self._specs()
        self.operator_ = assemble(self.lam, self.d, in_spec, out_spec, self.resolution, self.budget,
                                  self.normalization, self.tensor)
        self.n_features_in_ = self.operator_.in_grid.size
        return self

    @property
    def in_grid_(self):
        check_is_fitted(self, "operator_")
        return self.operator_.in_grid

    @property
    def out_grid_(self):
        check_is_fitted(self, "operator_")
        return self.operator_.out_grid

    def transform(self, X):
        """Apply the operator to each row of ``X`` (samples on the input grid)."""
        check_is_fitted(self, "operator_")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features_in_:
            raise InputError(f"rows must have {self.n_features_in_} grid values, got {X.shape[1]}")
        return np.stack([self.operator_.apply(row) for row in X])

    def sample(self, fn):
        """Evaluate ``fn(points)`` on the input grid, shaped as one row."""
        return np.asarray(fn(self.in_grid_.points), dtype=float)[None, :]


class MixedNormEstimator(BaseEstimator):
    """Lower bound for ``||T||_{p->q}`` by the mixed-norm power method.

    ``fit`` takes a fitted :class:`SpectralProjector` (or a ``LowRankOperator``).

    Attributes
    ----------
    norm_ : float
        Estimate for the discretised operator.
    unscaled_norm_ : float
        The estimate converted to ``Pi_lam`` at the original scale.
    estimate_ : NormEstimate
    """

    def __init__(self, p=2.0, q=2.0, restarts=8, tol=1e-6, seed=0, max_iter=500):
        self.p = p
        self.q = q
        self.restarts = restarts
        self.tol = tol
        self.seed = seed
        self.max_iter = max_iter

    def fit(self, X, y=None):
        op = X.operator_ if isinstance(X, SpectralProjector) else X
        est = norm_p_q_power(op, self.p, self.q, restarts=self.restarts, tol=self.tol,
                             seed=self.seed, max_iter=self.max_iter)
        self.estimate_ = est
        self.norm_ = est.value
        scale = rescale_factor(op.lam, op.d, self.p, self.q)
        if op.normalization == "projection":
            scale *= float(op.lam) ** (0.5 * op.d)
        self.unscaled_norm_ = est.value / scale
        return self
