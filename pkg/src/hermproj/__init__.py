"""Spectral projections of the Hermite operator: kernels, phase geometry and localized norms."""

from .basis import eigen_level, eval_level, gauss_hermite_nodes, hermite_values, sup_norm_1d
from .errors import (AccuracyError, DegenerateInputError, DomainError, HermprojError, InputError,
                     RegimeError, ResourceError, SingularityError, SpectrumError)
from .estimators import MixedNormEstimator, SpectralProjector
from .localization import AnnulusSpec, WeightSpec
from .mehler import OscIntegralSpec, kernel_direct, kernel_mehler
from .normlab import assemble, fit_exponent, norm_2_2_gram, norm_p_q_power

__version__ = "0.1.0"
