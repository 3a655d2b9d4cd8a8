"""Exception hierarchy shared by every module of the package."""


class HermprojError(Exception):
    """Base class for all package errors."""


class InputError(HermprojError, ValueError):
    """Malformed or out-of-range argument."""


class SpectrumError(InputError):
    """Requested eigenvalue is not in ``2*N_0 + d``."""


class SingularityError(InputError):
    """Evaluation at a singular time (``sin t == 0``)."""


class DomainError(InputError):
    """Point configuration outside the domain of a closed form."""


class DegenerateInputError(InputError):
    """Input that has no well-defined normalisation (e.g. the zero vector)."""


class RegimeError(InputError):
    """Shell parameters violate the asymptotic regime and strict checking is on."""


class AccuracyError(HermprojError, ArithmeticError):
    """A numerical procedure did not reach its requested accuracy.

    Attributes
    ----------
    achieved : float
        Best error estimate (or best value) reached before giving up.
    """

    def __init__(self, message, achieved=None, best=None):
        super().__init__(message)
        self.achieved = achieved
        self.best = best


class ResourceError(HermprojError, MemoryError):
    """A grid or matrix would exceed the configured point budget."""
