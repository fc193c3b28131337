"""Exception and warning types shared across the package."""


class FemdaError(Exception):
    """Base class for all package-specific errors."""


class NotPositiveDefinite(FemdaError):
    """A matrix required to be symmetric positive definite is not."""


class DimensionMismatch(FemdaError):
    """Operands have incompatible dimensions."""


class EmptyCluster(FemdaError):
    """A cluster has no training observations."""


class SingletonCluster(FemdaError):
    """A cluster has a single observation; scatter is undefined."""


class MissingNu(FemdaError):
    """A t-model score was requested from a model without degrees of freedom."""


class InvalidDimension(FemdaError):
    """An operation requires a larger dimension than was supplied."""


class QuadratureFailure(FemdaError):
    """Numerical quadrature did not converge to the requested tolerance."""


class LengthMismatch(FemdaError):
    """Paired sequences have different lengths."""


class EmptyInput(FemdaError):
    """An aggregate was requested over an empty input."""


class ZeroTruthNorm(FemdaError):
    """A relative error was requested against a zero-norm reference."""


class CountMismatch(FemdaError):
    """Model count does not match ground-truth cluster count."""


class ParseError(FemdaError):
    """A CSV cell could not be parsed; the message cites row and column."""


class RaggedRows(FemdaError):
    """CSV rows do not all have the same number of columns."""


class EmptyFile(FemdaError):
    """The input file contains no data rows."""


class RankDeficient(FemdaError):
    """Requested projection dimension exceeds the covariance rank."""


class ClassMissingFromTrain(FemdaError):
    """No shuffle placed every class in the training split."""


class ConfigError(FemdaError):
    """An experiment configuration file or value is invalid."""


class NuAtBoundaryWarning(UserWarning):
    """The degrees-of-freedom search terminated at a search bound."""


class UndersampledClusterWarning(UserWarning):
    """A cluster has fewer observations than its dimension plus one."""
