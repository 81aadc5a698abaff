"""Exception hierarchy shared across the package."""


class GraphonLearnError(Exception):
    """Base class for all errors raised by graphonlearn."""


class ConfigError(GraphonLearnError):
    """Invalid configuration (bad parameter combination, malformed config file)."""


class DataError(GraphonLearnError):
    """Base class for problems with input data."""


class DomainError(DataError):
    """Sample values outside the unit interval, or otherwise out of domain."""


class ParseError(DataError):
    """Malformed CSV or metadata input."""


class DegeneracyError(GraphonLearnError):
    """Out-degree not bounded away from zero; the walk is ill-defined."""


class SymmetryError(GraphonLearnError):
    """Operation requires a symmetric graphon but the graphon is not symmetric."""


class NumericError(GraphonLearnError):
    """Base class for numerical failures."""


class SingularMatrixError(NumericError):
    """Covariance matrix could not be factorized, even after regularization."""


class ConvergenceError(NumericError):
    """Eigensolver failed to converge."""


class RankError(NumericError):
    """Requested more spectral components than are numerically available."""


class EmptyClusterError(NumericError):
    """A cluster ended up empty (no members, or no outgoing transitions)."""
