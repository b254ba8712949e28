"""Exception types used across the package."""


class DbnoiseError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(DbnoiseError):
    """Invalid configuration file, key, value, or experiment geometry."""


class GridTooSmallError(DbnoiseError):
    """Grid does not contain the potential structure."""


class TruncationError(DbnoiseError):
    """Wave packet tail mass outside the grid exceeds the allowed bound."""


class NotSettledError(DbnoiseError):
    """Propagation reached max_time before the barrier region emptied."""


class BoundaryContaminationError(DbnoiseError):
    """Probability reached the hard-wall boundary before settling."""


class SolverError(DbnoiseError):
    """Numerical failure inside the propagator (norm drift, singular solve)."""


class NotSettledInputError(DbnoiseError):
    """A scattering analysis was requested on a field that is not settled."""


class MismatchedGridError(DbnoiseError):
    """Two fields that must share a grid do not."""


class MismatchedTimeError(DbnoiseError):
    """Two fields that must share a time stamp do not."""


class NegativeProbabilityError(DbnoiseError):
    """A quadrant probability came out significantly negative."""


class NoResonanceError(DbnoiseError):
    """No transmission maximum with T > 0.5 in the scanned energy range."""


class ArcsinDomainError(DbnoiseError):
    """Requested resonance energy lies outside the ridge formula's domain."""
