"""Exception types shared across the package."""


class TripodError(Exception):
    """Base class for all tripodsim errors."""


class UnitError(TripodError):
    """Unsupported or dimensionally inconsistent unit conversion."""


class ScenarioError(TripodError):
    """Invalid scenario parameters or a violated scenario invariant."""


class ConfigError(ScenarioError):
    """Malformed scenario configuration text."""


class DivergenceError(TripodError):
    """A numerical integration produced non-finite values."""


class StorageConditionError(TripodError):
    """Coherences do not satisfy the proportional-storage condition."""


class DiagnosticsError(TripodError):
    """A diagnostic cannot be evaluated on the available data."""
