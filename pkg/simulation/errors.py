"""Exception types raised by the simulator.

Everything derives from ``ValueError`` so callers that only care about bad
inputs can keep catching that.
"""


class SimulationError(ValueError):
    """Base class for simulator errors."""


class InvalidPanelError(SimulationError):
    """The RIS panel cannot hold a single element with the given spacing."""


class DegenerateGeometryError(SimulationError):
    """A zero-length vector or a target sitting on an element."""


class BelowHorizonError(SimulationError):
    """A satellite elevation at or below the horizon."""


class ConfigurationError(SimulationError):
    """Invalid run configuration. ``key`` holds the dotted path when known."""

    def __init__(self, message: str, key: str = None):
        super().__init__(message)
        self.key = key


class DomainError(SimulationError):
    """Input outside the mathematical domain of a conversion."""


class OracleScaleError(SimulationError):
    """Explicit channel matrices requested at a size meant for closed forms only."""
