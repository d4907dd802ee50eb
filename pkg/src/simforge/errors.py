"""Exception types shared across the package."""


class SimforgeError(Exception):
    """Base class for all package-specific errors."""


class DegenerateGeometry(SimforgeError):
    """Coincident points or otherwise unusable layout."""


class InvalidParameter(SimforgeError):
    """A scalar or structural argument is out of its valid range."""


class ShapeError(SimforgeError):
    """Array dimensions are inconsistent with the operation."""


class NonFiniteLoss(SimforgeError):
    """A loss evaluated to NaN or Inf."""


class TooLarge(SimforgeError):
    """Problem size exceeds the guard for exhaustive enumeration."""


class ConfigError(SimforgeError):
    """An experiment config file violates the schema."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
