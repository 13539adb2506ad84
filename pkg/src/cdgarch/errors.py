"""Exception types raised across the package."""


class ConditionError(ValueError):
    """A model parameter condition required by a result does not hold.

    The message always names the violated inequality.
    """


class ContourTooCoarseError(RuntimeError):
    """Argument increments along a sampled contour could not be resolved."""


class ConfigError(ValueError):
    """Malformed or inconsistent configuration file or command-line options."""
