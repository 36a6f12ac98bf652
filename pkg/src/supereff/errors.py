"""Exception hierarchy shared across the package."""


class SupereffError(Exception):
    """Base class for all errors raised by this package."""


class InsufficientPoints(SupereffError, ValueError):
    pass


class QuadratureFailure(SupereffError, ArithmeticError):
    pass


class DegenerateVariance(SupereffError, ValueError):
    pass


class DegenerateEffects(SupereffError, ValueError):
    """The effect law has zero heterogeneity margin (c = 0)."""


class EmptyArm(SupereffError):
    """A sample had no treated or no control units."""


class TargetOutOfRange(SupereffError, ValueError):
    def __init__(self, m, lo, hi):
        self.m, self.lo, self.hi = m, lo, hi
        super().__init__(f"target {m!r} outside admissible interval [{lo!r}, {hi!r}]")


class UnattainableBoundary(SupereffError, ValueError):
    pass


class ConfigError(SupereffError):
    """Raised for configuration problems; carries the offending key path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class SchemaError(ConfigError):
    pass


class ValidationError(ConfigError):
    pass
