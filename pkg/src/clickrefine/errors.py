"""Exception taxonomy shared by every subsystem."""


class ClickRefineError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(ClickRefineError):
    """Operands have incompatible dimensions."""


class ConfigError(ClickRefineError):
    """A configuration value violates a structural constraint."""


class NumericError(ClickRefineError):
    """A kernel produced NaN/Inf, or a loss became non-finite."""


class ValidationError(ClickRefineError):
    """User-supplied data (clicks, manifests, payloads) failed validation."""
