"""Exception types shared across the package."""


class WsonineError(Exception):
    """Base class for all package errors."""


class ExprError(WsonineError):
    """Base class for expression parsing/evaluation errors."""


class ExprSyntaxError(ExprError):
    """Malformed expression text.

    Carries the byte offset of the offending token and a hint about what
    was expected there.
    """

    def __init__(self, message, pos, expected=None):
        self.pos = pos
        self.expected = expected
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at offset {pos}{hint}")


class UnknownIdentifierError(ExprError):
    def __init__(self, name, pos=None):
        self.name = name
        self.pos = pos
        at = f" at offset {pos}" if pos is not None else ""
        super().__init__(f"unknown identifier '{name}'{at}")


class DomainError(WsonineError):
    """Evaluation outside the mathematical domain (ln of nonpositive,
    division by zero, 0^negative, kernel at t <= 0, ...)."""


class ValidationError(WsonineError):
    """A declared invariant failed (exponent out of (0,1), degenerate
    weight, uniform mesh where a graded one is required, ...)."""


class UnsupportedConfigurationError(WsonineError):
    """Requested operation outside the supported configuration space,
    e.g. WSC2 machinery with a variable exponent."""


class NumericalError(WsonineError):
    """Hard numerical failure: non-finite intermediate, singular diagonal,
    instability detector tripped."""


class ConfigError(WsonineError):
    """Malformed run configuration file."""
