"""Exception types raised across the package."""


class AnnulusError(Exception):
    """Base class for package errors."""


class NotRationalError(AnnulusError):
    """An operation restricted to rational expressions met an exp node."""


class IllConditionedError(AnnulusError):
    """Polynomial root finding is too ill conditioned to trust."""


class BoundaryZeroError(AnnulusError):
    """A zero or pole sits on an integration contour and jitter did not clear it."""


class QuadratureFailure(AnnulusError):
    """Trapezoidal panel doubling hit the node cap before converging."""


class RadiusOutOfRangeError(AnnulusError, ValueError):
    pass


class DegenerateFitError(AnnulusError):
    pass


class DegenerateTargetsError(AnnulusError, ValueError):
    """Targets passed to a transform builder are not pairwise distinct."""


class NonDistinctTargetsError(AnnulusError, ValueError):
    pass


class IdenticallyZeroError(AnnulusError, ValueError):
    """The function whose zeros were requested vanishes identically."""


class ConfigError(AnnulusError, ValueError):
    """Invalid job configuration; the message starts with the field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class ExprSyntaxError(SyntaxError):
    """Expression text did not match the grammar.

    Carries 1-based ``line``/``column`` and the set of tokens that would have
    been accepted at that position.
    """

    def __init__(self, message: str, text: str, pos: int, expected=()):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.line = line
        self.column = col
        self.pos = pos
        self.expected = tuple(sorted(set(expected)))
        detail = f"{message} at line {line}, column {col}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)
        self.text = text
