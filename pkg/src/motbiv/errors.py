"""Exception types for motbiv."""

from __future__ import annotations


class MotbivError(Exception):
    """Base class for all motbiv errors."""


class AmbientMismatch(MotbivError, ValueError):
    """Two classes live on different varieties."""


class NotDivisible(MotbivError, ArithmeticError):
    """A division by a power of (1+y) left a nonzero remainder."""


class InvalidParameters(MotbivError, ValueError):
    """Constructor arguments outside the constructive class."""


class UnsupportedMorphism(MotbivError, ValueError):
    """No pushforward rule exists for the morphism."""


class UnsupportedFiberProduct(MotbivError, ValueError):
    """The fiber square is not representable in the catalogue."""


class NotSmooth(MotbivError, ValueError):
    """A smooth morphism was required."""


class NotProper(MotbivError, ValueError):
    """A proper morphism was required."""


class CompositeNotSmooth(MotbivError, ValueError):
    """f∘h is not smooth, so [V→X] is not a generator."""


class ReferenceMismatch(MotbivError, ValueError):
    """The element's reference morphism does not factor as required."""


class InvalidDiagram(MotbivError, ValueError):
    """A blow-up diagram violates its hypotheses."""


class ReferenceNotPoint(MotbivError, ValueError):
    """A covariant restriction needs a reference with target pt."""


class InsufficientOrder(MotbivError, ValueError):
    """A genus series is truncated below the required order."""


class ExprParseError(MotbivError, ValueError):
    """A variety expression failed to parse."""

    def __init__(self, message: str, *, position: int | None = None) -> None:
        super().__init__(message)
        self.position = position


class SchemaError(MotbivError, ValueError):
    """A scenario file does not match the schema."""

    def __init__(
        self,
        message: str,
        *,
        path: str = "",
        line: int | None = None,
        column: int | None = None,
    ) -> None:
        location = path
        if line is not None:
            location = f"{location} (line {line}, column {column})".strip()
        super().__init__(f"{location}: {message}" if location else message)
        self.path = path
        self.line = line
        self.column = column
