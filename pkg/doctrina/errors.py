from __future__ import annotations

"""
Error types for Doctrina.

Every failure the engine reports has a stable ``code`` (the class name) so
reports and tests can match on it without parsing messages.
"""

from typing import Any


class DoctrinaError(Exception):
    """Base class for all engine errors."""

    def __init__(
        self,
        message: str,
        *,
        path: str | None = None,
        span: tuple[int, int] | None = None,
    ):
        super().__init__(message)
        self.message = message
        self.path = path
        self.span = span

    @property
    def code(self) -> str:
        return type(self).__name__

    def at(self, path: str) -> DoctrinaError:
        """Attach a node path if none is set yet."""
        if self.path is None:
            self.path = path
        return self

    def __str__(self) -> str:
        where = f" at {self.path}" if self.path else ""
        return f"{self.code}{where}: {self.message}"


# Base theories


class InadmissibleList(DoctrinaError):
    pass


class LengthMismatch(DoctrinaError):
    pass


class SignMismatch(DoctrinaError):
    pass


class SortMismatch(DoctrinaError):
    pass


# Name resolution


class ArityMismatch(DoctrinaError):
    pass


class UnknownCone(DoctrinaError):
    pass


class UnknownObject(DoctrinaError):
    pass


class UnknownGenerator(DoctrinaError):
    pass


class UnknownProjection(DoctrinaError):
    pass


class UnknownBuiltin(DoctrinaError):
    pass


class UnknownItem(DoctrinaError):
    """A workspace reference (proof, goal, map, sketch) that does not resolve."""

    pass


class UnsortedDoctrine(DoctrinaError):
    pass


# Derivation checking


class DerivationError(DoctrinaError):
    """A derivation node violates its rule."""

    pass


class CutTypeMismatch(DerivationError):
    pass


class CutSignMismatch(DerivationError):
    pass


class BadStructuralMap(DerivationError):
    pass


class PremiseShapeMismatch(DerivationError):
    pass


class MissingProjectionPremise(DerivationError):
    pass


class SideConditionFailed(DerivationError):
    pass


class InadmissibleConclusion(DerivationError):
    pass


# Split-context elaboration


class NotSorted(DoctrinaError):
    pass


class AmbiguousZone(DoctrinaError):
    pass


# Rewriting, translation, resources


class UncheckedInput(DoctrinaError):
    pass


class FuelExhausted(DoctrinaError):
    """Normalization ran out of fuel; ``partial`` holds the last form reached."""

    def __init__(self, message: str, partial: Any = None, **kwargs):
        super().__init__(message, **kwargs)
        self.partial = partial


class ConclusionMismatch(DoctrinaError):
    pass


class InvalidMap(DoctrinaError):
    pass


class ResourceLimit(DoctrinaError):
    pass


class ParseError(DoctrinaError):
    """Syntax error in a workspace file or a command-line term."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(message, span=(line, column))
        self.line = line
        self.column = column

    def __str__(self) -> str:
        return f"{self.code} at line {self.line}, column {self.column}: {self.message}"


class ValidationError(DoctrinaError):
    """Raised when a validation report is not clean and the caller needs a value."""

    def __init__(self, message: str, violations: list | None = None, **kwargs):
        super().__init__(message, **kwargs)
        self.violations = list(violations or [])
