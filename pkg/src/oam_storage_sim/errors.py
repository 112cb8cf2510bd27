"""Exception hierarchy.

CLI exit codes map onto these: ``ConfigError`` and ``InvalidInput`` -> 2,
``NumericalInvariantError`` -> 3, ``IoFailure`` -> 4.
"""

from __future__ import annotations

from dataclasses import dataclass


class OamSimError(Exception):
    """Base class for all simulator errors."""


class InvalidInput(OamSimError, ValueError):
    """An argument violates an operation's precondition."""


class MixedDirections(InvalidInput):
    pass


class EmptyInput(InvalidInput):
    pass


class GridMismatch(InvalidInput):
    pass


class NegativeTime(InvalidInput):
    pass


class InvalidF(InvalidInput):
    pass


class EmptyGrid(InvalidInput):
    pass


class NumericalInvariantError(OamSimError, ArithmeticError):
    """A computed quantity broke one of its invariants."""


class LowAmplitude(NumericalInvariantError):
    pass


class NonIntegerWinding(NumericalInvariantError):
    pass


class IoFailure(OamSimError, OSError):
    def __init__(self, path, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = str(path)
        self.reason = reason


@dataclass(frozen=True)
class ParseError:
    line: int | None
    key: str
    reason: str

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.key}: {self.reason}"


class ConfigError(OamSimError):
    """Collects every problem found in a config document."""

    def __init__(self, errors: list[ParseError]):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors))
