"""Exception types raised by credal_lln.

Every error derives from CredalLlnError so callers (the CLI in particular)
can catch the whole family at once. Input validation errors also derive
from ValueError.
"""

from __future__ import annotations

from typing import Any


class CredalLlnError(Exception):
    """Base class for all package errors."""


class LengthMismatchError(CredalLlnError, ValueError):
    pass


class NegativeProbError(CredalLlnError, ValueError):
    pass


class DuplicateValueError(CredalLlnError, ValueError):
    pass


class NotNormalizedError(CredalLlnError, ValueError):
    pass


class NonFiniteValueError(CredalLlnError, ValueError):
    pass


class NonFiniteFunctionValueError(CredalLlnError, ValueError):
    """A user-supplied function returned nan/inf on a support point."""

    def __init__(self, at: float, value: float) -> None:
        super().__init__(f"function value {value!r} at x={at!r} is not finite")
        self.at = at
        self.value = value


class EmptyCredalSetError(CredalLlnError, ValueError):
    pass


class EventOutsideSupportError(CredalLlnError, ValueError):
    pass


class LatticeOverflowError(CredalLlnError):
    """The reachable-sum lattice outgrew the configured state cap."""

    hint = "reduce n or use the simulate experiment"

    def __init__(self, step: int, size: int, cap: int) -> None:
        super().__init__(
            f"sum lattice has {size} states at step {step}, cap is {cap}; {self.hint}"
        )
        self.step = step
        self.size = size
        self.cap = cap


class OracleTooLargeError(CredalLlnError):
    pass


class InvalidPolicyIndexError(CredalLlnError, ValueError):
    pass


class TargetOutOfRangeError(CredalLlnError, ValueError):
    pass


class EmptyPathError(CredalLlnError, ValueError):
    pass


class BadWindowError(CredalLlnError, ValueError):
    pass


class EmptyInputError(CredalLlnError, ValueError):
    pass


class ConfigError(CredalLlnError, ValueError):
    """Unreadable or invalid configuration (exit code 1)."""


class VerdictFailedError(CredalLlnError):
    """Raised by `experiments.run(..., strict=True)` after the report is written."""

    def __init__(self, failed: list[str], report: Any = None) -> None:
        super().__init__("failed verdicts: " + ", ".join(failed))
        self.failed = failed
        self.report = report
