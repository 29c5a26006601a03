"""Error types raised by the certificate library.

Every failure carries a stable ``code`` (the class name) and a ``details``
dict so the CLI can serialize it without string parsing.
"""

from typing import Any, Dict, Optional


class HKError(ValueError):
    """Base class for all library errors"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.code, "message": self.message, "details": self.details}


# lattice
class DimensionMismatch(HKError):
    pass


class DegenerateForm(HKError):
    pass


class ZeroVector(HKError):
    pass


class NonPositivePolarization(HKError):
    pass


# isotropy
class NotIsotropic(HKError):
    pass


class GeneratorNotIsometry(HKError):
    pass


class GeneratorMovesPolarization(HKError):
    pass


class SearchExhausted(HKError):
    """A pipeline step needed a witness that the bounded search did not produce"""

    def __init__(self, message: str, outcome: str, details=None):
        super().__init__(message, details)
        self.outcome = outcome


# monodromy
class NotIsometry(HKError):
    pass


class PreconditionViolated(HKError):
    pass


class OddNorm(HKError):
    pass


class NotUnipotent(HKError):
    pass


class NotNilpotent(HKError):
    pass


class IndexTooHigh(HKError):
    pass


class RankTooSmall(HKError):
    pass


# sympow
class WrongJordanProfile(HKError):
    pass


class DependentInputs(HKError):
    pass


class SpanNotStabilized(HKError):
    pass


class DimensionTooLarge(HKError):
    pass


# hodge
class WrongSignature(HKError):
    pass


class NotPeriodPoint(HKError):
    pass


class BadMarking(HKError):
    pass


# rrh
class DegreeTooLarge(HKError):
    pass


class OracleIncomplete(HKError):
    pass


class TruncationViolated(HKError):
    pass


# cli / fixtures
class UnknownCommand(HKError):
    pass


class MalformedInput(HKError):
    pass


class UnknownFixture(HKError):
    pass


class ValidationFailed(HKError):
    pass
