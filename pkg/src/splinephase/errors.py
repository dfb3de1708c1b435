"""Exception types raised by splinephase."""

from __future__ import annotations


class SplinePhaseError(Exception):
    """Base class for all library errors."""


class KnotSystemError(SplinePhaseError, ValueError):
    """Invalid knot system or window."""


class NonIncreasingKnots(KnotSystemError):
    pass


class InvalidMultiplicity(KnotSystemError):
    pass


class PaddingInsufficient(KnotSystemError):
    pass


class UnknownPair(SplinePhaseError, KeyError):
    pass


class OutOfWindow(SplinePhaseError, ValueError):
    pass


class IndexOutOfRange(SplinePhaseError, IndexError):
    pass


class SizeMismatch(SplinePhaseError, ValueError):
    pass


class IllConditioned(SplinePhaseError, ArithmeticError):
    pass


class RankDeficient(SplinePhaseError, ArithmeticError):
    """Numerical rank fell short although the counting conditions hold."""

    def __init__(self, message, rank=None, expected=None, singular_values=None):
        super().__init__(message)
        self.rank = rank
        self.expected = expected
        self.singular_values = singular_values


class ConditionsViolated(SplinePhaseError, ValueError):
    """The sample set fails a counting condition; ``report`` lists the failures."""

    def __init__(self, report):
        super().__init__(f"sample set fails {report.mode} conditions: {report.summary()}")
        self.report = report


class DegenerateChoice(SplinePhaseError, ValueError):
    pass


class WitnessNotFound(SplinePhaseError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class PreconditionViolated(SplinePhaseError, ValueError):
    pass
