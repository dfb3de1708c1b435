"""Counting conditions on finite sample sets.

Three families of inequalities are checked, each over the window
``[t_0, t_k]`` of an atlas of degree ``m`` with multiplicities ``m_l``:

``linear_V``
    ``E`` determines every ``f`` of the (real) spline space linearly.
``phaseless_V``
    ``|f|`` on ``E`` determines every nonseparable real ``f`` up to sign.
``linear_squared``
    ``E`` determines every ``|f|^2`` (``f`` real or complex) linearly.

Every count uses exact rational comparisons on intervals of the form
``[t_0, t_i)``, ``(t_i, t_k]`` and ``(t_i, t_j)``.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import KnotSystemError, OutOfWindow
from .knot_core import BasisAtlas, Window, to_rational

__all__ = [
    "MODES",
    "ConditionReport",
    "SampleSet",
    "Violation",
    "cardinality_bound",
    "check",
    "check_linear_V",
    "check_linear_squared",
    "check_phaseless_V",
    "find_sampled_subwindow",
    "minimal_sequence",
]

LINEAR_V = "linear_V"
PHASELESS_V = "phaseless_V"
LINEAR_SQUARED = "linear_squared"
MODES = (LINEAR_V, PHASELESS_V, LINEAR_SQUARED)

# condition ids, in the order they are reported
CARDINALITY = "cardinality"
LEFT = "left"
RIGHT = "right"
INTERVAL = "interval"


class SampleSet(tuple):
    """Strictly increasing tuple of exact rational abscissae.

    ``SampleSet.of(points)`` sorts first; the plain constructor insists on
    strictly increasing input.
    """

    def __new__(cls, points: Iterable = ()):
        pts = tuple(to_rational(p) for p in points)
        for a, b in zip(pts, pts[1:]):
            if not a < b:
                raise ValueError(f"sample points must be strictly increasing: {a} !< {b}")
        return super().__new__(cls, pts)

    @classmethod
    def of(cls, points: Iterable) -> SampleSet:
        pts = sorted(to_rational(p) for p in points)
        for a, b in zip(pts, pts[1:]):
            if a == b:
                raise ValueError(f"duplicate sample point {a}")
        return cls(pts)

    def __repr__(self):
        return f"SampleSet({[str(p) for p in self]})"

    @property
    def points(self) -> tuple[Fraction, ...]:
        return tuple(self)

    def within(self, lo, hi) -> SampleSet:
        """Points in the closed interval ``[lo, hi]``."""
        return SampleSet(self[bisect_left(self, lo) : bisect_right(self, hi)])

    def count_closed_open(self, a, b) -> int:
        return max(0, bisect_left(self, b) - bisect_left(self, a))

    def count_open_closed(self, a, b) -> int:
        return max(0, bisect_right(self, b) - bisect_right(self, a))

    def count_open(self, a, b) -> int:
        return max(0, bisect_left(self, b) - bisect_right(self, a))

    def without(self, index: int) -> SampleSet:
        return SampleSet(self[:index] + self[index + 1:])


@dataclass(frozen=True)
class Violation:
    """One failing inequality: ``actual < required``.

    ``interval`` holds the breakpoint indices the count ranges over:
    ``()`` for the cardinality condition, ``(i,)`` for ``[t_0, t_i)`` or
    ``(t_i, t_k]`` and ``(i, j)`` for ``(t_i, t_j)``.
    """

    condition: str
    interval: tuple[int, ...]
    required: int
    actual: int

    def describe(self) -> str:
        where = {
            CARDINALITY: "#E",
            LEFT: "#(E & [t_0, t_{}))",
            RIGHT: "#(E & (t_{}, t_k])",
            INTERVAL: "#(E & (t_{}, t_{}))",
        }[self.condition].format(*self.interval)
        return f"{self.condition}: {where} = {self.actual} < {self.required}"


@dataclass(frozen=True)
class ConditionReport:
    mode: str
    violations: tuple[Violation, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.passed

    def families(self) -> set[str]:
        return {v.condition for v in self.violations}

    def summary(self) -> str:
        if self.passed:
            return "passed"
        return "; ".join(v.describe() for v in self.violations)


def _as_samples(E) -> SampleSet:
    return E if isinstance(E, SampleSet) else SampleSet.of(E)


def _require_in_window(atlas: BasisAtlas, E: SampleSet) -> None:
    if E and (E[0] < atlas.start or E[-1] > atlas.end):
        bad = E[0] if E[0] < atlas.start else E[-1]
        raise OutOfWindow(f"sample point {bad} outside the window [{atlas.start}, {atlas.end}]")


class _Requirements:
    """Required counts for each condition of one mode."""

    def __init__(self, atlas: BasisAtlas, mode: str):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
        self.mode = mode
        self.k = atlas.k
        m = atlas.degree
        mu = [atlas.mult(i) for i in range(self.k + 1)]
        self.m, self.mu = m, mu
        if mode == LINEAR_V:
            self.deg, self.w = m, mu
        elif mode == LINEAR_SQUARED:
            self.deg, self.w = 2 * m, [m + v for v in mu]

    def _s(self, a, b):
        # sum of weights w_a .. w_b inclusive
        return sum(self.w[a : b + 1]) if b >= a else 0

    def cardinality(self) -> int:
        if self.mode == PHASELESS_V:
            return 2 * self.m + 1 + 2 * sum(self.mu[1 : self.k])
        return self.deg + 1 + self._s(1, self.k - 1)

    def left(self, i) -> int:
        if self.mode == PHASELESS_V:
            return self.m + self.mu[i] + 2 * sum(self.mu[1:i])
        return self._s(1, i)

    def right(self, i) -> int:
        if self.mode == PHASELESS_V:
            return self.m + self.mu[i] + 2 * sum(self.mu[i + 1 : self.k])
        return self._s(i, self.k - 1)

    def interval(self, i, j) -> int:
        if self.mode == PHASELESS_V:
            return self.mu[i] + self.mu[j] - 1 + 2 * sum(self.mu[i + 1 : j])
        return self._s(i, j) - self.deg - 1


def cardinality_bound(atlas: BasisAtlas, mode: str) -> int:
    """Smallest number of points that can satisfy ``mode``."""
    return _Requirements(atlas, mode).cardinality()


def required_count(atlas: BasisAtlas, mode: str, condition: str, interval: tuple[int, ...]) -> int:
    req = _Requirements(atlas, mode)
    return getattr(req, condition)(*interval)


def actual_count(atlas: BasisAtlas, E, condition: str, interval: tuple[int, ...]) -> int:
    """Recount one condition directly from the point set."""
    E = _as_samples(E)
    t = atlas.t
    if condition == CARDINALITY:
        return len(E)
    if condition == LEFT:
        return E.count_closed_open(t(0), t(interval[0]))
    if condition == RIGHT:
        return E.count_open_closed(t(interval[0]), t(atlas.k))
    if condition == INTERVAL:
        return E.count_open(t(interval[0]), t(interval[1]))
    raise ValueError(f"unknown condition {condition!r}")


def check(atlas: BasisAtlas, E, mode: str) -> ConditionReport:
    """Check every inequality of ``mode`` and list each failing instance."""
    E = _as_samples(E)
    _require_in_window(atlas, E)
    req = _Requirements(atlas, mode)
    k = atlas.k
    t = [atlas.t(i) for i in range(k + 1)]
    out = []

    need = req.cardinality()
    if len(E) < need:
        out.append(Violation(CARDINALITY, (), need, len(E)))
    for i in range(1, k + 1):
        need, have = req.left(i), E.count_closed_open(t[0], t[i])
        if have < need:
            out.append(Violation(LEFT, (i,), need, have))
    for i in range(0, k):
        need, have = req.right(i), E.count_open_closed(t[i], t[k])
        if have < need:
            out.append(Violation(RIGHT, (i,), need, have))
    for i in range(0, k):
        for j in range(i + 1, k + 1):
            need, have = req.interval(i, j), E.count_open(t[i], t[j])
            if have < need:
                out.append(Violation(INTERVAL, (i, j), need, have))
    return ConditionReport(mode, tuple(out))


def check_linear_V(atlas: BasisAtlas, E) -> ConditionReport:
    """Is ``E`` a linear sampling set for the spline space on the window?"""
    return check(atlas, E, LINEAR_V)


def check_phaseless_V(atlas: BasisAtlas, E) -> ConditionReport:
    """Is ``E`` a phaseless sampling set for nonseparable real splines on the window?"""
    return check(atlas, E, PHASELESS_V)


def check_linear_squared(atlas: BasisAtlas, E) -> ConditionReport:
    """Is ``E`` a linear sampling set for the squared moduli ``|f|^2`` on the window?"""
    return check(atlas, E, LINEAR_SQUARED)


def find_sampled_subwindow(atlas: BasisAtlas, E) -> Window | None:
    """First sub-window ``[t_{n1}, t_{n2}]`` (lexicographic) on which ``E`` samples linearly.

    Returns the sub-window in storage indices, or ``None`` when none passes.
    A passing sub-window always exists once ``#E >= dim``.
    """
    E = _as_samples(E)
    _require_in_window(atlas, E)
    for n1 in range(atlas.k):
        for n2 in range(n1 + 1, atlas.k + 1):
            sub = atlas.restrict(n1, n2)
            local = E.within(atlas.t(n1), atlas.t(n2))
            if check_linear_V(sub, local).passed:
                return sub.window
    return None


def _spread(a: Fraction, b: Fraction, count: int) -> list[Fraction]:
    """``count`` equally spaced points strictly inside ``(a, b)``."""
    return [a + (b - a) * Fraction(r, count + 1) for r in range(1, count + 1)]


def _greville(atlas: BasisAtlas, degree: int, weights: list[int]) -> list[Fraction]:
    # Greville abscissae of the clamped basis on [t_0, t_k]
    k = atlas.k
    flat = [atlas.t(0)] * (degree + 1)
    for i in range(1, k):
        flat.extend([atlas.t(i)] * weights[i])
    flat.extend([atlas.t(k)] * (degree + 1))
    count = len(flat) - degree - 1
    return [sum(flat[j + 1 : j + degree + 1], Fraction(0)) / degree for j in range(count)]


def minimal_sequence(atlas: BasisAtlas, mode: str) -> SampleSet:
    """A sample set of the least possible size that passes ``mode``.

    The linear modes use the Greville abscissae of the clamped basis of the
    matching space (degree ``m`` with ``m_l``, or ``2m`` with ``m + m_l``).
    ``phaseless_V`` takes every window breakpoint, ``m_{j-1} + m_j - 1``
    equally spaced points inside each interval ``(t_{j-1}, t_j)``, plus
    ``m - m_0`` extra points in the first interval and ``m - m_k`` in the
    last one.
    """
    req = _Requirements(atlas, mode)
    k, m = atlas.k, atlas.degree
    if mode == LINEAR_V:
        pts = _greville(atlas, m, [atlas.mult(i) for i in range(k + 1)])
    elif mode == LINEAR_SQUARED:
        pts = _greville(atlas, 2 * m, [m + atlas.mult(i) for i in range(k + 1)])
    else:
        counts = [atlas.mult(j - 1) + atlas.mult(j) - 1 for j in range(1, k + 1)]
        counts[0] += m - atlas.mult(0)
        counts[-1] += m - atlas.mult(k)
        pts = [atlas.t(i) for i in range(k + 1)]
        for j, c in enumerate(counts, start=1):
            pts.extend(_spread(atlas.t(j - 1), atlas.t(j), c))
    E = SampleSet.of(pts)
    if len(E) != req.cardinality() or not check(atlas, E, mode).passed:
        raise KnotSystemError(f"internal error: minimal {mode} sequence does not pass")
    return E
