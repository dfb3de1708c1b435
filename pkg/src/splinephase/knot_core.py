"""Knot systems with multiplicities and the atlas of B-splines meeting a window.

Breakpoints are held as exact rationals; they are converted to binary floating
point only when B-spline values are computed.

Indexing convention
-------------------
A :class:`KnotSystem` stores breakpoints ``t_0 < t_1 < ...`` by *storage*
index. A :class:`Window` picks two stored breakpoints as the ends of the
working interval. Everything downstream of :func:`build_atlas` uses indices
*relative* to the window start, so the working interval is always
``[t(0), t(k)]`` and padding breakpoints carry negative indices or indices
beyond ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, total_ordering
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidMultiplicity,
    KnotSystemError,
    NonIncreasingKnots,
    PaddingInsufficient,
    UnknownPair,
)

__all__ = [
    "BasisAtlas",
    "IndexPair",
    "KnotSystem",
    "Window",
    "bspline_basis",
    "bspline_value",
    "build_atlas",
    "format_rational",
    "pad_system",
    "to_rational",
    "uniform_system",
]


def to_rational(value) -> Fraction:
    """Convert ``value`` to an exact :class:`~fractions.Fraction`.

    Strings are parsed exactly (``"0.1"`` is one tenth, ``"1/3"`` is a
    third). Floats are converted via their exact binary value, so prefer
    strings whenever the decimal text is available.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("booleans are not abscissae")
    if isinstance(value, (int, Rational, np.integer)):
        return Fraction(int(value)) if isinstance(value, np.integer) else Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not an exact decimal or rational: {value!r}") from None
    if isinstance(value, (float, np.floating)):
        if not np.isfinite(value):
            raise ValueError(f"non-finite abscissa: {value!r}")
        return Fraction(float(value))
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def format_rational(value: Fraction) -> str:
    """Shortest exact text for ``value``: a terminating decimal when one exists."""
    value = to_rational(value)
    if value.denominator == 1:
        return str(value.numerator)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    scaled = abs(value) * 10**digits
    assert scaled.denominator == 1
    text = str(scaled.numerator).rjust(digits + 1, "0")
    text = f"{text[:-digits]}.{text[-digits:]}".rstrip("0").rstrip(".")
    return f"-{text}" if value < 0 else text


@dataclass(frozen=True)
class KnotSystem:
    """Degree, strictly increasing breakpoints and their multiplicities.

    Every multiplicity must lie in ``[1, degree]``, so every B-spline of the
    system is continuous.
    """

    degree: int
    breakpoints: tuple[Fraction, ...]
    multiplicities: tuple[int, ...]

    def __post_init__(self):
        degree = int(self.degree)
        if degree < 1:
            raise KnotSystemError(f"degree must be a positive integer, got {self.degree!r}")
        bps = tuple(to_rational(b) for b in self.breakpoints)
        mults = tuple(int(v) for v in self.multiplicities)
        if len(bps) != len(mults):
            raise KnotSystemError(
                f"{len(bps)} breakpoints but {len(mults)} multiplicities"
            )
        for idx in range(len(bps) - 1):
            if not bps[idx] < bps[idx + 1]:
                raise NonIncreasingKnots(
                    f"breakpoints must be strictly increasing: "
                    f"t[{idx}]={bps[idx]} >= t[{idx + 1}]={bps[idx + 1]}"
                )
        for idx, mult in enumerate(mults):
            if not 1 <= mult <= degree:
                raise InvalidMultiplicity(
                    f"multiplicity of t[{idx}]={bps[idx]} is {mult}; must be in [1, {degree}]"
                )
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "multiplicities", mults)

    def __len__(self):
        return len(self.breakpoints)

    def with_multiplicities(self, degree: int, multiplicities: Iterable[int]) -> KnotSystem:
        return KnotSystem(degree, self.breakpoints, tuple(multiplicities))


@dataclass(frozen=True)
class Window:
    """Working interval ``[t[start_index], t[end_index]]`` by storage index."""

    start_index: int
    end_index: int

    def __post_init__(self):
        if not self.start_index < self.end_index:
            raise KnotSystemError(
                f"window start index {self.start_index} must be below end index {self.end_index}"
            )

    @property
    def k(self) -> int:
        return self.end_index - self.start_index


@total_ordering
@dataclass(frozen=True)
class IndexPair:
    """Label ``(i, l)`` of the B-spline starting with ``l`` copies of ``t_i``.

    Ordering: ``(i, l) < (i', l')`` iff ``i < i'``, or ``i == i'`` and
    ``l > l'``. This is the order in which the B-splines start along the
    knot vector.
    """

    i: int
    l: int

    def sort_key(self) -> tuple[int, int]:
        return (self.i, -self.l)

    def __lt__(self, other):
        if not isinstance(other, IndexPair):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    def __repr__(self):
        return f"IndexPair({self.i}, {self.l})"


def _check_padding(ks: KnotSystem, w: Window) -> None:
    n = len(ks)
    if not (0 <= w.start_index < w.end_index < n):
        raise KnotSystemError(
            f"window indices ({w.start_index}, {w.end_index}) outside 0..{n - 1}"
        )
    need = ks.degree + 1
    left = sum(ks.multiplicities[: w.start_index])
    right = sum(ks.multiplicities[w.end_index + 1:])
    if left < need:
        raise PaddingInsufficient(
            f"total multiplicity left of the window is {left}; degree {ks.degree} needs {need}"
        )
    if right < need:
        raise PaddingInsufficient(
            f"total multiplicity right of the window is {right}; degree {ks.degree} needs {need}"
        )


class BasisAtlas:
    """Ordered B-splines ``Q_{i,l}`` whose support meets the open window.

    Build instances with :func:`build_atlas`. All indices are relative to the
    window start. Instances are immutable.
    """

    def __init__(self, system: KnotSystem, window: Window, pairs, knot_indices):
        self._system = system
        self._window = window
        self._pairs = tuple(pairs)
        self._knot_indices = tuple(tuple(ki) for ki in knot_indices)
        self._position = {p: n for n, p in enumerate(self._pairs)}

    def __repr__(self):
        return (
            f"BasisAtlas(degree={self.degree}, k={self.k}, "
            f"window=[{self.start}, {self.end}], size={len(self)})"
        )

    def __len__(self):
        return len(self._pairs)

    def __iter__(self):
        return iter(self._pairs)

    def __contains__(self, pair):
        return pair in self._position

    def __eq__(self, other):
        if not isinstance(other, BasisAtlas):
            return NotImplemented
        return self._system == other._system and self._window == other._window

    def __hash__(self):
        return hash((self._system, self._window))

    @property
    def system(self) -> KnotSystem:
        return self._system

    @property
    def window(self) -> Window:
        return self._window

    @property
    def pairs(self) -> tuple[IndexPair, ...]:
        return self._pairs

    @property
    def degree(self) -> int:
        return self._system.degree

    @property
    def k(self) -> int:
        return self._window.k

    @property
    def dimension(self) -> int:
        return len(self._pairs)

    def t(self, i: int) -> Fraction:
        """Breakpoint with window-relative index ``i``."""
        return self._system.breakpoints[self._window.start_index + i]

    def mult(self, i: int) -> int:
        return self._system.multiplicities[self._window.start_index + i]

    @property
    def start(self) -> Fraction:
        return self.t(0)

    @property
    def end(self) -> Fraction:
        return self.t(self.k)

    @cached_property
    def interior_breakpoints(self) -> tuple[Fraction, ...]:
        return tuple(self.t(i) for i in range(self.k + 1))

    def index(self, pair: IndexPair) -> int:
        try:
            return self._position[pair]
        except KeyError:
            raise UnknownPair(f"{pair!r} is not in this atlas") from None

    def knot_indices(self, pair: IndexPair) -> tuple[int, ...]:
        """Relative breakpoint index of each of the ``degree + 2`` knots, with repeats."""
        return self._knot_indices[self.index(pair)]

    def knots(self, pair: IndexPair) -> tuple[Fraction, ...]:
        return tuple(self.t(i) for i in self.knot_indices(pair))

    def support_indices(self, pair: IndexPair) -> tuple[int, int]:
        ki = self.knot_indices(pair)
        return ki[0], ki[-1]

    def support(self, pair: IndexPair) -> tuple[Fraction, Fraction]:
        a, b = self.support_indices(pair)
        return self.t(a), self.t(b)

    @cached_property
    def first_indices(self) -> np.ndarray:
        return np.array([ki[0] for ki in self._knot_indices], dtype=int)

    @cached_property
    def last_indices(self) -> np.ndarray:
        return np.array([ki[-1] for ki in self._knot_indices], dtype=int)

    def r_pair(self, i: int) -> IndexPair:
        """The B-spline whose knots end with a single copy of ``t_i``."""
        for pair, ki in zip(self._pairs, self._knot_indices):
            if ki[-1] == i and ki[-2] != i:
                return pair
        raise UnknownPair(f"no atlas B-spline ends with a single t_{i}")

    def q_pair(self, i: int, l: int = 1) -> IndexPair:
        pair = IndexPair(i, l)
        self.index(pair)
        return pair

    def covering(self, a: int, b: int) -> list[int]:
        """Positions of B-splines whose support contains ``(t_a, t_b)``."""
        return [
            n for n, ki in enumerate(self._knot_indices) if ki[0] <= a and ki[-1] >= b
        ]

    @cached_property
    def _float_knots(self) -> np.ndarray:
        return np.array(
            [[float(self.t(i)) for i in ki] for ki in self._knot_indices], dtype=float
        )

    def _prepare_points(self, points) -> tuple[np.ndarray, np.ndarray]:
        pts = list(points) if not isinstance(points, np.ndarray) else points
        end = self.end
        from_left = np.array(
            [
                (p == end) if isinstance(p, (Fraction, int, np.integer)) else float(p) == float(end)
                for p in pts
            ],
            dtype=bool,
        )
        x = np.array([float(p) for p in pts], dtype=float)
        return x, from_left

    def collocation(self, points, pairs: Sequence[IndexPair] | None = None) -> np.ndarray:
        """Matrix ``[Q_j(x_n)]`` with rows in point order and columns in atlas order."""
        x, from_left = self._prepare_points(points)
        cols = range(len(self)) if pairs is None else [self.index(p) for p in pairs]
        out = np.zeros((x.size, len(cols)))
        for j, n in enumerate(cols):
            out[:, j] = bspline_basis(self._float_knots[n], x, from_left=from_left)
        return out

    def restrict(self, n1: int, n2: int) -> BasisAtlas:
        """Atlas of the same system over the sub-window ``[t_{n1}, t_{n2}]``."""
        if not 0 <= n1 < n2 <= self.k:
            raise KnotSystemError(f"sub-window ({n1}, {n2}) not inside [0, {self.k}]")
        s = self._window.start_index
        return build_atlas(self._system, Window(s + n1, s + n2))


def build_atlas(ks: KnotSystem, w: Window) -> BasisAtlas:
    """Enumerate the B-splines of ``ks`` whose support meets ``(t_0, t_k)``.

    Pairs come out in the :class:`IndexPair` order. Their number is
    ``degree + 1 + sum(m_1 .. m_{k-1})``.

    Raises
    ------
    PaddingInsufficient
        If fewer than ``degree + 1`` knots (counted with multiplicity) lie
        strictly outside the window on either side.
    """
    _check_padding(ks, w)
    m = ks.degree
    s = w.start_index
    # flat knot vector of relative breakpoint indices
    flat: list[int] = []
    first_pos: list[int] = []
    for idx, mult in enumerate(ks.multiplicities):
        first_pos.append(len(flat))
        flat.extend([idx - s] * mult)

    pairs, knot_indices = [], []
    for idx, mult in enumerate(ks.multiplicities):
        rel = idx - s
        for l in range(mult, 0, -1):
            p = first_pos[idx] + mult - l
            if p + m + 2 > len(flat):
                continue
            ki = flat[p : p + m + 2]
            if ki[0] < w.k and ki[-1] > 0:
                pairs.append(IndexPair(rel, l))
                knot_indices.append(ki)

    expected = m + 1 + sum(ks.multiplicities[s + 1 : w.end_index])
    assert len(pairs) == expected, (len(pairs), expected)
    return BasisAtlas(ks, w, pairs, knot_indices)


def bspline_basis(knots, x, from_left=False) -> np.ndarray:
    """Evaluate the normalized B-spline with knot sequence ``knots`` at ``x``.

    Cox-de Boor recursion with ``0/0 := 0``. The degree is
    ``len(knots) - 2``. Values are right-continuous, except where
    ``from_left`` is true, where the left limit is returned instead.

    Parameters
    ----------
    knots : sequence of float
        Non-decreasing knots, repeats allowed.
    x : float or array_like
    from_left : bool or array_like of bool
        Broadcastable against ``x``.
    """
    t = np.asarray(knots, dtype=float)
    xs = np.asarray(x, dtype=float)
    left_side = np.broadcast_to(np.asarray(from_left, dtype=bool), xs.shape)
    deg = t.size - 2
    if deg < 0:
        raise ValueError("a B-spline needs at least two knots")

    right_ind = (t[:-1, None] <= xs.ravel()) & (xs.ravel() < t[1:, None])
    left_ind = (t[:-1, None] < xs.ravel()) & (xs.ravel() <= t[1:, None])
    vals = np.where(left_side.ravel(), left_ind, right_ind).astype(float)

    xr = xs.ravel()
    for d in range(1, deg + 1):
        nxt = np.zeros((deg + 1 - d, xr.size))
        for j in range(deg + 1 - d):
            den_a = t[j + d] - t[j]
            den_b = t[j + d + 1] - t[j + 1]
            if den_a > 0:
                nxt[j] += (xr - t[j]) / den_a * vals[j]
            if den_b > 0:
                nxt[j] += (t[j + d + 1] - xr) / den_b * vals[j + 1]
        vals = nxt
    out = vals[0].reshape(xs.shape)
    return out if out.ndim else float(out)


def bspline_value(atlas: BasisAtlas, p: IndexPair, x) -> float:
    """Value of the atlas B-spline ``p`` at ``x``.

    Zero outside the support, right-continuous at knots, and the left limit
    at the window's right endpoint.
    """
    n = atlas.index(p)
    xq = to_rational(x) if not isinstance(x, float) else x
    at_end = (xq == atlas.end) if isinstance(xq, Fraction) else float(xq) == float(atlas.end)
    return float(bspline_basis(atlas._float_knots[n], float(xq), from_left=at_end))


def uniform_system(
    degree: int,
    k: int,
    multiplicities: Sequence[int] | None = None,
    start=0,
    spacing=1,
) -> tuple[KnotSystem, Window]:
    """Equally spaced breakpoints with a window of ``k`` intervals.

    ``multiplicities`` gives ``m_0 .. m_k`` for the window breakpoints
    (default all ones); ``degree + 1`` simple padding breakpoints are added on
    each side.
    """
    if k < 1:
        raise KnotSystemError("a window needs k >= 1 intervals")
    if multiplicities is None:
        multiplicities = [1] * (k + 1)
    if len(multiplicities) != k + 1:
        raise KnotSystemError(f"expected {k + 1} window multiplicities, got {len(multiplicities)}")
    pad = degree + 1
    start, spacing = to_rational(start), to_rational(spacing)
    bps = [start + spacing * j for j in range(-pad, k + pad + 1)]
    mults = [1] * pad + list(multiplicities) + [1] * pad
    return KnotSystem(degree, tuple(bps), tuple(mults)), Window(pad, pad + k)


def pad_system(ks: KnotSystem, w: Window) -> tuple[KnotSystem, Window]:
    """Append simple breakpoints outside the window until padding suffices.

    New breakpoints continue the spacing of the outermost stored interval on
    each side (or the adjacent window interval when nothing is stored
    there).
    """
    bps = list(ks.breakpoints)
    mults = list(ks.multiplicities)
    start, end = w.start_index, w.end_index
    need = ks.degree + 1
    while sum(mults[:start]) < need:
        step = bps[1] - bps[0]
        bps.insert(0, bps[0] - step)
        mults.insert(0, 1)
        start += 1
        end += 1
    while sum(mults[end + 1:]) < need:
        step = bps[-1] - bps[-2]
        bps.append(bps[-1] + step)
        mults.append(1)
    return KnotSystem(ks.degree, tuple(bps), tuple(mults)), Window(start, end)
