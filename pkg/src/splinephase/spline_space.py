"""Real and complex spline functions over an atlas, and separability."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .config import resolve_rtol
from .errors import OutOfWindow, SizeMismatch
from .knot_core import BasisAtlas, to_rational

__all__ = [
    "SeparabilityReport",
    "SplineFunction",
    "evaluate",
    "separability_split",
    "space_dimension",
]


def _is_exact(c) -> bool:
    return isinstance(c, (Rational, np.integer)) and not isinstance(c, bool)


@dataclass(frozen=True, eq=False)
class SplineFunction:
    """``sum_j c_j Q_j`` with coefficients in atlas order.

    Coefficients may be exact rationals, floats or complex numbers.
    """

    atlas: BasisAtlas
    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(self.coefficients)
        if len(coeffs) != len(self.atlas):
            raise SizeMismatch(
                f"{len(coeffs)} coefficients for an atlas of dimension {len(self.atlas)}"
            )
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def scalar_kind(self) -> str:
        if any(isinstance(c, (complex, np.complexfloating)) for c in self.coefficients):
            return "complex"
        return "real"

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(c) for c in self.coefficients)

    def as_array(self) -> np.ndarray:
        if self.scalar_kind == "complex":
            return np.array([complex(c) for c in self.coefficients], dtype=complex)
        return np.array([float(c) for c in self.coefficients], dtype=float)

    def __call__(self, x):
        return evaluate(self, x)

    def __add__(self, other):
        _same_atlas(self, other)
        return SplineFunction(self.atlas, tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def __sub__(self, other):
        _same_atlas(self, other)
        return SplineFunction(self.atlas, tuple(a - b for a, b in zip(self.coefficients, other.coefficients)))

    def __neg__(self):
        return SplineFunction(self.atlas, tuple(-c for c in self.coefficients))

    def scale(self, factor) -> SplineFunction:
        return SplineFunction(self.atlas, tuple(factor * c for c in self.coefficients))

    def conjugate(self) -> SplineFunction:
        return SplineFunction(self.atlas, tuple(c.conjugate() for c in self.coefficients))


def _same_atlas(f: SplineFunction, g: SplineFunction) -> None:
    if f.atlas != g.atlas:
        raise SizeMismatch("spline functions live on different atlases")


def _check_in_window(atlas: BasisAtlas, points) -> None:
    lo, hi = atlas.start, atlas.end
    for p in points:
        if isinstance(p, (Fraction, int, np.integer)):
            bad = not (lo <= p <= hi)
        else:
            bad = not (float(lo) <= float(p) <= float(hi))
        if bad:
            raise OutOfWindow(f"x={p} lies outside the window [{lo}, {hi}]")


def evaluate(f: SplineFunction, x):
    """Evaluate ``f`` at a scalar or at each entry of a sequence.

    Raises
    ------
    OutOfWindow
        If any abscissa lies outside ``[t_0, t_k]``.
    """
    scalar = np.ndim(x) == 0 and not isinstance(x, (list, tuple))
    pts = [x] if scalar else list(x)
    _check_in_window(f.atlas, pts)
    vals = f.atlas.collocation(pts) @ f.as_array()
    return vals[0] if scalar else vals


def space_dimension(atlas: BasisAtlas) -> int:
    return len(atlas)


@dataclass(frozen=True, eq=False)
class SeparabilityReport:
    """Outcome of :func:`separability_split`.

    ``split_indices`` lists every interior breakpoint index at which ``f``
    splits; ``components`` is the decomposition at the first of them.
    """

    separable: bool
    split_indices: tuple[int, ...] = ()
    components: tuple[SplineFunction, SplineFunction] | None = field(default=None, repr=False)


def _nonzero_mask(f: SplineFunction, rtol: float | None) -> np.ndarray:
    if f.is_exact:
        return np.array([c != 0 for c in f.coefficients], dtype=bool)
    mags = np.abs(f.as_array())
    scale = mags.max() if mags.size else 0.0
    if scale == 0.0:
        return np.zeros(mags.shape, dtype=bool)
    return mags > resolve_rtol(rtol) * scale


def separability_split(f: SplineFunction, rtol: float | None = None) -> SeparabilityReport:
    """Find every interior ``n0`` at which ``f`` splits into two disjoint pieces.

    ``f`` splits at ``n0`` when every B-spline whose support contains
    ``(t_{n0-1}, t_{n0+1})`` has a zero coefficient while ``f`` is nonzero
    both on ``[t_0, t_{n0}]`` and on ``[t_{n0}, t_k]``.

    Exact coefficients are compared with zero exactly; floating coefficients
    count as zero below ``rtol * max|c|``.
    """
    atlas = f.atlas
    nz = _nonzero_mask(f, rtol)
    first, last = atlas.first_indices, atlas.last_indices
    splits = []
    for n0 in range(1, atlas.k):
        crossing = (first <= n0 - 1) & (last >= n0 + 1)
        if nz[crossing].any():
            continue
        left_alive = nz[first < n0].any()
        right_alive = nz[last > n0].any()
        if left_alive and right_alive:
            splits.append(n0)
    if not splits:
        return SeparabilityReport(False)

    n0 = splits[0]
    zero = Fraction(0) if f.is_exact else 0.0
    coeffs = f.coefficients
    left = tuple(c if (last[j] <= n0 and nz[j]) else zero for j, c in enumerate(coeffs))
    right = tuple(c if (first[j] >= n0 and nz[j]) else zero for j, c in enumerate(coeffs))
    return SeparabilityReport(True, tuple(splits), (SplineFunction(atlas, left), SplineFunction(atlas, right)))


def from_values(atlas: BasisAtlas, coefficients) -> SplineFunction:
    """Build a spline from any sequence; strings are parsed as exact rationals."""
    return SplineFunction(atlas, tuple(to_rational(c) if isinstance(c, str) else c for c in coefficients))
