"""The span of squared moduli ``|f|^2`` on a window.

Two descriptions of the same space are provided:

* a basis of products ``Q * Q'`` of pairs of atlas B-splines, built by
  :func:`product_basis`;
* the degree ``2m`` spline space over the same breakpoints with
  multiplicities ``m + m_i``, built by :func:`tilde_system`.

Both have dimension ``M_k = k*m + N_{0,k}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import resolve_rtol
from .errors import IllConditioned, IndexOutOfRange, KnotSystemError
from .knot_core import BasisAtlas, IndexPair, KnotSystem, Window, bspline_value, build_atlas
from .sampling_conditions import LINEAR_V, SampleSet, check, minimal_sequence
from .spline_space import SplineFunction, evaluate

__all__ = [
    "FAMILY_ENDPOINT",
    "FAMILY_INTERIOR",
    "FAMILY_START",
    "SquaredBasis",
    "evaluate_product",
    "product_basis",
    "square_function",
    "squared_dimension",
    "tilde_system",
]

# family tags of the product basis, in list order
FAMILY_START = 1  # R_1 * Q, supp Q containing (t_0, t_1)
FAMILY_INTERIOR = 2  # Q_{i,1} * Q, supp Q containing (t_i, t_{i+1}), Q != R_{i+1}
FAMILY_ENDPOINT = 3  # R_{i+1} * Q_{i,l}, 1 <= i <= k-1


def squared_dimension(atlas: BasisAtlas) -> int:
    """``M_k = k*m + N_{0,k}``."""
    return atlas.k * atlas.degree + len(atlas)


def tilde_system(ks: KnotSystem, w: Window) -> BasisAtlas:
    """Atlas of degree ``2m`` over the same breakpoints with multiplicities ``m + m_i``.

    Raises
    ------
    PaddingInsufficient
        If the raised multiplicities still leave too little padding. This
        cannot happen when ``(ks, w)`` is itself adequately padded.
    """
    m = ks.degree
    tilde = ks.with_multiplicities(2 * m, [m + v for v in ks.multiplicities])
    return build_atlas(tilde, w)


@dataclass(frozen=True, eq=False)
class SquaredBasis:
    """Ordered product basis ``h_1 .. h_{M_k}`` together with the tilde atlas.

    ``products[j]`` holds the two factor labels of ``h_j`` and
    ``families[j]`` its family tag (1, 2 or 3).
    """

    atlas: BasisAtlas
    tilde_atlas: BasisAtlas
    products: tuple[tuple[IndexPair, IndexPair], ...]
    families: tuple[int, ...]

    def __len__(self):
        return len(self.products)

    @property
    def dimension(self) -> int:
        return len(self.products)

    def family(self, tag: int) -> list[int]:
        return [j for j, f in enumerate(self.families) if f == tag]

    def collocation(self, points) -> np.ndarray:
        """Matrix ``[h_j(x_n)]`` with rows in point order and columns in product order."""
        base = self.atlas.collocation(points)
        left = [self.atlas.index(p) for p, _ in self.products]
        right = [self.atlas.index(q) for _, q in self.products]
        return base[:, left] * base[:, right]


def _enumerate_products(atlas: BasisAtlas):
    k = atlas.k
    pairs = atlas.pairs
    out: list[tuple[IndexPair, IndexPair]] = []
    tags: list[int] = []

    r1 = atlas.r_pair(1)
    for n in atlas.covering(0, 1):
        out.append((r1, pairs[n]))
        tags.append(FAMILY_START)

    for i in range(k):
        q = atlas.q_pair(i, 1)
        r_next = atlas.r_pair(i + 1)
        for n in atlas.covering(i, i + 1):
            if pairs[n] != r_next:
                out.append((q, pairs[n]))
                tags.append(FAMILY_INTERIOR)

    for i in range(1, k):
        r_next = atlas.r_pair(i + 1)
        for l in range(1, atlas.mult(i) + 1):
            out.append((r_next, atlas.q_pair(i, l)))
            tags.append(FAMILY_ENDPOINT)
    return out, tags


@lru_cache(maxsize=128)
def product_basis(atlas: BasisAtlas) -> SquaredBasis:
    """Build the product basis of the squared-modulus space over ``atlas``'s window.

    Family 1 comes first, then family 2 ordered by ``i`` and then by the
    partner's atlas position, then family 3 ordered by ``(i, l)``.
    """
    products, tags = _enumerate_products(atlas)
    expected = squared_dimension(atlas)
    if len(products) != expected or len({frozenset(p) for p in products}) != expected:
        raise KnotSystemError(
            f"internal error: {len(products)} products enumerated, expected {expected} distinct"
        )
    tilde = tilde_system(atlas.system, atlas.window)
    return SquaredBasis(atlas, tilde, tuple(products), tuple(tags))


def evaluate_product(sb: SquaredBasis, index: int, x) -> float:
    """Value ``h_index(x)``; ``index`` is 0-based in product order."""
    if not 0 <= index < len(sb):
        raise IndexOutOfRange(f"product index {index} not in [0, {len(sb)})")
    p, q = sb.products[index]
    return bspline_value(sb.atlas, p, x) * bspline_value(sb.atlas, q, x)


def _check_points(atlas: BasisAtlas, f: SplineFunction, pts, tilde: BasisAtlas):
    values = np.abs(np.asarray(evaluate(f, list(pts)), dtype=complex)) ** 2
    B = tilde.collocation(pts)
    coeffs = np.linalg.solve(B, values)

    # probe between consecutive sample points and at the window ends
    ends = [atlas.start] + list(pts) + [atlas.end]
    probes = sorted({(a + b) / 2 for a, b in zip(ends, ends[1:])})
    exact = np.abs(np.asarray(evaluate(f, probes), dtype=complex)) ** 2
    fitted = tilde.collocation(probes) @ coeffs
    scale = 1.0 + max(float(np.max(values, initial=0.0)), float(np.max(exact, initial=0.0)))
    return coeffs, float(np.max(np.abs(fitted - exact), initial=0.0)), scale


def _perturbed(atlas: BasisAtlas, pts: SampleSet) -> SampleSet:
    # nudge every point a seventh of the way toward its right neighbour
    ends = list(pts) + [atlas.end]
    moved = [p + (q - p) / 7 if q > p else p for p, q in zip(pts, ends[1:])]
    moved[-1] = pts[-1]
    return SampleSet.of(moved)


def square_function(f: SplineFunction, rtol: float | None = None) -> SplineFunction:
    """Express ``|f|^2`` on the window as a spline over the tilde atlas.

    ``|f|^2`` is sampled at a minimal linear sampling set of the tilde space
    and the square collocation system is solved. The fit is then checked
    between the sample points.

    Raises
    ------
    IllConditioned
        If the fit misses ``|f|^2`` between the samples by more than
        ``max(1e-8, 100*rtol)`` relative, both for the minimal set and for a
        perturbed copy of it.
    """
    atlas = f.atlas
    tilde = tilde_system(atlas.system, atlas.window)
    tol = max(1e-8, 100 * resolve_rtol(rtol))
    pts = minimal_sequence(tilde, LINEAR_V)
    worst = None
    for attempt in range(2):
        try:
            coeffs, err, scale = _check_points(atlas, f, pts, tilde)
        except np.linalg.LinAlgError:
            coeffs, err, scale = None, float("inf"), 1.0
        if err <= tol * scale:
            return SplineFunction(tilde, tuple(float(c) for c in coeffs))
        worst = err / scale
        candidate = _perturbed(atlas, pts)
        if not check(tilde, candidate, LINEAR_V).passed:
            break
        pts = candidate
    raise IllConditioned(f"|f|^2 fit misses by {worst:.3g} relative (tolerance {tol:.1g})")

