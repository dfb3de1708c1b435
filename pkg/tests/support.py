"""Random instance generators shared by the test modules."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from splinephase import KnotSystem, SampleSet, Window, build_atlas

GAPS = (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3, 4))


def random_atlas(rng, m, k, multiplicities=None, uniform=False):
    """Atlas with ``m + 1`` simple padding breakpoints on each side of a ``k``-interval window."""
    pad = m + 1
    n = k + 1 + 2 * pad
    if uniform:
        gaps = [Fraction(1)] * (n - 1)
    else:
        gaps = [GAPS[int(j)] for j in rng.integers(0, len(GAPS), size=n - 1)]
    bps = [Fraction(-pad)]
    for g in gaps:
        bps.append(bps[-1] + g)
    if multiplicities is None:
        multiplicities = [int(v) for v in rng.integers(1, m + 1, size=k + 1)]
    mults = [1] * pad + list(multiplicities) + [1] * pad
    return build_atlas(KnotSystem(m, tuple(bps), tuple(mults)), Window(pad, pad + k))


def random_points(rng, atlas, n, denominator=8):
    """Up to ``n`` distinct rationals in the window on a grid of step ``1/denominator``.

    The grid contains every breakpoint whenever breakpoints are multiples of
    ``1/denominator``, so boundary cases occur often.
    """
    lo, hi = atlas.start, atlas.end
    steps = int((hi - lo) * denominator)
    picks = rng.choice(steps + 1, size=min(n, steps + 1), replace=False)
    return SampleSet.of(lo + Fraction(int(p), denominator) for p in picks)


def random_coefficients(rng, atlas, complex_valued=False):
    c = rng.standard_normal(len(atlas))
    if complex_valued:
        c = c + 1j * rng.standard_normal(len(atlas))
    return tuple(c)


def svd_rank(matrix, rtol):
    s = np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0, s
    return int(np.sum(s > rtol * s[0])), s
