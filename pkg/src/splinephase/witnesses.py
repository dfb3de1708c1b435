"""Pairs of spline functions with equal moduli on a sample set.

A witness pair ``(f1, f2)`` with ``|f1| = |f2|`` on ``E`` but ``f1`` not
equivalent to ``f2`` certifies that ``E`` cannot determine functions from
unsigned samples.

Real witnesses come from a split ``E = E1 u E2``: if ``c`` vanishes on
``E1`` and ``c'`` on ``E2``, then ``f1 = (c + c')/2`` and ``f2 = (c - c')/2``
satisfy ``f1 = -f2`` on ``E1`` and ``f1 = f2`` on ``E2``. Scaling ``c'`` so
its smallest nonzero entry exceeds every entry of ``c`` keeps every
coefficient of ``c +- c'`` nonzero wherever either one is.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateChoice, PreconditionViolated, WitnessNotFound
from .knot_core import BasisAtlas, build_atlas, format_rational, uniform_system
from .sampling_conditions import INTERVAL, LEFT, RIGHT, SampleSet, check_phaseless_V
from .spline_space import SeparabilityReport, SplineFunction, evaluate, separability_split

__all__ = [
    "COMPLEX_PHASE_FAILURE",
    "REAL_SIGN_AMBIGUITY",
    "Verification",
    "WitnessPair",
    "complex_counterexample",
    "complex_example_atlas",
    "inequivalence_margin",
    "real_ambiguity_witness",
    "verify_witness",
]

COMPLEX_PHASE_FAILURE = "complex_phase_failure"
REAL_SIGN_AMBIGUITY = "real_sign_ambiguity"

GAP_TOL = 1e-10
MARGIN_TOL = 1e-3
RANDOM_SPLIT_BUDGET = 512
RANDOM_SPLIT_MAX_POINTS = 24


@dataclass(frozen=True, eq=False)
class Verification:
    """Outcome of :func:`verify_witness`.

    ``modulus_gap`` is ``max ||f1(x)| - |f2(x)||`` over ``E`` and
    ``gap_point`` the abscissa where it occurs. ``margin`` is the
    coefficient-norm distance from ``f1`` to the functions equivalent to
    ``f2``.
    """

    passed: bool
    modulus_gap: float
    gap_point: object
    margin: float
    separability: tuple[SeparabilityReport, ...] = ()
    reasons: tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class WitnessPair:
    f1: SplineFunction
    f2: SplineFunction
    kind: str
    verification: Verification | None = field(default=None, repr=False)
    construction: str = ""


def inequivalence_margin(f1: SplineFunction, f2: SplineFunction, kind: str) -> float:
    """Distance from ``f1`` to the functions indistinguishable from ``f2``.

    Real kind: ``min ||c1 -+ c2||``. Complex kind: the minimum over
    unimodular ``u`` of ``||c1 - u c2||`` and ``||c1 - u conj(c2)||``, which
    is ``sqrt(|c1|^2 + |c2|^2 - 2 |<c2, c1>|)`` for each branch.
    """
    a, b = f1.as_array(), f2.as_array()
    if kind == REAL_SIGN_AMBIGUITY:
        return float(min(np.linalg.norm(a - b), np.linalg.norm(a + b)))
    na, nb = np.vdot(a, a).real, np.vdot(b, b).real
    out = []
    for other in (b, np.conj(b)):
        sq = na + nb - 2.0 * abs(np.vdot(other, a))
        out.append(np.sqrt(max(sq, 0.0)))
    return float(min(out))


def verify_witness(w: WitnessPair, E) -> Verification:
    """Check the defining predicates of a witness pair on ``E``.

    The pair passes when the modulus gap on ``E`` is below ``1e-10``, the
    inequivalence margin exceeds ``1e-3`` and, for real pairs, neither
    function is separable. Failures are listed in ``reasons``; a margin
    failure reads ``"phase-equivalent"``.
    """
    E = E if isinstance(E, SampleSet) else SampleSet.of(E)
    reasons = []
    gap, where = 0.0, None
    if E:
        diff = np.abs(np.abs(evaluate(w.f1, list(E))) - np.abs(evaluate(w.f2, list(E))))
        j = int(np.argmax(diff))
        gap, where = float(diff[j]), E[j]
        if not gap < GAP_TOL:
            reasons.append(f"modulus mismatch {gap:.3g} at x={format_rational(where)}")
    margin = inequivalence_margin(w.f1, w.f2, w.kind)
    if not margin > MARGIN_TOL:
        reasons.append("phase-equivalent")
    seps: tuple[SeparabilityReport, ...] = ()
    if w.kind == REAL_SIGN_AMBIGUITY:
        seps = (separability_split(w.f1), separability_split(w.f2))
        for name, rep in zip(("f1", "f2"), seps):
            if rep.separable:
                reasons.append(f"{name} separable at t_{rep.split_indices[0]}")
    return Verification(not reasons, gap, where, margin, seps, tuple(reasons))


# -- complex phase failure ---------------------------------------------------


def complex_example_atlas(N: int) -> BasisAtlas:
    """Degree-1 atlas of the hats ``phi(x - n)``, ``supp phi = [0, 2]``, ``0 <= n <= N``."""
    ks, w = uniform_system(1, N, start=1)
    return build_atlas(ks, w)


def _unimodular_multiple(a: Sequence[complex], b: Sequence[complex]) -> bool:
    # exact for Gaussian-integer coefficients: |<b, a>|^2 == |a|^2 |b|^2
    inner = sum(complex(y).conjugate() * complex(x) for x, y in zip(a, b))
    na = sum(abs(complex(x)) ** 2 for x in a)
    nb = sum(abs(complex(y)) ** 2 for y in b)
    return round(abs(inner) ** 2) == round(na * nb)


def complex_counterexample(N: int, signs: Sequence[int] | None = None) -> WitnessPair:
    """Two complex degree-1 splines with equal moduli everywhere.

    ``f`` has coefficients ``(-1)^n + i`` and ``g`` has ``a_n + i b_n``
    with ``a = signs`` (default ``1, -1, -1, ...``), ``b_{n+1} = -a_n a_{n+1} b_n``
    and ``b_0 = 1``. Adjacent coefficients of both are orthogonal as planar
    vectors and have modulus ``sqrt(2)``, so ``|f|^2 = |g|^2 = 2 sum phi(x-n)^2``.

    Raises
    ------
    DegenerateChoice
        If ``g`` is a unimodular multiple of ``f`` or of its conjugate for
        both choices ``b_0 = +-1``. This happens exactly when ``a_n a_{n+1}``
        is constant, and always when ``N = 1``.
    """
    N = int(N)
    if N < 1:
        raise ValueError(f"N must be at least 1, got {N}")
    if signs is None:
        a = [1] + [-1] * N
    else:
        a = [int(s) for s in signs]
        if len(a) != N + 1 or any(s not in (1, -1) for s in a):
            raise ValueError(f"signs must be N+1 = {N + 1} entries, each +1 or -1")
    f = [complex((-1) ** n, 1) for n in range(N + 1)]
    atlas = complex_example_atlas(N)
    for b0 in (1, -1):
        b = [b0]
        for n in range(N):
            b.append(-a[n] * a[n + 1] * b[n])
        g = [complex(x, y) for x, y in zip(a, b)]
        if _unimodular_multiple(f, g) or _unimodular_multiple(f, [z.conjugate() for z in g]):
            continue
        pair = WitnessPair(SplineFunction(atlas, tuple(f)), SplineFunction(atlas, tuple(g)), COMPLEX_PHASE_FAILURE,
                           construction=f"b_0={b0}")
        grid = SampleSet(atlas.start + (atlas.end - atlas.start) * j / 256 for j in range(257))
        return WitnessPair(pair.f1, pair.f2, pair.kind, verify_witness(pair, grid), pair.construction)
    raise DegenerateChoice(
        f"signs {a}: g is a unimodular multiple of f or of its conjugate for every b_0"
    )


# -- real sign ambiguity -----------------------------------------------------


@dataclass(frozen=True)
class _Frame:
    """Window data needed to plan a split, optionally reflected ``x -> -x``."""

    k: int
    t: tuple
    mu: tuple
    first: np.ndarray
    last: np.ndarray
    points: tuple

    @classmethod
    def of(cls, atlas: BasisAtlas, E: SampleSet) -> _Frame:
        k = atlas.k
        return cls(k, tuple(atlas.t(i) for i in range(k + 1)), tuple(atlas.mult(i) for i in range(k + 1)),
                   atlas.first_indices.copy(), atlas.last_indices.copy(), tuple(E))

    def reflected(self) -> _Frame:
        k = self.k
        return _Frame(k, tuple(-x for x in reversed(self.t)), tuple(reversed(self.mu)),
                      (k - self.last)[::-1].copy(), (k - self.first)[::-1].copy(),
                      tuple(-x for x in reversed(self.points)))

    def idx(self, pred) -> list[int]:
        return [j for j, x in enumerate(self.points) if pred(x)]


@dataclass(frozen=True)
class _Plan:
    label: str
    e2: frozenset  # point positions assigned to E2, all others go to E1
    mask1: np.ndarray | None  # admissible columns for c (None: all)
    mask2: np.ndarray | None  # admissible columns for c'

    def reflected(self, n_points: int) -> _Plan:
        flip = lambda m: None if m is None else m[::-1].copy()
        return _Plan(self.label + " (mirrored)", frozenset(n_points - 1 - j for j in self.e2),
                     flip(self.mask1), flip(self.mask2))


def _first_points(fr: _Frame, lo, hi, count: int, closed_lo: bool) -> list[int]:
    inside = fr.idx(lambda x: (lo <= x if closed_lo else lo < x) and x < hi)
    return inside[: max(count, 0)]


def _left_plan(fr: _Frame, n0: int) -> list[_Plan]:
    # #(E & [t_0, t_{n0})) too small: c lives on B-splines meeting [t_0, t_{n0}),
    # c' on those ending by t_{n0}
    t, mu = fr.t, fr.mu
    e2 = set(fr.idx(lambda x: x >= t[n0]))
    for i in range(n0 - 1):
        e2.update(_first_points(fr, t[i], t[i + 1], mu[i + 1], True))
    e2.update(_first_points(fr, t[n0 - 1], t[n0], mu[n0] - 1, True))
    label = f"left({n0})"
    m1, m2 = fr.first < n0, fr.last <= n0
    return [_Plan(label, frozenset(e2), m1, m2), _Plan(label, frozenset(e2), None, m2),
            _Plan(label, frozenset(e2), None, None)]


def _interval_plan(fr: _Frame, i1: int, i2: int) -> list[_Plan]:
    # #(E & (t_{i1}, t_{i2})) too small: c starts at or after t_{i1}, c' ends by t_{i2}
    t, mu = fr.t, fr.mu
    e2 = set(fr.idx(lambda x: x >= t[i2]))
    for i in range(i1, i2 - 1):
        e2.update(_first_points(fr, t[i], t[i + 1], mu[i + 1], i > i1))
    e2.update(_first_points(fr, t[i2 - 1], t[i2], mu[i2] - 1, i2 - 1 > i1))
    label = f"interval({i1},{i2})"
    m1, m2 = fr.first >= i1, fr.last <= i2
    return [_Plan(label, frozenset(e2), m1, m2), _Plan(label, frozenset(e2), None, None)]


def _alternating_plan(fr: _Frame, label: str) -> list[_Plan]:
    odd = frozenset(range(1, len(fr.points), 2))
    return [_Plan(label, odd, None, None)]


def _plans(atlas: BasisAtlas, E: SampleSet, report) -> list[_Plan]:
    fr = _Frame.of(atlas, E)
    rf = fr.reflected()
    k, n = atlas.k, len(E)
    mirror = lambda plans: [p.reflected(n) for p in plans]
    viol = report.violations
    lefts = sorted(v.interval[0] for v in viol if v.condition == LEFT)
    rights = sorted((v.interval[0] for v in viol if v.condition == RIGHT), reverse=True)
    intervals = [v.interval for v in viol if v.condition == INTERVAL]

    plans: list[_Plan] = []
    # endpoint intervals first
    if 1 in lefts:
        plans += _left_plan(fr, 1)
    if k - 1 in rights:
        plans += mirror(_left_plan(rf, 1))
    # single knot intervals, then the extremal general interval and the rest
    for i, j in intervals:
        if j == i + 1:
            plans += _interval_plan(fr, i, j) + mirror(_interval_plan(rf, k - j, k - i))
    if intervals:
        i2 = min(j for _, j in intervals)
        i1 = max(i for i, j in intervals if j == i2)
        plans += _interval_plan(fr, i1, i2) + mirror(_interval_plan(rf, k - i2, k - i1))
        for i, j in intervals:
            if j > i + 1 and (i, j) != (i1, i2):
                plans += _interval_plan(fr, i, j) + mirror(_interval_plan(rf, k - j, k - i))
    for n0 in lefts:
        if n0 != 1:
            plans += _left_plan(fr, n0)
    for n0 in rights:
        if n0 != k - 1:
            plans += mirror(_left_plan(rf, k - n0))
    plans += _alternating_plan(fr, "alternating split")
    return plans


def _null_basis(A: np.ndarray) -> np.ndarray:
    cols = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(cols)
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    tol = 1e-10 * (s[0] if s.size else 0.0) * max(A.shape)
    rank = int(np.sum(s > tol))
    return vt[rank:].T


def _generic_null_vector(A: np.ndarray, mask: np.ndarray | None, rng: np.random.Generator, tries: int = 8):
    """A random element of ``{c : A c = 0, c = 0 off mask}`` with no accidental zeros.

    Entries that vanish on the whole nullspace are set to exactly zero.
    Among ``tries`` random combinations the one with the largest
    ``min |c_j| / max |c_j|`` over its nonzero entries is returned.
    """
    cols = np.arange(A.shape[1]) if mask is None else np.flatnonzero(mask)
    if cols.size == 0:
        return None
    Z = _null_basis(A[:, cols])
    if Z.shape[1] == 0:
        return None
    keep = np.linalg.norm(Z, axis=1) > 1e-9
    cols = cols[keep]
    Z = _null_basis(A[:, cols])
    if Z.shape[1] == 0:
        return None
    best, best_score = None, -1.0
    for _ in range(tries):
        v = Z @ rng.standard_normal(Z.shape[1])
        mags = np.abs(v)
        score = mags.min() / mags.max()
        if score > best_score:
            best, best_score = v, score
    out = np.zeros(A.shape[1])
    out[cols] = best
    return out


def _seed(atlas: BasisAtlas, E: SampleSet) -> int:
    ks = atlas.system
    text = "|".join([
        str(ks.degree),
        ",".join(map(format_rational, ks.breakpoints)),
        ",".join(map(str, ks.multiplicities)),
        f"{atlas.window.start_index},{atlas.window.end_index}",
        ",".join(map(format_rational, E)),
    ])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")


def _attempt(atlas: BasisAtlas, E: SampleSet, A: np.ndarray, plan: _Plan, rng) -> tuple[WitnessPair | None, str]:
    e2 = np.zeros(len(E), dtype=bool)
    e2[list(plan.e2)] = True
    c = _generic_null_vector(A[~e2], plan.mask1, rng)
    cp = _generic_null_vector(A[e2], plan.mask2, rng)
    if c is None or cp is None:
        return None, "trivial nullspace"
    c = c / np.abs(c).max()
    # smallest nonzero |c'| must exceed every |c|
    cp = cp * (2.0 * np.abs(c).max() / np.abs(cp[cp != 0]).min())
    f1 = SplineFunction(atlas, tuple((c + cp) / 2))
    f2 = SplineFunction(atlas, tuple((c - cp) / 2))
    pair = WitnessPair(f1, f2, REAL_SIGN_AMBIGUITY, construction=plan.label)
    ver = verify_witness(pair, E)
    if not ver.passed:
        return None, "; ".join(ver.reasons)
    return WitnessPair(f1, f2, REAL_SIGN_AMBIGUITY, ver, plan.label), ""


def real_ambiguity_witness(atlas: BasisAtlas, E) -> WitnessPair:
    """Two real nonseparable splines, not equal up to sign, with ``|f1| = |f2|`` on ``E``.

    Splits of ``E`` are tried in turn, starting with the ones matched to the
    violated counting conditions. When ``#E <= 24`` a bounded search over
    random splits follows. The result is verified before it is returned.

    Raises
    ------
    PreconditionViolated
        If ``E`` satisfies the phaseless sampling conditions.
    WitnessNotFound
        If no split yields a verified pair. This says nothing about ``E``
        being a phaseless sampling set.
    """
    E = E if isinstance(E, SampleSet) else SampleSet.of(E)
    report = check_phaseless_V(atlas, E)
    if report.passed:
        raise PreconditionViolated("sample set satisfies the phaseless conditions; no witness exists")
    A = atlas.collocation(list(E)) if E else np.zeros((0, len(atlas)))
    rng = np.random.default_rng(_seed(atlas, E))
    failures: list[str] = []
    for plan in _plans(atlas, E, report):
        pair, why = _attempt(atlas, E, A, plan, rng)
        if pair is not None:
            return pair
        failures.append(f"{plan.label}: {why}")

    attempts = 0
    if len(E) <= RANDOM_SPLIT_MAX_POINTS:
        for attempts in range(1, RANDOM_SPLIT_BUDGET + 1):
            labels = rng.random(len(E)) < 0.5
            plan = _Plan("random split", frozenset(np.flatnonzero(labels).tolist()), None, None)
            pair, why = _attempt(atlas, E, A, plan, rng)
            if pair is not None:
                return pair
    raise WitnessNotFound(
        f"no verified witness after {len(failures)} structured and {attempts} random splits",
        diagnostics={"violations": report.summary(), "structured": failures, "random_attempts": attempts},
    )
