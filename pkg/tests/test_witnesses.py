import itertools
from fractions import Fraction

import numpy as np
import pytest

from splinephase import (
    DegenerateChoice,
    PreconditionViolated,
    SampleSet,
    SplineFunction,
    WitnessPair,
    build_atlas,
    check_phaseless_V,
    complex_counterexample,
    evaluate,
    minimal_sequence,
    real_ambiguity_witness,
    separability_split,
    uniform_system,
    verify_witness,
)
from splinephase.witnesses import COMPLEX_PHASE_FAILURE, REAL_SIGN_AMBIGUITY
from support import random_points

F = Fraction


def uniform_atlas(m, k, mults=None):
    return build_atlas(*uniform_system(m, k, mults))


def _ratios_constant(f, g):
    r = [x / y for x, y in zip(f, g)]
    return all(abs(z - r[0]) < 1e-12 for z in r)


def degenerate_by_ratios(a, b0):
    """Ratio oracle: ``g`` is a unimodular multiple of ``f`` or of its conjugate."""
    N = len(a) - 1
    b = [b0]
    for n in range(N):
        b.append(-a[n] * a[n + 1] * b[n])
    f = [complex((-1) ** n, 1) for n in range(N + 1)]
    g = [complex(x, y) for x, y in zip(a, b)]
    return _ratios_constant(f, g) or _ratios_constant(f, [z.conjugate() for z in g])


def _grid_gap(w, n=2001):
    a = w.f1.atlas
    x = np.linspace(float(a.start), float(a.end), n)
    return np.max(np.abs(np.abs(evaluate(w.f1, x)) ** 2 - np.abs(evaluate(w.f2, x)) ** 2))


def test_complex_counterexample_two_intervals():
    w = complex_counterexample(2, [1, -1, -1])
    assert w.kind == COMPLEX_PHASE_FAILURE
    assert w.f2.coefficients == (complex(1, 1), complex(-1, 1), complex(-1, -1))
    assert w.f1.coefficients == (complex(1, 1), complex(-1, 1), complex(1, 1))
    assert w.verification.passed
    assert _grid_gap(w) < 1e-12
    assert not degenerate_by_ratios([1, -1, -1], 1)


def test_complex_counterexample_single_interval_is_degenerate():
    for a0, a1, b0 in itertools.product((1, -1), repeat=3):
        assert degenerate_by_ratios([a0, a1], b0)
    for a0, a1 in itertools.product((1, -1), repeat=2):
        with pytest.raises(DegenerateChoice):
            complex_counterexample(1, [a0, a1])


def test_complex_counterexample_random_signs():
    rng = np.random.default_rng(61)
    for N in range(2, 11):
        for _ in range(20):
            a = [int(s) for s in rng.choice([-1, 1], size=N + 1)]
            admissible = not (degenerate_by_ratios(a, 1) and degenerate_by_ratios(a, -1))
            if not admissible:
                with pytest.raises(DegenerateChoice):
                    complex_counterexample(N, a)
                continue
            w = complex_counterexample(N, a)
            assert w.verification.passed
            assert _grid_gap(w) < 1e-12
            assert all(z.real ** 2 + z.imag ** 2 == 2 for z in w.f2.coefficients)


def test_complex_counterexample_input_validation():
    with pytest.raises(ValueError):
        complex_counterexample(0)
    with pytest.raises(ValueError):
        complex_counterexample(2, [1, 1])
    with pytest.raises(ValueError):
        complex_counterexample(2, [1, 2, 1])


def test_complex_pair_verifies_on_any_set():
    w = complex_counterexample(3)
    a = w.f1.atlas
    rng = np.random.default_rng(62)
    for _ in range(10):
        assert verify_witness(w, random_points(rng, a, 7)).passed


def _check_real_witness(a, E, w):
    assert w.kind == REAL_SIGN_AMBIGUITY
    assert w.verification.passed
    c1, c2 = w.f1.as_array(), w.f2.as_array()
    x = [float(v) for v in E]
    B = a.collocation(x)
    assert np.max(np.abs(np.abs(B @ c1) - np.abs(B @ c2))) < 1e-10
    assert min(np.linalg.norm(c1 - c2), np.linalg.norm(c1 + c2)) > 1e-3
    assert not separability_split(w.f1).separable and not separability_split(w.f2).separable


def test_real_witness_cardinality_example():
    a = uniform_atlas(1, 2)
    E = SampleSet.of(["0.3", "0.7", "1.1", "1.5"])
    assert "cardinality" in check_phaseless_V(a, E).families()
    _check_real_witness(a, E, real_ambiguity_witness(a, E))


def test_real_witness_endpoint_example():
    a = uniform_atlas(1, 2)
    E = SampleSet.of(["0.5", "1", "1.25", "1.5", "1.75", "2"])
    rep = check_phaseless_V(a, E)
    assert [(v.condition, v.interval) for v in rep.violations] == [("left", (1,))]
    w = real_ambiguity_witness(a, E)
    _check_real_witness(a, E, w)
    assert w.construction.startswith("left(1)")


def test_real_witness_on_random_failing_sets():
    rng = np.random.default_rng(63)
    found = 0
    for _ in range(150):
        m, k = int(rng.integers(1, 3)), int(rng.integers(2, 4))
        a = uniform_atlas(m, k)
        E = random_points(rng, a, int(rng.integers(1, 2 * len(a) + 4)), denominator=6)
        if check_phaseless_V(a, E).passed:
            with pytest.raises(PreconditionViolated):
                real_ambiguity_witness(a, E)
            continue
        w = real_ambiguity_witness(a, E)
        _check_real_witness(a, E, w)
        found += 1
    assert found > 50


def test_soundness_coupling():
    rng = np.random.default_rng(64)
    for _ in range(100):
        m, k = int(rng.integers(1, 3)), int(rng.integers(1, 4))
        a = uniform_atlas(m, k)
        base = minimal_sequence(a, "phaseless_V")
        E = SampleSet.of(set(base) | set(random_points(rng, a, 3)))
        if rng.random() < 0.5:
            E = E.without(int(rng.integers(0, len(E))))
        passed = check_phaseless_V(a, E).passed
        try:
            real_ambiguity_witness(a, E)
        except PreconditionViolated:
            assert passed
        else:
            assert not passed


def test_verify_rejects_phase_equivalent_pairs():
    a = uniform_atlas(1, 2)
    f = SplineFunction(a, (1.0, -2.0, 0.5))
    E = SampleSet.of(["0.5", "1.5"])
    for g in (f, f.scale(-1)):
        ver = verify_witness(WitnessPair(f, g, REAL_SIGN_AMBIGUITY), E)
        assert not ver.passed and "phase-equivalent" in ver.reasons
    fc = SplineFunction(a, (1 + 1j, 2 - 1j, 0.5j))
    ver = verify_witness(WitnessPair(fc, fc.conjugate().scale(np.exp(0.7j)), COMPLEX_PHASE_FAILURE), E)
    assert "phase-equivalent" in ver.reasons


def test_verify_locates_a_single_mismatch():
    a = uniform_atlas(1, 3)
    f1 = SplineFunction(a, (1.0, 2.0, 3.0, 4.0))
    f2 = SplineFunction(a, (-1.0, -2.0, 5.0, -4.0))
    ver = verify_witness(WitnessPair(f1, f2, REAL_SIGN_AMBIGUITY), SampleSet.of([0, 1, 2, 3]))
    assert not ver.passed
    assert ver.gap_point == 2 and ver.modulus_gap == pytest.approx(2.0)
    assert any("x=2" in r for r in ver.reasons)


def test_verify_reports_separability():
    a = uniform_atlas(1, 3)
    f1 = SplineFunction(a, (1.0, 0.0, 0.0, 1.0))
    f2 = SplineFunction(a, (1.0, 0.0, 0.0, -1.0))
    ver = verify_witness(WitnessPair(f1, f2, REAL_SIGN_AMBIGUITY), SampleSet.of([0, 3]))
    assert not ver.passed and any(r.startswith("f1 separable") for r in ver.reasons)


def test_witness_search_is_deterministic():
    a = uniform_atlas(2, 3)
    E = SampleSet.of([F(1, 3), F(1, 2), F(3, 2), F(2), F(5, 2), F(3)])
    w1, w2 = real_ambiguity_witness(a, E), real_ambiguity_witness(a, E)
    assert w1.f1.coefficients == w2.f1.coefficients and w1.construction == w2.construction
