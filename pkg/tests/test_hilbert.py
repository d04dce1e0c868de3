import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedylab.dictionaries import make_explicit, symmetrize, weak_sup
from greedylab.generators import random_convex_combination, random_signed_combination, random_unit_dictionary
from greedylab.hilbert import (IAConditionError, SelectionPolicy, WeaknessViolation, run_ia, run_rga, run_twga,
                               run_wga, run_wgafr, run_woga)
from greedylab.weakness import Subsequence, WeaknessSequence

from .oracles import ia_exact, rga_exact, wga_orthonormal_exact

S = 2**-0.5
E2 = make_explicit([[1, 0], [0, 1]])
SKEW = make_explicit([[1, 0], [S, S]])


# --- WGA -------------------------------------------------------------------------

def test_wga_orthonormal_example():
    tr = run_wga([0.8, 0.6], E2, 1.0, b=1.0, M=10)
    np.testing.assert_array_equal(tr.selected, [0, 1])
    assert tr.residual_norms[1] == pytest.approx(0.6, abs=1e-15)
    assert tr.residual_norms[2] == 0.0
    assert tr.status == "exact_zero"


def test_wga_zero_input():
    tr = run_wga([0.0, 0.0], E2, 1.0, M=5)
    assert tr.steps == 0 and tr.status == "exact_zero"


def test_wga_skew_example():
    tr = run_wga([0, 1], SKEW, 1.0, M=1)
    assert tr.selected[0] == 1
    assert tr.y[0] == pytest.approx(S, rel=1e-15)
    np.testing.assert_allclose(tr.residuals[1], [-0.5, 0.5], atol=1e-15)
    assert tr.residual_norms[1] == pytest.approx(0.7071067811865476, rel=1e-15)


def test_wga_rejects_bad_b_and_cert():
    with pytest.raises(ValueError):
        run_wga([1, 0], E2, 1.0, b=0.0)
    with pytest.raises(ValueError):
        run_wga([1, 0], E2, 1.0, b=1.5)
    with pytest.raises(ValueError):
        run_wga([1, 1], E2, 1.0, cert=1.0)


def test_wga_replay_violation_reports_threshold():
    with pytest.raises(WeaknessViolation) as info:
        run_wga([0.8, 0.6], E2, 1.0, M=1, policy=SelectionPolicy.replaying([1]))
    assert info.value.step == 1 and info.value.threshold == pytest.approx(0.8)
    # at t = 0.5 the weaker atom is admissible
    tr = run_wga([0.8, 0.6], E2, 0.5, M=1, policy=SelectionPolicy.replaying([1]))
    assert tr.selected[0] == 1
    with pytest.raises(ValueError):
        run_wga([0.8, 0.6], E2, 0.5, M=2, policy=SelectionPolicy.replaying([1]))


def test_wga_matches_exact_oracle_on_orthonormal_basis():
    c = [Fraction(3, 10), Fraction(-1, 5), Fraction(1, 10), Fraction(2, 5)]
    for b in (Fraction(1), Fraction(1, 2), Fraction(3, 10)):
        want = wga_orthonormal_exact(c, None, b, 12)
        tr = run_wga([float(x) for x in c], make_explicit(np.eye(4)), 1.0, b=float(b), M=12)
        np.testing.assert_allclose(tr.a, [float(x) for x in want[: tr.steps + 1]], rtol=1e-13, atol=1e-30)


def test_zero_step_policies():
    tau = WeaknessSequence.sparse(Subsequence.every(2), 1.0)
    d = random_unit_dictionary(6, 12, 0)
    f = np.random.default_rng(0).standard_normal(6)
    fixed = run_wga(f, d, tau, M=6, policy=SelectionPolicy(zero_step="fixed_index", fixed_index=3))
    assert list(fixed.selected[0::2]) == [3, 3, 3]
    r1 = run_wga(f, d, tau, M=6, policy=SelectionPolicy(zero_step="seeded_random", seed=5))
    r2 = run_wga(f, d, tau, M=6, policy=SelectionPolicy(zero_step="seeded_random", seed=5))
    np.testing.assert_array_equal(r1.selected, r2.selected)
    # odd steps keep the weakness inequality
    for m in (2, 4, 6):
        sup, _ = weak_sup(d, r1.residuals[m - 1])
        assert r1.y[m - 1] >= sup - 1e-12


seeds = st.integers(0, 2**31)


@settings(max_examples=60, deadline=None)
@given(seeds, st.sampled_from([0.25, 0.5, 0.7, 1.0]), st.sampled_from([1.0, 0.5, 0.3]))
def test_wga_energy_identity_and_weakness(seed, b, t):
    d = random_unit_dictionary(8, 20, seed)
    f, cert = random_signed_combination(d, seed + 1)
    tr = run_wga(f, d, t, b=b, M=40, cert=cert)
    a = tr.a
    for m in range(1, tr.steps + 1):
        assert abs(a[m] - (a[m - 1] - b * (2 - b) * tr.y[m - 1] ** 2)) <= 1e-9 * a[m - 1]
        sup, _ = weak_sup(d, tr.residuals[m - 1])
        assert tr.y[m - 1] >= t * sup - 1e-12
        assert tr.y[m - 1] >= tr.t[m - 1] * a[m - 1] / tr.B[m - 1] - 1e-10
        assert tr.B[m] == tr.B[m - 1] + b * tr.y[m - 1]
    assert np.all(np.diff(tr.residual_norms) <= 1e-15)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from(["first_satisfier", "min_satisfier", "random_satisfier"]))
def test_any_realization_satisfies_weakness(seed, mode):
    d = random_unit_dictionary(6, 18, seed)
    f, _ = random_signed_combination(d, seed)
    tr = run_wga(f, d, 0.5, M=30, policy=SelectionPolicy(mode=mode, seed=seed))
    for m in range(1, tr.steps + 1):
        sup, _ = weak_sup(d, tr.residuals[m - 1])
        assert tr.y[m - 1] >= 0.5 * sup - 1e-12


def test_trace_is_immutable_and_records():
    tr = run_wga([0.8, 0.6], E2, 1.0, M=2, cert=1.4)
    with pytest.raises(ValueError):
        tr.residuals[0, 0] = 1
    recs = tr.records()
    assert recs[0]["m"] == 1 and recs[0]["B_m"] == pytest.approx(2.2)
    np.testing.assert_allclose(tr.approximant(1), [0.8, 0])


# --- TWGA ------------------------------------------------------------------------

def test_twga_threshold_brute_force():
    f = np.array([0.6, 0.8]) / 1.4
    tr = run_twga(f, E2, 1.0, M=1, cert=1.0)
    thr = f @ f / 1.0
    first = next(i for i in range(2) if abs(f[i]) >= thr)
    assert tr.selected[0] == first == 1


def test_twga_needs_certificate_and_handles_zero():
    with pytest.raises(ValueError):
        run_twga([0.5, 0.5], E2, 1.0)
    assert run_twga([0.0, 0.0], E2, 1.0, cert=1.0).steps == 0
    tr = run_twga([0.3, 0.4], E2, WeaknessSequence.explicit([0.0, 1.0]), M=2, cert=1.0,
                  policy=SelectionPolicy(zero_step="fixed_index", fixed_index=0))
    assert tr.selected[0] == 0


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_twga_recursions(seed):
    d = random_unit_dictionary(8, 24, seed)
    f, cert = random_signed_combination(d, seed)
    tr = run_twga(f, d, 0.8, b=0.6, M=60, cert=cert)
    a = tr.a
    for m in range(1, tr.steps + 1):
        assert abs(a[m] - (a[m - 1] - 0.6 * 1.4 * tr.y[m - 1] ** 2)) <= 1e-9 * a[m - 1]
        assert tr.y[m - 1] >= 0.8 * a[m - 1] / tr.B[m - 1] - 1e-10


# --- WOGA / WGAFR ----------------------------------------------------------------

def test_woga_equals_wga_on_orthonormal():
    f = np.random.default_rng(1).standard_normal(6)
    d = make_explicit(np.eye(6))
    a = run_wga(f, d, 1.0, M=6)
    b = run_woga(f, d, 1.0, M=6)
    np.testing.assert_array_equal(a.selected, b.selected)
    np.testing.assert_allclose(a.residual_norms, b.residual_norms, atol=1e-15)


def test_woga_spans_plane():
    tr = run_woga([0, 1], SKEW, 1.0, M=5)
    assert tr.steps == 2 and tr.residual_norms[2] < 1e-14 and tr.status == "exact_zero"


def test_woga_duplicate_replay_is_idempotent():
    d = random_unit_dictionary(5, 8, 2)
    f = np.random.default_rng(2).standard_normal(5)
    tr = run_woga(f, d, 0.0, M=3, policy=SelectionPolicy.replaying([4, 4, 1]))
    np.testing.assert_allclose(tr.residuals[2], tr.residuals[1], atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_woga_residual_orthogonal_to_selected(seed):
    d = random_unit_dictionary(10, 30, seed)
    f = np.random.default_rng(seed).standard_normal(10)
    tr = run_woga(f, d, 0.7, M=8)
    for m in range(1, tr.steps + 1):
        assert np.abs(tr.atoms[:m] @ tr.residuals[m]).max() <= 1e-9
    assert np.all(np.diff(tr.residual_norms) <= 1e-12)


def test_wgafr_examples():
    f = np.random.default_rng(4).standard_normal(5)
    d = random_unit_dictionary(5, 9, 4)
    a = run_wga(f, d, 1.0, M=1)
    b = run_wgafr(f, d, 1.0, M=1)
    np.testing.assert_allclose(a.residuals[1], b.residuals[1], atol=1e-15)
    d6 = make_explicit(np.eye(6))
    g = np.random.default_rng(5).standard_normal(6)
    w = run_woga(g, d6, 1.0, M=6)
    fr = run_wgafr(g, d6, 1.0, M=6)
    np.testing.assert_allclose(w.residual_norms, fr.residual_norms, atol=1e-14)
    # f in span(G_1, phi_2) is recovered exactly at m = 2
    tr = run_wgafr([0.3, 0.9], SKEW, 1.0, M=2)
    assert tr.residual_norms[2] < 1e-14


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_wgafr_monotone(seed):
    d = random_unit_dictionary(8, 20, seed)
    f = np.random.default_rng(seed).standard_normal(8)
    tr = run_wgafr(f, d, 0.6, M=30)
    assert np.all(np.diff(tr.residual_norms) <= 1e-12)


def test_woga_never_worse_than_wga_on_same_selection():
    for seed in range(20):
        d = random_unit_dictionary(8, 24, seed)
        f, _ = random_signed_combination(d, seed)
        wga = run_wga(f, d, 1.0, M=25)
        woga = run_woga(f, d, 0.0, M=wga.steps, policy=SelectionPolicy.replaying(wga.selected))
        assert np.all(woga.residual_norms <= wga.residual_norms[: woga.steps + 1] + 1e-10)


# --- RGA -------------------------------------------------------------------------

def test_rga_golden_trace():
    # exact squared norms from the rational oracle: 1/2, 1/4, 1/16, 1/36, 1/64, ..., 1/256
    d = symmetrize(E2)
    want = rga_exact([Fraction(1, 2), Fraction(1, 2)], [tuple(map(Fraction, g)) for g in [(1, 0), (-1, 0), (0, 1), (0, -1)]], 8)
    assert [str(x) for x in want] == ["1/2", "1/4", "1/16", "1/36", "1/64", "1/100", "1/144", "1/196", "1/256"]
    tr = run_rga([0.5, 0.5], d, M=8)
    np.testing.assert_allclose(tr.a, [float(x) for x in want], rtol=1e-14)
    np.testing.assert_allclose(tr.residuals[2], [0.25, 0], atol=1e-16)
    np.testing.assert_allclose(tr.residuals[4], [0.125, 0], atol=1e-16)
    rn = tr.residual_norms
    assert rn[2] > rn[4] > rn[8]


def test_rga_first_step_and_atom_input():
    d = random_unit_dictionary(4, 8, 0)
    f = np.random.default_rng(9).standard_normal(4)
    np.testing.assert_allclose(run_rga(f, d, 1).residuals[1], run_wga(f, d, 1.0, M=1).residuals[1], atol=1e-15)
    tr = run_rga(d.elements[3], d, 3)
    assert tr.residual_norms[1] < 1e-14


# --- IA --------------------------------------------------------------------------

def test_ia_atom_input():
    tr = run_ia([0, 1], E2, 1.0, M=5)
    assert tr.steps == 1 and tr.residual_norms[1] == 0.0


def test_ia_midpoint_golden_trace():
    want = ia_exact([Fraction(1, 2), Fraction(1, 2)], [(1, 0), (0, 1)], 200)
    tr = run_ia([0.5, 0.5], E2, {"family": "harmonic"}, M=200)
    # the run stops early at the first exact zero (m = 2)
    assert tr.status == "exact_zero" and tr.steps == 2
    assert tr.residual_norms[1] == pytest.approx(math.sqrt(0.5), rel=1e-15)
    np.testing.assert_allclose(tr.a, [float(x) for x in want[:3]], atol=1e-30)
    # alternating selection, odd-m residual 1/(m sqrt 2) per the oracle
    assert want[5] == Fraction(1, 50) and want[6] == 0
    assert list(tr.selected) == [0, 1]


def test_ia_outside_convex_hull_raises():
    with pytest.raises(IAConditionError):
        run_ia([2.0, 0.0], E2, lambda m: 1.0 / m, M=5)


def test_ia_certificate_checks():
    d = random_unit_dictionary(4, 6, 1)
    f, cert = random_convex_combination(d, 1)
    run_ia(f, d, 1.0, M=3, cert=cert)
    g, bad = random_signed_combination(d, 1)
    with pytest.raises(ValueError):
        run_ia(g, d, 1.0, M=3, cert=bad)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_ia_decays_for_convex_inputs(seed):
    d = random_unit_dictionary(6, 10, seed)
    f, cert = random_convex_combination(d, seed)
    tr = run_ia(f, d, {"family": "harmonic", "c": 2.0}, M=300, cert=cert)
    # the IA guarantees ||f_m|| = O(m^{-1/2}); allow a generous constant
    m = tr.steps
    assert tr.residual_norms[m] <= 4.0 / math.sqrt(m) + 1e-12


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_wgafr_dominates_replayed_wga_for_two_steps(seed):
    # G_1 agrees and G_2^WGA lies in span(G_1, phi_2); from m = 3 on no such containment holds
    d = random_unit_dictionary(8, 24, seed, symmetric=True)
    f, _ = random_signed_combination(d, seed)
    wga = run_wga(f, d, 0.7, M=2)
    fr = run_wgafr(f, d, 0.0, M=wga.steps, policy=SelectionPolicy.replaying(wga.selected))
    assert np.all(fr.residual_norms <= wga.residual_norms + 1e-12)
