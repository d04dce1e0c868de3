import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedylab.banach import r_dict, run_dga, solve_c
from greedylab.dictionaries import Dictionary, make_explicit, symmetrize, weak_sup
from greedylab.generators import random_signed_combination, random_unit_dictionary
from greedylab.hilbert import SelectionPolicy
from greedylab.spaces import SmoothnessMajorant, lp_majorant, norm_lp

HALF = SmoothnessMajorant(2.0, 0.5)


def test_solve_c_quadratic_example():
    # 1 * 0.5 * c^2 = (1 * 0.5 / 2) * c * 1 has the positive root c = 0.5
    c = solve_c(1.0, 1.0, 1.0, 0.5, HALF)
    assert c == pytest.approx(0.5, rel=1e-15)
    assert 0.5 * c**2 == pytest.approx(0.25 * c, rel=1e-15)


def test_solve_c_is_linear_in_r_for_q2():
    assert solve_c(1.0, 0.8, 1.0, 0.5, HALF) == pytest.approx(2 * solve_c(1.0, 0.4, 1.0, 0.5, HALF), rel=1e-15)


def test_solve_c_q_three_halves():
    mu = SmoothnessMajorant(1.5, 2 / 3)
    # dga_star with b = 1/3 and F(phi) = 1 gives K = 1/3
    c = solve_c(2.0, 1.0, 0.9, 1 / 3, mu, variant="dga_star")
    assert c == pytest.approx(0.125, rel=1e-14)
    assert 2.0 * mu(c / 2.0) == pytest.approx(0.5 * (1 / 3) * c, rel=1e-12)


def test_solve_c_errors():
    for args in ((0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)):
        with pytest.raises(ValueError):
            solve_c(*args, 1.0, 0.5, HALF)
    with pytest.raises(ValueError):
        solve_c(1, 1, 1, 0.5, HALF, variant="other")


def test_r_dict_hilbert_case():
    d = random_unit_dictionary(5, 12, 0, symmetric=True)
    f = np.random.default_rng(0).standard_normal(5)
    r, i = r_dict(f, d, 2.0)
    sup, _ = weak_sup(d, f)
    assert r == pytest.approx(sup / np.linalg.norm(f), rel=1e-14)
    assert r >= 0
    g = d.elements[i]
    assert r_dict(g, d, 2.0)[0] == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(ValueError):
        r_dict(np.zeros(5), d, 2.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([1.5, 3.0, 4.0]))
def test_r_dict_nonnegative_on_symmetric(seed, p):
    d = random_unit_dictionary(4, 6, seed, p=p, symmetric=True)
    f = np.random.default_rng(seed).standard_normal(4)
    assert r_dict(f, d, p)[0] >= 0


def test_run_dga_validation():
    d = symmetrize(make_explicit(np.eye(3)))
    with pytest.raises(ValueError):
        run_dga([1, 0, 0], d, 1.0, b=1.0, p=2)
    with pytest.raises(ValueError):
        run_dga([1, 0, 0], d, 1.0, b=0.5, p=1.0)
    with pytest.raises(ValueError):
        run_dga([1, 0, 0], d, 1.0, b=0.5, p=4)  # l2-normalized dictionary
    with pytest.raises(ValueError):
        run_dga([1, 0, 0], d, 0.0, b=0.5, p=2)


def test_dga_self_selection():
    d = random_unit_dictionary(4, 8, 3, p=4, symmetric=True)
    for b in (0.2, 0.5, 0.9):
        tr = run_dga(d.elements[5], d, 1.0, b=b, p=4, M=1)
        assert tr.selected[0] == 5
        assert tr.r_values[0] == pytest.approx(1.0, rel=1e-12)


def test_dga_hilbert_golden_trace():
    # p = 2, orthonormal symmetric basis, f = (0.6, 0.8), b = 1/2:
    # c_m = b r ||f|| / (2 gamma) = b |<f, phi>| so each step scales one coordinate by 1 - b.
    d = symmetrize(make_explicit(np.eye(2)))
    tr = run_dga([0.6, 0.8], d, 1.0, b=0.5, p=2, M=4)
    np.testing.assert_array_equal(tr.selected, [1, 0, 1, 0])
    np.testing.assert_allclose(tr.residuals[4], [0.15, 0.2], rtol=1e-14)
    np.testing.assert_allclose(tr.c, [0.4, 0.3, 0.2, 0.15], rtol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([1.5, 2.0, 4.0]), st.sampled_from([0.25, 0.5, 0.75]),
       st.sampled_from(["dga", "dga_star"]), st.sampled_from(["greedy_max", "random_satisfier"]))
def test_dga_step_identities(seed, p, b, variant, mode):
    d = random_unit_dictionary(6, 10, seed, p=p, symmetric=True)
    f, cert = random_signed_combination(d, seed)
    tr = run_dga(f, d, 0.7, b=b, p=p, M=50, cert=cert, variant=variant,
                 policy=SelectionPolicy(mode=mode, seed=seed))
    mu = lp_majorant(p)
    rn = tr.residual_norms
    assert np.all(tr.c > 0)
    assert np.all(np.diff(tr.B) > 0)
    for m in range(1, tr.steps + 1):
        fn, c, r, F = rn[m - 1], tr.c[m - 1], tr.r_values[m - 1], tr.F_phi[m - 1]
        K = 0.7 * b * r if variant == "dga" else b * F
        assert abs(fn * mu(c / fn) - 0.5 * K * c) <= 1e-9 * 0.5 * K * c
        assert F >= 0.7 * r - 1e-12
        assert rn[m] <= fn - 0.7 * (1 - b) * c * r + 1e-9
        assert r >= fn / tr.B[m - 1] - 1e-9
        assert rn[m] == pytest.approx(norm_lp(tr.residuals[m], p))


def test_dga_deterministic_and_immutable():
    d = random_unit_dictionary(5, 9, 7, p=3, symmetric=True)
    f, cert = random_signed_combination(d, 7)
    a = run_dga(f, d, 1.0, 0.5, 3, 30, cert)
    b = run_dga(f, d, 1.0, 0.5, 3, 30, cert)
    np.testing.assert_array_equal(a.residuals, b.residuals)
    with pytest.raises(ValueError):
        a.c[0] = 1.0
    assert isinstance(d, Dictionary) and a.records()[0]["m"] == 1
