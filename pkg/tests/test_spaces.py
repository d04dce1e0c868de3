import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from greedylab.spaces import (SmoothnessMajorant, as_vector, conjugate_exponent, inner, lp_majorant, norm_lp,
                              norming_functional)


def test_inner_examples():
    assert inner([1, 0], [0, 1]) == 0.0
    assert inner([1, 1], [1, 1]) == 2.0
    assert inner([0.8, 0.6], [0.8, 0.6]) == pytest.approx(1.0, abs=1e-15)


def test_inner_dimension_mismatch():
    with pytest.raises(ValueError):
        inner([1, 0], [1, 0, 0])


def test_vectors_must_be_finite_and_one_dimensional():
    with pytest.raises(ValueError):
        as_vector([1.0, np.nan])
    with pytest.raises(ValueError):
        as_vector([[1.0, 2.0]])
    with pytest.raises(ValueError):
        as_vector([])


def test_norm_examples():
    assert norm_lp([3, 4], 2) == 5.0
    assert norm_lp([2, 1], 4) == pytest.approx(17**0.25, rel=1e-15)
    assert norm_lp([2, 1], 4) == pytest.approx(2.0305431848689307, rel=1e-15)
    for p in (1, 1.5, 2, 4, np.inf):
        assert norm_lp([0.0, 0.0, 0.0], p) == 0.0
    assert norm_lp([-3, 2], np.inf) == 3.0
    with pytest.raises(ValueError):
        norm_lp([1, 2], 0.5)


def test_norm_large_p_does_not_overflow():
    assert norm_lp([1e200, 1e200], 8) == pytest.approx(1e200 * 2 ** (1 / 8))


def test_norming_functional_examples():
    np.testing.assert_array_equal(norming_functional([1, 0], 2), [1, 0])
    np.testing.assert_allclose(norming_functional([1, 1], 2), [2**-0.5, 2**-0.5], rtol=1e-15)
    F = norming_functional([2, 1], 4)
    np.testing.assert_allclose(F, np.array([8.0, 1.0]) / 17**0.75, rtol=1e-14)
    assert F @ np.array([2.0, 1.0]) == pytest.approx(17**0.25, rel=1e-14)
    assert norm_lp(F, 4 / 3) == pytest.approx(1.0, rel=1e-14)


def test_norming_functional_errors():
    with pytest.raises(ValueError):
        norming_functional([0, 0], 2)
    with pytest.raises(ValueError):
        norming_functional([1, 0], 1)
    with pytest.raises(ValueError):
        norming_functional([1, 0], np.inf)


@pytest.mark.parametrize(
    "p, q, gamma",
    [(2, 2, 0.5), (4, 2, 1.5), (1.5, 1.5, 2 / 3)],
)
def test_lp_majorant_table(p, q, gamma):
    mu = lp_majorant(p)
    assert mu.q == q
    assert mu.gamma == pytest.approx(gamma, rel=1e-15)


def test_lp_majorant_branches_agree_at_two():
    lo = SmoothnessMajorant(2.0, 1 / 2)  # u^p / p at p = 2
    hi = SmoothnessMajorant(2.0, (2 - 1) / 2)  # (p-1) u^2 / 2 at p = 2
    assert lo == hi == lp_majorant(2)


def test_lp_majorant_rejects_non_smooth():
    for p in (1, 0.5, np.inf):
        with pytest.raises(ValueError):
            lp_majorant(p)


def test_majorant_validation_and_conjugate():
    with pytest.raises(ValueError):
        SmoothnessMajorant(2.5, 1)
    with pytest.raises(ValueError):
        SmoothnessMajorant(1.0, 1)
    with pytest.raises(ValueError):
        SmoothnessMajorant(2, 0)
    mu = SmoothnessMajorant(1.5, 2 / 3)
    assert abs(mu.p_conjugate - 3.0) <= 1e-12
    assert mu(1.0) == pytest.approx(2 / 3)
    assert conjugate_exponent(4) == pytest.approx(4 / 3)


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
vectors = arrays(np.float64, st.integers(1, 12), elements=finite).filter(lambda v: np.abs(v).max() > 1e-3)
exponents = st.sampled_from([1.5, 2.0, 3.0, 4.0]) | st.floats(1.1, 8.0)


@settings(max_examples=300, deadline=None)
@given(vectors, exponents)
def test_duality_identities(f, p):
    F = norming_functional(f, p)
    nf = norm_lp(f, p)
    assert abs(F @ f - nf) <= 1e-10 * nf
    assert abs(norm_lp(F, conjugate_exponent(p)) - 1.0) <= 1e-10


@settings(max_examples=200, deadline=None)
@given(vectors, exponents, st.floats(1e-3, 1e3))
def test_norming_functional_is_scale_invariant(f, p, c):
    np.testing.assert_allclose(norming_functional(c * f, p), norming_functional(f, p), rtol=1e-12, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(vectors, vectors, st.sampled_from([1.0, 1.5, 2.0, 3.0, np.inf]))
def test_norm_axioms(u, v, p):
    n = min(u.size, v.size)
    u, v = u[:n], v[:n]
    assert norm_lp(u + v, p) <= norm_lp(u, p) + norm_lp(v, p) + 1e-9 * (1 + norm_lp(u, p) + norm_lp(v, p))
    assert norm_lp(-2.5 * u, p) == pytest.approx(2.5 * norm_lp(u, p), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(vectors, vectors)
def test_inner_symmetric_bilinear(u, v):
    n = min(u.size, v.size)
    u, v = u[:n], v[:n]
    assert inner(u, v) == inner(v, u)
    assert math.isclose(inner(3 * u, v), 3 * inner(u, v), rel_tol=1e-12, abs_tol=1e-9)
