import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedylab.dictionaries import (Dictionary, SubspaceDictionary, a1_certify, load_dictionary, make_explicit,
                                    save_dictionary, symmetrize, weak_sup)
from greedylab.generators import random_subspace_collection, random_unit_dictionary

from .oracles import lstsq_distance

S = 2**-0.5


def test_make_explicit():
    d = make_explicit([[1, 0], [0, 1]])
    assert d.size == 2 and d.dim == 2 and not d.symmetric
    assert d.is_complete()
    np.testing.assert_allclose(make_explicit([[3, 4]], normalize=True).elements, [[0.6, 0.8]], rtol=1e-15)


def test_make_explicit_errors():
    with pytest.raises(ValueError):
        make_explicit([[0, 0]], normalize=True)
    with pytest.raises(ValueError):
        make_explicit([[3, 4]])
    with pytest.raises(ValueError):
        make_explicit([[1, 0], [1, 0]])
    with pytest.raises(ValueError):
        make_explicit([[1, 0], [1, 0, 0]])


def test_symmetrize():
    e1 = make_explicit([[1, 0]])
    s = symmetrize(e1)
    assert s.symmetric and s.size == 2
    np.testing.assert_array_equal(s.elements, [[1, 0], [-1, 0]])
    already = make_explicit([[1, 0], [-1, 0]])
    assert already.symmetric
    assert symmetrize(already) is already
    assert symmetrize(make_explicit([[0.6, 0.8], [1, 0]])).size == 4


def test_weak_sup_examples():
    d = make_explicit([[1, 0], [0, 1]])
    v, g = weak_sup(d, [0.8, 0.6])
    assert v == 0.8
    np.testing.assert_array_equal(g, [1, 0])
    d2 = make_explicit([[1, 0], [S, S]])
    v, g = weak_sup(d2, [0, 1])
    assert v == pytest.approx(S, abs=1e-16)
    np.testing.assert_array_equal(g, [S, S])
    v, g = weak_sup(d2, [0, 0])
    assert v == 0.0
    np.testing.assert_array_equal(g, [1, 0])
    with pytest.raises(ValueError):
        weak_sup(d, [1, 0, 0])


def test_incomplete_dictionary_is_reported_not_rejected():
    d = make_explicit([[1, 0, 0], [0, 1, 0]])
    assert d.span_rank() == 2 and not d.is_complete()


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 12), st.integers(1, 30))
def test_weak_sup_matches_brute_force(seed, n, k):
    d = random_unit_dictionary(n, k, seed)
    f = np.random.default_rng(seed + 1).standard_normal(n)
    v, g = weak_sup(d, f)
    brute = max(abs(float(sum(a * b for a, b in zip(row, f)))) for row in d.elements)
    assert v == pytest.approx(brute, rel=1e-13, abs=1e-15)
    assert abs(abs(g @ f) - v) <= 1e-13 * max(1.0, v)


def test_subspace_dictionary_sup_matches_dense_projection():
    rng = np.random.default_rng(3)
    for seed in range(20):
        coll = random_subspace_collection(6, 5, 2, seed)
        f = rng.standard_normal(6)
        v, g = weak_sup(SubspaceDictionary(coll), f)
        dists = []
        for u in coll.perp_bases:
            # spanning rows of L itself: complement of u via SVD
            _, _, vt = np.linalg.svd(u, full_matrices=True)
            dists.append(lstsq_distance(f, vt[u.shape[0]:])[0])
        assert abs(v - max(dists)) <= 1e-12
        assert abs(np.linalg.norm(g) - 1) <= 1e-12
        assert abs(g @ f - v) <= 1e-12


def test_a1_certify_examples():
    d = make_explicit([[1, 0], [0, 1]])
    f, c = a1_certify(d, [0, 1], [0.5, 0.5])
    np.testing.assert_allclose(f, [0.5, 0.5])
    assert c.bound == 1.0
    f, c = a1_certify(d, [1], [1.0])
    np.testing.assert_array_equal(f, [0, 1])
    assert c.bound == 1.0
    f, c = a1_certify(d, [0, 1], [0.6, -0.6])
    assert c.bound == pytest.approx(1.2)
    assert np.linalg.norm(f) == pytest.approx(0.848528137423857, rel=1e-14)
    assert np.linalg.norm(f) <= c.bound
    with pytest.raises(IndexError):
        a1_certify(d, [2], [1.0])
    with pytest.raises(TypeError):
        a1_certify(SubspaceDictionary(random_subspace_collection(3, 2, 1, 0)), [0], [1.0])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 10))
def test_certificate_soundness(seed, terms):
    d = random_unit_dictionary(5, 12, seed)
    rng = np.random.default_rng(seed)
    idx = rng.choice(12, size=terms, replace=False)
    coef = rng.standard_normal(terms)
    f, c = a1_certify(d, idx, coef)
    assert np.linalg.norm(c.synthesize() - f) <= 1e-10
    assert c.bound >= np.linalg.norm(f) - 1e-12


def test_dictionary_is_immutable():
    d = make_explicit([[1, 0], [0, 1]])
    with pytest.raises(ValueError):
        d.elements[0, 0] = 2.0


def test_file_round_trip(tmp_path):
    d = random_unit_dictionary(4, 6, 11)
    for name in ("d.json", "d.csv"):
        save_dictionary(d, tmp_path / name)
        back = load_dictionary(tmp_path / name)
        np.testing.assert_array_equal(back.elements, d.elements)


def test_json_symmetric_flag_and_validation(tmp_path):
    (tmp_path / "s.json").write_text(json.dumps({"dim": 2, "elements": [[1, 0], [0, 1]], "symmetric": True}))
    assert load_dictionary(tmp_path / "s.json").size == 4
    (tmp_path / "bad.json").write_text(json.dumps({"dim": 2, "elements": [[1, 1]], "symmetric": False}))
    with pytest.raises(ValueError):
        load_dictionary(tmp_path / "bad.json")
    (tmp_path / "dim.json").write_text(json.dumps({"dim": 3, "elements": [[1, 0]]}))
    with pytest.raises(ValueError):
        load_dictionary(tmp_path / "dim.json")


def test_lp_normalized_dictionary():
    d = random_unit_dictionary(5, 7, 2, p=4)
    assert d.p == 4
    assert np.allclose(np.sum(np.abs(d.elements) ** 4, axis=1), 1, atol=1e-12)
    with pytest.raises(ValueError):
        Dictionary(d.elements)  # not l2-normalized
