"""Seeded random instances.

All randomness comes from ``numpy.random.default_rng(seed)`` (PCG64 bit
generator), so a seed pins an instance across platforms.
"""

from __future__ import annotations

import numpy as np

from .dictionaries import A1Certificate, Dictionary, a1_certify, symmetrize
from .projections import SubspaceCollection, certify_combination


def orthonormal_dictionary(n: int, symmetric: bool = False) -> Dictionary:
    d = Dictionary(np.eye(n))
    return symmetrize(d) if symmetric else d


def random_unit_dictionary(n: int, count: int, seed: int, p: float = 2.0, symmetric: bool = False) -> Dictionary:
    """``count`` Gaussian directions scaled to unit lp norm (symmetrized on request)."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, n))
    if p == 2:
        g /= np.linalg.norm(g, axis=1, keepdims=True)
    else:
        g /= (np.sum(np.abs(g) ** p, axis=1) ** (1.0 / p))[:, None]
    d = Dictionary(g, p=p)
    return symmetrize(d) if symmetric else d


def random_signed_combination(d: Dictionary, seed: int, terms: int | None = None,
                              scale: float = 1.0) -> tuple[np.ndarray, A1Certificate]:
    """f = scale * sum_j s_j w_j g_{i_j} with Dirichlet weights and random signs.

    The certificate bound is ``scale`` (weights sum to 1).
    """
    rng = np.random.default_rng(seed)
    terms = d.size if terms is None else min(int(terms), d.size)
    idx = np.sort(rng.choice(d.size, size=terms, replace=False))
    w = rng.dirichlet(np.ones(terms))
    s = rng.choice([-1.0, 1.0], size=terms)
    return a1_certify(d, idx, scale * s * w)


def random_convex_combination(d: Dictionary, seed: int, terms: int | None = None) -> tuple[np.ndarray, A1Certificate]:
    """Nonnegative weights summing to 1 (a point of conv(D))."""
    rng = np.random.default_rng(seed)
    terms = d.size if terms is None else min(int(terms), d.size)
    idx = np.sort(rng.choice(d.size, size=terms, replace=False))
    return a1_certify(d, idx, rng.dirichlet(np.ones(terms)))


def random_l1_coefficients(n: int, seed: int, decay: float = 0.0) -> np.ndarray:
    """Signed coefficient vector with ||c||_1 = 1; ``decay`` > 0 weights k^-decay."""
    rng = np.random.default_rng(seed)
    c = rng.exponential(size=n) * np.arange(1, n + 1) ** (-float(decay))
    c *= rng.choice([-1.0, 1.0], size=n)
    return c / np.abs(c).sum()


def random_subspace_collection(n: int, count: int, codim: int, seed: int) -> SubspaceCollection:
    """``count`` subspaces of codimension ``codim`` with Gaussian complements."""
    rng = np.random.default_rng(seed)
    bases = []
    for _ in range(count):
        q, _ = np.linalg.qr(rng.standard_normal((n, codim)))
        bases.append(q.T)
    return SubspaceCollection(bases, n)


def random_collection_combination(coll: SubspaceCollection, seed: int, terms: int | None = None,
                                  scale: float = 1.0, signed: bool = True):
    """x0 = scale * sum_j w_j g_j over random unit vectors g_j of the complements."""
    rng = np.random.default_rng(seed)
    terms = len(coll) if terms is None else min(int(terms), len(coll))
    idx = np.sort(rng.choice(len(coll), size=terms, replace=False))
    w = rng.dirichlet(np.ones(terms))
    if signed:
        w = w * rng.choice([-1.0, 1.0], size=terms)
    dirs = [rng.standard_normal(coll.perp_bases[i].shape[0]) for i in idx]
    return certify_combination(coll, idx, scale * w, dirs)
