"""Dictionaries of unit-norm atoms and the weak-greedy sup oracle.

Two kinds share one small interface (``size``, ``dim``, ``scores``,
``signed_scores``, ``witness``):

* :class:`Dictionary` is an explicit finite list of unit vectors.
* :class:`SubspaceDictionary` is the implicit dictionary D(L) of all unit
  vectors lying in some L-perp, for a collection of subspaces L.  It is
  infinite, so atoms are indexed by subspace and the witness for subspace i
  at a point f is the normalized component of f in L_i-perp, which attains
  the sup over that piece.

Ties are always resolved toward the lowest index.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .spaces import as_vector, frozen

UNIT_TOL = 1e-12


class DictionaryLike(Protocol):
    dim: int
    symmetric: bool

    @property
    def size(self) -> int: ...

    def scores(self, f: np.ndarray) -> np.ndarray: ...

    def signed_scores(self, f: np.ndarray) -> np.ndarray: ...

    def witness(self, index: int, f: np.ndarray) -> np.ndarray: ...


def _row_norms(m: np.ndarray, p: float) -> np.ndarray:
    if p == 2:
        return np.linalg.norm(m, axis=1)
    return np.array([np.sum(np.abs(r) ** p) ** (1.0 / p) for r in m])


def _close_pairs(a: np.ndarray, b: np.ndarray, tol: float) -> list[tuple[int, int]]:
    """Index pairs (i, j) with ||a_i - b_j||_2 <= tol (Gram prefilter, exact confirm)."""
    sq = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2.0 * a @ b.T
    cand = np.argwhere(sq <= 1e-13)
    return [(int(i), int(j)) for i, j in cand if np.linalg.norm(a[i] - b[j]) <= tol]


@dataclass(frozen=True, eq=False)
class Dictionary:
    """Explicit dictionary; rows of ``elements`` are atoms of unit lp norm."""

    elements: np.ndarray
    symmetric: bool = False
    p: float = 2.0

    def __post_init__(self):
        e = np.array(self.elements, dtype=np.float64)
        if e.ndim != 2 or e.shape[0] == 0 or e.shape[1] == 0:
            raise ValueError(f"elements must be a nonempty 2-D array, got shape {e.shape}")
        if not np.all(np.isfinite(e)):
            raise ValueError("dictionary has non-finite entries")
        norms = _row_norms(e, self.p)
        bad = np.nonzero(np.abs(norms - 1.0) > UNIT_TOL)[0]
        if bad.size:
            raise ValueError(
                f"element {int(bad[0])} has l{self.p:g} norm {norms[bad[0]]!r}, expected 1"
            )
        dup = [(i, j) for i, j in _close_pairs(e, e, UNIT_TOL) if i < j]
        if dup:
            raise ValueError(f"elements {dup[0][0]} and {dup[0][1]} coincide")
        e.setflags(write=False)
        object.__setattr__(self, "elements", e)
        if not self.symmetric and _is_symmetric(e):
            object.__setattr__(self, "symmetric", True)

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    @property
    def size(self) -> int:
        return self.elements.shape[0]

    def __len__(self) -> int:
        return self.size

    def signed_scores(self, f: np.ndarray) -> np.ndarray:
        return self.elements @ f

    def scores(self, f: np.ndarray) -> np.ndarray:
        return np.abs(self.elements @ f)

    def witness(self, index: int, f: np.ndarray | None = None) -> np.ndarray:
        return self.elements[index]

    def span_rank(self) -> int:
        return int(np.linalg.matrix_rank(self.elements))

    def is_complete(self) -> bool:
        """Whether the atoms span the whole coordinate space."""
        return self.span_rank() == self.dim


def _is_symmetric(e: np.ndarray) -> bool:
    matched = {i for i, _ in _close_pairs(e, -e, UNIT_TOL)}
    return len(matched) == e.shape[0]


def make_explicit(vectors, normalize: bool = False, p: float = 2.0) -> Dictionary:
    """Build an explicit dictionary, optionally scaling each vector to unit lp norm."""
    rows = [as_vector(v) for v in vectors]
    if not rows:
        raise ValueError("dictionary needs at least one vector")
    n = rows[0].size
    if any(r.size != n for r in rows):
        raise ValueError("all vectors must share one dimension")
    m = np.vstack(rows)
    if normalize:
        norms = _row_norms(m, p)
        zero = np.nonzero(norms == 0.0)[0]
        if zero.size:
            raise ValueError(f"vector {int(zero[0])} is zero and cannot be normalized")
        m = m / norms[:, None]
    return Dictionary(m, p=p)


def symmetrize(d: Dictionary) -> Dictionary:
    """D^+- = {+g, -g}; returned unchanged if already symmetric."""
    if d.symmetric:
        return d
    e = d.elements
    have = {i for i, _ in _close_pairs(e, -e, UNIT_TOL)}
    missing = [i for i in range(d.size) if i not in have]
    return Dictionary(np.vstack([e, -e[missing]]), symmetric=True, p=d.p)


class SubspaceDictionary:
    """D(L): unit vectors of the orthogonal complements of a subspace collection.

    ``collection`` must provide ``dim``, ``perp_norms(f)`` and
    ``perp_component(i, f)`` (see :class:`greedylab.projections.SubspaceCollection`).
    """

    symmetric = True
    p = 2.0

    def __init__(self, collection):
        self.collection = collection

    @property
    def dim(self) -> int:
        return self.collection.dim

    @property
    def size(self) -> int:
        return len(self.collection)

    def __len__(self) -> int:
        return self.size

    def scores(self, f: np.ndarray) -> np.ndarray:
        return self.collection.perp_norms(f)

    # the canonical witness has <f, g> = ||Pr_perp f|| >= 0
    signed_scores = scores

    def witness(self, index: int, f: np.ndarray) -> np.ndarray:
        comp = self.collection.perp_component(index, f)
        nrm = np.linalg.norm(comp)
        if nrm == 0.0:
            # any unit vector of L-perp is a valid atom; pick the first basis row
            return self.collection.perp_bases[index][0]
        return comp / nrm

    def span_rank(self) -> int:
        return self.collection.rank()

    def is_complete(self) -> bool:
        return self.span_rank() == self.dim


def weak_sup(d: DictionaryLike, f) -> tuple[float, np.ndarray]:
    """sup over atoms g of |<f, g>| together with the attaining atom."""
    f = as_vector(f)
    if f.size != d.dim:
        raise ValueError(f"dimension mismatch: f has {f.size}, dictionary has {d.dim}")
    s = d.scores(f)
    i = int(np.argmax(s))
    return float(s[i]), d.witness(i, f)


@dataclass(frozen=True, eq=False)
class A1Certificate:
    """Explicit representation f = sum_j coefficients_j * atoms_j.

    ``bound`` = sum |coefficients_j| is an upper bound for the A1(D) norm of f
    (exact for an orthonormal basis).
    """

    indices: tuple[int, ...]
    coefficients: np.ndarray
    atoms: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        object.__setattr__(self, "coefficients", frozen(self.coefficients))
        object.__setattr__(self, "atoms", frozen(np.atleast_2d(self.atoms)))
        if len(self.indices) != self.coefficients.size or self.atoms.shape[0] != len(self.indices):
            raise ValueError("indices, coefficients and atoms must have equal length")

    @property
    def bound(self) -> float:
        return float(np.sum(np.abs(self.coefficients)))

    @property
    def nonnegative(self) -> bool:
        return bool(np.all(self.coefficients >= 0))

    def synthesize(self) -> np.ndarray:
        return self.coefficients @ self.atoms


def a1_certify(d: Dictionary, indices: Sequence[int], coefficients) -> tuple[np.ndarray, A1Certificate]:
    """Synthesize f = sum c_j g_{i_j} and certify ||f||_{A1(D)} <= sum |c_j|."""
    if not isinstance(d, Dictionary):
        raise TypeError("a1_certify needs an explicit dictionary")
    idx = [int(i) for i in indices]
    c = np.asarray(coefficients, dtype=np.float64).ravel()
    if len(idx) != c.size:
        raise ValueError("indices and coefficients differ in length")
    for i in idx:
        if not 0 <= i < d.size:
            raise IndexError(f"dictionary index {i} out of range [0, {d.size})")
    cert = A1Certificate(tuple(idx), c, d.elements[idx] if idx else np.zeros((0, d.dim)))
    return cert.synthesize() if idx else np.zeros(d.dim), cert


# --- file formats -----------------------------------------------------------

def load_dictionary(path, p: float = 2.0) -> Dictionary:
    """Read a dictionary from JSON ({"dim", "elements", "symmetric"}) or CSV (one atom per row)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        doc = json.loads(path.read_text())
        elements = np.asarray(doc["elements"], dtype=np.float64)
        if "dim" in doc and elements.shape[1] != int(doc["dim"]):
            raise ValueError(f"{path}: dim {doc['dim']} does not match element length {elements.shape[1]}")
        d = Dictionary(elements, p=float(doc.get("p", p)))
        return symmetrize(d) if doc.get("symmetric", False) else d
    with path.open(newline="") as fh:
        rows = [[float(x) for x in row] for row in csv.reader(fh) if row]
    return Dictionary(np.asarray(rows), p=p)


def save_dictionary(d: Dictionary, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        doc = {"dim": d.dim, "elements": d.elements.tolist(), "symmetric": d.symmetric}
        if d.p != 2:
            doc["p"] = d.p
        path.write_text(json.dumps(doc))
        return
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        for row in d.elements:
            w.writerow([format(x, ".17g") for x in row])
