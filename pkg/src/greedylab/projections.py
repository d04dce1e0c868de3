"""Remote projections: WRPA(L, tau), RP(eps), and the bridge to WGA over D(L).

A subspace L of R^n is stored through an orthonormal basis of its orthogonal
complement (rows of a k x n matrix, k = codim L).  Every quantity the
algorithms need (distances, witnesses, rank-one updates) lives in L-perp.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dictionaries import A1Certificate, SubspaceDictionary
from .hilbert import (EXACT_ZERO, MAX_ITERS, STALL, STALLED, ZERO_NORM, GreedyTrace, SelectionPolicy,
                      _Selector, run_ia, run_wga)
from .spaces import as_vector
from .weakness import as_weakness

ORTHO_TOL = 1e-10


class SubspaceCollection:
    """Finite collection of subspaces given by orthonormal bases of their complements."""

    def __init__(self, perp_bases: Sequence, dim: int | None = None):
        bases = [np.atleast_2d(np.array(u, dtype=np.float64)) for u in perp_bases]
        if not bases:
            raise ValueError("subspace collection is empty")
        n = bases[0].shape[1] if dim is None else int(dim)
        for i, u in enumerate(bases):
            if u.shape[1] != n:
                raise ValueError(f"subspace {i}: complement basis has width {u.shape[1]}, expected {n}")
            if u.shape[0] == 0 or u.shape[0] > n:
                raise ValueError(f"subspace {i}: codimension {u.shape[0]} outside [1, {n}]")
            err = np.abs(u @ u.T - np.eye(u.shape[0])).max()
            if err > ORTHO_TOL:
                raise ValueError(f"subspace {i}: complement basis not orthonormal (error {err:.3g})")
            u.setflags(write=False)
        self.perp_bases = bases
        self.dim = n
        codims = {u.shape[0] for u in bases}
        # uniform codimension allows one batched matmul for all distances
        self._stack = np.stack(bases) if len(codims) == 1 else None

    @classmethod
    def from_perp_spans(cls, spans: Sequence, dim: int | None = None) -> "SubspaceCollection":
        """Orthonormalize arbitrary spanning rows of each L-perp (QR, rank-revealing by tolerance)."""
        out = []
        for i, s in enumerate(spans):
            a = np.atleast_2d(np.asarray(s, dtype=np.float64))
            q, r = np.linalg.qr(a.T)
            keep = np.abs(np.diag(r)) > 1e-12 * max(1.0, np.abs(r).max())
            if not keep.any():
                raise ValueError(f"subspace {i}: complement span is zero")
            out.append(q[:, keep].T)
        return cls(out, dim)

    @classmethod
    def from_subspace_spans(cls, spans: Sequence, dim: int) -> "SubspaceCollection":
        """Build from spanning rows of each L itself (complement via SVD)."""
        out = []
        for s in spans:
            a = np.atleast_2d(np.asarray(s, dtype=np.float64)).reshape(-1, dim)
            _, sv, vt = np.linalg.svd(a, full_matrices=True)
            rank = int(np.sum(sv > 1e-12 * max(1.0, sv.max(initial=0.0))))
            out.append(vt[rank:])
        return cls(out, dim)

    def __len__(self) -> int:
        return len(self.perp_bases)

    def codims(self) -> list[int]:
        return [u.shape[0] for u in self.perp_bases]

    def perp_coords(self, f: np.ndarray) -> list[np.ndarray] | np.ndarray:
        if self._stack is not None:
            return self._stack @ f
        return [u @ f for u in self.perp_bases]

    def perp_norms(self, f: np.ndarray) -> np.ndarray:
        """dist(f, L_i) = ||Pr_{L_i-perp} f|| for every i."""
        if f.shape != (self.dim,):
            raise ValueError(f"dimension mismatch: vector has shape {f.shape}, collection dim {self.dim}")
        if self._stack is not None:
            return np.linalg.norm(self._stack @ f, axis=1)
        return np.array([np.linalg.norm(u @ f) for u in self.perp_bases])

    def perp_component(self, i: int, f: np.ndarray) -> np.ndarray:
        u = self.perp_bases[self._check(i)]
        return (u @ f) @ u

    def _check(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < len(self):
            raise IndexError(f"subspace index {i} out of range [0, {len(self)})")
        return i

    def rank(self) -> int:
        return int(np.linalg.matrix_rank(np.vstack(self.perp_bases)))

    def trivial_intersection(self) -> bool:
        """The intersection of all L is {0} iff the complements span R^n."""
        return self.rank() == self.dim

    def to_dict(self) -> dict:
        return {"dim": self.dim, "subspaces": [{"perp_basis": u.tolist()} for u in self.perp_bases]}

    @classmethod
    def from_dict(cls, doc: dict) -> "SubspaceCollection":
        return cls([s["perp_basis"] for s in doc["subspaces"]], int(doc["dim"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "SubspaceCollection":
        return cls.from_dict(json.loads(Path(path).read_text()))


def project_onto(x, index: int, coll: SubspaceCollection) -> np.ndarray:
    """Pr_L(x) = x - Pr_{L-perp}(x)."""
    x = as_vector(x)
    if x.size != coll.dim:
        raise ValueError(f"dimension mismatch: x has {x.size}, collection dim {coll.dim}")
    return x - coll.perp_component(index, x)


def dist(x, index: int, coll: SubspaceCollection) -> float:
    x = as_vector(x)
    if x.size != coll.dim:
        raise ValueError(f"dimension mismatch: x has {x.size}, collection dim {coll.dim}")
    return float(np.linalg.norm(coll.perp_component(index, x)))


@dataclass(frozen=True, eq=False)
class ProjectionTrace:
    """WRPA ledger.  ``y[m-1]`` = dist(x_{m-1}, L_m); B_m = B_{m-1} + y_m."""

    x0: np.ndarray
    residuals: np.ndarray
    selected: np.ndarray
    y: np.ndarray
    t: np.ndarray
    B: np.ndarray
    status: str
    params: dict = field(default_factory=dict)

    algorithm = "wrpa"
    b = 1.0

    def __post_init__(self):
        for name in ("x0", "residuals", "selected", "y", "t", "B"):
            getattr(self, name).setflags(write=False)

    @property
    def steps(self) -> int:
        return int(self.selected.size)

    def __len__(self) -> int:
        return self.steps

    @property
    def dist(self) -> np.ndarray:
        return self.y

    @property
    def residual_norms(self) -> np.ndarray:
        return np.linalg.norm(self.residuals, axis=1)

    @property
    def a(self) -> np.ndarray:
        return self.residual_norms**2

    @property
    def cert_bound(self) -> float:
        return float(self.B[0])

    def pythagoras_error(self) -> float:
        """max_m | ||x_m||^2 - (||x_{m-1}||^2 - dist_m^2) |, relative to ||x_0||^2."""
        if not self.steps:
            return 0.0
        a = self.a
        scale = max(a[0], 1e-300)
        return float(np.abs(a[1:] - (a[:-1] - self.y**2)).max() / scale)

    def records(self) -> list[dict]:
        rn = self.residual_norms
        return [
            {
                "m": m,
                "selected": int(self.selected[m - 1]),
                "c_m": float(self.y[m - 1]),
                "y_m": float(self.y[m - 1]),
                "a_m": float(rn[m] ** 2),
                "B_m": float(self.B[m]),
                "residual_norm": float(rn[m]),
                "t_m": float(self.t[m - 1]),
            }
            for m in range(1, self.steps + 1)
        ]


def run_wrpa(x0, coll: SubspaceCollection, tau, M: int = 100, policy: SelectionPolicy | None = None,
             cert=None) -> ProjectionTrace:
    """Weak Remote Projections Algorithm: x_m = Pr_{L_m}(x_{m-1}) with
    dist(x_{m-1}, L_m) >= t_m max_L dist(x_{m-1}, L)."""
    x = as_vector(x0, copy=True)
    if x.size != coll.dim:
        raise ValueError(f"dimension mismatch: x0 has {x.size}, collection dim {coll.dim}")
    if not coll.trivial_intersection():
        warnings.warn("subspaces intersect nontrivially; WRPA need not converge to 0", RuntimeWarning,
                      stacklevel=2)
    tau = as_weakness(tau)
    t = tau.values(M)
    policy = policy or SelectionPolicy()
    policy.check_length(M)
    sel = _Selector(policy)
    b0 = float("nan") if cert is None else (cert.bound if isinstance(cert, A1Certificate) else float(cert))

    res = np.empty((M + 1, x.size))
    res[0] = x
    chosen = np.empty(M, dtype=np.int64)
    ys = np.empty(M)
    B = np.empty(M + 1)
    B[0] = b0
    k = 0
    status = MAX_ITERS
    for m in range(1, M + 1):
        if np.linalg.norm(x) < ZERO_NORM:
            status = EXACT_ZERO
            break
        d = coll.perp_norms(x)
        dmax = float(d.max())
        if dmax < STALL:
            status = STALLED
            break
        i = sel.pick(m, d, t[m - 1], t[m - 1] * dmax)
        x = x - coll.perp_component(i, x)
        chosen[k], ys[k] = i, d[i]
        B[k + 1] = B[k] + d[i]
        res[k + 1] = x
        k += 1
    else:
        if np.linalg.norm(x) < ZERO_NORM:
            status = EXACT_ZERO
    return ProjectionTrace(
        x0=res[0].copy(), residuals=res[: k + 1].copy(), selected=chosen[:k].copy(), y=ys[:k].copy(),
        t=t[:k].copy(), B=B[: k + 1].copy(), status=status,
        params={"tau": tau.to_config(), "policy": policy.to_config()},
    )


@dataclass(frozen=True)
class EquivalenceReport:
    ok: bool
    max_diff: float
    max_rank_one_error: float
    first_divergent_step: int | None
    wrpa: ProjectionTrace = field(repr=False)
    wga: GreedyTrace = field(repr=False)

    def __bool__(self) -> bool:
        return self.ok


def wrpa_wga_equivalence(x0, coll: SubspaceCollection, tau, M: int = 100,
                         policy: SelectionPolicy | None = None, tol: float = 1e-12) -> EquivalenceReport:
    """Run WRPA and WGA(tau, b=1) over D(L) with the same selection rule and compare.

    Also checks the rank-one identity Pr_{L_m}(x) = x - <x, g> g with g the
    normalized component of x in L_m-perp at every WRPA step.
    """
    w = run_wrpa(x0, coll, tau, M, policy)
    g = run_wga(x0, SubspaceDictionary(coll), tau, b=1.0, M=M, policy=policy)
    steps = min(w.steps, g.steps)
    a, b = w.residual_norms, g.residual_norms
    diff = np.abs(a[: steps + 1] - b[: steps + 1])
    bad = np.nonzero(diff > tol)[0]
    first = int(bad[0]) if bad.size else None
    if first is None and (w.steps != g.steps or np.any(w.selected[:steps] != g.selected[:steps])):
        sel_bad = np.nonzero(w.selected[:steps] != g.selected[:steps])[0]
        first = int(sel_bad[0]) + 1 if sel_bad.size else steps + 1
    rank1 = 0.0
    for m in range(1, w.steps + 1):
        x = w.residuals[m - 1]
        comp = coll.perp_component(w.selected[m - 1], x)
        nrm = np.linalg.norm(comp)
        if nrm == 0.0:
            continue
        gv = comp / nrm
        rank1 = max(rank1, float(np.linalg.norm(w.residuals[m] - (x - (x @ gv) * gv))))
    ok = first is None and rank1 <= tol * max(1.0, float(a[0]))
    return EquivalenceReport(ok, float(diff.max(initial=0.0)), rank1, first, w, g)


def certify_combination(coll: SubspaceCollection, indices: Sequence[int], weights, directions) -> tuple[np.ndarray, A1Certificate]:
    """x0 = sum_j w_j g_j with g_j the unit vector of L_{i_j}-perp along ``directions[j]``.

    ``directions[j]`` are coordinates in the stored complement basis.  The
    returned certificate bounds ||x0||_{A1(D(L))} by sum |w_j|.
    """
    w = np.asarray(weights, dtype=np.float64).ravel()
    idx = [coll._check(i) for i in indices]
    if len(idx) != w.size or len(directions) != w.size:
        raise ValueError("indices, weights and directions differ in length")
    atoms = []
    for i, v in zip(idx, directions):
        v = np.atleast_1d(np.asarray(v, dtype=np.float64))
        g = v @ coll.perp_bases[i]
        nrm = np.linalg.norm(g)
        if nrm == 0.0:
            raise ValueError("direction is zero")
        atoms.append(g / nrm)
    atoms = np.vstack(atoms)
    cert = A1Certificate(tuple(idx), w, atoms)
    return cert.synthesize(), cert


def run_rp_schedule(x0, coll: SubspaceCollection, eps, M: int = 100, cert: A1Certificate | None = None) -> GreedyTrace:
    """Remote projections with schedule eps, run as IA(eps) over D(L).

    Raises :class:`greedylab.hilbert.IAConditionError` when the condition
    fails, which signals x0 outside conv(D(L)).
    """
    return run_ia(x0, SubspaceDictionary(coll), eps, M, cert)
