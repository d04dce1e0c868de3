"""Thresholding greedy algorithms with respect to a basis, on coefficient sequences.

Everything here is a function of the coefficient vector c_k(f) and of bounds
on the basis norms, so the basis itself stays abstract.  In
``orthonormal_hilbert`` mode the residual l2 norm is exact; in
``normed_banach`` mode only the weighted l1 upper bound
sum |c_k| ||psi_k|| of the residual norm is available.

Indices are 0-based: coefficient k here multiplies the (k+1)-th basis element.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .weakness import as_weakness, summability

DEFAULT_HORIZON = 2**14


@dataclass(frozen=True, eq=False)
class BasisModel:
    """Basis norm profile ||psi_k||, k < n, bounded in [C1, C2]."""

    n: int
    norms: np.ndarray | None = None
    mode: str = "orthonormal_hilbert"

    def __post_init__(self):
        if self.mode not in ("orthonormal_hilbert", "normed_banach"):
            raise ValueError(f"unknown basis mode {self.mode!r}")
        w = np.ones(self.n) if self.norms is None else np.asarray(self.norms, dtype=np.float64).copy()
        if w.shape != (self.n,):
            raise ValueError("basis norm profile must have one entry per coefficient")
        if self.mode == "orthonormal_hilbert" and not np.allclose(w, 1.0, rtol=0, atol=1e-12):
            raise ValueError("orthonormal basis elements have norm 1")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("basis norms must be finite and positive")
        w.setflags(write=False)
        object.__setattr__(self, "norms", w)

    @classmethod
    def banach(cls, norms) -> "BasisModel":
        norms = np.asarray(norms, dtype=np.float64)
        return cls(norms.size, norms, "normed_banach")

    @property
    def C1(self) -> float:
        return float(self.norms.min())

    @property
    def C2(self) -> float:
        return float(self.norms.max())


def greedy_permutation(c) -> np.ndarray:
    """Indices ordered by |c_k| nonincreasing, ties to the lowest index."""
    c = np.asarray(c, dtype=np.float64)
    return np.argsort(-np.abs(c), kind="stable")


class IllegalSelection(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WTGATrace:
    """Per-step record; arrays of residual quantities have length steps + 1 (entry 0 = f)."""

    selected: np.ndarray
    picked_abs: np.ndarray
    threshold: np.ndarray
    t: np.ndarray
    residual_l2: np.ndarray
    residual_l1: np.ndarray
    weighted_l1: np.ndarray
    max_remaining: np.ndarray
    suffix_bound: np.ndarray
    status: str
    params: dict = field(default_factory=dict)

    @property
    def steps(self) -> int:
        return int(self.selected.size)

    def __len__(self) -> int:
        return self.steps


def run_wtga(c, model: BasisModel | None = None, tau=1.0, M: int | None = None,
             policy: str = "greedy_max", schedule=None, seed: int = 0) -> WTGATrace:
    """Weak Thresholding Greedy Algorithm on the coefficient vector ``c``.

    Step m removes an index k with |c_k| >= t_m max_j |c_j(f_{m-1})|.
    ``policy``: ``greedy_max`` (largest, lowest index on ties),
    ``adversarial`` (smallest admissible), ``random`` or ``replay`` (uses
    ``schedule`` and checks each choice for legality).
    """
    c = np.asarray(c, dtype=np.float64).ravel()
    n = c.size
    model = model or BasisModel(n)
    if model.n != n:
        raise ValueError("basis model and coefficient vector differ in length")
    if policy not in ("greedy_max", "adversarial", "random", "replay"):
        raise ValueError(f"unknown WTGA policy {policy!r}")
    M = n if M is None else int(M)
    if policy == "replay":
        if schedule is None or len(schedule) < min(M, n):
            raise ValueError("replay policy needs a schedule covering every step")
        schedule = np.asarray(schedule, dtype=np.int64)
    tau = as_weakness(tau)
    t = tau.values(min(M, n))
    rng = np.random.default_rng(seed)
    w = model.norms

    cur = np.abs(c)
    removed = np.zeros(n, dtype=bool)
    steps = min(M, n)
    sel = np.empty(steps, dtype=np.int64)
    picked, thr_arr = np.empty(steps), np.empty(steps)
    l2, l1, wl1, mx = (np.empty(steps + 1) for _ in range(4))
    sfx = np.empty(steps + 1)
    # suffix[k] = sum_{j >= k} |c_j|; first unremoved index drives the tail bound
    suffix = np.concatenate([np.cumsum(np.abs(c)[::-1])[::-1], [0.0]])
    front = 0

    def measure(k):
        l2[k] = np.sqrt(cur @ cur)
        l1[k] = cur.sum()
        wl1[k] = cur @ w
        mx[k] = cur.max() if n else 0.0
        sfx[k] = model.C2 * suffix[front]

    measure(0)
    status = "max_iters"
    done = 0
    for m in range(1, steps + 1):
        tm = t[m - 1]
        thr = tm * mx[m - 1]
        if policy == "replay":
            k = int(schedule[m - 1])
            if not 0 <= k < n or removed[k]:
                raise IllegalSelection(f"step {m}: index {k} is out of range or already removed")
            if cur[k] < thr - 1e-12 * max(thr, 1e-300):
                raise IllegalSelection(f"step {m}: |c_{k}| = {cur[k]!r} is below the threshold {thr!r}")
        else:
            ok = np.nonzero(~removed & (cur >= thr))[0]
            if ok.size == 0:
                raise RuntimeError(f"step {m}: no admissible index (internal error)")
            if policy == "greedy_max":
                k = int(ok[np.argmax(cur[ok])])
            elif policy == "adversarial":
                k = int(ok[np.argmin(cur[ok])])
            else:
                k = int(rng.choice(ok))
        sel[m - 1], picked[m - 1], thr_arr[m - 1] = k, cur[k], thr
        cur[k] = 0.0
        removed[k] = True
        while front < n and removed[front]:
            front += 1
        measure(m)
        if model.mode == "orthonormal_hilbert" and l2[m] ** 2 > mx[m] * l1[m] * (1 + 1e-12) + 1e-300:
            raise RuntimeError(f"step {m}: l2^2 <= linf * l1 violated (internal error)")
        done = m
    if done == n:
        status = "exhausted"

    out = [sel[:done], picked[:done], thr_arr[:done], t[:done].copy(),
           l2[: done + 1], l1[: done + 1], wl1[: done + 1], mx[: done + 1], sfx[: done + 1]]
    for a in out:
        a.setflags(write=False)
    return WTGATrace(*out, status=status,
                     params={"tau": tau.to_config(), "policy": policy, "mode": model.mode})


@dataclass(frozen=True, eq=False)
class Counterexample:
    """Truncated f* = f0 / (1 + S) with f0 = psi_1 + sum_{k>=2} t_{k-1} psi_k."""

    coefficients: np.ndarray
    schedule: np.ndarray
    floor: float
    S: float
    tail_bound: float | None

    def to_dict(self) -> dict:
        return {
            "coefficients": self.coefficients.tolist(),
            "schedule": self.schedule.tolist(),
            "floor": self.floor,
            "S": self.S,
            "tail_bound": self.tail_bound,
        }


def necessity_counterexample(tau, horizon: int = DEFAULT_HORIZON, summable: bool | None = None) -> Counterexample:
    """Input in A1 of an orthonormal basis on which WTGA(tau) fails to converge.

    Needs sum t_k < inf.  The adversarial schedule removes psi_2, psi_3, ...
    (each exactly at its threshold), so psi_1's coefficient 1/(1+S) stays in
    the residual forever and is the returned ``floor``.  ``summable=True``
    skips the summability check for sequences without a closed form.
    """
    tau = as_weakness(tau)
    if horizon < 3:
        raise ValueError("horizon must be at least 3")
    # the truncated f* uses t_1..t_{horizon-1}; tail bounds sum_{k >= horizon} t_k
    ok, _, tail = summability(tau, horizon - 1)
    if summable is None and not ok:
        raise ValueError("necessity construction needs a summable weakness sequence (sum t_k < inf)")
    t = tau.values(horizon - 1)
    S = float(t.sum())
    inv = 1.0 / (1.0 + S)
    coeffs = np.concatenate([[inv], t * inv])
    schedule = np.arange(1, horizon, dtype=np.int64)
    return Counterexample(coeffs, schedule, inv, S, tail)
