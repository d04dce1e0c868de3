"""Greedy algorithms in a Hilbert space (l2^n).

All runs return a :class:`GreedyTrace`.  Every algorithm here shares the
weak greedy step: at iteration m pick an atom whose score |<f_{m-1}, g>| is at
least t_m times the best score.  They differ in the approximation step:

========  ====================================================================
WGA       f_m = f_{m-1} - b <f_{m-1}, phi_m> phi_m
TWGA      same update, greedy step replaced by the threshold t_m a_{m-1}/B_{m-1}
WOGA      G_m = orthogonal projection of f onto span(phi_1..phi_m)
WGAFR     G_m = orthogonal projection of f onto span(G_{m-1}, phi_m)
RGA       G_m = (1 - 1/m) G_{m-1} + phi_m / m  (G_1 = <f, phi_1> phi_1)
IA(eps)   RGA-style averaging with a schedule-checked selection
========  ====================================================================

Which atom is taken among the admissible ones is governed by a
:class:`SelectionPolicy`; the default is the exact maximizer with
lowest-index tie-breaking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .dictionaries import A1Certificate, DictionaryLike
from .spaces import as_vector
from .weakness import WeaknessSequence, as_weakness

ZERO_NORM = 1e-14
STALL = 1e-15

MAX_ITERS = "max_iters"
EXACT_ZERO = "exact_zero"
STALLED = "stalled"


class WeaknessViolation(ValueError):
    """A replayed selection does not satisfy the weak greedy inequality."""

    def __init__(self, step: int, index: int, value: float, threshold: float):
        self.step, self.index, self.value, self.threshold = step, index, value, threshold
        super().__init__(
            f"step {step}: atom {index} has score {value!r} below the weakness threshold {threshold!r}"
        )


class IAConditionError(ValueError):
    """No atom satisfies the incremental-algorithm condition (f outside conv(D) or schedule too tight)."""


@dataclass(frozen=True)
class SelectionPolicy:
    """How to choose among atoms admissible at a step.

    mode
        ``greedy_max`` (argmax), ``first_satisfier`` (lowest admissible index),
        ``min_satisfier`` (weakest admissible atom, adversarial),
        ``random_satisfier`` (uniform among admissible, seeded) or ``replay``.
    zero_step
        Rule for steps with t_m = 0, where every atom is admissible:
        ``greedy_max``, ``fixed_index`` or ``seeded_random``.
    """

    mode: str = "greedy_max"
    replay: tuple[int, ...] = ()
    zero_step: str = "greedy_max"
    fixed_index: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("greedy_max", "first_satisfier", "min_satisfier", "random_satisfier", "replay"):
            raise ValueError(f"unknown selection mode {self.mode!r}")
        if self.zero_step not in ("greedy_max", "fixed_index", "seeded_random"):
            raise ValueError(f"unknown zero-step rule {self.zero_step!r}")
        object.__setattr__(self, "replay", tuple(int(i) for i in self.replay))

    @classmethod
    def replaying(cls, indices: Sequence[int]) -> "SelectionPolicy":
        return cls(mode="replay", replay=tuple(int(i) for i in indices))

    def check_length(self, steps: int) -> None:
        if self.mode == "replay" and len(self.replay) < steps:
            raise ValueError(f"replay list has {len(self.replay)} entries, {steps} iterations requested")

    def to_config(self) -> dict:
        out = {"mode": self.mode, "zero_step": self.zero_step}
        if self.mode == "replay":
            out["replay"] = list(self.replay)
        if self.zero_step == "fixed_index":
            out["fixed_index"] = self.fixed_index
        if self.mode == "random_satisfier" or self.zero_step == "seeded_random":
            out["seed"] = self.seed
        return out

    @classmethod
    def from_config(cls, cfg: dict | None) -> "SelectionPolicy":
        cfg = dict(cfg or {})
        return cls(
            mode=cfg.get("mode", "greedy_max"),
            replay=tuple(cfg.get("replay", ())),
            zero_step=cfg.get("zero_step", "greedy_max"),
            fixed_index=int(cfg.get("fixed_index", 0)),
            seed=int(cfg.get("seed", 0)),
        )


class _Selector:
    def __init__(self, policy: SelectionPolicy, default_mode: str | None = None):
        self.policy = policy
        self.mode = policy.mode
        if default_mode and self.mode == "greedy_max":
            self.mode = default_mode
        self.rng = np.random.default_rng(policy.seed)

    def pick(self, step: int, scores: np.ndarray, t: float, threshold: float) -> int | None:
        """Index with scores[i] >= threshold, or None if nothing qualifies."""
        p = self.policy
        if self.mode == "replay":
            i = p.replay[step - 1]
            if not 0 <= i < scores.size:
                raise IndexError(f"replayed index {i} out of range at step {step}")
            if t > 0 and scores[i] < threshold - 1e-12 * max(1.0, threshold):
                raise WeaknessViolation(step, i, float(scores[i]), float(threshold))
            return i
        if t == 0:
            if p.zero_step == "fixed_index":
                return p.fixed_index
            if p.zero_step == "seeded_random":
                return int(self.rng.integers(scores.size))
            return int(np.argmax(scores))
        ok = np.nonzero(scores >= threshold)[0]
        if ok.size == 0:
            return None
        if self.mode == "greedy_max":
            return int(np.argmax(scores))
        if self.mode == "first_satisfier":
            return int(ok[0])
        if self.mode == "min_satisfier":
            return int(ok[np.argmin(scores[ok])])
        return int(self.rng.choice(ok))


@dataclass(frozen=True, eq=False)
class GreedyTrace:
    """Per-iteration ledger of a Hilbert-space greedy run.

    Row m of ``residuals`` is f_m (row 0 is f).  ``coefficients[m-1]`` is the
    coefficient put on phi_m by the approximation step (b<f_{m-1},phi_m> for
    WGA/TWGA, <f_{m-1},phi_m> for WOGA/WGAFR and the first RGA step, 1/m for
    later RGA and IA steps).  ``y[m-1]`` = |<f_{m-1}, phi_m>|.  ``B`` holds
    B_0..B_M with B_m = B_{m-1} + b y_m (NaN without a certificate or for
    algorithms where it has no meaning).
    """

    algorithm: str
    f: np.ndarray
    residuals: np.ndarray
    selected: np.ndarray
    atoms: np.ndarray
    coefficients: np.ndarray
    y: np.ndarray
    t: np.ndarray
    B: np.ndarray
    status: str
    b: float = 1.0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("f", "residuals", "selected", "atoms", "coefficients", "y", "t", "B"):
            getattr(self, name).setflags(write=False)

    @property
    def steps(self) -> int:
        return int(self.selected.size)

    def __len__(self) -> int:
        return self.steps

    @cached_property
    def residual_norms(self) -> np.ndarray:
        return np.linalg.norm(self.residuals, axis=1)

    @property
    def a(self) -> np.ndarray:
        return self.residual_norms**2

    @property
    def cert_bound(self) -> float:
        return float(self.B[0])

    def approximant(self, m: int) -> np.ndarray:
        return self.f - self.residuals[m]

    def records(self) -> list[dict]:
        rn = self.residual_norms
        return [
            {
                "m": m,
                "selected": int(self.selected[m - 1]),
                "c_m": float(self.coefficients[m - 1]),
                "y_m": float(self.y[m - 1]),
                "a_m": float(rn[m] ** 2),
                "B_m": float(self.B[m]),
                "residual_norm": float(rn[m]),
                "t_m": float(self.t[m - 1]),
            }
            for m in range(1, self.steps + 1)
        ]


class _Recorder:
    def __init__(self, f: np.ndarray, M: int, b0: float):
        n = f.size
        self.res = np.empty((M + 1, n))
        self.res[0] = f
        self.atoms = np.empty((M, n))
        self.sel = np.empty(M, dtype=np.int64)
        self.coef = np.empty(M)
        self.y = np.empty(M)
        self.t = np.empty(M)
        self.B = np.empty(M + 1)
        self.B[0] = b0
        self.m = 0

    def add(self, i, g, c, y, t, r, B=np.nan):
        k = self.m
        self.sel[k], self.coef[k], self.y[k], self.t[k] = i, c, y, t
        self.atoms[k] = g
        self.res[k + 1] = r
        self.B[k + 1] = B
        self.m += 1

    def trace(self, algorithm, f, status, b=1.0, params=None) -> GreedyTrace:
        k = self.m
        return GreedyTrace(
            algorithm=algorithm,
            f=f.copy(),
            residuals=self.res[: k + 1].copy(),
            selected=self.sel[:k].copy(),
            atoms=self.atoms[:k].copy(),
            coefficients=self.coef[:k].copy(),
            y=self.y[:k].copy(),
            t=self.t[:k].copy(),
            B=self.B[: k + 1].copy(),
            status=status,
            b=b,
            params=params or {},
        )


def _bound_of(cert) -> float:
    if cert is None:
        return float("nan")
    if isinstance(cert, A1Certificate):
        return cert.bound
    return float(cert)


def _prepare(f, d: DictionaryLike, M: int, cert, policy):
    f = as_vector(f, copy=True)
    if f.size != d.dim:
        raise ValueError(f"dimension mismatch: f has {f.size}, dictionary has {d.dim}")
    if M < 0:
        raise ValueError("iteration count must be nonnegative")
    b0 = _bound_of(cert)
    if not np.isnan(b0) and np.linalg.norm(f) > b0 + 1e-10:
        raise ValueError(f"||f|| = {np.linalg.norm(f)!r} exceeds the certified A1 bound {b0!r}")
    policy = policy or SelectionPolicy()
    policy.check_length(M)
    return f, b0, policy


def _params(tau: WeaknessSequence, policy: SelectionPolicy, **extra) -> dict:
    out = {"tau": tau.to_config(), "policy": policy.to_config()}
    out.update(extra)
    return out


def run_wga(f, d: DictionaryLike, tau, b: float = 1.0, M: int = 100, cert=None,
            policy: SelectionPolicy | None = None) -> GreedyTrace:
    """Weak Greedy Algorithm with relaxation parameter b (b = 1 is the plain WGA)."""
    if not 0 < b <= 1:
        raise ValueError(f"b must lie in (0, 1], got {b}")
    tau = as_weakness(tau)
    f, b0, policy = _prepare(f, d, M, cert, policy)
    t = tau.values(M)
    sel = _Selector(policy)
    rec = _Recorder(f, M, b0)
    r = f.copy()
    status = MAX_ITERS
    B = b0
    for m in range(1, M + 1):
        if np.linalg.norm(r) < ZERO_NORM:
            status = EXACT_ZERO
            break
        s = d.scores(r)
        smax = float(s.max())
        if smax < STALL:
            status = STALLED
            break
        i = sel.pick(m, s, t[m - 1], t[m - 1] * smax)
        g = d.witness(i, r)
        ip = float(g @ r)
        y = abs(ip)
        if t[m - 1] > 0 and y < STALL:
            status = STALLED
            break
        r = r - (b * ip) * g
        B = B + b * y
        rec.add(i, g, b * ip, y, t[m - 1], r, B)
    else:
        if np.linalg.norm(r) < ZERO_NORM:
            status = EXACT_ZERO
    return rec.trace("wga", f, status, b=b, params=_params(tau, policy, b=b))


def run_twga(f, d: DictionaryLike, tau, b: float = 1.0, M: int = 100, cert=None,
             policy: SelectionPolicy | None = None) -> GreedyTrace:
    """Thresholding WGA: any atom with |<f_{m-1}, g>| >= t_m a_{m-1} / B_{m-1}.

    The default realization takes the lowest admissible index.
    """
    if cert is None:
        raise ValueError("TWGA needs an A1 certificate to define its threshold")
    if not 0 < b <= 1:
        raise ValueError(f"b must lie in (0, 1], got {b}")
    tau = as_weakness(tau)
    f, b0, policy = _prepare(f, d, M, cert, policy)
    t = tau.values(M)
    sel = _Selector(policy, default_mode="first_satisfier")
    rec = _Recorder(f, M, b0)
    r = f.copy()
    status = MAX_ITERS
    B = b0
    for m in range(1, M + 1):
        a_prev = float(r @ r)
        if np.sqrt(a_prev) < ZERO_NORM:
            status = EXACT_ZERO
            break
        s = d.scores(r)
        if float(s.max()) < STALL:
            status = STALLED
            break
        thr = t[m - 1] * a_prev / B
        i = sel.pick(m, s, t[m - 1], thr)
        if i is None:
            raise RuntimeError(
                f"step {m}: no atom reaches the TWGA threshold {thr!r}; the certificate must be invalid"
            )
        g = d.witness(i, r)
        ip = float(g @ r)
        y = abs(ip)
        if t[m - 1] > 0 and y < STALL:
            status = STALLED
            break
        r = r - (b * ip) * g
        B = B + b * y
        rec.add(i, g, b * ip, y, t[m - 1], r, B)
    else:
        if np.linalg.norm(r) < ZERO_NORM:
            status = EXACT_ZERO
    return rec.trace("twga", f, status, b=b, params=_params(tau, policy, b=b))


def _orth_extend(q: list[np.ndarray], v: np.ndarray, tol: float = 1e-10) -> np.ndarray | None:
    """Unit component of v orthogonal to the orthonormal list q (two Gram-Schmidt passes)."""
    w = v.copy()
    for _ in range(2):
        for u in q:
            w -= (u @ w) * u
    nrm = np.linalg.norm(w)
    if nrm <= tol * max(1.0, np.linalg.norm(v)):
        return None
    return w / nrm


def run_woga(f, d: DictionaryLike, tau, M: int = 100, policy: SelectionPolicy | None = None,
             cert=None) -> GreedyTrace:
    """Weak Orthogonal Greedy Algorithm: G_m is the projection of f onto span(phi_1..phi_m).

    Re-selecting an atom already in the span leaves the residual unchanged.
    """
    tau = as_weakness(tau)
    f, b0, policy = _prepare(f, d, M, cert, policy)
    t = tau.values(M)
    sel = _Selector(policy)
    rec = _Recorder(f, M, b0)
    basis: list[np.ndarray] = []
    G = np.zeros_like(f)
    r = f.copy()
    status = MAX_ITERS
    for m in range(1, M + 1):
        if np.linalg.norm(r) < ZERO_NORM:
            status = EXACT_ZERO
            break
        s = d.scores(r)
        smax = float(s.max())
        if smax < STALL:
            status = STALLED
            break
        i = sel.pick(m, s, t[m - 1], t[m - 1] * smax)
        g = d.witness(i, r)
        ip = float(g @ r)
        if t[m - 1] > 0 and abs(ip) < STALL:
            status = STALLED
            break
        u = _orth_extend(basis, g)
        if u is not None:
            basis.append(u)
            G = G + (u @ f) * u
            r = f - G
        rec.add(i, g, ip, abs(ip), t[m - 1], r)
    else:
        if np.linalg.norm(r) < ZERO_NORM:
            status = EXACT_ZERO
    return rec.trace("woga", f, status, params=_params(tau, policy))


def run_wgafr(f, d: DictionaryLike, tau, M: int = 100, policy: SelectionPolicy | None = None,
              cert=None) -> GreedyTrace:
    """WGA with Free Relaxation: G_m is the projection of f onto span(G_{m-1}, phi_m).

    When G_{m-1} and phi_m are linearly dependent this reduces to the
    projection onto phi_m alone.
    """
    tau = as_weakness(tau)
    f, b0, policy = _prepare(f, d, M, cert, policy)
    t = tau.values(M)
    sel = _Selector(policy)
    rec = _Recorder(f, M, b0)
    G = np.zeros_like(f)
    r = f.copy()
    status = MAX_ITERS
    for m in range(1, M + 1):
        if np.linalg.norm(r) < ZERO_NORM:
            status = EXACT_ZERO
            break
        s = d.scores(r)
        smax = float(s.max())
        if smax < STALL:
            status = STALLED
            break
        i = sel.pick(m, s, t[m - 1], t[m - 1] * smax)
        g = d.witness(i, r)
        ip = float(g @ r)
        if t[m - 1] > 0 and abs(ip) < STALL:
            status = STALLED
            break
        q = []
        gn = np.linalg.norm(G)
        if gn > 0:
            q.append(G / gn)
        u = _orth_extend(q, g)
        if u is not None:
            q.append(u)
        G = sum(((v @ f) * v for v in q), np.zeros_like(f))
        r = f - G
        rec.add(i, g, ip, abs(ip), t[m - 1], r)
    else:
        if np.linalg.norm(r) < ZERO_NORM:
            status = EXACT_ZERO
    return rec.trace("wgafr", f, status, params=_params(tau, policy))


def _signed_best(d: DictionaryLike, r: np.ndarray) -> int:
    """Maximizer of <r, g>; on a symmetric dictionary it also maximizes |<r, g>|."""
    return int(np.argmax(d.signed_scores(r)))


def run_rga(f, d: DictionaryLike, M: int = 100) -> GreedyTrace:
    """Relaxed Greedy Algorithm (weakness sequence identically 1).

    On a symmetric dictionary the maximizer of |<f_{m-1}, g>| is taken with
    a nonnegative inner product (g and -g tie; the averaging step needs the
    one pointing toward f).
    """
    f, b0, _ = _prepare(f, d, M, None, None)
    rec = _Recorder(f, M, b0)
    G = np.zeros_like(f)
    r = f.copy()
    status = MAX_ITERS
    for m in range(1, M + 1):
        if np.linalg.norm(r) < ZERO_NORM:
            status = EXACT_ZERO
            break
        if d.symmetric:
            i = _signed_best(d, r)
        else:
            i = int(np.argmax(d.scores(r)))
        g = d.witness(i, r)
        ip = float(g @ r)
        if abs(ip) < STALL:
            status = STALLED
            break
        if m == 1:
            G = ip * g
            c = ip
        else:
            G = (1.0 - 1.0 / m) * G + g / m
            c = 1.0 / m
        r = f - G
        rec.add(i, g, c, abs(ip), 1.0, r)
    else:
        if np.linalg.norm(r) < ZERO_NORM:
            status = EXACT_ZERO
    return rec.trace("rga", f, status)


def schedule_values(eps, M: int) -> np.ndarray:
    """eps_1..eps_M from a float, a sequence, a callable m -> eps_m, or a config dict."""
    if isinstance(eps, dict):
        fam = eps.get("family", "harmonic")
        if fam == "harmonic":
            c = float(eps.get("c", 1.0))
            out = c / np.arange(1, M + 1)
        elif fam == "constant":
            out = np.full(M, float(eps["value"]))
        elif fam == "explicit":
            out = np.asarray(eps["values"], dtype=np.float64)[:M]
        else:
            raise ValueError(f"unknown schedule family {fam!r}")
    elif callable(eps):
        out = np.array([float(eps(m)) for m in range(1, M + 1)])
    elif np.isscalar(eps):
        out = np.full(M, float(eps))
    else:
        out = np.asarray(eps, dtype=np.float64)[:M]
    if out.size < M:
        raise ValueError(f"schedule has {out.size} entries, {M} iterations requested")
    if np.any(out <= 0):
        raise ValueError("schedule entries must be positive")
    return out


def run_ia(f, d: DictionaryLike, eps: float | Sequence[float] | Callable[[int], float] | dict,
           M: int = 100, cert: A1Certificate | None = None) -> GreedyTrace:
    """Incremental Algorithm IA(eps) for f in conv(D).

    Each step takes the maximizer phi of <f_{m-1}, g> and requires
    <f_{m-1}, phi - f> >= -eps_m ||f_{m-1}||; failure raises
    :class:`IAConditionError`.
    """
    f, _, _ = _prepare(f, d, M, None, None)
    if cert is not None:
        if not cert.nonnegative:
            raise ValueError("IA certificate must have nonnegative coefficients")
        total = float(np.sum(cert.coefficients))
        if total > 1 + 1e-12 or (not d.symmetric and abs(total - 1) > 1e-12):
            raise ValueError(f"certificate weights sum to {total!r}; not a convex combination")
        if np.linalg.norm(cert.synthesize() - f) > 1e-10:
            raise ValueError("certificate does not synthesize f")
    e = schedule_values(eps, M)
    rec = _Recorder(f, M, np.nan)
    G = np.zeros_like(f)
    r = f.copy()
    status = MAX_ITERS
    for m in range(1, M + 1):
        rn = float(np.linalg.norm(r))
        if rn < ZERO_NORM:
            status = EXACT_ZERO
            break
        i = _signed_best(d, r)
        g = d.witness(i, r)
        ip = float(g @ r)
        lhs = ip - float(r @ f)
        if lhs < -e[m - 1] * rn - 1e-12:
            raise IAConditionError(
                f"step {m}: best atom gives <f_(m-1), phi - f> = {lhs!r} < -eps_m ||f_(m-1)|| = {-e[m - 1] * rn!r}"
            )
        G = (1.0 - 1.0 / m) * G + g / m
        r = f - G
        rec.add(i, g, 1.0 / m, abs(ip), np.nan, r)
    else:
        if np.linalg.norm(r) < ZERO_NORM:
            status = EXACT_ZERO
    return rec.trace("ia", f, status, params={"eps": e.tolist()})
