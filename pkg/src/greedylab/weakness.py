"""Weakness sequences t_k in [0, 1] and convergence-criterion diagnostics.

Indices follow the mathematical convention: ``t_at(k)`` takes k >= 1.
``values(m)`` returns the numpy array (t_1, ..., t_m), which is what the
algorithms consume.

Families with a closed form (constant, power, geometric, and sparse
sequences supported on a power or geometric subsequence) get symbolic
verdicts for the classical series criteria; anything else is reported
``inconclusive`` with the partial sums attached.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

DIVERGES = "diverges"
CONVERGES = "converges"
INCONCLUSIVE = "inconclusive"

DEFAULT_HORIZON = 10_000


# --- subsequences N = {n_k} -------------------------------------------------

@dataclass(frozen=True)
class Subsequence:
    """Strictly increasing positive integers n_1 < n_2 < ...

    kind ``power``: n_k = floor(c * k**a); ``geometric``: n_k = floor(c * ratio**k);
    ``explicit``: a finite list.
    """

    kind: str
    c: float = 1.0
    a: float = 1.0
    ratio: float = 2.0
    values: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("power", "geometric", "explicit"):
            raise ValueError(f"unknown subsequence kind {self.kind!r}")
        if self.kind == "power" and (self.c < 1 or self.a < 1):
            raise ValueError("power subsequence needs c >= 1 and a >= 1")
        if self.kind == "geometric" and (self.ratio <= 1 or self.c * self.ratio * (self.ratio - 1) < 1):
            raise ValueError("geometric subsequence needs ratio > 1 and c*ratio*(ratio-1) >= 1")
        if self.kind == "explicit":
            v = tuple(int(x) for x in self.values)
            if not v or v[0] < 1 or any(b <= a for a, b in zip(v, v[1:])):
                raise ValueError("explicit subsequence must be strictly increasing positive integers")
            object.__setattr__(self, "values", v)

    @classmethod
    def every(cls, step: int = 1) -> "Subsequence":
        """n_k = step * k."""
        return cls("power", c=step, a=1)

    def _nk(self, k: int) -> int:
        if self.kind == "power":
            if float(self.c).is_integer() and float(self.a).is_integer():
                return int(self.c) * k ** int(self.a)
            return math.floor(self.c * k**self.a)
        if float(self.c).is_integer() and float(self.ratio).is_integer():
            return int(self.c) * int(self.ratio) ** k
        return math.floor(self.c * self.ratio**k)

    def up_to(self, horizon: int) -> np.ndarray:
        """All n_k <= horizon, ascending."""
        if self.kind == "explicit":
            return np.array([n for n in self.values if n <= horizon], dtype=np.int64)
        out = []
        k = 1
        while True:
            n = self._nk(k)
            if n > horizon:
                break
            out.append(n)
            k += 1
        return np.array(out, dtype=np.int64)

    def first(self, count: int) -> np.ndarray:
        """n_1, ..., n_count (needed when a term involves n_{k+1} past the horizon)."""
        if self.kind == "explicit":
            return np.array(self.values[:count], dtype=np.int64)
        return np.array([self._nk(k) for k in range(1, count + 1)], dtype=np.int64)

    def indicator(self, m: int) -> np.ndarray:
        mask = np.zeros(m, dtype=bool)
        nk = self.up_to(m)
        mask[nk - 1] = True
        return mask

    @property
    def is_all_integers(self) -> bool:
        return self.kind == "power" and self.c == 1 and self.a == 1

    def to_config(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "c": self.c, "a": self.a}
        if self.kind == "geometric":
            return {"kind": "geometric", "c": self.c, "ratio": self.ratio}
        return {"kind": "explicit", "values": list(self.values)}

    @classmethod
    def from_config(cls, cfg) -> "Subsequence":
        if isinstance(cfg, (list, tuple)):
            return cls("explicit", values=tuple(cfg))
        kind = cfg.get("kind", "explicit")
        if kind == "power":
            return cls("power", c=float(cfg.get("c", 1)), a=float(cfg.get("a", 1)))
        if kind == "geometric":
            return cls("geometric", c=float(cfg.get("c", 1)), ratio=float(cfg.get("ratio", 2)))
        return cls("explicit", values=tuple(cfg["values"]))


# --- weakness sequences -----------------------------------------------------

FAMILIES = ("constant", "power", "geometric", "sparse", "explicit")


@dataclass(frozen=True)
class WeaknessSequence:
    """tau = {t_k}.  Build with the classmethods rather than directly."""

    family: str
    t: float = 1.0
    theta: float = 0.0
    ratio: float = 0.5
    subsequence: Subsequence | None = None
    values_: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown weakness family {self.family!r}")
        if self.family in ("constant", "sparse") and not 0 <= self.t <= 1:
            raise ValueError(f"t must lie in [0, 1], got {self.t}")
        if self.family == "power" and self.theta < 0:
            raise ValueError("power family needs theta >= 0 so that t_k <= 1")
        if self.family == "geometric" and not 0 < self.ratio <= 1:
            raise ValueError("geometric family needs ratio in (0, 1]")
        if self.family == "sparse" and self.subsequence is None:
            raise ValueError("sparse family needs a subsequence")
        if self.family == "explicit":
            v = tuple(float(x) for x in self.values_)
            if not v:
                raise ValueError("explicit weakness sequence is empty")
            if any(not 0 <= x <= 1 for x in v):
                raise ValueError("explicit weakness values must lie in [0, 1]")
            object.__setattr__(self, "values_", v)

    @classmethod
    def constant(cls, t: float) -> "WeaknessSequence":
        return cls("constant", t=float(t))

    @classmethod
    def power(cls, theta: float) -> "WeaknessSequence":
        """t_k = k**(-theta)."""
        return cls("power", theta=float(theta))

    @classmethod
    def geometric(cls, ratio: float) -> "WeaknessSequence":
        """t_k = ratio**k."""
        return cls("geometric", ratio=float(ratio))

    @classmethod
    def sparse(cls, subsequence: Subsequence, t: float) -> "WeaknessSequence":
        """tau(N, t): t on N, 0 elsewhere."""
        return cls("sparse", t=float(t), subsequence=subsequence)

    @classmethod
    def explicit(cls, values: Sequence[float]) -> "WeaknessSequence":
        return cls("explicit", values_=tuple(values))

    @property
    def closed_form(self) -> bool:
        if self.family == "explicit":
            return False
        if self.family == "sparse":
            return self.subsequence.kind != "explicit"
        return True

    @property
    def length(self) -> int | None:
        return len(self.values_) if self.family == "explicit" else None

    def values(self, m: int) -> np.ndarray:
        """Array (t_1, ..., t_m)."""
        if m < 0:
            raise ValueError("m must be nonnegative")
        k = np.arange(1, m + 1, dtype=np.float64)
        if self.family == "constant":
            return np.full(m, self.t)
        if self.family == "power":
            return k ** (-self.theta)
        if self.family == "geometric":
            return self.ratio**k
        if self.family == "sparse":
            return np.where(self.subsequence.indicator(m), self.t, 0.0)
        if m > len(self.values_):
            raise IndexError(f"explicit weakness sequence has only {len(self.values_)} terms, asked for {m}")
        return np.array(self.values_[:m])

    def is_monotone(self, horizon: int = DEFAULT_HORIZON) -> bool:
        """t_1 >= t_2 >= ... over 1..horizon."""
        if self.family in ("constant", "power", "geometric"):
            return True
        if self.family == "sparse":
            if self.t == 0 or self.subsequence.is_all_integers:
                return True
        if self.family == "explicit":
            horizon = min(horizon, len(self.values_))
        return bool(np.all(np.diff(self.values(horizon)) <= 0))

    def to_config(self) -> dict:
        if self.family == "constant":
            return {"family": "constant", "t": self.t}
        if self.family == "power":
            return {"family": "power", "theta": self.theta}
        if self.family == "geometric":
            return {"family": "geometric", "ratio": self.ratio}
        if self.family == "sparse":
            return {"family": "sparse", "t": self.t, "N": self.subsequence.to_config()}
        return {"family": "explicit", "values": list(self.values_)}

    @classmethod
    def from_config(cls, cfg, base_dir: Path | None = None) -> "WeaknessSequence":
        if isinstance(cfg, (int, float)):
            return cls.constant(cfg)
        fam = cfg.get("family")
        if fam == "constant":
            return cls.constant(cfg.get("t", 1.0))
        if fam == "power":
            return cls.power(cfg["theta"])
        if fam == "geometric":
            return cls.geometric(cfg["ratio"])
        if fam == "sparse":
            return cls.sparse(Subsequence.from_config(cfg["N"]), cfg.get("t", 1.0))
        if fam == "explicit":
            if "csv" in cfg:
                p = Path(cfg["csv"])
                if base_dir is not None and not p.is_absolute():
                    p = base_dir / p
                return cls.explicit(load_values_csv(p))
            return cls.explicit(cfg["values"])
        raise ValueError(f"unknown weakness family {fam!r}")


def as_weakness(tau) -> WeaknessSequence:
    if isinstance(tau, WeaknessSequence):
        return tau
    if isinstance(tau, (int, float)):
        return WeaknessSequence.constant(tau)
    if isinstance(tau, dict):
        return WeaknessSequence.from_config(tau)
    return WeaknessSequence.explicit(tau)


def t_at(tau: WeaknessSequence, k: int) -> float:
    if k < 1:
        raise ValueError("weakness index k starts at 1")
    return float(as_weakness(tau).values(k)[-1])


def load_values_csv(path) -> list[float]:
    """Numbers from a CSV file, read row-major (one or many per row)."""
    with Path(path).open(newline="") as fh:
        return [float(x) for row in csv.reader(fh) for x in row if x.strip()]


# --- diagnostics ------------------------------------------------------------

CRITERIA = ("sum_t_over_k", "dyadic_blocks", "subsequence_blocks", "sum_t", "monotone_sum_t_over_k", "sum_t_squared")


@dataclass
class DiagnosticsReport:
    """Partial sums up to ``horizon`` and per-criterion verdicts.

    Each criterion is a series that must *diverge* for the condition to hold.
    ``monotone_sum_t_over_k`` is the same series as ``sum_t_over_k`` but is
    only decisive for nonincreasing sequences, so it reads inconclusive otherwise.
    """

    horizon: int
    sum_t: float
    sum_t2: float
    sum_t_over_k: float
    block_sum: float
    sparse_sum: float
    ratio_bound: float
    monotone: bool
    verdicts: dict[str, str]
    subsequence: dict | None = None

    def holds(self, criterion: str) -> bool | None:
        v = self.verdicts[criterion]
        return None if v == INCONCLUSIVE else v == DIVERGES

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "partial_sums": {
                "sum_t": self.sum_t,
                "sum_t2": self.sum_t2,
                "sum_t_over_k": self.sum_t_over_k,
                "dyadic_block_sum": self.block_sum,
                "subsequence_block_sum": self.sparse_sum,
            },
            "ratio_bound": self.ratio_bound,
            "monotone": self.monotone,
            "subsequence": self.subsequence,
            "verdicts": dict(self.verdicts),
        }


def _v(diverges: bool) -> str:
    return DIVERGES if diverges else CONVERGES


def _subsequence_rate(n: Subsequence, theta: float) -> str:
    """Verdict for sum (n_{k+1}-n_k)^(1/2) n_k^(-1-theta)."""
    if n.kind == "geometric":
        return CONVERGES
    if n.kind == "power":
        # term ~ k^(-(a+1)/2 - a*theta)
        return _v((n.a + 1) / 2 + n.a * theta <= 1)
    return INCONCLUSIVE


def symbolic_verdicts(tau: WeaknessSequence, n: Subsequence) -> dict[str, str] | None:
    """Hand-derived p-series / geometric classification, or None if not closed form."""
    fam = tau.family
    if fam == "explicit":
        return None
    if fam == "sparse":
        nn = tau.subsequence
        if nn.kind == "explicit":
            return None
        if tau.t == 0:
            return {c: CONVERGES for c in CRITERIA}
        if nn.kind == "power":
            dense = nn.a <= 1
            out = {"sum_t": DIVERGES, "sum_t_squared": DIVERGES, "sum_t_over_k": _v(dense), "dyadic_blocks": _v(dense)}
        else:
            out = {"sum_t": DIVERGES, "sum_t_squared": DIVERGES, "sum_t_over_k": CONVERGES, "dyadic_blocks": CONVERGES}
        out["subsequence_blocks"] = _subsequence_rate(n, 0.0) if n == nn else INCONCLUSIVE
    elif fam == "constant" and tau.t == 0 or fam == "geometric" and tau.ratio < 1:
        return {c: CONVERGES for c in CRITERIA}
    else:
        theta = 0.0 if fam in ("constant", "geometric") else tau.theta
        out = {
            "sum_t": _v(theta <= 1),
            "sum_t_squared": _v(theta <= 0.5),
            "sum_t_over_k": _v(theta <= 0),
            "dyadic_blocks": _v(theta <= 0),
            "subsequence_blocks": _subsequence_rate(n, theta),
        }
    out["monotone_sum_t_over_k"] = out["sum_t_over_k"] if tau.is_monotone() else INCONCLUSIVE
    return out


def diagnose(tau, subsequence: Subsequence | None = None, horizon: int = DEFAULT_HORIZON) -> DiagnosticsReport:
    """Partial sums of the series criteria plus symbolic verdicts where available.

    ``subsequence`` is the N used for the subsequence block sum; it defaults to the
    sequence's own N for the sparse family and to n_k = k otherwise.
    """
    tau = as_weakness(tau)
    if horizon < 16:
        raise ValueError("diagnostic horizon must be at least 16")
    if tau.family == "explicit":
        horizon = min(horizon, tau.length)
    if subsequence is None:
        subsequence = tau.subsequence if tau.family == "sparse" else Subsequence.every(1)
    t = tau.values(horizon)
    k = np.arange(1, horizon + 1, dtype=np.float64)

    block = 0.0
    s = 0
    while 2 ** (s + 1) - 1 <= horizon:
        lo, hi = 2**s, 2 ** (s + 1) - 1
        block += math.sqrt(float(np.sum(t[lo - 1 : hi] ** 2)) / 2**s)
        s += 1

    nk = subsequence.up_to(horizon)
    sparse = 0.0
    ratio = float("nan")
    if nk.size >= 2:
        d = np.diff(nk).astype(np.float64)
        sparse = float(np.sum(np.sqrt(d) * t[nk[:-1] - 1] / nk[:-1]))
        ratio = float(np.max(nk[1:] / nk[:-1]))

    verdicts = symbolic_verdicts(tau, subsequence) or {c: INCONCLUSIVE for c in CRITERIA}
    return DiagnosticsReport(
        horizon=horizon,
        sum_t=float(t.sum()),
        sum_t2=float((t * t).sum()),
        sum_t_over_k=float((t / k).sum()),
        block_sum=block,
        sparse_sum=sparse,
        ratio_bound=ratio,
        monotone=tau.is_monotone(horizon),
        verdicts=verdicts,
        subsequence=subsequence.to_config(),
    )


def summability(tau, horizon: int, tol: float = 1e-12) -> tuple[bool, float, float | None]:
    """(summable?, partial sum S_horizon, tail bound or None).

    Closed-form families use the symbolic verdict; other sequences use a
    Cauchy proxy: S_horizon - S_{horizon/2} <= tol.
    """
    tau = as_weakness(tau)
    t = tau.values(horizon)
    total = float(t.sum())
    verdict = (symbolic_verdicts(tau, Subsequence.every(1)) or {}).get("sum_t", INCONCLUSIVE)
    tail: float | None = None
    if tau.family == "geometric" and tau.ratio < 1:
        tail = tau.ratio ** (horizon + 1) / (1 - tau.ratio)
    elif tau.family == "power" and tau.theta > 1:
        tail = horizon ** (1 - tau.theta) / (tau.theta - 1)
    if verdict != INCONCLUSIVE:
        return verdict == CONVERGES, total, tail
    half = float(t[: horizon // 2].sum())
    return total - half <= tol, total, tail


# --- Hardy averages ---------------------------------------------------------

def hardy_average(a, horizon: int | None = None) -> tuple[np.ndarray, float]:
    """b_n = (1/n) sum_{j<=n} a_j and the ratio ||b||_2 / ||a||_2 (at most 2)."""
    a = np.asarray(a, dtype=np.float64).ravel()
    if horizon is not None:
        a = a[:horizon]
    if np.any(a < 0):
        raise ValueError("Hardy average needs a nonnegative sequence")
    b = np.cumsum(a) / np.arange(1, a.size + 1)
    na = np.linalg.norm(a)
    return b, float(np.linalg.norm(b) / na) if na > 0 else 0.0


def hardy_block_terms(b: np.ndarray, nk: np.ndarray, c0: float | None = None):
    """Per-block sides of (n_{k+1}-n_k) b_{n_k}^2 <= C0^2 sum_{m=n_k}^{n_{k+1}-1} b_m^2.

    ``nk`` are 1-based subsequence entries within len(b)+1.  Returns
    (lhs, rhs, C0) with C0 defaulting to max n_{k+1}/n_k.
    """
    nk = np.asarray(nk, dtype=np.int64)
    if c0 is None:
        c0 = float(np.max(nk[1:] / nk[:-1]))
    csum = np.concatenate([[0.0], np.cumsum(b * b)])
    lo, hi = nk[:-1], nk[1:]
    lhs = (hi - lo) * b[lo - 1] ** 2
    rhs = c0**2 * (csum[hi - 1] - csum[lo - 1])
    return lhs, rhs, c0


@dataclass
class FalsifierResult:
    proxy: np.ndarray
    tail_min: float


def d1_falsifier(tau, a, horizon: int | None = None) -> FalsifierResult:
    """Evaluate (a_n / t_n) * sum_{j<=n} a_j for a user-supplied candidate {a_j}.

    A tail minimum bounded away from zero suggests the liminf condition of the
    convergence criterion fails for tau; this is evidence only, never a proof.  Terms with t_n = 0 are +inf
    unless a_n = 0.
    """
    tau = as_weakness(tau)
    a = np.asarray(a, dtype=np.float64).ravel()
    if horizon is not None:
        a = a[:horizon]
    if np.any(a < 0):
        raise ValueError("candidate sequence must be nonnegative")
    t = tau.values(a.size)
    s = np.cumsum(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        proxy = np.where(t > 0, a / np.where(t > 0, t, 1.0) * s, np.where(a > 0, np.inf, 0.0))
    tail = proxy[a.size // 2 :]
    return FalsifierResult(proxy=proxy, tail_min=float(tail.min()) if tail.size else float("nan"))
