"""Dual Greedy Algorithm DGA(tau, b, mu) and its DGA* variant on lp^n.

The space is lp^n with 1 < p < inf and the power majorant mu(u) = gamma u^q
of its modulus of smoothness (see :func:`greedylab.spaces.lp_majorant`).
Dictionaries must be lp-normalized and should be symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .dictionaries import A1Certificate, Dictionary
from .hilbert import EXACT_ZERO, MAX_ITERS, STALL, STALLED, ZERO_NORM, SelectionPolicy, _Selector
from .spaces import SmoothnessMajorant, as_vector, lp_majorant, norm_lp, norming_functional
from .weakness import as_weakness

VARIANTS = ("dga", "dga_star")


def r_dict(f, d: Dictionary, p: float) -> tuple[float, int]:
    """r_D(f) = max over atoms g of F_f(g), with the lowest-index maximizer."""
    F = norming_functional(f, p)
    vals = d.elements @ F
    i = int(np.argmax(vals))
    return float(vals[i]), i


def solve_c(f_norm: float, r_or_F: float, t: float, b: float, mu: SmoothnessMajorant,
            variant: str = "dga") -> float:
    """Positive root c of ||f|| mu(c/||f||) = (K/2) c for mu(u) = gamma u^q.

    K = t b r_D(f) for ``dga`` and K = b F_f(phi) for ``dga_star``; the root is
    c = (K / (2 gamma))^(1/(q-1)) ||f||.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown DGA variant {variant!r}")
    if f_norm <= 0 or r_or_F <= 0 or b <= 0:
        raise ValueError("solve_c needs positive ||f||, r (or F(phi)) and b")
    K = b * r_or_F * (t if variant == "dga" else 1.0)
    if K <= 0:
        raise ValueError("step equation has no positive root for K <= 0")
    return (K / (2.0 * mu.gamma)) ** (1.0 / (mu.q - 1.0)) * f_norm


@dataclass(frozen=True, eq=False)
class BanachGreedyTrace:
    """Ledger of a DGA run.  Row m of ``residuals`` is f_m; B_m = B_{m-1} + c_m."""

    variant: str
    p: float
    majorant: SmoothnessMajorant
    b: float
    f: np.ndarray
    residuals: np.ndarray
    selected: np.ndarray
    c: np.ndarray
    r_values: np.ndarray
    F_phi: np.ndarray
    t: np.ndarray
    B: np.ndarray
    status: str
    params: dict = field(default_factory=dict)

    algorithm = "dga"

    @property
    def steps(self) -> int:
        return int(self.selected.size)

    def __len__(self) -> int:
        return self.steps

    @cached_property
    def residual_norms(self) -> np.ndarray:
        return np.array([norm_lp(r, self.p) for r in self.residuals])

    @property
    def cert_bound(self) -> float:
        return float(self.B[0])

    def records(self) -> list[dict]:
        rn = self.residual_norms
        return [
            {
                "m": m,
                "selected": int(self.selected[m - 1]),
                "c_m": float(self.c[m - 1]),
                "r_value": float(self.r_values[m - 1]),
                "F_phi": float(self.F_phi[m - 1]),
                "B_m": float(self.B[m]),
                "residual_norm": float(rn[m]),
                "t_m": float(self.t[m - 1]),
            }
            for m in range(1, self.steps + 1)
        ]


def run_dga(f, d: Dictionary, tau, b: float, p: float, M: int = 100, cert=None,
            variant: str = "dga", policy: SelectionPolicy | None = None,
            majorant: SmoothnessMajorant | None = None) -> BanachGreedyTrace:
    """Dual Greedy Algorithm in lp^n.

    Step 1 picks phi_m with F_{f_{m-1}}(phi_m) >= t_m r_D(f_{m-1}) (argmax by
    default), step 2 takes c_m from :func:`solve_c`, step 3 sets
    f_m = f_{m-1} - c_m phi_m.
    """
    if not 0 < b < 1:
        raise ValueError(f"DGA needs b in (0, 1), got {b}")
    if not 1 < p < np.inf:
        raise ValueError(f"DGA needs 1 < p < inf, got {p}")
    if variant not in VARIANTS:
        raise ValueError(f"unknown DGA variant {variant!r}")
    if abs(d.p - p) > 1e-12:
        raise ValueError(f"dictionary is l{d.p:g}-normalized, run asks for p = {p:g}")
    mu = majorant or lp_majorant(p)
    tau = as_weakness(tau)
    t = tau.values(M)
    if M and np.any(t <= 0):
        raise ValueError("DGA needs t_k in (0, 1]")
    f = as_vector(f, copy=True)
    if f.size != d.dim:
        raise ValueError(f"dimension mismatch: f has {f.size}, dictionary has {d.dim}")
    b0 = float("nan") if cert is None else (cert.bound if isinstance(cert, A1Certificate) else float(cert))
    if not np.isnan(b0) and norm_lp(f, p) > b0 + 1e-10:
        raise ValueError(f"||f||_p exceeds the certified A1 bound {b0!r}")
    policy = policy or SelectionPolicy()
    policy.check_length(M)
    sel = _Selector(policy)

    n = f.size
    res = np.empty((M + 1, n))
    res[0] = f
    selected = np.empty(M, dtype=np.int64)
    cs, rs, Fs = np.empty(M), np.empty(M), np.empty(M)
    B = np.empty(M + 1)
    B[0] = b0
    r = f.copy()
    k = 0
    status = MAX_ITERS
    for m in range(1, M + 1):
        fn = norm_lp(r, p)
        if fn < ZERO_NORM:
            status = EXACT_ZERO
            break
        F = norming_functional(r, p)
        vals = d.elements @ F
        rv = float(vals.max())
        if rv < STALL:
            status = STALLED
            break
        i = sel.pick(m, vals, t[m - 1], t[m - 1] * rv)
        Fphi = float(vals[i])
        c = solve_c(fn, rv if variant == "dga" else Fphi, t[m - 1], b, mu, variant)
        r = r - c * d.elements[i]
        selected[k], cs[k], rs[k], Fs[k] = i, c, rv, Fphi
        B[k + 1] = B[k] + c
        res[k + 1] = r
        k += 1
    else:
        if norm_lp(r, p) < ZERO_NORM:
            status = EXACT_ZERO

    arrays = [res[: k + 1], selected[:k], cs[:k], rs[:k], Fs[:k], t[:k].copy(), B[: k + 1]]
    for a in arrays:
        a.setflags(write=False)
    return BanachGreedyTrace(
        variant=variant, p=p, majorant=mu, b=b, f=f,
        residuals=arrays[0], selected=arrays[1], c=arrays[2], r_values=arrays[3],
        F_phi=arrays[4], t=arrays[5], B=arrays[6], status=status,
        params={"tau": tau.to_config(), "policy": policy.to_config(), "b": b, "p": p,
                "q": mu.q, "gamma": mu.gamma, "variant": variant},
    )
