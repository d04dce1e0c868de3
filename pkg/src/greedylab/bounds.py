"""Closed-form convergence bounds, the reciprocal-decay recurrence, and trace-versus-bound checks.

Notation: for a weakness sequence t_1, t_2, ... and relaxation b,
S_m = sum_{k<=m} t_k^2.  The Hilbert product bound at exponent alpha is

    (1 + b(2-b) S_m)^(-alpha/2) * ||f||^(1-alpha) * B0^alpha,

valid for alpha <= (2-b) t_m / ((2-b) t_m + 2).  At that largest alpha and
||f|| = B0 = 1 it reduces to :func:`e_m`.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .weakness import as_weakness

ABS_TOL = 1e-9
REL_TOL = 1e-12
MONO_TOL = 1e-15


def _t(tau, m: int) -> np.ndarray:
    if m < 0:
        raise ValueError("m must be nonnegative")
    return as_weakness(tau).values(m)


def _is_nonincreasing(t: np.ndarray) -> bool:
    return bool(np.all(np.diff(t) <= MONO_TOL))


def _require_monotone(t: np.ndarray):
    if not _is_nonincreasing(t):
        k = int(np.nonzero(np.diff(t) > MONO_TOL)[0][0]) + 1
        raise ValueError(f"weakness sequence increases at k = {k} -> {k + 1}; the bound needs a nonincreasing sequence")


def _alpha_cap(tm, b):
    u = (2.0 - b) * tm
    return u / (u + 2.0)


def alpha_max_hilbert(tau, b: float, m: int) -> float:
    """Largest admissible alpha, (2-b) t_m / ((2-b) t_m + 2)."""
    if m < 1:
        raise ValueError("m must be at least 1")
    return float(_alpha_cap(_t(tau, m)[-1], b))


def e_m(tau, b: float, m: int) -> float:
    """(1 + b(2-b) sum_{k<=m} t_k^2)^(-(2-b) t_m / (2 (2 + (2-b) t_m)))."""
    if not 0 < b <= 1:
        raise ValueError(f"b must lie in (0, 1], got {b}")
    if m == 0:
        return 1.0
    t = _t(tau, m)
    _require_monotone(t)
    u = (2.0 - b) * t[-1]
    return float((1.0 + b * (2.0 - b) * np.sum(t**2)) ** (-u / (2.0 * (2.0 + u))))


def product_bound_hilbert(tau, b: float, m: int, alpha: float, f_norm: float, a1_bound: float) -> float:
    if not 0 < b <= 1:
        raise ValueError(f"b must lie in (0, 1], got {b}")
    if f_norm > a1_bound + 1e-10:
        raise ValueError("f_norm exceeds the A1 bound")
    if m == 0:
        if alpha != 0:
            raise ValueError("only alpha = 0 is admissible at m = 0")
        return float(f_norm)
    t = _t(tau, m)
    cap = _alpha_cap(t[-1], b)
    if alpha < 0 or alpha > cap + 1e-15:
        raise ValueError(f"alpha = {alpha!r} outside [0, {cap!r}]")
    base = 1.0 + b * (2.0 - b) * np.sum(t**2)
    return float(base ** (-alpha / 2.0) * f_norm ** (1.0 - alpha) * a1_bound**alpha)


def banach_constant(b: float, gamma: float, q: float) -> float:
    """c = (1-b) (b / (2 gamma))^(1/(q-1))."""
    return (1.0 - b) * (b / (2.0 * gamma)) ** (1.0 / (q - 1.0))


def banach_alpha_max(tm: float, b: float) -> float:
    return tm * (1.0 - b) / (1.0 + tm * (1.0 - b))


def banach_bound(tau, b: float, gamma: float, q: float, m: int, alpha: float, f_norm: float,
                 a1_bound: float) -> float:
    """(1 + c sum t_k^p)^(-alpha/p) ||f||^(1-alpha) B0^alpha with p = q/(q-1)."""
    if not 0 < b < 1:
        raise ValueError(f"b must lie in (0, 1), got {b}")
    if not 1 < q <= 2 or gamma <= 0:
        raise ValueError("need 1 < q <= 2 and gamma > 0")
    if m == 0:
        return float(f_norm)
    t = _t(tau, m)
    _require_monotone(t)
    cap = banach_alpha_max(t[-1], b)
    if alpha < 0 or alpha > cap + 1e-15:
        raise ValueError(f"alpha = {alpha!r} outside [0, {cap!r}]")
    p = q / (q - 1.0)
    base = 1.0 + banach_constant(b, gamma, q) * np.sum(t**p)
    return float(base ** (-alpha / p) * f_norm ** (1.0 - alpha) * a1_bound**alpha)


def dga_rate_shape(tau, b: float, q: float, m: int) -> float:
    """Rate shape (1 + sum t_k^p)^(-t_m(1-b) / (p (1 + t_m(1-b)))) without its unknown constant."""
    t = _t(tau, m)
    p = q / (q - 1.0)
    a = t[-1] * (1.0 - b)
    return float((1.0 + np.sum(t**p)) ** (-a / (p * (1.0 + a))))


# --- reciprocal-decay recurrence ------------------------------------------------

def hl1_bound(C1: float, s, m: int) -> float:
    """(1/C1 + sum_{k<=m} s_k)^(-1); ``s[k-1]`` holds s_k."""
    if C1 <= 0:
        raise ValueError("C1 must be positive")
    s = np.asarray(s, dtype=np.float64)
    return float(1.0 / (1.0 / C1 + s[:m].sum()))


@dataclass(frozen=True)
class RecursionCheck:
    ok: bool
    reason: str = ""
    index: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def hl1_check(x, C1: float, s, rel_tol: float = 1e-12) -> RecursionCheck:
    """Check the premises of the recursion on x_0..x_M, then the bound at every m.

    Premises: x_m >= 0, x_0 <= C1, x_{m+1} <= x_m (1 - x_m s_{m+1}).
    Returns the first violated premise, or the first bound violation.
    """
    x = np.asarray(x, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if C1 <= 0 or np.any(s < 0):
        return RecursionCheck(False, "premise: C1 > 0 and s_k >= 0")
    if s.size < x.size - 1:
        return RecursionCheck(False, "premise: s shorter than the recursion")
    if np.any(x < 0):
        return RecursionCheck(False, "premise: x_m >= 0", int(np.nonzero(x < 0)[0][0]))
    if x.size == 0:
        return RecursionCheck(True)
    if x[0] > C1:
        return RecursionCheck(False, "premise: x_0 <= C1", 0)
    env = x[:-1] * (1.0 - x[:-1] * s[: x.size - 1])
    bad = np.nonzero(x[1:] > env)[0]
    if bad.size:
        return RecursionCheck(False, "premise: x_{m+1} <= x_m (1 - x_m s_{m+1})", int(bad[0]) + 1)
    bound = 1.0 / (1.0 / C1 + np.concatenate([[0.0], np.cumsum(s[: x.size - 1])]))
    bad = np.nonzero(x > bound * (1.0 + rel_tol))[0]
    if bad.size:
        return RecursionCheck(False, "bound violated", int(bad[0]))
    return RecursionCheck(True)


# --- trace verification --------------------------------------------------------

@dataclass
class BoundReport:
    """One bound or identity checked along a trace; ``measured``/``bound`` are indexed by m."""

    name: str
    measured: list = field(default_factory=list)
    bound: list = field(default_factory=list)
    max_violation: float = float("-inf")
    passed: bool = True
    alpha: float | str | None = None
    first_violation: int | None = None
    skipped_reason: str | None = None
    inputs: dict = field(default_factory=dict)

    @property
    def skipped(self) -> bool:
        return self.skipped_reason is not None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TraceVerification:
    algorithm: str
    reports: list[BoundReport]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports if not r.skipped)

    def __bool__(self) -> bool:
        return self.passed

    def get(self, name: str) -> BoundReport:
        for r in self.reports:
            if r.name == name:
                return r
        raise KeyError(name)

    def failures(self) -> list[BoundReport]:
        return [r for r in self.reports if not r.skipped and not r.passed]

    def to_dict(self) -> dict:
        return {"algorithm": self.algorithm, "passed": self.passed, "reports": [r.to_dict() for r in self.reports]}


def _compare(name, ms, measured, bound, alpha=None, tol_abs=ABS_TOL, tol_rel=REL_TOL, inputs=None) -> BoundReport:
    """measured <= bound + tol_abs + tol_rel |bound| at every listed m."""
    measured = np.asarray(measured, dtype=np.float64)
    bound = np.asarray(bound, dtype=np.float64)
    slack = measured - bound
    allowed = tol_abs + tol_rel * np.abs(bound)
    bad = np.nonzero(slack > allowed)[0]
    return BoundReport(
        name=name,
        measured=measured.tolist(),
        bound=bound.tolist(),
        max_violation=float(slack.max()) if slack.size else float("-inf"),
        passed=not bad.size,
        alpha=alpha,
        first_violation=int(ms[bad[0]]) if bad.size else None,
        inputs=inputs or {},
    )


def _skip(name, reason) -> BoundReport:
    return BoundReport(name=name, skipped_reason=reason)


def hilbert_bound_curves(t: np.ndarray, b: float, f_norm: float, B0: float, alpha_scale: float = 1.0):
    """Product bound at alpha = alpha_scale * alpha_max(m) for m = 1..len(t), plus e_m."""
    S = np.cumsum(t**2)
    base = 1.0 + b * (2.0 - b) * S
    alpha = alpha_scale * _alpha_cap(t, b)
    prod = base ** (-alpha / 2.0) * f_norm ** (1.0 - alpha) * B0**alpha
    u = (2.0 - b) * t
    em = base ** (-u / (2.0 * (2.0 + u)))
    return prod, em, alpha


def _hilbert_checks(tr, B0, tau_t, b, reps, tol_abs):
    M = tr.steps
    a = tr.a
    y = tr.y
    t = tr.t
    ms = np.arange(1, M + 1)
    scale = np.maximum(a[:-1], 1e-300)
    # energy identity, relative to a_{m-1}
    rel = np.abs(a[1:] - (a[:-1] - b * (2.0 - b) * y**2)) / scale
    reps.append(_compare("energy_identity", ms, rel, np.zeros(M), tol_abs=1e-9, tol_rel=0))
    if np.isnan(B0):
        reps.append(_skip("B_recursion", "no A1 certificate"))
        return
    # B_m = B_{m-1} + b y_m
    Bexp = B0 + np.concatenate([[0.0], np.cumsum(b * y)])
    reps.append(_compare("B_recursion", np.arange(M + 1), np.abs(tr.B - Bexp), np.zeros(M + 1),
                         tol_abs=1e-12 * max(1.0, float(np.abs(Bexp).max())), tol_rel=0))
    Bp = tr.B[:-1]
    # y_m >= t_m a_{m-1} / B_{m-1}
    reps.append(_compare("y_lower_bound", ms, t * a[:-1] / Bp, y, tol_abs=1e-10, tol_rel=0))
    # a_m B_m^-2 <= a_{m-1} B_{m-1}^-2 (1 - b(2-b) t_m^2 a_{m-1} B_{m-1}^-2)
    z = a / tr.B**2
    reps.append(_compare("aB_recursion", ms, z[1:], z[:-1] * (1.0 - b * (2.0 - b) * t**2 * z[:-1]),
                         tol_abs=tol_abs, tol_rel=1e-9))
    # (1-x)(1 + x/c)^c <= 1 on the realized x = b(2-b) t_m y_m / B_{m-1}, c = (2-b) t_m
    pos = t > 0
    xs = b * (2.0 - b) * t[pos] * y[pos] / Bp[pos]
    cs = (2.0 - b) * t[pos]
    lhs = (1.0 - xs) * (1.0 + xs / cs) ** cs
    reps.append(_compare("elementary_inequality", ms[pos], lhs, np.ones(lhs.size), tol_abs=1e-12, tol_rel=0))
    # a_m B_m^{(2-b) t_m} <= ||f||^2 B_0^{(2-b) t_m}
    e = (2.0 - b) * t
    reps.append(_compare("aB_power", ms, a[1:] * tr.B[1:] ** e, a[0] * B0**e, tol_abs=tol_abs, tol_rel=1e-9))

    if tau_t is None:
        reason = "weakness sequence is not nonincreasing"
        for name in ("product_bound", "product_bound_half_alpha", "e_m_bound"):
            reps.append(_skip(name, reason))
        return
    rn = tr.residual_norms
    f_norm = float(rn[0])
    prod, em, alpha = hilbert_bound_curves(tau_t, b, f_norm, B0)
    half, _, _ = hilbert_bound_curves(tau_t, b, f_norm, B0, 0.5)
    inputs = {"b": b, "f_norm": f_norm, "B0": B0}
    reps.append(_compare("product_bound", ms, rn[1:], prod, alpha="alpha_max", tol_abs=tol_abs, inputs=inputs))
    reps.append(_compare("product_bound_half_alpha", ms, rn[1:], half, alpha="alpha_max/2", tol_abs=tol_abs,
                         inputs=inputs))
    if B0 <= 1.0:
        reps.append(_compare("e_m_bound", ms, rn[1:], em, tol_abs=tol_abs, inputs=inputs))
    else:
        reps.append(_skip("e_m_bound", "certified A1 bound exceeds 1"))


def _banach_checks(tr, B0, tau_t, reps, tol_abs):
    M = tr.steps
    ms = np.arange(1, M + 1)
    rn = tr.residual_norms
    mu = tr.majorant
    b = tr.b
    t = tr.t
    prev = rn[:-1]
    c = tr.c
    lhs = prev * mu(c / prev)
    if tr.variant == "dga":
        rhs = 0.5 * t * b * c * tr.r_values
    else:
        rhs = 0.5 * b * c * tr.F_phi
    rel = np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-300)
    reps.append(_compare("defining_equation", ms, rel, np.zeros(M), tol_abs=1e-9, tol_rel=0))
    weak = tr.F_phi - t * tr.r_values
    reps.append(_compare("weak_selection", ms, -weak, np.zeros(M), tol_abs=1e-12, tol_rel=0))
    reps.append(_compare("decrease_inequality", ms, rn[1:], prev - t * (1.0 - b) * c * tr.r_values,
                         tol_abs=tol_abs, tol_rel=1e-9))
    if np.isnan(B0):
        reps.append(_skip("r_lower_bound", "no A1 certificate"))
        reps.append(_skip("banach_bound", "no A1 certificate"))
        return
    Bp = tr.B[:-1]
    reps.append(_compare("r_lower_bound", ms, prev / Bp, tr.r_values, tol_abs=tol_abs, tol_rel=0))
    if tau_t is None:
        reps.append(_skip("banach_bound", "weakness sequence is not nonincreasing"))
        return
    q, gamma = mu.q, mu.gamma
    p = q / (q - 1.0)
    base = 1.0 + banach_constant(b, gamma, q) * np.cumsum(tau_t**p)
    alpha = banach_alpha_max(tau_t, b)
    f_norm = float(rn[0])
    bound = base ** (-alpha / p) * f_norm ** (1.0 - alpha) * B0**alpha
    reps.append(_compare("banach_bound", ms, rn[1:], bound, alpha="t_m(1-b)/(1+t_m(1-b))", tol_abs=tol_abs,
                         inputs={"b": b, "q": q, "gamma": gamma, "f_norm": f_norm, "B0": B0}))
    reps.append(BoundReport("dga_rate_shape", rn[1:].tolist(),
                            [dga_rate_shape(tau_t, b, q, m) for m in ms] if M else [],
                            skipped_reason="constant unspecified; displayed only"))


def verify_trace(trace, kind: str | None = None, cert=None, tau=None, b: float | None = None,
                 extras: dict | None = None) -> TraceVerification:
    """Check every identity and bound that applies to ``trace``.

    ``kind`` defaults to ``trace.algorithm``; ``cert`` (a bound or certificate)
    overrides the B_0 stored in the trace; ``tau`` defaults to the run's
    weakness sequence.  Bounds whose hypotheses fail (non-monotone tau, no
    certificate) are reported as skipped rather than failed.
    """
    extras = extras or {}
    tol_abs = float(extras.get("tol_abs", ABS_TOL))
    kind = kind or trace.algorithm
    if cert is not None:
        B0 = float(getattr(cert, "bound", cert))
    else:
        B0 = float(trace.B[0]) if trace.B.size else float("nan")
    if b is None:
        b = float(getattr(trace, "b", 1.0))
    M = trace.steps
    reps: list[BoundReport] = []

    if kind in ("wga", "twga", "wrpa", "dga", "dga_star"):
        if tau is None:
            tvals = np.asarray(trace.t, dtype=np.float64)
        else:
            tvals = as_weakness(tau).values(M)
        if B0 is not None and not np.isnan(B0) and trace.B.size and cert is not None and B0 != trace.B[0]:
            # re-base the B sequence on the supplied certificate
            trace = _rebased(trace, B0)
        tau_t = tvals if _is_nonincreasing(tvals) else None
        if kind in ("dga", "dga_star"):
            _banach_checks(trace, B0, tau_t, reps, tol_abs)
        else:
            _hilbert_checks(trace, B0, tau_t, b, reps, tol_abs)
        if kind == "wrpa":
            reps.append(_compare("pythagoras", np.arange(1, M + 1),
                                 np.abs(trace.a[1:] - (trace.a[:-1] - trace.y**2)) / max(trace.a[0], 1e-300),
                                 np.zeros(M), tol_abs=1e-9, tol_rel=0))
    elif kind in ("woga", "wgafr"):
        rn = trace.residual_norms
        reps.append(_compare("monotone_residual", np.arange(1, M + 1), rn[1:], rn[:-1], tol_abs=1e-12, tol_rel=1e-12))
        if kind == "woga":
            orth = [float(np.abs(trace.atoms[: m] @ trace.residuals[m]).max()) for m in range(1, M + 1)]
            reps.append(_compare("residual_orthogonality", np.arange(1, M + 1), orth, np.zeros(M),
                                 tol_abs=1e-9, tol_rel=0))
    elif kind in ("rga", "ia"):
        reps.append(_skip("rate_bounds", f"no explicit bound is verified for {kind}"))
    else:
        raise ValueError(f"unknown trace kind {kind!r}")
    return TraceVerification(kind, reps)


def _rebased(trace, B0):
    from dataclasses import replace

    if hasattr(trace, "c") and hasattr(trace, "majorant"):
        B = B0 + np.concatenate([[0.0], np.cumsum(trace.c)])
    else:
        B = B0 + np.concatenate([[0.0], np.cumsum(trace.b * trace.y)])
    return replace(trace, B=B)
