"""Finite-dimensional coordinate spaces: l2 inner product, lp norms, duality maps.

Vectors are plain 1-D float64 numpy arrays.  ``as_vector`` is the single entry
point that validates shape and finiteness; everything else assumes it has been
applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-10


def as_vector(x, *, copy: bool = False) -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float64 array."""
    v = np.array(x, dtype=np.float64, copy=copy) if copy else np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if v.size == 0:
        raise ValueError("vector must have positive dimension")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite coordinates")
    return v


def frozen(v: np.ndarray) -> np.ndarray:
    v = np.array(v, dtype=np.float64)
    v.setflags(write=False)
    return v


def inner(u, v) -> float:
    u = as_vector(u)
    v = as_vector(v)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.size} vs {v.size}")
    return float(u @ v)


def norm_lp(v, p: float = 2.0) -> float:
    """(sum |v_i|^p)^(1/p), or max |v_i| for p = inf."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    v = as_vector(v)
    if np.isinf(p):
        return float(np.max(np.abs(v)))
    if p == 2:
        return float(np.sqrt(v @ v))
    if p == 1:
        return float(np.sum(np.abs(v)))
    a = np.abs(v)
    scale = a.max()
    if scale == 0.0:
        return 0.0
    # rescale so large p cannot overflow
    return float(scale * np.sum((a / scale) ** p) ** (1.0 / p))


def conjugate_exponent(p: float) -> float:
    if p <= 1:
        raise ValueError(f"conjugate exponent needs p > 1, got {p}")
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def norming_functional(f, p: float) -> np.ndarray:
    """Dual coordinates of the unique norming functional of ``f`` in lp.

    F_i = sign(f_i) |f_i|^(p-1) / ||f||_p^(p-1), so that F(f) = ||f||_p and
    ||F||_{p'} = 1.  Only 1 < p < inf (uniformly smooth case).
    """
    if not 1 < p < np.inf:
        raise ValueError(f"norming functional requires 1 < p < inf, got {p}")
    f = as_vector(f)
    nrm = norm_lp(f, p)
    if nrm == 0.0:
        raise ValueError("norming functional is undefined for the zero element")
    u = f / nrm
    if p == 2:
        return u
    return np.sign(u) * np.abs(u) ** (p - 1.0)


@dataclass(frozen=True)
class SmoothnessMajorant:
    """Power-type majorant mu(u) = gamma * u**q of a modulus of smoothness."""

    q: float
    gamma: float

    def __post_init__(self):
        if not 1 < self.q <= 2:
            raise ValueError(f"q must lie in (1, 2], got {self.q}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def p_conjugate(self) -> float:
        return self.q / (self.q - 1.0)

    def __call__(self, u):
        return self.gamma * np.asarray(u, dtype=np.float64) ** self.q


def lp_majorant(p: float) -> SmoothnessMajorant:
    """Standard power majorant of the modulus of smoothness of L_p.

    u^p/p for 1 < p <= 2 and (p-1)u^2/2 for 2 <= p < inf.
    """
    if p <= 1:
        raise ValueError(f"lp_majorant requires p > 1 (p = 1 is not uniformly smooth), got {p}")
    if np.isinf(p):
        raise ValueError("lp_majorant requires finite p")
    if p <= 2:
        return SmoothnessMajorant(q=float(p), gamma=1.0 / p)
    return SmoothnessMajorant(q=2.0, gamma=(p - 1.0) / 2.0)
