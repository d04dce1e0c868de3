"""Trace export: fixed-column CSV and a lossless JSON variant.

Floats are written with 17 significant digits so a round trip is exact.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .banach import BanachGreedyTrace
from .bounds import hilbert_bound_curves
from .hilbert import GreedyTrace
from .projections import ProjectionTrace
from .spaces import SmoothnessMajorant
from .thresholding import WTGATrace

HILBERT_COLUMNS = ("m", "selected", "c_m", "y_m", "a_m", "B_m", "residual_norm", "bound_e_m", "bound_product")
BANACH_COLUMNS = ("m", "selected", "c_m", "r_value", "F_phi", "B_m", "residual_norm", "p", "q", "gamma")
WTGA_COLUMNS = ("m", "selected", "picked_abs", "threshold", "residual_l2", "residual_l1", "weighted_l1",
                "max_remaining", "suffix_bound")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _hilbert_rows(tr) -> list[list]:
    rn = tr.residual_norms
    M = tr.steps
    t = np.asarray(tr.t, dtype=np.float64)
    mono = M and np.all(np.isfinite(t)) and np.all(np.diff(t) <= 1e-15)
    B0 = tr.cert_bound
    if mono and np.isfinite(B0):
        prod, em, _ = hilbert_bound_curves(t, tr.b, float(rn[0]), B0)
    else:
        prod = em = np.full(M, np.nan)
    rows = []
    for m in range(1, M + 1):
        rows.append([m, int(tr.selected[m - 1]), tr.coefficients[m - 1] if isinstance(tr, GreedyTrace) else tr.y[m - 1],
                     tr.y[m - 1], rn[m] ** 2, tr.B[m], rn[m], em[m - 1], prod[m - 1]])
    return rows


def trace_rows(tr) -> tuple[tuple[str, ...], list[list]]:
    if isinstance(tr, (GreedyTrace, ProjectionTrace)):
        return HILBERT_COLUMNS, _hilbert_rows(tr)
    if isinstance(tr, BanachGreedyTrace):
        rn = tr.residual_norms
        mu = tr.majorant
        return BANACH_COLUMNS, [
            [m, int(tr.selected[m - 1]), tr.c[m - 1], tr.r_values[m - 1], tr.F_phi[m - 1], tr.B[m], rn[m],
             tr.p, mu.q, mu.gamma]
            for m in range(1, tr.steps + 1)
        ]
    if isinstance(tr, WTGATrace):
        return WTGA_COLUMNS, [
            [m, int(tr.selected[m - 1]), tr.picked_abs[m - 1], tr.threshold[m - 1], tr.residual_l2[m],
             tr.residual_l1[m], tr.weighted_l1[m], tr.max_remaining[m], tr.suffix_bound[m]]
            for m in range(1, tr.steps + 1)
        ]
    raise TypeError(f"cannot export {type(tr).__name__}")


def trace_csv(tr) -> str:
    cols, rows = trace_rows(tr)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def write_trace_csv(tr, path) -> None:
    Path(path).write_text(trace_csv(tr))


def read_trace_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: (int(v) if k in ("m", "selected") else float(v)) for k, v in row.items()}
                for row in csv.DictReader(fh)]


def _arr(a):
    return np.asarray(a).tolist()


def trace_to_dict(tr) -> dict:
    if isinstance(tr, GreedyTrace):
        return {"type": "greedy", "algorithm": tr.algorithm, "f": _arr(tr.f), "residuals": _arr(tr.residuals),
                "selected": _arr(tr.selected), "atoms": _arr(tr.atoms), "coefficients": _arr(tr.coefficients),
                "y": _arr(tr.y), "t": _arr(tr.t), "B": _arr(tr.B), "status": tr.status, "b": tr.b,
                "params": tr.params}
    if isinstance(tr, ProjectionTrace):
        return {"type": "projection", "algorithm": "wrpa", "x0": _arr(tr.x0), "residuals": _arr(tr.residuals),
                "selected": _arr(tr.selected), "y": _arr(tr.y), "t": _arr(tr.t), "B": _arr(tr.B),
                "status": tr.status, "params": tr.params}
    if isinstance(tr, BanachGreedyTrace):
        return {"type": "banach", "algorithm": tr.variant, "variant": tr.variant, "p": tr.p, "q": tr.majorant.q,
                "gamma": tr.majorant.gamma, "b": tr.b, "f": _arr(tr.f), "residuals": _arr(tr.residuals),
                "selected": _arr(tr.selected), "c": _arr(tr.c), "r_values": _arr(tr.r_values),
                "F_phi": _arr(tr.F_phi), "t": _arr(tr.t), "B": _arr(tr.B), "status": tr.status,
                "params": tr.params}
    if isinstance(tr, WTGATrace):
        return {"type": "wtga", "algorithm": "wtga", "selected": _arr(tr.selected), "picked_abs": _arr(tr.picked_abs),
                "threshold": _arr(tr.threshold), "t": _arr(tr.t), "residual_l2": _arr(tr.residual_l2),
                "residual_l1": _arr(tr.residual_l1), "weighted_l1": _arr(tr.weighted_l1),
                "max_remaining": _arr(tr.max_remaining), "suffix_bound": _arr(tr.suffix_bound), "status": tr.status,
                "params": tr.params}
    raise TypeError(f"cannot export {type(tr).__name__}")


def _f(x):
    return np.asarray(x, dtype=np.float64)


def _i(x):
    return np.asarray(x, dtype=np.int64)


def trace_from_dict(doc: dict):
    kind = doc.get("type")
    if kind == "greedy":
        n = len(doc["f"])
        return GreedyTrace(doc["algorithm"], _f(doc["f"]), _f(doc["residuals"]).reshape(-1, n), _i(doc["selected"]),
                           _f(doc["atoms"]).reshape(-1, n), _f(doc["coefficients"]), _f(doc["y"]), _f(doc["t"]),
                           _f(doc["B"]), doc["status"], float(doc.get("b", 1.0)), doc.get("params", {}))
    if kind == "projection":
        n = len(doc["x0"])
        return ProjectionTrace(_f(doc["x0"]), _f(doc["residuals"]).reshape(-1, n), _i(doc["selected"]), _f(doc["y"]),
                               _f(doc["t"]), _f(doc["B"]), doc["status"], doc.get("params", {}))
    if kind == "banach":
        n = len(doc["f"])
        return BanachGreedyTrace(doc["variant"], float(doc["p"]), SmoothnessMajorant(doc["q"], doc["gamma"]),
                                 float(doc["b"]), _f(doc["f"]), _f(doc["residuals"]).reshape(-1, n),
                                 _i(doc["selected"]), _f(doc["c"]), _f(doc["r_values"]), _f(doc["F_phi"]),
                                 _f(doc["t"]), _f(doc["B"]), doc["status"], doc.get("params", {}))
    if kind == "wtga":
        return WTGATrace(_i(doc["selected"]), _f(doc["picked_abs"]), _f(doc["threshold"]), _f(doc["t"]),
                         _f(doc["residual_l2"]), _f(doc["residual_l1"]), _f(doc["weighted_l1"]),
                         _f(doc["max_remaining"]), _f(doc["suffix_bound"]), doc["status"], doc.get("params", {}))
    raise ValueError(f"unknown trace type {kind!r}")


def write_trace_json(tr, path) -> None:
    Path(path).write_text(json.dumps(trace_to_dict(tr)))


def read_trace_json(path):
    return trace_from_dict(json.loads(Path(path).read_text()))
