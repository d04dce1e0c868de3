"""Turn a validated :class:`ExperimentConfig` into a run, a verification and files."""

from __future__ import annotations

import copy
import csv
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import generators as gen
from .banach import run_dga
from .bounds import BoundReport, TraceVerification, verify_trace
from .config import ConfigError, ExperimentConfig, validate
from .dictionaries import Dictionary, a1_certify, load_dictionary, make_explicit, symmetrize
from .hilbert import run_ia, run_rga, run_twga, run_wga, run_wgafr, run_woga
from .projections import SubspaceCollection, certify_combination, run_rp_schedule, run_wrpa
from .thresholding import BasisModel, necessity_counterexample, run_wtga
from .traceio import trace_to_dict, write_trace_csv


@dataclass
class RunResult:
    trace: object
    verification: TraceVerification | None
    summary: dict

    @property
    def passed(self) -> bool:
        return self.verification is None or self.verification.passed


def build_dictionary(cfg: ExperimentConfig) -> Dictionary:
    opts = cfg.dictionary
    kind = opts["kind"]
    sym = bool(opts.get("symmetric", False))
    if kind == "orthonormal":
        d = gen.orthonormal_dictionary(cfg.dim, sym)
    elif kind == "random_unit":
        d = gen.random_unit_dictionary(cfg.dim, int(opts["count"]), int(opts.get("seed", cfg.seed)), cfg.p, sym)
    elif kind == "file":
        d = load_dictionary(opts["path"], cfg.p)
        d = symmetrize(d) if sym else d
    else:
        d = make_explicit(opts["elements"], normalize=bool(opts.get("normalize", False)), p=cfg.p)
        d = symmetrize(d) if sym else d
    if cfg.dim is not None and d.dim != cfg.dim:
        raise ConfigError("dictionary", f"dictionary dimension {d.dim} differs from space.dim {cfg.dim}")
    return d


def build_collection(cfg: ExperimentConfig) -> SubspaceCollection:
    opts = cfg.collection
    kind = opts["kind"]
    if kind == "random":
        return gen.random_subspace_collection(cfg.dim, int(opts["count"]), int(opts.get("codim", 1)),
                                              int(opts.get("seed", cfg.seed)))
    if kind == "file":
        return SubspaceCollection.load(opts["path"])
    return SubspaceCollection(opts["perp_bases"], cfg.dim)


def _input_seed(cfg):
    return int(cfg.input.get("seed", cfg.seed))


def build_input(cfg: ExperimentConfig, atoms):
    """Return (vector, certificate-or-bound-or-None)."""
    inp = cfg.input
    kind = inp["kind"]
    if kind == "vector":
        return np.asarray(inp["values"], dtype=np.float64), inp.get("cert_bound")
    if isinstance(atoms, SubspaceCollection):
        if kind == "certificate":
            return certify_combination(atoms, inp["indices"], inp["coefficients"], inp["directions"])
        return gen.random_collection_combination(atoms, _input_seed(cfg), inp.get("terms"),
                                                 float(inp.get("scale", 1.0)), signed=kind == "random_combination")
    if kind == "certificate":
        return a1_certify(atoms, inp["indices"], inp["coefficients"])
    if kind == "random_convex":
        return gen.random_convex_combination(atoms, _input_seed(cfg), inp.get("terms"))
    if kind == "random_combination":
        return gen.random_signed_combination(atoms, _input_seed(cfg), inp.get("terms"), float(inp.get("scale", 1.0)))
    raise ConfigError("input.kind", f"{kind} inputs do not apply to {cfg.name}")


def _wtga(cfg: ExperimentConfig) -> RunResult:
    alg, inp = cfg.algorithm, cfg.input
    tau = alg["tau"]
    reports = []
    extra = {}
    if inp["kind"] == "counterexample":
        ce = necessity_counterexample(tau, inp["horizon"], summable=inp.get("summable"))
        tr = run_wtga(ce.coefficients, tau=tau, M=ce.schedule.size, policy="replay", schedule=ce.schedule)
        floor = ce.floor
        rl = tr.residual_l2
        ms = np.arange(tr.steps + 1)
        bad = np.nonzero(rl < floor - 1e-9)[0]
        reports.append(BoundReport("residual_floor", rl.tolist(), [floor] * rl.size,
                                   float((floor - rl).max()), not bad.size,
                                   first_violation=int(ms[bad[0]]) if bad.size else None))
        extra = {"floor": floor, "S": ce.S}
    else:
        if inp["kind"] == "coefficients":
            c = np.asarray(inp["values"], dtype=np.float64)
        else:
            c = gen.random_l1_coefficients(cfg.dim, _input_seed(cfg), float(inp.get("decay", 0.0)))
        norms = alg.get("basis_norms")
        model = BasisModel(c.size) if norms is None else BasisModel.banach(norms)
        tr = run_wtga(c, model, tau, alg["M"], alg["policy"], alg.get("schedule"), seed=cfg.seed)
        slack = tr.weighted_l1 - tr.suffix_bound
        bad = np.nonzero(slack > 1e-12 * np.maximum(1.0, tr.suffix_bound))[0]
        reports.append(BoundReport("suffix_bound", tr.weighted_l1.tolist(), tr.suffix_bound.tolist(), float(slack.max()),
                                   not bad.size, first_violation=int(bad[0]) if bad.size else None))
        extra = {"max_remaining": float(tr.max_remaining[-1])}
    ver = TraceVerification("wtga", reports) if cfg.verify else None
    summary = {"algorithm": "wtga", "steps": tr.steps, "status": tr.status,
               "final_residual": float(tr.residual_l2[-1]), **extra}
    return RunResult(tr, ver, summary)


def execute(cfg: ExperimentConfig) -> RunResult:
    name = cfg.name
    alg = cfg.algorithm
    if name == "wtga":
        return _wtga(cfg)
    M = alg["M"]
    policy = alg.get("policy")
    cert = None
    if name in ("wrpa", "rp"):
        coll = build_collection(cfg)
        f, cert = build_input(cfg, coll)
        if name == "wrpa":
            tr = run_wrpa(f, coll, alg["tau"], M, policy, cert)
        else:
            tr = run_rp_schedule(f, coll, alg["eps"], M, cert)
    else:
        d = build_dictionary(cfg)
        f, cert = build_input(cfg, d)
        if name == "wga":
            tr = run_wga(f, d, alg["tau"], alg["b"], M, cert, policy)
        elif name == "twga":
            tr = run_twga(f, d, alg["tau"], alg["b"], M, cert, policy)
        elif name == "woga":
            tr = run_woga(f, d, alg["tau"], M, policy, cert)
        elif name == "wgafr":
            tr = run_wgafr(f, d, alg["tau"], M, policy, cert)
        elif name == "rga":
            tr = run_rga(f, d, M)
        elif name == "ia":
            tr = run_ia(f, d, alg["eps"], M, cert)
        else:
            tr = run_dga(f, d, alg["tau"], alg["b"], cfg.p, M, cert, variant=name, policy=policy)
    ver = verify_trace(tr) if cfg.verify else None
    rn = tr.residual_norms
    slack = [r.max_violation for r in ver.reports if not r.skipped and r.measured] if ver else []
    summary = {"algorithm": name, "steps": tr.steps, "status": tr.status, "final_residual": float(rn[-1]),
               "max_slack": float(max(slack)) if slack else None}
    return RunResult(tr, ver, summary)


def write_outputs(res: RunResult, out_dir: Path, output: dict | None = None) -> dict:
    output = output or {}
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "trace_csv": out_dir / output.get("trace_csv", "trace.csv"),
        "trace_json": out_dir / output.get("trace_json", "trace.json"),
        "report_json": out_dir / output.get("report_json", "report.json"),
    }
    write_trace_csv(res.trace, paths["trace_csv"])
    paths["trace_json"].write_text(json.dumps(trace_to_dict(res.trace)))
    report = {"summary": res.summary, "passed": res.passed,
              "verification": res.verification.to_dict() if res.verification else None}
    paths["report_json"].write_text(json.dumps(report, indent=1))
    return {k: str(v) for k, v in paths.items()}


# --- sweeps --------------------------------------------------------------------

def _set_path(doc: dict, dotted: str, value):
    keys = dotted.split(".")
    cur = doc
    for k in keys[:-1]:
        cur = cur.setdefault(k, {})
    cur[keys[-1]] = value


def expand_sweep(doc: dict) -> list[tuple[dict, int, dict]]:
    """(cell parameters, seed, run document) for every grid point and seed."""
    if "base" not in doc:
        raise ConfigError("base", "missing required field")
    grid = doc.get("grid")
    if not isinstance(grid, dict) or not grid or any(not isinstance(v, list) or not v for v in grid.values()):
        raise ConfigError("grid", "sweep grid must be a nonempty object of nonempty lists")
    if "seeds" in doc:
        seeds = [int(s) for s in doc["seeds"]]
    else:
        trials = int(doc.get("trials", 1))
        start = int(doc.get("seed_start", 0))
        seeds = list(range(start, start + trials))
    if not seeds:
        raise ConfigError("seeds", "no seeds to run")
    keys = list(grid)
    jobs = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        cell = dict(zip(keys, combo))
        for s in seeds:
            run = copy.deepcopy(doc["base"])
            for k, v in cell.items():
                _set_path(run, k, v)
            run["seed"] = s
            run["verify"] = run.get("verify", True)
            jobs.append((cell, s, run))
    return jobs


def _sweep_task(args) -> dict:
    cell, seed, run, base_dir = args
    row = {"cell": json.dumps(cell, sort_keys=True), "seed": seed}
    try:
        res = execute(validate(run, base_dir))
        row.update(passed=res.passed, status=res.summary["status"], steps=res.summary["steps"],
                   final_residual=res.summary["final_residual"], max_slack=res.summary.get("max_slack"), error="")
    except Exception as exc:  # collected, the sweep keeps going
        row.update(passed=False, status="error", steps=0, final_residual=None, max_slack=None,
                   error=f"{type(exc).__name__}: {exc}")
    return row


SUMMARY_COLUMNS = ("cell", "seed", "passed", "status", "steps", "final_residual", "max_slack", "error")
CELL_COLUMNS = ("cell", "runs", "errors", "pass_rate", "max_slack", "mean_final_residual")


def run_sweep(doc: dict, base_dir: Path, workers: int = 1) -> tuple[list[dict], list[dict]]:
    jobs = [(c, s, r, base_dir) for c, s, r in expand_sweep(doc)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_task, jobs))
    else:
        rows = [_sweep_task(j) for j in jobs]
    cells = []
    for key, group in itertools.groupby(rows, key=lambda r: r["cell"]):
        g = list(group)
        slacks = [r["max_slack"] for r in g if r["max_slack"] is not None]
        finals = [r["final_residual"] for r in g if r["final_residual"] is not None]
        cells.append({
            "cell": key,
            "runs": len(g),
            "errors": sum(1 for r in g if r["error"]),
            "pass_rate": sum(1 for r in g if r["passed"]) / len(g),
            "max_slack": max(slacks) if slacks else None,
            "mean_final_residual": float(np.mean(finals)) if finals else None,
        })
    return rows, cells


def write_csv(rows: list[dict], columns, path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r.get(k) is None else (format(r[k], ".17g") if isinstance(r[k], float) else r[k]))
                        for k in columns})
