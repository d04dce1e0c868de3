"""Command line entry point: ``greedylab run | sweep | diag | verify-trace``.

Exit codes: 0 when every enabled verification passed, 1 when one failed,
2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import ConfigError, load_config, validate

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _workers(arg: int | None) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("GREEDYLAB_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("GREEDYLAB_WORKERS", f"expected an integer, got {env!r}") from None
    return 1


def cmd_run(args) -> int:
    from .runner import execute, write_outputs

    doc, base = load_config(args.config)
    if args.seed is not None:
        doc["seed"] = args.seed
    cfg = validate(doc, base)
    try:
        res = execute(cfg)
    except (ValueError, IndexError) as exc:
        if isinstance(exc, ConfigError):
            raise
        # inputs the algorithms reject (uncertifiable f, IA condition, ...) are config problems
        raise ConfigError("input", str(exc)) from None
    out = {"summary": res.summary, "passed": res.passed}
    if args.out:
        out["files"] = write_outputs(res, Path(args.out), cfg.output)
    if res.verification is not None:
        out["failures"] = [r.name for r in res.verification.failures()]
    print(json.dumps(out, indent=1))
    return EXIT_OK if res.passed else EXIT_FAILED


def cmd_sweep(args) -> int:
    from .runner import CELL_COLUMNS, SUMMARY_COLUMNS, run_sweep, write_csv

    doc, base = load_config(args.config)
    if args.seed is not None:
        doc["seed_start"] = args.seed
        doc.pop("seeds", None)
    rows, cells = run_sweep(doc, base, _workers(args.workers))
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    write_csv(rows, SUMMARY_COLUMNS, out / "summary.csv")
    write_csv(cells, CELL_COLUMNS, out / "cells.csv")
    failed = [r for r in rows if not r["passed"]]
    print(json.dumps({"runs": len(rows), "failed": len(failed), "errors": sum(1 for r in rows if r["error"]),
                      "summary_csv": str(out / "summary.csv"), "cells_csv": str(out / "cells.csv")}, indent=1))
    return EXIT_FAILED if failed else EXIT_OK


def cmd_diag(args) -> int:
    from .weakness import Subsequence, WeaknessSequence, diagnose

    doc, base = load_config(args.config)
    if "tau" not in doc:
        raise ConfigError("tau", "missing required field")
    try:
        tau = WeaknessSequence.from_config(doc["tau"], base)
        sub = Subsequence.from_config(doc["subsequence"]) if "subsequence" in doc else None
    except KeyError as exc:
        raise ConfigError("tau", f"missing required field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError("tau", str(exc)) from None
    horizon = int(doc.get("horizon", args.horizon))
    rep = diagnose(tau, sub, horizon)
    text = json.dumps(rep.to_dict(), indent=1)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "diag.json").write_text(text)
    return EXIT_OK


def cmd_verify_trace(args) -> int:
    from .bounds import verify_trace
    from .traceio import read_trace_json

    path = Path(args.trace)
    if not path.exists():
        raise ConfigError("trace", f"file {path} does not exist")
    tr = read_trace_json(path)
    if not hasattr(tr, "B"):
        raise ConfigError("trace", "wtga traces carry their own checks; verify them with `run`")
    rep = verify_trace(tr, cert=args.cert)
    text = json.dumps(rep.to_dict(), indent=1)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "verification.json").write_text(text)
    print(json.dumps({"passed": rep.passed, "failures": [r.name for r in rep.failures()]}, indent=1))
    return EXIT_OK if rep.passed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="greedylab", description="Weak greedy algorithm experiments and bound checks.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--workers", type=int, help="parallel workers (default: $GREEDYLAB_WORKERS or 1)")

    common(sub.add_parser("run", help="execute one configured run"))
    common(sub.add_parser("sweep", help="run a parameter grid over seeds"))
    p = sub.add_parser("diag", help="weakness sequence diagnostics")
    common(p)
    p.add_argument("--horizon", type=int, default=10_000)
    p = sub.add_parser("verify-trace", help="re-check a JSON trace against its bounds")
    p.add_argument("trace", help="trace JSON written by `run`")
    p.add_argument("--cert", type=float, help="certified A1 bound overriding the stored B_0")
    common(p, config=False)
    return ap


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "diag": cmd_diag, "verify-trace": cmd_verify_trace}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
