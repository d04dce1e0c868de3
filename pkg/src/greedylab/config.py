"""Experiment configuration: one JSON document per run.

Example::

    {
      "seed": 0,
      "space": {"dim": 2, "p": 2},
      "dictionary": {"kind": "orthonormal"},
      "input": {"kind": "vector", "values": [0.8, 0.6], "cert_bound": 1.4},
      "algorithm": {"name": "wga", "tau": 1.0, "b": 1.0, "M": 10},
      "verify": true
    }

Generator seeds default to the top-level ``seed``.  Validation errors carry
the dotted path of the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

ALGORITHMS = ("wga", "twga", "woga", "wgafr", "rga", "ia", "dga", "dga_star", "wtga", "wrpa", "rp")
DICT_KINDS = ("orthonormal", "random_unit", "file", "explicit")
COLL_KINDS = ("random", "file", "explicit")
INPUT_KINDS = ("vector", "certificate", "random_combination", "random_convex", "coefficients", "random_l1",
               "counterexample")


class ConfigError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


def _need(doc: dict, key: str, path: str):
    if not isinstance(doc, dict):
        raise ConfigError(path, "expected an object")
    if key not in doc:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    return doc[key]


def _num(doc, key, path, default=None, lo=None, hi=None, lo_open=False, hi_open=False, integer=False):
    full = f"{path}.{key}" if path else key
    if key not in doc:
        if default is None:
            raise ConfigError(full, "missing required field")
        return default
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(full, f"expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(full, f"expected an integer, got {v!r}")
    if lo is not None and (v < lo or (lo_open and v == lo)):
        raise ConfigError(full, f"value {v!r} below {'(' if lo_open else '['}{lo}")
    if hi is not None and (v > hi or (hi_open and v == hi)):
        raise ConfigError(full, f"value {v!r} above {hi}{')' if hi_open else ']'}")
    return int(v) if integer else float(v)


def _choice(doc, key, path, options, default=None):
    full = f"{path}.{key}" if path else key
    v = doc.get(key, default)
    if v is None:
        raise ConfigError(full, "missing required field")
    if v not in options:
        raise ConfigError(full, f"{v!r} is not one of {', '.join(options)}")
    return v


def _file(doc, key, path, base: Path) -> Path:
    full = f"{path}.{key}"
    p = Path(_need(doc, key, path))
    if not p.is_absolute():
        p = base / p
    if not p.exists():
        raise ConfigError(full, f"file {p} does not exist")
    return p


@dataclass
class ExperimentConfig:
    seed: int
    dim: int | None
    p: float
    algorithm: dict
    dictionary: dict | None = None
    collection: dict | None = None
    input: dict = field(default_factory=dict)
    verify: bool = True
    output: dict = field(default_factory=dict)
    base_dir: Path = Path(".")
    raw: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.algorithm["name"]


def _validate_tau(v, path, base):
    from .weakness import WeaknessSequence

    try:
        return WeaknessSequence.from_config(v, base)
    except KeyError as exc:
        raise ConfigError(path, f"missing required field {exc}") from None
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(path, f"invalid weakness sequence: {exc}") from None


def validate(doc: dict, base_dir: Path | str = ".") -> ExperimentConfig:
    """Check ``doc`` and return a parsed config; raises :class:`ConfigError`."""
    base = Path(base_dir)
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    seed = _num(doc, "seed", "", default=0, lo=0, integer=True)
    alg = dict(_need(doc, "algorithm", ""))
    name = _choice(alg, "name", "algorithm", ALGORITHMS)
    space = doc.get("space", {})
    if not isinstance(space, dict):
        raise ConfigError("space", "expected an object")
    dim = _num(space, "dim", "space", default=0, lo=0, integer=True) or None
    p = _num(space, "p", "space", default=2.0)

    alg["M"] = _num(alg, "M", "algorithm", default=100, lo=0, integer=True)
    if name in ("wga", "twga", "woga", "wgafr", "wtga", "wrpa", "dga", "dga_star"):
        alg["tau"] = _validate_tau(alg.get("tau", 1.0), "algorithm.tau", base)
    if name in ("wga", "twga"):
        alg["b"] = _num(alg, "b", "algorithm", default=1.0, lo=0, hi=1, lo_open=True)
    if name in ("dga", "dga_star"):
        if not 1 < p < float("inf"):
            raise ConfigError("space.p", f"DGA needs 1 < p < inf, got {p!r}")
        alg["b"] = _num(alg, "b", "algorithm", default=0.5, lo=0, hi=1, lo_open=True, hi_open=True)
    elif p != 2 and name != "wtga":
        raise ConfigError("space.p", f"{name} runs in a Hilbert space; p must be 2")
    if name in ("ia", "rp"):
        alg.setdefault("eps", {"family": "harmonic", "c": 1.0})
    if name == "wtga":
        alg["policy"] = alg.get("policy", "greedy_max")
        if alg["policy"] not in ("greedy_max", "adversarial", "random", "replay"):
            raise ConfigError("algorithm.policy", f"unknown WTGA policy {alg['policy']!r}")
    elif "policy" in alg:
        from .hilbert import SelectionPolicy

        try:
            alg["policy"] = SelectionPolicy.from_config(alg["policy"])
        except (TypeError, ValueError) as exc:
            raise ConfigError("algorithm.policy", str(exc)) from None

    dictionary = collection = None
    if name in ("wrpa", "rp"):
        collection = dict(_need(doc, "collection", ""))
        kind = _choice(collection, "kind", "collection", COLL_KINDS)
        if kind == "file":
            collection["path"] = _file(collection, "path", "collection", base)
        elif kind == "random":
            if dim is None:
                raise ConfigError("space.dim", "random collections need a dimension")
            _num(collection, "count", "collection", lo=1, integer=True)
            _num(collection, "codim", "collection", default=1, lo=1, hi=dim, integer=True)
        else:
            _need(collection, "perp_bases", "collection")
    elif name != "wtga":
        dictionary = dict(_need(doc, "dictionary", ""))
        kind = _choice(dictionary, "kind", "dictionary", DICT_KINDS)
        if kind == "file":
            dictionary["path"] = _file(dictionary, "path", "dictionary", base)
        elif kind == "explicit":
            _need(dictionary, "elements", "dictionary")
        else:
            if dim is None:
                raise ConfigError("space.dim", f"{kind} dictionaries need a dimension")
            if kind == "random_unit":
                _num(dictionary, "count", "dictionary", lo=1, integer=True)

    inp = dict(doc.get("input", {}))
    ikind = _choice(inp, "kind", "input", INPUT_KINDS)
    if ikind in ("vector", "coefficients"):
        _need(inp, "values", "input")
    elif ikind == "certificate":
        _need(inp, "indices", "input")
        _need(inp, "coefficients", "input")
    elif ikind == "counterexample":
        if name != "wtga":
            raise ConfigError("input.kind", "counterexample inputs are for wtga")
        inp["horizon"] = _num(inp, "horizon", "input", default=2**14, lo=2, integer=True)
    elif ikind == "random_l1":
        if dim is None:
            raise ConfigError("space.dim", "random_l1 inputs need a dimension")
    if name == "wtga" and ikind not in ("coefficients", "random_l1", "counterexample"):
        raise ConfigError("input.kind", "wtga takes coefficients, random_l1 or counterexample inputs")
    if name == "twga" and ikind == "vector" and "cert_bound" not in inp:
        raise ConfigError("input.cert_bound", "twga needs a certified A1 bound")

    verify = doc.get("verify", True)
    if not isinstance(verify, bool):
        raise ConfigError("verify", "expected true or false")
    output = doc.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("output", "expected an object")
    return ExperimentConfig(seed=seed, dim=dim, p=p, algorithm=alg, dictionary=dictionary, collection=collection,
                            input=inp, verify=verify, output=output, base_dir=base, raw=doc)


def load_config(path) -> tuple[dict, Path]:
    path = Path(path)
    if not path.exists():
        raise ConfigError("--config", f"file {path} does not exist")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from None
    return doc, path.parent
