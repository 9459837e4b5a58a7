"""JSON carrier format for discrete, linear-Gaussian and mixed SCMs.

Example document::

    {
      "name": "toy", "task": "regression", "target": "Y",
      "nodes": [
        {"name": "X", "kind": "gaussian", "parents": [], "weights": [],
         "intercept": 0.0, "noise_std": 1.0},
        {"name": "C", "kind": "discrete", "parents": ["X"], "states": ["lo", "hi"],
         "bins": {"X": [0.0]}, "table": [[0.9, 0.1], [0.2, 0.8]]},
        {"name": "Y", "kind": "gaussian", "parents": ["X", "C"],
         "configs": [{"intercept": 0, "weights": [2.0], "noise_std": 0.5},
                     {"intercept": 1, "weights": [1.0], "noise_std": 0.5}]}
      ]
    }

Discrete tables have one row per parent configuration (row-major over
``parents``, last parent fastest; numeric parents contribute
``len(bins) + 1`` levels). Gaussian ``weights`` align with the numeric
parents in ``parents`` order; discrete parents select a ``configs`` entry.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from ..errors import GraphError, ValidationError
from ..graph import _find_cycle
from .bif import parse_bif
from .model import DiscreteCpd, LinearGaussianCpd, LinearMechanism, ScmModel, Task

_KINDS = ("discrete", "gaussian")


def _need(obj: dict, key: str, typ, path: str):
    if key not in obj:
        raise ValidationError(f"missing field {key!r}", path)
    val = obj[key]
    if typ is float:
        ok = isinstance(val, (int, float)) and not isinstance(val, bool)
    else:
        ok = isinstance(val, typ)
    if not ok:
        raise ValidationError(f"expected {getattr(typ, '__name__', typ)}, got {type(val).__name__}", f"{path}.{key}")
    return val


def _numbers(val, path: str) -> list[float]:
    if not isinstance(val, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in val):
        raise ValidationError("expected a list of numbers", path)
    return [float(v) for v in val]


def _mechanism(obj: Any, path: str) -> LinearMechanism:
    if not isinstance(obj, dict):
        raise ValidationError("expected an object", path)
    try:
        return LinearMechanism(
            _need(obj, "intercept", float, path),
            _numbers(_need(obj, "weights", list, path), f"{path}.weights"),
            _need(obj, "noise_std", float, path),
        )
    except ValidationError as exc:
        if exc.path:
            raise
        raise ValidationError(str(exc), path) from None


def parse_scm_json(text: str) -> ScmModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}", "$") from None
    if not isinstance(doc, dict):
        raise ValidationError("top level must be an object", "$")
    nodes = _need(doc, "nodes", list, "$")
    task = doc.get("task")
    if task is not None and task not in ("classification", "regression"):
        raise ValidationError(f"unknown task {task!r}", "$.task")
    target = doc.get("target")
    if target is not None and not isinstance(target, str):
        raise ValidationError("target must be a string", "$.target")

    kinds: dict[str, str] = {}
    parents: dict[str, list[str]] = {}
    for i, node in enumerate(nodes):
        path = f"$.nodes[{i}]"
        if not isinstance(node, dict):
            raise ValidationError("expected an object", path)
        name = _need(node, "name", str, path)
        if not name:
            raise ValidationError("empty node name", f"{path}.name")
        if name in kinds:
            raise ValidationError(f"duplicate node {name!r}", f"{path}.name")
        kind = _need(node, "kind", str, path)
        if kind not in _KINDS:
            raise ValidationError(f"kind must be one of {_KINDS}", f"{path}.kind")
        ps = node.get("parents", [])
        if not isinstance(ps, list) or not all(isinstance(q, str) for q in ps):
            raise ValidationError("parents must be a list of names", f"{path}.parents")
        kinds[name] = kind
        parents[name] = ps
    for i, node in enumerate(nodes):
        for j, q in enumerate(parents[node["name"]]):
            if q not in kinds:
                raise ValidationError(f"unknown parent {q!r}", f"$.nodes[{i}].parents[{j}]")
    cycle = _find_cycle(list(kinds), {v: [c for c in kinds if v in parents[c]] for v in kinds})
    if cycle:
        raise GraphError("cyclic parent declarations: " + " -> ".join(cycle))

    cpds = []
    for i, node in enumerate(nodes):
        path = f"$.nodes[{i}]"
        name = node["name"]
        ps = parents[name]
        try:
            if kinds[name] == "discrete":
                states = _need(node, "states", list, path)
                table = _need(node, "table", list, path)
                if table and not isinstance(table[0], list):
                    table = [table]
                rows = [_numbers(r, f"{path}.table[{k}]") for k, r in enumerate(table)]
                bins = node.get("bins", {})
                if not isinstance(bins, dict):
                    raise ValidationError("bins must be an object", f"{path}.bins")
                bins = {q: _numbers(ts, f"{path}.bins.{q}") for q, ts in bins.items()}
                cpds.append(DiscreteCpd(name, tuple(states), tuple(ps), rows, bins))
            else:
                disc = tuple(q for q in ps if kinds[q] == "discrete")
                if "configs" in node:
                    cfgs = _need(node, "configs", list, path)
                    mechs = tuple(_mechanism(c, f"{path}.configs[{k}]") for k, c in enumerate(cfgs))
                    cpds.append(LinearGaussianCpd(name, tuple(ps), discrete_parents=disc, configs=mechs))
                else:
                    m = _mechanism(node, path)
                    cpds.append(LinearGaussianCpd(name, tuple(ps), m.weights, m.intercept, m.noise_std, disc))
        except ValidationError as exc:
            if exc.path and exc.path.startswith("$"):
                raise
            raise ValidationError(str(exc).split(": ", 1)[-1], path) from None
    bin_edges = doc.get("bin_edges", {})
    if not isinstance(bin_edges, dict):
        raise ValidationError("bin_edges must be an object", "$.bin_edges")
    bin_edges = {k: _numbers(v, f"$.bin_edges.{k}") for k, v in bin_edges.items()}
    return ScmModel.from_cpds(cpds, target=target, task=task, name=doc.get("name", "scm"), bin_edges=bin_edges)


def scm_to_dict(model: ScmModel) -> dict:
    nodes = []
    for v in model.nodes:
        cpd = model.cpds[v]
        if isinstance(cpd, DiscreteCpd):
            entry: dict = {"name": v, "kind": "discrete", "parents": list(cpd.parents), "states": list(cpd.states)}
            if cpd.bins:
                entry["bins"] = {q: list(ts) for q, ts in cpd.bins.items()}
            entry["table"] = cpd.table.tolist()
        else:
            entry = {"name": v, "kind": "gaussian", "parents": list(cpd.parents)}
            if cpd.discrete_parents:
                entry["configs"] = [
                    {"intercept": m.intercept, "weights": list(m.weights), "noise_std": m.noise_std} for m in cpd.configs
                ]
            else:
                entry.update(intercept=cpd.intercept, weights=list(cpd.weights), noise_std=cpd.noise_std)
        nodes.append(entry)
    doc: dict = {"name": model.name}
    if model.task is not None:
        doc["task"] = model.task.value
    if model.target is not None:
        doc["target"] = model.target
    doc["nodes"] = nodes
    if model.bin_edges:
        doc["bin_edges"] = {k: list(v) for k, v in model.bin_edges.items()}
    return doc


def dump_scm_json(model: ScmModel) -> str:
    return json.dumps(scm_to_dict(model), indent=2)


def load_scm(path) -> ScmModel:
    """Load an SCM from a ``.bif`` or ``.json`` file."""
    p = Path(path)
    text = p.read_text()
    if p.suffix.lower() == ".bif":
        return parse_bif(text, name=p.stem)
    return parse_scm_json(text)


__all__ = ["Task", "dump_scm_json", "load_scm", "parse_scm_json", "scm_to_dict"]
