"""JSON interchange formats for instances, partitions, set systems and graphs."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import Instance, Partition
from .errors import InvalidArgumentError
from .generators import SetSystem, WeightedGraph
from .hgcrp import HgcrpInstance


def load_json(path) -> object:
    """Read a JSON file; syntax errors carry line and column."""
    text = Path(path).read_text() if str(path) != "-" else __import__("sys").stdin.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def _require(obj: dict, *keys):
    if not isinstance(obj, dict):
        raise InvalidArgumentError("expected a JSON object")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise InvalidArgumentError(f"missing field(s): {', '.join(missing)}")


def instance_to_json(inst: Instance) -> dict:
    out = {
        "type": "heg",
        "skills": list(inst.skills),
        "kappa": inst.kappa,
        "agents": [{"id": a, "expertise": row.tolist()}
                   for a, row in zip(inst.agents, inst.expertise)],
    }
    if inst.level_bound is not None:
        out["level_bound"] = inst.level_bound
    if inst.meta:
        out["meta"] = inst.meta
    return out


def instance_from_json(obj: dict) -> Instance:
    _require(obj, "skills", "kappa", "agents")
    if obj.get("type", "heg") != "heg":
        raise InvalidArgumentError(f"expected an HEG instance, got type {obj.get('type')!r}")
    for a in obj["agents"]:
        _require(a, "id", "expertise")
    expertise = np.array([a["expertise"] for a in obj["agents"]], dtype=np.float64)
    return Instance(
        agents=tuple(a["id"] for a in obj["agents"]),
        skills=tuple(obj["skills"]),
        expertise=expertise.reshape(len(obj["agents"]), len(obj["skills"])),
        kappa=obj["kappa"],
        level_bound=obj.get("level_bound"),
        meta=obj.get("meta") or {},
    )


def hgcrp_to_json(g: HgcrpInstance) -> dict:
    return {"type": "hgcrp", "agents": list(g.agents), "kappa": g.kappa,
            "utilities": g.to_table()}


def hgcrp_from_json(obj: dict) -> HgcrpInstance:
    _require(obj, "agents", "utilities")
    return HgcrpInstance.from_table(obj["agents"], obj.get("kappa"), obj["utilities"])


def game_from_json(obj: dict):
    """Either instance type, chosen by the ``type`` field (default ``heg``)."""
    kind = obj.get("type", "heg") if isinstance(obj, dict) else None
    if kind == "heg":
        return instance_from_json(obj)
    if kind == "hgcrp":
        return hgcrp_from_json(obj)
    raise InvalidArgumentError(f"unknown instance type {kind!r}")


def game_to_json(g) -> dict:
    return instance_to_json(g) if isinstance(g, Instance) else hgcrp_to_json(g)


def partition_to_json(p: Partition, game) -> dict:
    return {"coalitions": p.to_ids(game)}


def partition_from_json(obj: dict, game) -> Partition:
    _require(obj, "coalitions")
    return Partition.from_ids(game, obj["coalitions"])


def set_system_from_json(obj: dict) -> SetSystem:
    _require(obj, "m", "sets", "k")
    return SetSystem(obj["m"], tuple(tuple(s) for s in obj["sets"]), obj["k"])


def graph_from_json(obj: dict) -> WeightedGraph:
    _require(obj, "vertices", "edges", "kappa")
    return WeightedGraph(tuple(obj["vertices"]), tuple(tuple(e) for e in obj["edges"]), obj["kappa"])
