"""JSON encoding of valuations, instances, solutions and witnesses.

Valuation schema::

    {"m": int, "kind": "explicit" | "hypergraph" | "symmetric" | "mph",
     "table": [...] | "edges": [{"set": [ints], "w": float}] |
     "profile": [...] | "clauses": [hypergraph, ...], "k": int}

Instance schema: ``{"m": int, "bidders": [valuation, ...], "metadata": {...}}``.
Item indices are 0-based.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .errors import InvalidInput
from .setfn import (
    ExplicitValuation,
    Hypergraph,
    MphValuation,
    SetFunction,
    SymmetricValuation,
    to_items,
    to_mask,
)
from .welfare import AuctionInstance, FractionalSolution

KINDS = ("explicit", "hypergraph", "symmetric", "mph")


def _edges_json(h: Hypergraph) -> list[dict]:
    return [{"set": to_items(S), "w": float(w)} for S, w in sorted(h.edges.items())]


def valuation_to_json(v: SetFunction) -> dict:
    if isinstance(v, Hypergraph):
        return {"m": v.m, "kind": "hypergraph", "edges": _edges_json(v)}
    if isinstance(v, SymmetricValuation):
        return {"m": v.m, "kind": "symmetric", "profile": [float(x) for x in v.profile]}
    if isinstance(v, MphValuation):
        return {
            "m": v.m,
            "kind": "mph",
            "k": v.k,
            "clauses": [{"m": c.m, "kind": "hypergraph", "edges": _edges_json(c)} for c in v.clauses],
        }
    return {"m": v.m, "kind": "explicit", "table": [float(x) for x in v.table()]}


def _need(d: dict, key: str, kind=None):
    if key not in d:
        raise InvalidInput(f"missing field {key!r}")
    val = d[key]
    if kind is not None and not isinstance(val, kind):
        raise InvalidInput(f"field {key!r} has the wrong type")
    return val


def _number(x) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InvalidInput(f"expected a number, got {x!r}")
    x = float(x)
    if not math.isfinite(x):
        raise InvalidInput("values must be finite")
    return x


def _int(x, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise InvalidInput(f"{what} must be an integer")
    return x


def _parse_edges(raw, m: int) -> dict[int, float]:
    if not isinstance(raw, list):
        raise InvalidInput("edges must be a list")
    edges: dict[int, float] = {}
    for e in raw:
        if not isinstance(e, dict):
            raise InvalidInput("each edge must be an object with 'set' and 'w'")
        items = _need(e, "set", list)
        for j in items:
            if _int(j, "item index") < 0 or j >= m:
                raise InvalidInput(f"item {j} outside 0..{m - 1}")
        S = to_mask(items)
        edges[S] = edges.get(S, 0.0) + _number(_need(e, "w"))
    return edges


def valuation_from_json(d: Any) -> SetFunction:
    if not isinstance(d, dict):
        raise InvalidInput("a valuation must be a JSON object")
    m = _int(_need(d, "m"), "m")
    if m < 1:
        raise InvalidInput("m must be >= 1")
    kind = d.get("kind", "explicit")
    if kind not in KINDS:
        raise InvalidInput(f"unknown valuation kind {kind!r}; use one of {KINDS}")
    if kind == "explicit":
        table = _need(d, "table", list)
        if not table:
            raise InvalidInput("empty value table")
        return ExplicitValuation(m, np.array([_number(x) for x in table]))
    if kind == "hypergraph":
        return Hypergraph(m, _parse_edges(_need(d, "edges"), m))
    if kind == "symmetric":
        prof = _need(d, "profile", list)
        return SymmetricValuation(m, [_number(x) for x in prof])
    clauses = _need(d, "clauses", list)
    if not clauses:
        raise InvalidInput("an MPH valuation needs at least one clause")
    hs = [Hypergraph(m, _parse_edges(_need(c, "edges") if isinstance(c, dict) else c, m)) for c in clauses]
    k = d.get("k", max((h.rank for h in hs), default=1))
    return MphValuation(m, tuple(hs), _int(k, "k"))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


def instance_to_json(inst: AuctionInstance) -> dict:
    return {
        "m": inst.m,
        "bidders": [valuation_to_json(v) for v in inst.bidders],
        "metadata": _jsonable(inst.metadata),
    }


def instance_from_json(d: Any) -> AuctionInstance:
    if not isinstance(d, dict):
        raise InvalidInput("an instance must be a JSON object")
    m = _int(_need(d, "m"), "m")
    bidders = _need(d, "bidders", list)
    if not bidders:
        raise InvalidInput("an instance needs at least one bidder")
    vals = []
    for b in bidders:
        if isinstance(b, dict) and "m" not in b:
            b = {**b, "m": m}
        vals.append(valuation_from_json(b))
    meta = d.get("metadata", {})
    if not isinstance(meta, dict):
        raise InvalidInput("metadata must be an object")
    return AuctionInstance(m, tuple(vals), meta)


def solution_to_json(sol: FractionalSolution) -> dict:
    return sol.as_dict()


def solution_from_json(d: Any) -> FractionalSolution:
    if not isinstance(d, dict):
        raise InvalidInput("a solution must be a JSON object")
    entries = []
    for e in _need(d, "entries", list):
        entries.append((_int(_need(e, "i"), "bidder index"), to_mask(_need(e, "set", list)), _number(_need(e, "x"))))
    return FractionalSolution(tuple(entries), _number(_need(d, "objective")))


def is_instance_json(d: Any) -> bool:
    return isinstance(d, dict) and "bidders" in d


def load_any(d: Any) -> SetFunction | AuctionInstance:
    return instance_from_json(d) if is_instance_json(d) else valuation_from_json(d)


def to_json(obj) -> dict:
    if isinstance(obj, AuctionInstance):
        return instance_to_json(obj)
    if isinstance(obj, SetFunction):
        return valuation_to_json(obj)
    if hasattr(obj, "as_dict"):
        return _jsonable(obj.as_dict())
    raise InvalidInput(f"cannot serialize {type(obj).__name__}")


def read_json(path: str | Path) -> Any:
    try:
        text = sys.stdin.read() if str(path) == "-" else Path(path).read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"malformed JSON in {path}: {exc}") from exc


def dumps(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False)
