from __future__ import annotations

import json

import numpy as np
import pytest

from mphk import io
from mphk.errors import InvalidInput
from mphk.instances import f1, rand_mph, rand_mph_auction, spectrum, sym3tight
from mphk.welfare import integrality_gap_instance, solve_config_lp


@pytest.mark.parametrize("build", [lambda: f1(4), spectrum, sym3tight, lambda: rand_mph(5, 2, 2, seed=1)])
def test_valuation_roundtrip(build):
    v = build()
    d = json.loads(io.dumps(io.valuation_to_json(v)))
    back = io.valuation_from_json(d)
    assert type(back) is type(v)
    assert np.array_equal(back.table(), v.table())


def test_instance_roundtrip():
    inst = rand_mph_auction(2, 4, 2, seed=0)
    d = json.loads(io.dumps(io.instance_to_json(inst)))
    assert io.is_instance_json(d)
    back = io.load_any(d)
    assert np.array_equal(back.tables(), inst.tables())
    assert back.metadata["k"] == 2


def test_bidders_inherit_instance_size():
    d = {"m": 2, "bidders": [{"kind": "hypergraph", "edges": [{"set": [0, 1], "w": 1}]}]}
    inst = io.instance_from_json(d)
    assert inst.bidders[0].value(3) == 1.0


def test_solution_roundtrip():
    inst = integrality_gap_instance(3)
    sol = solve_config_lp(inst)
    back = io.solution_from_json(json.loads(io.dumps(io.solution_to_json(sol))))
    assert back.objective == pytest.approx(sol.objective)
    assert [(i, S) for i, S, _ in back.entries] == [(i, S) for i, S, _ in sol.entries]


@pytest.mark.parametrize(
    "bad",
    [
        [],
        {"kind": "explicit", "table": [0, 1]},
        {"m": 1, "kind": "explicit", "table": []},
        {"m": 2, "kind": "weird"},
        {"m": 2, "kind": "hypergraph", "edges": [{"set": [2], "w": 1}]},
        {"m": 2, "kind": "hypergraph", "edges": [{"set": [0], "w": "x"}]},
        {"m": 2, "kind": "explicit", "table": [0, 1, 1, float("inf")]},
        {"m": True, "kind": "explicit", "table": [0, 1]},
        {"m": 2, "kind": "mph", "clauses": []},
        {"m": 0, "kind": "explicit", "table": [0]},
    ],
)
def test_malformed_valuations(bad):
    with pytest.raises(InvalidInput):
        io.valuation_from_json(bad)


def test_malformed_instances(tmp_path):
    with pytest.raises(InvalidInput):
        io.instance_from_json({"m": 2, "bidders": []})
    with pytest.raises(InvalidInput):
        io.instance_from_json({"m": 2, "bidders": [{"table": [0, 1, 1, 1]}], "metadata": 3})
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(InvalidInput):
        io.read_json(p)
    with pytest.raises(InvalidInput):
        io.read_json(tmp_path / "missing.json")


def test_to_json_dispatch():
    assert io.to_json(f1(2))["kind"] == "explicit"
    assert "bidders" in io.to_json(integrality_gap_instance(2))
    with pytest.raises(InvalidInput):
        io.to_json(object())
