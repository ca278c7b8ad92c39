from __future__ import annotations

import json
import subprocess
import sys

import pytest

from mphk import io
from mphk.cli import main
from mphk.instances import f1, rand_mph_auction, sym3tight
from mphk.setfn import ExplicitValuation, Hypergraph
from mphk.welfare import AuctionInstance


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(io.dumps(obj))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_classify_examples(tmp_path, capsys):
    code, rep = run(capsys, "classify", write(tmp_path, "f1.json", io.to_json(f1(4))))
    assert code == 0 and rep["mph_level"] == 1 and rep["submodular"] is True
    code, rep = run(capsys, "classify", write(tmp_path, "s3.json", io.to_json(sym3tight())))
    assert code == 0 and rep["symmetric_mph_level"] == 4
    assert rep["mph_level"] == 4 and rep["rank"] == 3


def test_classify_rejects_bad_files(tmp_path, capsys):
    code, _ = run(capsys, "classify", write(tmp_path, "e.json", {"m": 2, "kind": "explicit", "table": []}))
    assert code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(capsys, "classify", str(bad))[0] == 2
    inst = write(tmp_path, "i.json", io.to_json(rand_mph_auction(2, 3, 1, seed=0)))
    assert run(capsys, "classify", inst)[0] == 2


def test_classify_non_monotone_reports_ple_level(tmp_path, capsys):
    v = Hypergraph(4, {1: 1.0, 2: 1.0, 3: -2.0, 4: 1.0})
    code, rep = run(capsys, "classify", write(tmp_path, "n.json", io.to_json(v)))
    assert code == 0 and rep["monotone"] is False and "ple_level" in rep


def test_ple_methods(tmp_path, capsys):
    path = write(tmp_path, "h.json", io.to_json(Hypergraph(3, {1: 1.0, 2: 1.0, 4: 1.0, 3: 2.0, 7: -1.0})))
    code, rep = run(capsys, "ple", path, "--method", "flow")
    assert code == 0 and rep["exists"] is True and rep["witness"]["k"] == 2
    code, rep = run(capsys, "ple", path, "--k", "1", "--set", "0,1")
    assert code == 0 and rep["exists"] is False
    code, rep = run(capsys, "ple", path, "--method", "matching")
    assert code == 2 and rep["witness"] == [0, 1]
    assert run(capsys, "ple", path)[0] == 2  # lp needs --k
    s3 = write(tmp_path, "s3.json", io.to_json(sym3tight()))
    code, rep = run(capsys, "ple", s3, "--method", "canonical", "--k", "4")
    assert code == 0 and rep["exists"] is True


def test_welfare_plane_gap(tmp_path, capsys):
    code, spec = run(capsys, "gen", "pp_singleminded", "-p", "k=3")
    path = write(tmp_path, "pp.json", spec)
    code, rep = run(capsys, "welfare", path, "--certify", "--round", "2000")
    assert code == 0
    assert rep["opt"] == 1.0 and rep["gap"] == pytest.approx(7 / 3)
    assert rep["certificate"] == {"ok": True, "objective": "7/3"}
    assert rep["rounding"]["trials"] == 2000
    code, rep = run(capsys, "welfare", path, "--exact")
    assert "lp" not in rep and "rounding" not in rep


def test_welfare_single_bidder(tmp_path, capsys):
    inst = AuctionInstance(2, (ExplicitValuation(2, [0.0, 1.0, 1.0, 3.0]),))
    code, rep = run(capsys, "welfare", write(tmp_path, "one.json", io.to_json(inst)), "--mode", "column_generation")
    assert code == 0 and rep["gap"] == pytest.approx(1.0) and rep["lp"] == pytest.approx(3.0)


def test_welfare_capacity_exit(tmp_path, capsys):
    big = {"m": 21, "bidders": [{"kind": "hypergraph", "edges": [{"set": [0, 1], "w": 1.0}, {"set": [2], "w": 1.0}]}]}
    assert run(capsys, "welfare", write(tmp_path, "big.json", big))[0] == 3


def test_auction_learning_and_trace(tmp_path, capsys):
    path = write(tmp_path, "a.json", io.to_json(rand_mph_auction(2, 3, 1, seed=0)))
    traces = []
    for name in ("t1.csv", "t2.csv"):
        trace = tmp_path / name
        code, rep = run(capsys, "auction", path, "--learn", "300", "--trace", str(trace), "--trace-every", "50")
        assert code == 0 and rep["iterations"] == 300
        traces.append(trace.read_bytes())
    assert traces[0] == traces[1]
    code, rep = run(capsys, "auction", path, "--learn", "300", "--smoothness", "price_scale", "--smoothness-trials", "500")
    assert code == 0 and "smoothness" in rep
    assert run(capsys, "auction", path, "--rule", "third")[0] == 2


def test_auction_verify_ne(tmp_path, capsys):
    code, spec = run(capsys, "gen", "poa_lb", "-p", "k=2")
    path = write(tmp_path, "poa.json", spec)
    code, rep = run(capsys, "auction", path, "--verify-ne", "--samples", "20000")
    assert code == 0 and rep["ok"] is True and rep["poa"] == pytest.approx(1.5)
    other = write(tmp_path, "o.json", io.to_json(rand_mph_auction(2, 3, 1, seed=0)))
    assert run(capsys, "auction", other, "--verify-ne")[0] == 2


def test_gen_and_verify(tmp_path, capsys):
    code, listing = run(capsys, "gen", "--list")
    assert code == 0 and "sym3tight" in listing
    code, a = run(capsys, "gen", "rand_mph", "--seed", "4")
    code, b = run(capsys, "gen", "rand_mph", "-p", "seed=4")
    assert a == b
    assert run(capsys, "gen", "nope")[0] == 2
    code, reps = run(capsys, "verify", "sym3tight", "f2")
    assert code == 0 and all(r["ok"] for r in reps)
    out = tmp_path / "v.json"
    assert main(["verify", "flat2", "-p", "m=6", "-o", str(out)]) == 0
    assert json.loads(out.read_text())[0]["ok"]


def test_console_entry_point(tmp_path):
    path = write(tmp_path, "f1.json", io.to_json(f1(3)))
    res = subprocess.run([sys.executable, "-m", "mphk.cli", "classify", path], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["mph_level"] == 1
