from __future__ import annotations

import itertools

import numpy as np
import pytest

from mphk.errors import InvalidInput
from mphk.instances import (
    CATALOG,
    catalog_names,
    fk_nonneg,
    gen,
    monotone_repair,
    rand_mono_hg,
    rand_mph,
    rand_mph_auction,
    rand_symmetric,
    random_laminar_family,
    spectrum,
    verify_expectations,
)
from mphk.ple import laminar_crossing, mph_level
from mphk.setfn import Hypergraph, check_properties, ranks, to_mask
from mphk.welfare import AuctionInstance
from oracles import brute_monotone


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_catalog_expectations_hold(name):
    rep = verify_expectations(name)
    assert rep.ok, rep.as_dict()
    assert rep.as_dict()["name"] == name


def test_catalog_examples():
    s3 = gen("sym3tight")
    assert s3.profile[6] == 11 and s3.profile[5] == 5
    s4 = gen("sym4tight")
    assert s4.profile[12] == 385 and s4.profile[11] == 220
    rep = verify_expectations("f2")
    assert dict((c.key, c.observed) for c in rep.checks)["supermodular_degree"] == 7
    assert verify_expectations("flat2", {"m": 6}).ok
    assert verify_expectations("pp_singleminded", {"k": 2}).ok
    assert verify_expectations("poa_lb", {"k": 2}).ok


def test_gen_errors():
    with pytest.raises(InvalidInput):
        gen("no_such_entry")
    with pytest.raises(InvalidInput):
        gen("f1", {"k": 3})
    with pytest.raises(InvalidInput):
        gen("flat2", {"m": 5})
    assert catalog_names() == sorted(CATALOG)


def test_failing_expectation_is_reported():
    entry = CATALOG["f1"]
    CATALOG["f1"] = type(entry)(entry.name, entry.params, entry.build, lambda p: {"mph_level": 2})
    try:
        rep = verify_expectations("f1")
        assert not rep.ok and rep.failures == ["mph_level"]
    finally:
        CATALOG["f1"] = entry


@pytest.mark.parametrize("name", ["rand_mph", "rand_mono_hg", "rand_pos2", "rand_laminar", "rand_symmetric"])
def test_builds_are_deterministic(name):
    a, b = gen(name, {"seed": 3}), gen(name, {"seed": 3})
    assert np.array_equal(a.table(), b.table())
    c = gen(name, {"seed": 4})
    assert not np.array_equal(a.table(), c.table())


def test_auction_generator_deterministic():
    a, b = rand_mph_auction(seed=9), rand_mph_auction(seed=9)
    assert isinstance(a, AuctionInstance) and a.metadata["k"] == 2
    assert np.array_equal(a.tables(), b.tables())


@pytest.mark.parametrize("seed", range(20))
def test_random_hypergraphs_are_monotone(seed):
    f = rand_mono_hg(5, 3, seed=seed)
    assert brute_monotone(f.table(), 5)
    assert ranks(f)[0] <= 3


def test_monotone_repair_leaves_monotone_input_alone():
    h = Hypergraph(3, {1: 1.0, 0b11: 0.5})
    assert monotone_repair(h) is h
    bad = Hypergraph(2, {1: 1.0, 2: 1.0, 3: -3.0})
    assert check_properties(monotone_repair(bad)).monotone


@pytest.mark.parametrize("seed", range(10))
def test_random_mph_level_bounded_by_clause_rank(seed):
    f = rand_mph(5, 2, 3, seed=seed)
    assert mph_level(f).level <= 2


@pytest.mark.parametrize("seed", range(10))
def test_laminar_family(seed):
    fam = random_laminar_family(np.random.default_rng(seed), 8)
    assert laminar_crossing(fam) is None
    assert all(bin(S).count("1") >= 2 for S in fam)


@pytest.mark.parametrize("seed", range(10))
def test_random_symmetric_rank_and_monotone(seed):
    f = rand_symmetric(12, 4, seed=seed)
    assert f.monotone and f.normalized
    # rank r: fourth differences of the profile reproduce the top weight,
    # fifth differences vanish
    assert np.allclose(np.diff(f.profile, 5), 0.0, atol=1e-9)


@pytest.mark.parametrize("k,m", [(1, 4), (2, 5), (3, 6)])
def test_fk_nonneg_properties(k, m):
    f = fk_nonneg(k, m)
    t = f.table()
    assert np.all(t >= -1e-12)
    for others in itertools.combinations(range(1, m), k):
        assert t[1 | to_mask(others)] == pytest.approx(0.0)


def test_spectrum_default_is_tight_monotone():
    f = spectrum()
    assert check_properties(f).monotone
    assert f.edges[15] == pytest.approx(-4.0)
    with pytest.raises(InvalidInput):
        spectrum(penalty=4.5)
    assert check_properties(spectrum(penalty=0.0)).monotone
