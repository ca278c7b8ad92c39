from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from mphk.errors import CapacityError, InvalidInput, PreconditionError
from mphk.instances import (
    cap,
    f1,
    f2,
    fk_nonneg,
    flat2,
    rand_laminar,
    rand_mono_hg,
    rand_pos2,
    rand_rank1_nonneg,
    rand_symmetric,
    sym3tight,
    sym4tight,
)
from mphk.ple import (
    canonical_symmetric_ple,
    closed_form_dual,
    dual_residual,
    envelope_violation,
    is_valid_ple,
    kfrac_cover_value,
    kfrac_subadditive_check,
    laminar_crossing,
    mph_level,
    ple1_matching,
    ple2_flow,
    ple_exists,
    ple_laminar,
    ple_level,
    ple_lp_witness,
    ple_max_lp,
    supermodular_ple,
    symmetric_mph_level,
    symmetric_worstcase_lp,
)
from mphk.setfn import (
    ExplicitValuation,
    Hypergraph,
    SymmetricValuation,
    additive_table,
    combine,
    full_set,
    popcount,
    supermodular_degree,
)
from oracles import cover_value_highs, envelope_feasible, symmetric_level_brute


def explicit(f):
    return ExplicitValuation(f.m, f.table())


# -- envelope LP ---------------------------------------------------------


def test_full_rank_envelope_is_the_value():
    f = rand_mono_hg(5, 3, seed=1)
    S = full_set(5)
    opt, g = ple_max_lp(f, S, 5)
    assert opt == pytest.approx(f.value(S))


def test_envelope_lp_examples():
    f = sym3tight()
    opt, g = ple_max_lp(f, full_set(6), 3)
    assert opt < 11 - 1e-6
    assert not ple_exists(f, full_set(6), 3)
    assert ple_exists(f, full_set(6), 4)
    for S in [1, 0b101, 0b11111]:
        assert ple_max_lp(f1(5), S, 1)[0] == pytest.approx(1.0)


def test_envelope_lp_rejects_bad_input():
    with pytest.raises(InvalidInput):
        ple_max_lp(f1(3), 7, 0)
    with pytest.raises(CapacityError):
        ple_max_lp(f1(13), full_set(13), 2)
    neg = ExplicitValuation(2, np.array([0.0, -1.0, 1.0, 1.0]))
    assert ple_max_lp(neg, 3, 2)[0] == -math.inf


@pytest.mark.parametrize("seed", range(25))
def test_envelope_existence_matches_feasibility_oracle(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 6))
    f = rand_mono_hg(m, int(rng.integers(1, 4)), seed=seed)
    t = f.table()
    for S in rng.integers(1, 1 << m, size=4):
        for k in range(1, popcount(int(S)) + 1):
            assert ple_exists(f, int(S), k) == envelope_feasible(t, int(S), k)


def test_lp_witness_is_valid_when_it_exists():
    f = f2(5)
    w = ple_lp_witness(f, full_set(5), 2)
    assert w.valid and w.total == pytest.approx(10)
    assert envelope_violation(f, w.envelope, full_set(5), 2) <= 1e-7
    w1 = ple_lp_witness(f, full_set(5), 1)
    assert not w1.valid


def test_envelope_violation_flags_each_condition():
    f = f2(3)
    M = full_set(3)
    assert envelope_violation(f, Hypergraph(3, {0b111: 3.0}), M, 2) == math.inf  # rank too high
    assert envelope_violation(f, Hypergraph(3, {0b100: 1.0}), 0b011, 3) == math.inf  # outside S
    assert envelope_violation(f, Hypergraph(3, {0b11: 1.0}), M, 2) == pytest.approx(2.0)  # g(S) != f(S)
    over = Hypergraph(3, {0b1: 1.0, 0b110: 2.0})
    assert envelope_violation(f, over, M, 2) == pytest.approx(1.0)  # g({0}) > f({0})
    assert is_valid_ple(f, Hypergraph(3, {0b11: 1.0, 0b101: 1.0, 0b110: 1.0}), M, 2)


def test_witness_serialization():
    d = ple_lp_witness(f2(3), full_set(3), 2).as_dict()
    assert d["kind"] == "hypergraph" and d["k"] == 2 and d["valid"] is True
    assert d["target_set"] == [0, 1, 2]


# -- hierarchy levels ----------------------------------------------------


def test_mph_level_examples():
    assert mph_level(f1(5)).level == 1
    assert mph_level(f2(5)).level == 2
    assert mph_level(flat2(4)).level == 2
    assert mph_level(flat2(6)).level == 3
    assert mph_level(cap(6)).level == 1


def test_mph_level_non_monotone_and_caps():
    t = np.array([0, 2, 1, 1.5], dtype=float)
    r = mph_level(ExplicitValuation(2, t))
    assert r.level is None and not r.monotone
    with pytest.raises(CapacityError):
        mph_level(f2(11))
    r = mph_level(f2(12), sampled=20)
    assert r.lower_bound_only and r.level == 2
    with pytest.raises(InvalidInput):
        mph_level(ExplicitValuation(2, np.ones(4)))


def test_mph_level_witnesses_are_valid():
    r = mph_level(f2(4), witnesses=True)
    assert r.per_restriction_witnesses
    assert all(w.valid for w in r.per_restriction_witnesses.values())


def test_threads_do_not_change_levels():
    for seed in range(4):
        f = rand_mono_hg(6, 3, seed=seed)
        assert mph_level(f, threads=3).level == mph_level(f).level


def test_ple_level_examples():
    assert ple_level(fk_nonneg(2, 5)).level > 2
    for seed in range(5):
        f = rand_rank1_nonneg(5, seed=seed)
        assert ple_level(f).level == 1
        g = rand_mono_hg(5, 2, seed=seed)
        assert ple_level(g).level == mph_level(g).level
    neg = ExplicitValuation(2, np.array([0.0, -1.0, 1.0, 1.0]))
    assert ple_level(neg).level is None


def test_level_is_smallest_rank_with_all_envelopes():
    for seed in range(6):
        f = rand_mono_hg(5, 3, seed=seed)
        L = mph_level(f).level
        subsets = range(1, 32)
        assert all(ple_exists(f, S, L) for S in subsets)
        # the hierarchy is nested: level L works, so does L + 1
        assert all(ple_exists(f, S, L + 1) for S in subsets)
        if L > 1:
            assert not all(ple_exists(f, S, L - 1) for S in subsets)


# -- k-fractional covers -------------------------------------------------


def test_kfrac_examples():
    assert kfrac_subadditive_check(f1(5), 1)
    assert not kfrac_subadditive_check(f2(5), 1)
    assert kfrac_subadditive_check(f2(5), 2)
    with pytest.raises(InvalidInput):
        kfrac_subadditive_check(f1(3), 0)


@pytest.mark.parametrize("seed", range(10))
def test_cover_value_matches_highs(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 6))
    f = rand_mono_hg(m, 3, seed=seed)
    S = int(rng.integers(1, 1 << m))
    k = int(rng.integers(1, popcount(S) + 1))
    assert kfrac_cover_value(f, S, k) == pytest.approx(cover_value_highs(f.table(), S, k), abs=1e-7)


@pytest.mark.parametrize("seed", range(12))
def test_kfrac_agrees_with_level(seed):
    rng = np.random.default_rng(100 + seed)
    m = int(rng.integers(2, 6))
    f = rand_mono_hg(m, int(rng.integers(1, 4)), seed=seed)
    L = mph_level(f).level
    for k in range(1, m):
        assert kfrac_subadditive_check(f, k) == (L <= k)


# -- constructors --------------------------------------------------------


def test_flow_examples():
    g = Hypergraph(3, {1: 1.0, 2: 2.0, 0b11: 1.5})
    w = ple2_flow(g, 7)
    assert w.valid and w.envelope.edges == g.edges
    h = Hypergraph(3, {1: 1.0, 2: 1.0, 4: 1.0, 0b011: 2.0, 0b111: -1.0})
    w = ple2_flow(h, 7)
    assert w.valid and w.total == pytest.approx(4.0)
    assert w.total == pytest.approx(ple_max_lp(h, 7, 2)[0])


def test_flow_precondition():
    with pytest.raises(PreconditionError):
        ple2_flow(Hypergraph(3, {7: 1.0}), 7)


@pytest.mark.parametrize("seed", range(15))
def test_flow_always_valid_on_monotone_positive_rank_two(seed):
    f = rand_pos2(6, seed=seed)
    for S in (full_set(6), 0b101101, 0b111):
        assert ple2_flow(f, S).valid


def test_matching_examples():
    add = Hypergraph(3, {1: 1.0, 2: 2.0, 4: 3.0})
    w = ple1_matching(add, 7)
    assert w.valid and w.envelope.edges == add.edges
    w = ple1_matching(Hypergraph(2, {1: 1.0, 2: 1.0, 3: -1.0}), 3)
    assert w.valid and w.total == pytest.approx(1.0)
    w = ple1_matching(Hypergraph(3, {1: 2.0, 4: 1.0, 0b011: -1.0, 0b101: -1.0}), 7)
    assert w.valid and w.total == pytest.approx(1.0)


def test_matching_precondition():
    with pytest.raises(PreconditionError):
        ple1_matching(Hypergraph(2, {3: 1.0}), 3)
    with pytest.raises(PreconditionError):
        ple1_matching(Hypergraph(2, {1: 1.0, 3: -2.0}), 3)


def test_laminar_examples():
    g = Hypergraph(3, {1: 1.0, 0b110: 1.0})
    assert ple_laminar(g, 7).envelope.edges == g.edges
    w = ple_laminar(Hypergraph(2, {1: 1.0, 2: 1.0, 3: -1.0}), 3)
    assert w.valid and w.k == 1 and w.total == pytest.approx(1.0)
    nest = Hypergraph(
        4,
        {1: 1.0, 2: 1.0, 4: 1.0, 8: 1.0, 0b0011: -1.0, 0b1111: -1.0, 0b0101: 1.0, 0b1100: 1.0},
    )
    w = ple_laminar(nest, 15)
    assert w.valid and w.k == 2
    assert ple_exists(nest, 15, 2)


def test_laminar_crossing_detected():
    assert laminar_crossing([0b011, 0b110]) == (0b011, 0b110)
    assert laminar_crossing([0b011, 0b111, 0b100]) is None
    with pytest.raises(PreconditionError):
        ple_laminar(Hypergraph(3, {1: 2.0, 2: 2.0, 4: 2.0, 0b011: -1.0, 0b110: -1.0}), 7)


@pytest.mark.parametrize("seed", range(10))
def test_laminar_random(seed):
    f = rand_laminar(6, 2, seed=seed)
    assert ple_laminar(f, full_set(6)).valid


def test_supermodular_examples():
    w = supermodular_ple(f2(3), ordering=(0, 1, 2))
    assert w.valid and w.total == pytest.approx(3.0)
    # every item of f2 depends on the other two: marginals 0, 1, 2 all land on {0, 1, 2}
    assert w.envelope.edges == {0b111: pytest.approx(3.0)}
    w = supermodular_ple(cap(6))
    assert w.valid and w.k == 1
    with pytest.raises(InvalidInput):
        supermodular_ple(f2(3), ordering=(0, 0, 1))


@pytest.mark.parametrize("seed", range(10))
def test_supermodular_rank_is_degree_plus_one(seed):
    f = rand_mono_hg(6, 3, seed=seed)
    w = supermodular_ple(f)
    assert w.valid and w.k <= supermodular_degree(f).degree + 1


def test_constructor_witnesses_pass_exhaustive_check():
    f = rand_pos2(6, seed=3)
    w = ple2_flow(f, full_set(6))
    assert envelope_feasible(f.table(), full_set(6), 2)
    assert is_valid_ple(f, w.envelope, full_set(6), 2)


# -- symmetric functions -------------------------------------------------


def test_canonical_examples():
    f = sym3tight()
    assert f.profile[6] == 11 and f.profile[5] == 5
    w3 = canonical_symmetric_ple(f, 3)
    assert not w3.valid and w3.max_violation == pytest.approx(0.5)
    assert canonical_symmetric_ple(f, 4).valid
    m, R = 7, 3
    g = SymmetricValuation(m, np.arange(m + 1, dtype=float))
    w = canonical_symmetric_ple(g, R)
    assert w.envelope.value(full_set(m) & ~1) == pytest.approx((m - R) / m * g.profile[m])
    assert canonical_symmetric_ple(g, R, explicit=False).envelope.edges == {}
    with pytest.raises(InvalidInput):
        canonical_symmetric_ple(g, 0)


def test_canonical_agrees_with_envelope_lp():
    for seed in range(8):
        f = rand_symmetric(6, 3, seed=seed)
        for R in range(1, 7):
            assert canonical_symmetric_ple(f, R).valid == ple_exists(f, full_set(6), R)


def test_symmetric_level_examples():
    assert symmetric_mph_level(sym3tight()) == 4
    s4 = sym4tight()
    assert s4.profile[12] == 385 and s4.profile[11] == 220
    assert symmetric_mph_level(s4) == 6
    for m in (4, 6, 8, 10):
        assert symmetric_mph_level(flat2(m)) == m // 2
    with pytest.raises(InvalidInput):
        symmetric_mph_level(SymmetricValuation(3, [0, 2, 1, 3]))


@given(st.integers(3, 40), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_symmetric_level_matches_exact_oracle(m, r, seed):
    f = rand_symmetric(m, min(r, m), seed=seed)
    assert symmetric_mph_level(f) == symmetric_level_brute(f.profile)


def test_symmetric_level_matches_full_classification():
    for seed in range(5):
        f = rand_symmetric(6, 3, seed=seed)
        assert symmetric_mph_level(f) == mph_level(f).level


def closed_form_z(m, r):
    if r == 3:
        return Fraction(m - 4, m)
    return Fraction(m - 4, m + 2) if m % 2 == 0 else Fraction((m - 2) * (m - 3), m * (m + 1))


def worstcase_highs(m, r):
    """Same primal written directly in the per-cardinality weights, solved by HiGHS."""
    c = [math.comb(m - 1, i) for i in range(1, r + 1)]
    A_ub = [[-math.comb(t, i - 1) for i in range(1, r + 1)] for t in range(m)]
    A_eq = [[math.comb(m, i) for i in range(1, r + 1)]]
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(m), A_eq=A_eq, b_eq=[m], bounds=(None, None), method="highs")
    return res.fun


@pytest.mark.parametrize("m", [10, 11, 12, 13, 20])
@pytest.mark.parametrize("r", [3, 4])
def test_worstcase_lp_and_closed_form_duals(m, r):
    cert = symmetric_worstcase_lp(m, r)
    assert cert.gap <= 1e-7
    assert cert.objective == pytest.approx(worstcase_highs(m, r), abs=1e-6)
    assert dual_residual(m, r, list(cert.dual_y), cert.dual_z) <= 1e-7
    y, z = closed_form_dual(m, r)
    assert z == closed_form_z(m, r)
    # exact feasibility of the hand-derived dual, hence a lower bound on the optimum
    assert dual_residual(m, r, y, z) == 0
    assert cert.objective >= m * z - 1e-7


def test_worstcase_lp_small_case_below_tight_example():
    # the rank-3 tight example scaled to f(6) = 6 has f(5) = 30/11
    assert symmetric_worstcase_lp(6, 3).objective <= 30 / 11 + 1e-9


def test_worstcase_lp_input_checks():
    with pytest.raises(InvalidInput):
        symmetric_worstcase_lp(2, 1)
    with pytest.raises(InvalidInput):
        symmetric_worstcase_lp(10, 7)
    with pytest.raises(InvalidInput):
        closed_form_dual(10, 5)
    d = symmetric_worstcase_lp(8, 2).as_dict()
    assert set(d) >= {"primal_x", "dual_y", "dual_z", "objective", "gap"}


# -- closure properties --------------------------------------------------


@pytest.mark.parametrize("seed", range(6))
def test_xor_and_or_do_not_raise_the_level(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(3, 6))
    f = rand_mono_hg(m, int(rng.integers(1, 3)), seed=seed)
    g = rand_mono_hg(m, int(rng.integers(1, 3)), seed=seed + 50)
    top = max(mph_level(f).level, mph_level(g).level)
    assert mph_level(combine(explicit(f), explicit(g), "xor")).level <= top
    assert mph_level(combine(explicit(f), explicit(g), "or")).level <= top


def test_additive_is_level_one():
    f = ExplicitValuation(4, additive_table([1.0, 2.0, 0.5, 3.0]))
    assert mph_level(f).level == 1
