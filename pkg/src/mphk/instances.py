"""Catalog of named valuations and auction instances, plus seeded random generators.

Every builder is deterministic given its parameters (including ``seed``).
Catalog entries carry the quantities known for them in closed form; the
:func:`verify_expectations` runner recomputes each one through the module
that owns it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from .errors import InvalidInput
from .setfn import (
    CHECK_TOL,
    ExplicitValuation,
    Hypergraph,
    MphValuation,
    SetFunction,
    SymmetricValuation,
    check_properties,
    full_set,
    popcounts,
    ranks,
    supermodular_degree,
    to_hypergraph,
)
from .welfare import AuctionInstance, integrality_gap_instance

# -- named valuations ----------------------------------------------------


def f1(m: int = 5) -> ExplicitValuation:
    """Value 1 on every nonempty set."""
    _check_size(m)
    t = np.ones(1 << m)
    t[0] = 0.0
    return ExplicitValuation(m, t)


def cap(m: int = 4) -> SymmetricValuation:
    """``min(|S|, m/2)``."""
    _check_size(m)
    if m % 2:
        raise InvalidInput("cap needs an even number of items")
    return SymmetricValuation(m, np.minimum(np.arange(m + 1), m // 2).astype(float))


def f2(m: int = 8) -> SymmetricValuation:
    """``C(|S|, 2)``: the complete graph with unit edges and no singleton value."""
    _check_size(m)
    return SymmetricValuation(m, [math.comb(t, 2) for t in range(m + 1)])


def flat2(m: int = 4) -> SymmetricValuation:
    """1 on every nonempty proper set, 2 on the full set."""
    _check_size(m)
    if m % 2 or m < 2:
        raise InvalidInput("flat2 needs an even number of items")
    prof = np.ones(m + 1)
    prof[0], prof[m] = 0.0, 2.0
    return SymmetricValuation(m, prof)


def sym3tight() -> SymmetricValuation:
    """``x - C(x,2) + C(x,3)`` on six items: rank 3, hierarchy level 4."""
    return SymmetricValuation(6, [x - math.comb(x, 2) + math.comb(x, 3) for x in range(7)])


def sym4tight() -> SymmetricValuation:
    """``10 C(x,2) - 8 C(x,3) + 3 C(x,4)`` on twelve items: rank 4, hierarchy level 6."""
    return SymmetricValuation(
        12, [10 * math.comb(x, 2) - 8 * math.comb(x, 3) + 3 * math.comb(x, 4) for x in range(13)]
    )


SPECTRUM_ITEMS = ("A1", "A2", "B1", "B2")


def spectrum(w_pair: float = 4.0, w_single: float = 1.0, penalty: float | None = None) -> Hypergraph:
    """Two bands at two locations.

    Singletons are worth ``w_single``; the same band at both locations adds
    ``w_pair``; the two bands at one location are substitutes (edge
    ``-w_single``); and the two pairs are substitutes through a negative
    edge on all four items.  ``penalty`` defaults to the largest value that
    keeps the function monotone.
    """
    if w_single <= 0 or w_pair < 0:
        raise InvalidInput("weights must satisfy w_single > 0 and w_pair >= 0")
    A1, A2, B1, B2 = 1, 2, 4, 8
    edges = {A1: w_single, A2: w_single, B1: w_single, B2: w_single}
    edges[A1 | A2] = w_pair
    edges[B1 | B2] = w_pair
    edges[A1 | B1] = -w_single
    edges[A2 | B2] = -w_single
    base = Hypergraph(4, edges).table()
    M = 15
    largest = min(base[M] - base[M & ~(1 << j)] for j in range(4))
    if penalty is None:
        penalty = largest
    if penalty < 0 or penalty > largest + CHECK_TOL:
        raise InvalidInput(f"penalty must lie in [0, {largest}] to stay monotone")
    if penalty:
        edges[M] = -float(penalty)
    return Hypergraph(4, edges)


def fk_nonneg(k: int = 2, m: int = 5) -> Hypergraph:
    """Nonnegative rank-2 function with no rank-``k`` envelope.

    Item 0 is special: its singleton is worth ``C(k+1, 2)``, pairs avoiding
    it are worth 1 and pairs containing it ``-k``.  The value drops to 0 on
    item 0 plus any ``k`` others.
    """
    if k < 1 or m < k + 3:
        raise InvalidInput("fk_nonneg needs k >= 1 and m >= k + 3")
    _check_size(m)
    edges: dict[int, float] = {1: float(math.comb(k + 1, 2))}
    for a in range(m):
        for b in range(a + 1, m):
            edges[(1 << a) | (1 << b)] = -float(k) if a == 0 else 1.0
    return Hypergraph(m, edges)


# -- random generators ---------------------------------------------------


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _random_edges(rng: np.random.Generator, m: int, r: int, count: int, min_size: int = 1) -> list[int]:
    out = []
    for _ in range(count):
        size = int(rng.integers(min_size, min(r, m) + 1))
        items = rng.choice(m, size=size, replace=False)
        out.append(int(sum(1 << int(j) for j in items)))
    return out


def monotone_repair(h: Hypergraph) -> Hypergraph:
    """Raise every singleton by the worst negative marginal (if any)."""
    m = h.m
    t = h.table()
    worst = 0.0
    for j in range(m):
        bit = 1 << j
        S = np.arange(1 << m)
        S = S[(S & bit) == 0]
        worst = min(worst, float(np.min(t[S | bit] - t[S])))
    if worst >= 0:
        return h
    edges = dict(h.edges)
    for j in range(m):
        edges[1 << j] = edges.get(1 << j, 0.0) - worst
    return Hypergraph(m, edges)


def rand_mph(m: int = 6, k: int = 2, clauses: int = 3, seed=0, edges: int | None = None) -> MphValuation:
    """Maximum of ``clauses`` random nonnegative hypergraphs of rank <= ``k``."""
    _check_size(m)
    if k < 1 or clauses < 1:
        raise InvalidInput("k and clauses must be >= 1")
    rng = _rng(seed)
    count = edges if edges is not None else max(2, m)
    out = []
    for _ in range(clauses):
        masks = _random_edges(rng, m, k, count)
        w = rng.uniform(0.1, 1.0, size=len(masks))
        e: dict[int, float] = {}
        for S, x in zip(masks, w):
            e[S] = e.get(S, 0.0) + float(x)
        out.append(Hypergraph(m, e))
    return MphValuation(m, tuple(out), k)


def rand_mono_hg(m: int = 5, r: int = 2, seed=0, edges: int | None = None) -> Hypergraph:
    """Random signed rank-``r`` hypergraph, repaired to be monotone."""
    _check_size(m)
    if r < 1:
        raise InvalidInput("rank must be >= 1")
    rng = _rng(seed)
    masks = _random_edges(rng, m, r, edges if edges is not None else 2 * m)
    e: dict[int, float] = {}
    for S in masks:
        e[S] = e.get(S, 0.0) + float(rng.uniform(-1.0, 1.0))
    return monotone_repair(Hypergraph(m, e))


def rand_pos2(m: int = 6, seed=0, neg_rank: int = 3) -> Hypergraph:
    """Monotone function whose positive edges have size <= 2; negatives up to ``neg_rank``."""
    _check_size(m)
    rng = _rng(seed)
    e: dict[int, float] = {}
    for S in _random_edges(rng, m, 2, 2 * m):
        e[S] = e.get(S, 0.0) + float(rng.uniform(0.1, 1.0))
    for S in _random_edges(rng, m, neg_rank, m, min_size=2):
        if S not in e:
            e[S] = -float(rng.uniform(0.1, 1.0))
    return monotone_repair(Hypergraph(m, e))


def rand_rank1_nonneg(m: int = 6, seed=0, neg_rank: int = 3) -> Hypergraph:
    """Monotone function with positive singletons and random negative edges."""
    _check_size(m)
    rng = _rng(seed)
    e = {1 << j: float(rng.uniform(0.1, 1.0)) for j in range(m)}
    for S in _random_edges(rng, m, neg_rank, m, min_size=2):
        e[S] = -float(rng.uniform(0.1, 1.0))
    return monotone_repair(Hypergraph(m, e))


def random_laminar_family(rng: np.random.Generator, m: int, keep: float = 0.7) -> list[int]:
    """Intervals of a random hierarchical split of a random item order (size >= 2)."""
    order = rng.permutation(m)
    fam: list[int] = []

    def split(a: int, b: int) -> None:
        if b - a < 2:
            return
        if rng.random() < keep:
            fam.append(int(sum(1 << int(j) for j in order[a:b])))
        cut = int(rng.integers(a + 1, b))
        split(a, cut)
        split(cut, b)

    split(0, m)
    return fam


def rand_laminar(m: int = 6, r: int = 2, seed=0) -> Hypergraph:
    """Monotone function whose negative edges form a laminar family."""
    _check_size(m)
    rng = _rng(seed)
    e: dict[int, float] = {}
    for S in _random_edges(rng, m, r, 2 * m):
        e[S] = e.get(S, 0.0) + float(rng.uniform(0.1, 1.0))
    for S in random_laminar_family(rng, m):
        e[S] = e.get(S, 0.0) - float(rng.uniform(0.1, 1.0))
    h = Hypergraph(m, e)
    # any subfamily of a laminar family is laminar, so merging with positives is safe
    return monotone_repair(h)


def rand_symmetric(m: int = 10, r: int = 3, seed=0) -> SymmetricValuation:
    """Random monotone symmetric function of rank ``r``.

    Per-cardinality hyperedge weights are uniform in ``[-1, 1]`` with a
    nonzero top weight; the singleton weight is then raised until every
    marginal is nonnegative.
    """
    if not 1 <= r <= m:
        raise InvalidInput("need 1 <= r <= m")
    rng = _rng(seed)
    w = rng.uniform(-1.0, 1.0, size=r)
    if abs(w[-1]) < 0.05:
        w[-1] = 0.05 if w[-1] >= 0 else -0.05
    marg = np.array([sum(math.comb(t, i - 1) * w[i - 1] for i in range(1, r + 1)) for t in range(m)])
    w[0] += max(0.0, -float(marg.min())) + float(rng.uniform(0.0, 0.5))
    prof = [sum(math.comb(x, i) * w[i - 1] for i in range(1, r + 1)) for x in range(m + 1)]
    return SymmetricValuation(m, prof)


def rand_mph_auction(n: int = 3, m: int = 6, k: int = 2, clauses: int = 3, seed=0) -> AuctionInstance:
    """``n`` independent random MPH-``k`` bidders."""
    if n < 1:
        raise InvalidInput("need at least one bidder")
    seeds = np.random.SeedSequence(seed).spawn(n)
    bidders = tuple(rand_mph(m, k, clauses, s) for s in seeds)
    return AuctionInstance(m, bidders, {"k": k, "generator": "rand_mph", "seed": seed})


def _check_size(m: int) -> None:
    if not 1 <= int(m) <= 20:
        raise InvalidInput("catalog valuations support 1 <= m <= 20")


# -- catalog -------------------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    """A named builder with default parameters and its known quantities."""

    name: str
    params: dict
    build: Callable[..., Any]
    expectations: Callable[[dict], dict] = field(default=lambda p: {})
    description: str = ""

    def make(self, **overrides):
        return self.build(**{**self.params, **overrides})

    def expected(self, **overrides) -> dict:
        return self.expectations({**self.params, **overrides})


def _poa_lb(k: int = 3, planes: int | None = None):
    from .auction.lower_bound import poa_lb_instance

    return poa_lb_instance(k, planes)[0]


def _pp(k: int = 3):
    return integrality_gap_instance(k)


CATALOG: dict[str, CatalogEntry] = {
    e.name: e
    for e in [
        CatalogEntry(
            "f1",
            {"m": 5},
            f1,
            lambda p: {"submodular": True, "mph_level": 1, "supermodular_degree": 0, "hypergraph_rank": p["m"]},
            "1 on every nonempty set",
        ),
        CatalogEntry(
            "cap",
            {"m": 4},
            cap,
            lambda p: {"monotone": True, "submodular": True, "mph_level": 1, "hypergraph_rank": p["m"]},
            "min(|S|, m/2)",
        ),
        CatalogEntry(
            "f2",
            {"m": 8},
            f2,
            lambda p: {"supermodular_degree": p["m"] - 1, "symmetric_mph_level": 2},
            "C(|S|, 2)",
        ),
        CatalogEntry(
            "spectrum",
            {"w_pair": 4.0, "w_single": 1.0, "penalty": None},
            spectrum,
            lambda p: {"monotone": True, "mph_level": 2},
            "two bands at two locations",
        ),
        CatalogEntry(
            "sym3tight",
            {},
            sym3tight,
            lambda p: {"symmetric_mph_level": 4, "profile_values": {6: 11.0, 5: 5.0}, "hypergraph_rank": 3},
            "rank 3 symmetric, level 4",
        ),
        CatalogEntry(
            "sym4tight",
            {},
            sym4tight,
            lambda p: {"symmetric_mph_level": 6, "profile_values": {12: 385.0, 11: 220.0}},
            "rank 4 symmetric, level 6",
        ),
        CatalogEntry(
            "fk_nonneg",
            {"k": 2, "m": 5},
            fk_nonneg,
            lambda p: {"nonnegative": True, "ple_level_above": p["k"]},
            "nonnegative rank 2 with no rank-k envelope",
        ),
        CatalogEntry(
            "flat2",
            {"m": 4},
            flat2,
            lambda p: {"symmetric_mph_level": p["m"] // 2, **({"mph_level": 2} if p["m"] == 4 else {})},
            "1 below the full set, 2 on it",
        ),
        CatalogEntry(
            "pp_singleminded",
            {"k": 3},
            _pp,
            lambda p: {
                "optimal_welfare": 1.0,
                "config_lp": float(Fraction(p["k"] - 1) + Fraction(1, p["k"])),
            },
            "one single-minded bidder per projective line",
        ),
        CatalogEntry(
            "poa_lb",
            {"k": 3},
            _poa_lb,
            lambda p: {"optimal_welfare": float(p["k"] * (p["k"] - 1) + 1), "poa": p["k"] - 1 + 1 / p["k"]},
            "projective planes plus auxiliary bidders",
        ),
        CatalogEntry(
            "rand_mph",
            {"m": 6, "k": 2, "clauses": 3, "seed": 0},
            rand_mph,
            lambda p: {"monotone": True, "mph_level_at_most": p["k"]},
            "random MPH-k valuation",
        ),
        CatalogEntry(
            "rand_mono_hg",
            {"m": 5, "r": 2, "seed": 0},
            rand_mono_hg,
            lambda p: {"monotone": True},
            "random monotone hypergraph",
        ),
        CatalogEntry("rand_pos2", {"m": 6, "seed": 0}, rand_pos2, lambda p: {"monotone": True}),
        CatalogEntry("rand_rank1_nonneg", {"m": 6, "seed": 0}, rand_rank1_nonneg, lambda p: {"monotone": True}),
        CatalogEntry("rand_laminar", {"m": 6, "r": 2, "seed": 0}, rand_laminar, lambda p: {"monotone": True}),
        CatalogEntry(
            "rand_symmetric",
            {"m": 10, "r": 3, "seed": 0},
            rand_symmetric,
            lambda p: {"monotone": True, "symmetric_mph_level_at_most": 3 * p["r"] ** 2},
        ),
        CatalogEntry(
            "rand_mph_auction",
            {"n": 3, "m": 6, "k": 2, "clauses": 3, "seed": 0},
            rand_mph_auction,
            lambda p: {},
            "independent random MPH-k bidders",
        ),
    ]
}


def catalog_names() -> list[str]:
    return sorted(CATALOG)


def gen(name: str, params: dict | None = None):
    """Build catalog entry ``name`` with ``params`` overriding its defaults."""
    if name not in CATALOG:
        raise InvalidInput(f"unknown catalog entry {name!r}; choose from {catalog_names()}")
    entry = CATALOG[name]
    params = dict(params or {})
    unknown = set(params) - set(entry.params)
    if unknown:
        raise InvalidInput(f"{name} does not take parameters {sorted(unknown)}")
    try:
        return entry.make(**params)
    except TypeError as exc:
        raise InvalidInput(str(exc)) from exc


# -- expectation runner --------------------------------------------------


@dataclass(frozen=True)
class ExpectationCheck:
    key: str
    expected: Any
    observed: Any
    ok: bool


@dataclass(frozen=True)
class ExpectationReport:
    name: str
    params: dict
    checks: tuple[ExpectationCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list[str]:
        return [c.key for c in self.checks if not c.ok]

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "ok": self.ok,
            "checks": [
                {"key": c.key, "expected": _plain(c.expected), "observed": _plain(c.observed), "ok": c.ok}
                for c in self.checks
            ],
        }


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


def _observe(key: str, obj, expected):
    from .ple import mph_level, ple_level
    from .ple.symmetric import symmetric_mph_level
    from .welfare import optimal_welfare, solve_config_lp

    if key in ("monotone", "submodular", "nonnegative", "normalized", "subadditive", "symmetric"):
        return getattr(check_properties(obj), key) is True, True
    if key == "mph_level":
        return mph_level(obj).level, None
    if key == "mph_level_at_most":
        lvl = mph_level(obj).level
        return lvl, lvl is not None and lvl <= expected
    if key == "ple_level_above":
        lvl = ple_level(obj).level
        return lvl, lvl is not None and lvl > expected
    if key == "symmetric_mph_level":
        return symmetric_mph_level(obj), None
    if key == "symmetric_mph_level_at_most":
        lvl = symmetric_mph_level(obj)
        return lvl, lvl <= expected
    if key == "supermodular_degree":
        return supermodular_degree(obj).degree, None
    if key == "hypergraph_rank":
        return ranks(to_hypergraph(obj))[0], None
    if key == "profile_values":
        got = {t: float(obj.profile[t]) for t in expected}
        return got, all(abs(got[t] - expected[t]) <= 1e-9 for t in expected)
    if key == "optimal_welfare":
        v = optimal_welfare(obj)[0]
        return v, abs(v - expected) <= 1e-6
    if key == "config_lp":
        v = solve_config_lp(obj).objective
        return v, abs(v - expected) <= 1e-6
    if key == "poa":
        v = float(obj.metadata["known_opt"]) / float(obj.metadata["equilibrium_welfare"])
        ok = abs(v - expected) <= 1e-9 and abs(obj.metadata["poa"] - expected) <= 1e-9
        return v, ok
    raise InvalidInput(f"no checker for expectation {key!r}")


def verify_expectations(name: str, params: dict | None = None) -> ExpectationReport:
    """Recompute every known quantity of a catalog entry through its owning module."""
    obj = gen(name, params)
    entry = CATALOG[name]
    full = {**entry.params, **(params or {})}
    checks = []
    for key, expected in entry.expected(**(params or {})).items():
        observed, ok = _observe(key, obj, expected)
        if ok is None:
            ok = observed == expected
        checks.append(ExpectationCheck(key, expected, observed, bool(ok)))
    return ExpectationReport(name, full, tuple(checks))


def is_monotone(f: SetFunction) -> bool:
    return bool(check_properties(f).monotone)


__all__ = [
    "CATALOG",
    "CatalogEntry",
    "ExpectationCheck",
    "ExpectationReport",
    "SPECTRUM_ITEMS",
    "cap",
    "catalog_names",
    "f1",
    "f2",
    "fk_nonneg",
    "flat2",
    "gen",
    "monotone_repair",
    "rand_laminar",
    "rand_mono_hg",
    "rand_mph",
    "rand_mph_auction",
    "rand_pos2",
    "rand_rank1_nonneg",
    "rand_symmetric",
    "random_laminar_family",
    "spectrum",
    "sym3tight",
    "sym4tight",
    "verify_expectations",
]
