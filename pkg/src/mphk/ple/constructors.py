"""Combinatorial envelope constructions for structured function classes.

Each constructor returns a :class:`PleWitness` whose ``valid`` flag is
computed by exhaustive checking, never assumed.
"""

from __future__ import annotations

import networkx as nx

from ..errors import InvalidInput, PreconditionError
from ..setfn import (
    CHECK_TOL,
    Hypergraph,
    SetFunction,
    check_set,
    popcount,
    supermodular_degree,
    to_hypergraph,
    to_items,
)
from .envelope import PleWitness, make_witness

_SOURCE, _SINK = "source", "sink"


def _edges_within(h: Hypergraph, S: int) -> dict[int, float]:
    return {e: w for e, w in h.edges.items() if e & ~S == 0}


def _charge_flow(negatives: dict[int, float], positives: dict[int, float]):
    """Route each negative edge's |weight| into positive edges it contains.

    Returns ``(flow value, charge per positive edge, source side of a min cut)``.
    """
    G = nx.DiGraph()
    G.add_node(_SOURCE)
    G.add_node(_SINK)
    for e, w in negatives.items():
        G.add_edge(_SOURCE, ("neg", e), capacity=-w)
        for p in positives:
            if p & ~e == 0:
                G.add_edge(("neg", e), ("pos", p))  # no capacity attribute: unbounded
    for p, w in positives.items():
        G.add_edge(("pos", p), _SINK, capacity=w)
    value, flow = nx.maximum_flow(G, _SOURCE, _SINK, flow_func=nx.algorithms.flow.edmonds_karp)
    charge = {p: flow[("pos", p)][_SINK] for p in positives}
    cut_value, (source_side, _) = nx.minimum_cut(G, _SOURCE, _SINK, flow_func=nx.algorithms.flow.edmonds_karp)
    return value, charge, source_side


def ple2_flow(f: SetFunction, S: int) -> PleWitness:
    """Rank-2 envelope for a monotone function with positive rank at most 2.

    Items of ``S`` are added in increasing index order; at each step the
    newly created negative edges are charged, through a max flow, to the newly
    created positive edges they contain, and the positive edges keep whatever
    weight is left.
    """
    S = check_set(S, f.m)
    h = to_hypergraph(f)
    inside = _edges_within(h, S)
    big = [e for e, w in inside.items() if w > 0 and popcount(e) > 2]
    if big:
        raise PreconditionError("positive rank exceeds 2 on the target set", witness=big[0])
    env: dict[int, float] = {}
    prefix = 0
    for j in to_items(S):
        prefix |= 1 << j
        bit = 1 << j
        pos = {e: w for e, w in inside.items() if w > 0 and e & bit and e & ~prefix == 0}
        neg = {e: w for e, w in inside.items() if w < 0 and e & bit and e & ~prefix == 0}
        need = -sum(neg.values())
        if neg:
            value, charge, _ = _charge_flow(neg, pos)
            if value < need - CHECK_TOL * max(1.0, need):
                raise PreconditionError(
                    "negative edges cannot be charged: input is not monotone", witness=prefix
                )
        else:
            charge = {p: 0.0 for p in pos}
        for p, w in pos.items():
            rest = w - charge[p]
            if rest > 1e-12:
                env[p] = rest
    return make_witness(f, Hypergraph(f.m, env), S, 2)


def ple1_matching(f: SetFunction, S: int) -> PleWitness:
    """Rank-1 envelope for a nonnegative function whose positive edges are singletons."""
    S = check_set(S, f.m)
    h = to_hypergraph(f)
    inside = _edges_within(h, S)
    big = [e for e, w in inside.items() if w > 0 and popcount(e) > 1]
    if big:
        raise PreconditionError("positive rank exceeds 1 on the target set", witness=big[0])
    pos = {e: w for e, w in inside.items() if w > 0}
    neg = {e: w for e, w in inside.items() if w < 0}
    charge = {p: 0.0 for p in pos}
    if neg:
        need = -sum(neg.values())
        value, charge, source_side = _charge_flow(neg, pos)
        if value < need - CHECK_TOL * max(1.0, need):
            bad = 0
            for node in source_side:
                if isinstance(node, tuple) and node[0] == "neg":
                    bad |= node[1]
            raise PreconditionError("input is negative on some set", witness=bad)
    env = {p: w - charge[p] for p, w in pos.items() if w - charge[p] > 1e-12}
    return make_witness(f, Hypergraph(f.m, env), S, 1)


def laminar_crossing(edges) -> tuple[int, int] | None:
    """First pair of sets that overlap without nesting, if any."""
    edges = sorted(edges)
    for a_i, a in enumerate(edges):
        for b in edges[a_i + 1 :]:
            if a & b and a & ~b and b & ~a:
                return a, b
    return None


def ple_laminar(f: SetFunction, S: int) -> PleWitness:
    """Envelope for nonnegative functions whose negative edges form a laminar family.

    Negative edges are removed smallest first; each one's weight is taken from
    the positive edges inside it in proportion to the weight they still have.
    The result has rank equal to the positive rank on ``S``.
    """
    S = check_set(S, f.m)
    h = to_hypergraph(f)
    inside = _edges_within(h, S)
    neg = {e: w for e, w in inside.items() if w < 0}
    cross = laminar_crossing(neg)
    if cross is not None:
        raise PreconditionError("negative hyperedges are not laminar", witness=cross)
    remaining = {e: w for e, w in inside.items() if w > 0}
    rank = max((popcount(e) for e in remaining), default=1)
    for e in sorted(neg, key=lambda e: (popcount(e), e)):
        need = -neg[e]
        eligible = [p for p, w in remaining.items() if p & ~e == 0 and w > 0]
        total = sum(remaining[p] for p in eligible)
        if total < need - CHECK_TOL * max(1.0, need):
            raise PreconditionError("input is negative on a negative hyperedge", witness=e)
        scale = min(1.0, need / total) if total > 0 else 0.0
        for p in eligible:
            remaining[p] -= remaining[p] * scale
    env = {p: w for p, w in remaining.items() if w > 1e-12}
    return make_witness(f, Hypergraph(f.m, env), S, rank)


def supermodular_ple(f: SetFunction, ordering=None, S: int | None = None) -> PleWitness:
    """Envelope from the supermodular dependency structure.

    Item ``j`` contributes its marginal over the earlier items of ``S`` (in
    ``ordering``) to the edge formed by ``j`` and its dependent items in
    ``S``; the rank is at most the supermodular degree plus one.
    """
    m = f.m
    S = (1 << m) - 1 if S is None else check_set(S, m)
    order = list(range(m)) if ordering is None else [int(j) for j in ordering]
    if sorted(order) != list(range(m)):
        raise InvalidInput("ordering must be a permutation of the items")
    _, deps = supermodular_degree(f)
    env: dict[int, float] = {}
    before = 0
    rank = 1
    for j in order:
        if not S >> j & 1:
            continue
        edge = ((1 << j) | deps[j]) & S
        w = f.value(before | 1 << j) - f.value(before)
        before |= 1 << j
        rank = max(rank, popcount(edge))
        env[edge] = env.get(edge, 0.0) + w
    env = {e: w for e, w in env.items() if abs(w) > 1e-12}
    return make_witness(f, Hypergraph(m, env), S, rank)
