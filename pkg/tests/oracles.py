"""Independent brute-force oracles used to freeze expected values.

Nothing here imports the code under test except plain data containers;
every quantity is recomputed from its definition with itertools, Fractions
or SciPy's HiGHS solver.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog


def subsets(items):
    items = list(items)
    for r in range(len(items) + 1):
        yield from itertools.combinations(items, r)


def mask(items) -> int:
    return sum(1 << j for j in items)


def items_of(S: int) -> list[int]:
    return [j for j in range(S.bit_length()) if S >> j & 1]


def mobius_direct(values: dict[int, float], m: int) -> dict[int, float]:
    """``h(S) = sum_{T <= S} (-1)^{|S - T|} f(T)`` straight from the definition."""
    h = {}
    for S in range(1 << m):
        its = items_of(S)
        h[S] = sum((-1) ** (len(its) - len(T)) * values[mask(T)] for T in subsets(its))
    return h


def hypergraph_value(edges: dict[int, float], S: int) -> float:
    return sum(w for e, w in edges.items() if e & ~S == 0)


def brute_monotone(table, m: int, tol: float = 1e-9) -> bool:
    return all(
        table[S] <= table[T] + tol for T in range(1 << m) for S in range(1 << m) if S & ~T == 0
    )


def brute_submodular(table, m: int, tol: float = 1e-9) -> bool:
    return all(
        table[S] + table[T] >= table[S | T] + table[S & T] - tol for S in range(1 << m) for T in range(1 << m)
    )


def brute_welfare(tables: np.ndarray) -> float:
    """Try every assignment of every item to a bidder or to nobody."""
    n, size = tables.shape
    m = size.bit_length() - 1
    best = 0.0
    for owners in itertools.product(range(n + 1), repeat=m):
        sets = [0] * (n + 1)
        for j, o in enumerate(owners):
            sets[o] |= 1 << j
        best = max(best, sum(tables[i, sets[i]] for i in range(n)))
    return best


def config_lp_highs(tables: np.ndarray) -> float:
    """Configuration LP with every (bidder, nonempty bundle) column, solved by HiGHS."""
    n, size = tables.shape
    m = size.bit_length() - 1
    cols = [(i, S) for i in range(n) for S in range(1, size)]
    A = np.zeros((n + m, len(cols)))
    for c, (i, S) in enumerate(cols):
        A[i, c] = 1
        for j in items_of(S):
            A[n + j, c] = 1
    c = -np.array([tables[i, S] for i, S in cols])
    res = linprog(c, A_ub=A, b_ub=np.ones(n + m), bounds=(0, None), method="highs")
    assert res.status == 0
    return -res.fun


def envelope_feasible(table, S: int, k: int, tol: float = 1e-7) -> bool:
    """Feasibility form: nonnegative rank-k weights with g(S) = f(S) and g <= f below S."""
    its = items_of(S)
    edges = [mask(T) for T in subsets(its) if 1 <= len(T) <= k]
    rows = [mask(T) for T in subsets(its) if T]
    A = np.array([[1.0 if e & ~r == 0 else 0.0 for e in edges] for r in rows])
    b = np.array([table[r] for r in rows])
    res = linprog(
        np.zeros(len(edges)),
        A_ub=A,
        b_ub=b + tol,
        A_eq=np.ones((1, len(edges))),
        b_eq=[table[S]],
        bounds=(0, None),
        method="highs",
    )
    return res.status == 0


def cover_value_highs(table, S: int, k: int) -> float:
    """Cheapest fractional cover of the size-<=k subsets of S (HiGHS)."""
    its = items_of(S)
    Ts = [mask(T) for T in subsets(its) if T]
    small = [mask(T) for T in subsets(its) if 1 <= len(T) <= k]
    A = -np.array([[1.0 if s & ~T == 0 else 0.0 for T in Ts] for s in small])
    res = linprog([table[T] for T in Ts], A_ub=A, b_ub=-np.ones(len(small)), bounds=(0, None), method="highs")
    return res.fun


def auction_outcome(bids, values_fn, rule: str):
    """Loop-based simultaneous auction: ties to the lowest index."""
    n, m = len(bids), len(bids[0])
    sets = [0] * n
    pay = [0.0] * n
    for j in range(m):
        col = [bids[i][j] for i in range(n)]
        w = max(range(n), key=lambda i: (col[i], -i))
        sets[w] |= 1 << j
        if rule == "first":
            pay[w] += col[w]
        else:
            others = [col[i] for i in range(n) if i != w]
            pay[w] += max(others) if others else 0.0
    vals = [values_fn(i, sets[i]) for i in range(n)]
    return sets, pay, [v - p for v, p in zip(vals, pay)]


def symmetric_level_brute(profile, tol: float = 1e-9) -> int:
    """Smallest R with C(c,R)/C(t,R) f(t) <= f(c) for all c <= t (exact fractions)."""
    from math import comb

    m = len(profile) - 1
    P = [Fraction(x).limit_denominator(10**9) for x in profile]
    for R in range(1, m + 1):
        ok = True
        for t in range(R, m + 1):
            for c in range(t + 1):
                if Fraction(comb(c, R), comb(t, R)) * P[t] > P[c] + Fraction(tol):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return R
    return m
