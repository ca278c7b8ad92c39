"""Welfare maximization: exact optimum, configuration LP and LP rounding.

An instance is ``n`` bidder valuations over ``m`` shared items.  The
configuration LP has one variable per (bidder, bundle) pair; its solution
is rounded by letting every bidder draw a tentative bundle and handing out
items in a uniformly random bidder order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import lp
from .errors import CapacityError, InvalidInput, SolverError
from .setfn import (
    Hypergraph,
    SetFunction,
    additive_table,
    demand_query,
    full_set,
    popcount,
    submasks,
    to_hypergraph,
    to_items,
)

MAX_DP_M = 14
MAX_EXPLICIT_COLUMNS = 1_000_000
MAX_ROUNDING_M = 20
REDUCED_COST_TOL = 1e-9
CERTIFY_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class AuctionInstance:
    m: int
    bidders: tuple[SetFunction, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        bidders = tuple(self.bidders)
        if not bidders:
            raise InvalidInput("an instance needs at least one bidder")
        for i, v in enumerate(bidders):
            if v.m != self.m:
                raise InvalidInput(f"bidder {i} has {v.m} items, instance has {self.m}")
        object.__setattr__(self, "bidders", bidders)
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def n(self) -> int:
        return len(self.bidders)

    def tables(self) -> np.ndarray:
        if self.m > MAX_ROUNDING_M:
            raise CapacityError(f"value tables need m <= {MAX_ROUNDING_M}")
        return np.stack([v.table() for v in self.bidders])


@dataclass(frozen=True)
class Allocation:
    """Bundle per bidder (bitmasks); bundles are pairwise disjoint."""

    assignment: tuple[int, ...]

    def __post_init__(self):
        seen = 0
        for i, S in enumerate(self.assignment):
            if S & seen:
                raise InvalidInput(f"bidder {i} shares items with an earlier bidder")
            seen |= S
        object.__setattr__(self, "assignment", tuple(int(S) for S in self.assignment))

    def welfare(self, inst: AuctionInstance) -> float:
        return float(sum(v.value(S) for v, S in zip(inst.bidders, self.assignment)))

    def as_dict(self) -> dict:
        return {"assignment": [to_items(S) for S in self.assignment]}


def single_minded_set(v: SetFunction) -> int | None:
    """Desired bundle of a single-minded valuation, else ``None``."""
    if isinstance(v, Hypergraph):
        h = v
    elif v.m <= MAX_ROUNDING_M:
        try:
            h = to_hypergraph(v)
        except InvalidInput:
            return None
    else:
        return None
    if len(h.edges) == 1:
        (S, w), = h.edges.items()
        if w > 0:
            return S
    return None


# -- exact optimum -------------------------------------------------------


@lru_cache(maxsize=4)
def _split_pairs(m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All (S, T) with T inside S, grouped by S; T ascending within a group."""
    S_idx, T_idx, starts = [], [], []
    pos = 0
    for S in range(1 << m):
        T = submasks(S)
        starts.append(pos)
        pos += T.size
        S_idx.append(np.full(T.size, S, dtype=np.int32))
        T_idx.append(T.astype(np.int32))
    return np.concatenate(S_idx), np.concatenate(T_idx), np.asarray(starts)


def _single_minded_optimum(inst: AuctionInstance, wants: list[int | None]) -> tuple[float, Allocation]:
    """Maximum-weight packing of desired bundles (branch on the lowest bidder)."""
    n = inst.n
    value = [inst.bidders[i].value(D) if D is not None else 0.0 for i, D in enumerate(wants)]
    live = [i for i in range(n) if wants[i] is not None and value[i] > 0]
    conflict = {i: sum(1 << j for j in live if j != i and wants[i] & wants[j]) for i in live}
    memo: dict[int, tuple[float, int]] = {}

    def best(cand: int) -> tuple[float, int]:
        if cand == 0:
            return 0.0, 0
        if cand in memo:
            return memo[cand]
        i = (cand & -cand).bit_length() - 1
        skip = best(cand & ~(1 << i))
        sub = best(cand & ~(1 << i) & ~conflict[i])
        take = (sub[0] + value[i], sub[1] | 1 << i)
        memo[cand] = take if take[0] > skip[0] else skip
        return memo[cand]

    total, chosen = best(sum(1 << i for i in live))
    assignment = tuple(wants[i] if chosen >> i & 1 else 0 for i in range(n))
    return float(total), Allocation(assignment)


def optimal_welfare(inst: AuctionInstance) -> tuple[float, Allocation]:
    """Exact optimum.

    Up to ``MAX_DP_M`` items this is a dynamic program over item subsets,
    O(n 3^m); later bidders are fixed first during reconstruction and each
    takes the smallest bundle that still attains the optimum.  Larger
    instances are accepted only when every bidder is single-minded, where the
    optimum is a maximum-weight packing of the desired bundles.
    """
    m, n = inst.m, inst.n
    if m > MAX_DP_M:
        wants = [single_minded_set(v) for v in inst.bidders]
        zero = [isinstance(v, Hypergraph) and not v.edges for v in inst.bidders]
        if all(D is not None or z for D, z in zip(wants, zero)):
            return _single_minded_optimum(inst, wants)
        raise CapacityError(f"exact welfare supports m <= {MAX_DP_M} (or single-minded bidders), got {m}")
    S_idx, T_idx, starts = _split_pairs(m)
    tables = inst.tables()
    W = np.zeros((n + 1, 1 << m))
    for i in range(n):
        cand = W[i][S_idx ^ T_idx] + tables[i][T_idx]
        W[i + 1] = np.maximum.reduceat(cand, starts)
    assignment = [0] * n
    S = full_set(m)
    for i in range(n - 1, -1, -1):
        T = submasks(S)
        cand = W[i][S ^ T] + tables[i][T]
        pick = int(T[np.flatnonzero(cand >= W[i + 1][S] - 1e-12)[0]])
        assignment[i] = pick
        S ^= pick
    return float(W[n][-1]), Allocation(tuple(assignment))


# -- configuration LP ----------------------------------------------------


@dataclass(frozen=True)
class FractionalSolution:
    """Sparse ``x[i, S]`` with the LP objective and the final duals.

    ``item_prices`` and ``bidder_utilities`` are the dual variables of the
    item-coverage and per-bidder rows.
    """

    entries: tuple[tuple[int, int, float], ...]
    objective: float
    item_prices: np.ndarray | None = None
    bidder_utilities: np.ndarray | None = None
    columns: int = 0
    rounds: int = 0

    def by_bidder(self, n: int) -> list[list[tuple[int, float]]]:
        out: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for i, S, x in self.entries:
            out[i].append((S, x))
        return out

    def is_integral(self, tol: float = 1e-9) -> bool:
        return all(abs(x - 1.0) <= tol for _, _, x in self.entries)

    def as_dict(self) -> dict:
        return {
            "entries": [{"i": i, "set": to_items(S), "x": x} for i, S, x in self.entries],
            "objective": self.objective,
        }


def _minimal_bundles(table: np.ndarray, m: int) -> np.ndarray:
    """Bundles worth strictly more than every proper subset (and than 0).

    Any other bundle can be swapped for a cheaper subset of equal value, so
    dropping these columns leaves the LP optimum unchanged.
    """
    best = table.copy()
    for j in range(m):
        v = best.reshape(-1, 2, 1 << j)
        np.maximum(v[:, 1, :], v[:, 0, :], out=v[:, 1, :])
    proper = np.full(table.size, -np.inf)
    idx = np.arange(table.size)
    for j in range(m):
        has = idx[(idx >> j) & 1 == 1]
        proper[has] = np.maximum(proper[has], best[has ^ (1 << j)])
    keep = table > np.maximum(proper, 0.0) + 1e-12
    keep[0] = False
    return np.flatnonzero(keep)


def _master(inst: AuctionInstance, cols: list[tuple[int, int]], values: list[float]):
    n, m = inst.n, inst.m
    A = np.zeros((n + m, len(cols)))
    for c, (i, S) in enumerate(cols):
        A[i, c] = 1.0
        for j in to_items(S):
            A[n + j, c] = 1.0
    res = lp.simplex(-np.asarray(values), A_ub=A, b_ub=np.ones(n + m))
    duals = -res.duals_ub
    return res, np.maximum(duals[n:], 0.0), np.maximum(duals[:n], 0.0)


def _solution(res, cols, prices, utils, rounds) -> FractionalSolution:
    entries = tuple(
        (i, S, float(min(x, 1.0))) for (i, S), x in zip(cols, res.x) if x > 1e-12
    )
    return FractionalSolution(entries, -res.objective, prices, utils, len(cols), rounds)


def solve_config_lp(inst: AuctionInstance, mode: str = "explicit", max_rounds: int = 10_000) -> FractionalSolution:
    """Optimal fractional allocation of the configuration LP.

    ``explicit`` lists every useful (bidder, bundle) column up front;
    ``column_generation`` starts from singletons and the empty bundle and
    prices new columns with demand queries at the current item duals.
    """
    n, m = inst.n, inst.m
    tables = inst.tables()
    if mode == "explicit":
        if n * (1 << m) > MAX_EXPLICIT_COLUMNS:
            raise CapacityError(f"explicit LP would have n*2^m = {n << m} > {MAX_EXPLICIT_COLUMNS} columns")
        cols, values = [], []
        for i in range(n):
            for S in _minimal_bundles(tables[i], m):
                cols.append((i, int(S)))
                values.append(float(tables[i][S]))
        if not cols:
            return FractionalSolution((), 0.0, np.zeros(m), np.zeros(n), 0, 1)
        res, prices, utils = _master(inst, cols, values)
        return _solution(res, cols, prices, utils, 1)
    if mode not in ("column_generation", "colgen"):
        raise InvalidInput(f"unknown LP mode {mode!r}")
    cols = [(i, 0) for i in range(n)] + [(i, 1 << j) for i in range(n) for j in range(m)]
    present = set(cols)
    values = [float(tables[i][S]) for i, S in cols]
    for rounds in range(1, max_rounds + 1):
        res, prices, utils = _master(inst, cols, values)
        added = 0
        for i, v in enumerate(inst.bidders):
            S = demand_query(v, prices)
            reduced = tables[i][S] - prices[list(to_items(S))].sum() - utils[i]
            if reduced > REDUCED_COST_TOL and (i, S) not in present:
                cols.append((i, S))
                present.add((i, S))
                values.append(float(tables[i][S]))
                added += 1
        if not added:
            return _solution(res, cols, prices, utils, rounds)
    raise SolverError(f"column generation did not converge in {max_rounds} rounds")


@dataclass(frozen=True)
class LpCertificate:
    """Exact rational optimum of the configuration LP, compared with a float solution.

    ``objective`` and ``dual_objective`` are the exact primal and dual values;
    ``float_error`` is the distance from the floating-point objective.
    """

    objective: Fraction
    dual_objective: Fraction
    primal_feasible: bool
    dual_feasible: bool
    float_error: float = 0.0

    @property
    def ok(self) -> bool:
        return (
            self.primal_feasible
            and self.dual_feasible
            and self.objective == self.dual_objective
            and self.float_error <= CERTIFY_TOL * max(1.0, abs(float(self.objective)))
        )


def certify(inst: AuctionInstance, sol: FractionalSolution, max_rounds: int = 100) -> LpCertificate:
    """Re-solve the configuration LP exactly and check it against ``sol``.

    Values are taken as the exact rationals of the stored floats.  The exact
    simplex starts from the columns of ``sol`` plus every column that is
    nearly tight under its duals; any bundle whose exact reduced cost is
    still positive is added and the LP re-solved, so the final duals are
    verified against every (bidder, bundle) pair.
    """
    if sol.item_prices is None or sol.bidder_utilities is None:
        raise InvalidInput("solution carries no duals")
    n, m = inst.n, inst.m
    tables = inst.tables()
    price_table = additive_table(np.asarray(sol.item_prices, dtype=float))
    cols = [(i, S) for i, S, x in sol.entries if x > 0]
    for i in range(n):
        slack = sol.bidder_utilities[i] + price_table - tables[i]
        cols += [(i, int(S)) for S in np.flatnonzero(slack < 1e-6) if S]
    cols = list(dict.fromkeys(cols))
    warm = list(range(len({(i, S) for i, S, x in sol.entries if x > 0})))
    zero = Fraction(0)
    for _ in range(max_rounds):
        A = [[int(i == r) for i, S in cols] for r in range(n)]
        A += [[S >> j & 1 for i, S in cols] for j in range(m)]
        res = lp.exact_simplex_max([Fraction(float(tables[i][S])) for i, S in cols], A, [1] * (n + m), basis=warm)
        u, p = res.duals[:n], res.duals[n:]
        prices = additive_table([float(v) for v in p])
        added = []
        for i in range(n):
            # screen in floats, confirm the near-tight bundles exactly
            slack = float(u[i]) + prices - tables[i]
            for S in np.flatnonzero(slack < 1e-6):
                exact = u[i] + sum((p[j] for j in to_items(int(S))), zero)
                if exact < Fraction(float(tables[i][S])):
                    added.append((i, int(S)))
        if not added:
            break
        warm = [c for c, x in enumerate(res.x) if x > 0]
        cols += added
    else:
        return LpCertificate(res.objective, sum(res.duals, zero), True, False)
    dual_obj = sum(res.duals, zero)
    primal_ok = all(x >= 0 for x in res.x)
    dual_ok = all(v >= 0 for v in res.duals)
    return LpCertificate(res.objective, dual_obj, primal_ok, dual_ok, abs(float(res.objective) - sol.objective))


# -- rounding ------------------------------------------------------------


@dataclass(frozen=True)
class RoundingStats:
    trials: int
    mean_welfare: float
    std_err: float
    ratio_to_lp: float

    def as_dict(self) -> dict:
        return {
            "trials": self.trials,
            "mean_welfare": self.mean_welfare,
            "std_err": self.std_err,
            "ratio_to_lp": self.ratio_to_lp,
        }

    def as_csv(self) -> str:
        return (
            "trials,mean_welfare,std_err,ratio_to_lp\n"
            f"{self.trials},{self.mean_welfare!r},{self.std_err!r},{self.ratio_to_lp!r}\n"
        )


def _bundle_distributions(sol: FractionalSolution, n: int):
    """Per bidder: candidate bundles (empty set padded in) and cumulative weights."""
    out = []
    for i, entries in enumerate(sol.by_bidder(n)):
        bundles = [S for S, _ in entries]
        weights = [max(x, 0.0) for _, x in entries]
        total = sum(weights)
        if total > 1.0:
            weights = [w / total for w in weights]
            total = 1.0
        bundles.append(0)
        weights.append(1.0 - total)
        cum = np.cumsum(weights)
        cum[-1] = 1.0
        out.append((np.asarray(bundles, dtype=np.int64), cum))
    return out


def _round_batch(sol: FractionalSolution, inst: AuctionInstance, trials: int, rng: np.random.Generator):
    """Allocations (n x trials masks) for a batch of independent roundings."""
    n = inst.n
    tentative = np.empty((n, trials), dtype=np.int64)
    for i, (bundles, cum) in enumerate(_bundle_distributions(sol, n)):
        tentative[i] = bundles[np.searchsorted(cum, rng.random(trials), side="right").clip(max=len(cum) - 1)]
    order = np.argsort(rng.random((trials, n)), axis=1)
    taken = np.zeros(trials, dtype=np.int64)
    got = np.zeros((n, trials), dtype=np.int64)
    cols = np.arange(trials)
    for t in range(n):
        b = order[:, t]
        want = tentative[b, cols]
        g = want & ~taken
        got[b, cols] = g
        taken |= g
    return got


def round_permutation(sol: FractionalSolution, inst: AuctionInstance, seed=None) -> Allocation:
    """One random-permutation rounding of ``sol``; reproducible for a fixed seed."""
    if inst.m > MAX_ROUNDING_M:
        raise CapacityError(f"rounding supports m <= {MAX_ROUNDING_M}")
    got = _round_batch(sol, inst, 1, np.random.default_rng(seed))
    return Allocation(tuple(int(S) for S in got[:, 0]))


def estimate_rounded_welfare(
    sol: FractionalSolution,
    inst: AuctionInstance,
    trials: int,
    seed=None,
    batch: int = 50_000,
    threads: int = 1,
) -> RoundingStats:
    """Mean welfare of ``trials`` independent roundings.

    Trials are split into batches with seeds spawned from ``seed``, so the
    result does not depend on ``threads``.
    """
    if trials < 1:
        raise InvalidInput("trials must be >= 1")
    tables = inst.tables()
    sizes = [min(batch, trials - s) for s in range(0, trials, batch)]
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(job):
        size, ss = job
        got = _round_batch(sol, inst, size, np.random.default_rng(ss))
        return tables[np.arange(inst.n)[:, None], got].sum(axis=0)

    jobs = list(zip(sizes, seeds))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    welfare = np.concatenate(parts)
    mean = float(welfare.mean())
    se = float(welfare.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    ratio = mean / sol.objective if sol.objective > 0 else 1.0
    return RoundingStats(trials, mean, se, ratio)


# -- projective planes ---------------------------------------------------


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % d for d in range(2, math.isqrt(q) + 1))


def projective_plane(q: int) -> tuple[int, list[int]]:
    """Points and lines of the plane of order ``q`` (``q`` prime, or 1 for the triangle).

    Returns the number of points and each line as a bitmask of points.
    """
    if q == 1:
        return 3, [0b011, 0b110, 0b101]
    if not is_prime(q):
        raise InvalidInput(f"projective planes are built over prime fields only; order {q} is not prime")
    pts = [(1, a, b) for a in range(q) for b in range(q)] + [(0, 1, b) for b in range(q)] + [(0, 0, 1)]
    lines = []
    for L in pts:
        mask = 0
        for idx, P in enumerate(pts):
            if (L[0] * P[0] + L[1] * P[1] + L[2] * P[2]) % q == 0:
                mask |= 1 << idx
        lines.append(mask)
    return len(pts), lines


def integrality_gap_instance(k: int) -> AuctionInstance:
    """One single-minded unit-value bidder per line of the plane of order ``k - 1``."""
    if k < 2:
        raise InvalidInput("k must be >= 2")
    m, lines = projective_plane(k - 1)
    bidders = tuple(Hypergraph(m, {L: 1.0}) for L in lines)
    gap = k - 1 + 1 / k
    meta = {"k": k, "known_opt": 1.0, "known_lp": gap, "known_gap": gap, "lines": [to_items(L) for L in lines]}
    return AuctionInstance(m, bidders, meta)
