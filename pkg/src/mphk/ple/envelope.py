"""Envelope LPs and hierarchy classification.

A positive lower envelope of ``f`` on a target set ``S`` is a nonnegative
hypergraph ``g`` supported on ``S`` with ``g(S) = f(S)`` and ``g(T) <= f(T)``
for every ``T`` inside ``S``.  A monotone ``f`` lies at level ``k`` of the
hierarchy iff every restriction has such an envelope of rank ``k``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse

from .. import lp
from ..errors import CapacityError, InvalidInput, SolverError
from ..setfn import (
    CHECK_TOL,
    ExplicitValuation,
    Hypergraph,
    SetFunction,
    check_properties,
    deposit,
    full_set,
    popcount,
    popcounts,
    submasks,
    to_items,
    zeta,
)

ENVELOPE_TOL = 1e-7
MAX_LP_SET = 12
MAX_LEVEL_M = 10
MAX_SAMPLED_M = 14


def compress(mask: int, S: int) -> int:
    """Inverse of :func:`deposit`: pack the bits of ``mask`` that lie in ``S``."""
    out = 0
    for i, b in enumerate(to_items(S)):
        if mask >> b & 1:
            out |= 1 << i
    return out


def exists_tolerance(target: float) -> float:
    return ENVELOPE_TOL * max(1.0, abs(target))


@dataclass(frozen=True)
class PleWitness:
    envelope: Hypergraph
    target_set: int
    k: int
    valid: bool
    max_violation: float = 0.0

    @property
    def total(self) -> float:
        return self.envelope.total()

    def as_dict(self) -> dict:
        return {
            "m": self.envelope.m,
            "kind": "hypergraph",
            "edges": [{"set": to_items(S), "w": w} for S, w in self.envelope.edges.items()],
            "target_set": to_items(self.target_set),
            "k": self.k,
            "valid": self.valid,
        }


def envelope_violation(f: SetFunction, g: Hypergraph, S: int, k: int) -> float:
    """Largest breach of the envelope conditions (0 means a perfect envelope).

    Covers negative weights, rank above ``k``, support outside ``S``, the
    equality on ``S`` and the no-overestimate inequality on every subset.
    """
    worst = 0.0
    for e, w in g.edges.items():
        if popcount(e) > k or e & ~S:
            return math.inf
        worst = max(worst, -w)
    subs = submasks(S)
    t = popcount(S)
    dense = np.zeros(1 << t)
    for e, w in g.edges.items():
        dense[compress(e, S)] += w
    gv = zeta(dense, t)
    fv = f.table()[subs] if f.m <= 20 else np.array([f.value(int(T)) for T in subs])
    worst = max(worst, abs(gv[-1] - fv[-1]), float(np.max(gv - fv)))
    return worst


def is_valid_ple(f: SetFunction, g: Hypergraph, S: int, k: int, tol: float = ENVELOPE_TOL) -> bool:
    return envelope_violation(f, g, S, k) <= tol


def make_witness(f: SetFunction, g: Hypergraph, S: int, k: int) -> PleWitness:
    viol = envelope_violation(f, g, S, k)
    return PleWitness(g, S, k, viol <= ENVELOPE_TOL, viol)


@lru_cache(maxsize=128)
def _lp_structure(t: int, k: int):
    """Columns (compressed edges of size 1..k) and the containment matrix."""
    sizes = popcounts(t)
    cols = np.flatnonzero((sizes >= 1) & (sizes <= k))
    rows = np.arange(1, 1 << t)
    contain = (cols[None, :] & ~rows[:, None]) == 0
    A = scipy.sparse.csr_matrix(contain.astype(float))
    return cols, A


def ple_max_lp(f: SetFunction, S: int, k: int) -> tuple[float, Hypergraph]:
    """Heaviest rank-``k`` nonnegative hypergraph on ``S`` dominated by ``f``.

    Returns ``(-inf, empty)`` when ``f`` is negative somewhere inside ``S``
    (no nonnegative hypergraph can sit below it).
    """
    if k < 1:
        raise InvalidInput("rank bound k must be >= 1")
    t = popcount(S)
    if t > MAX_LP_SET:
        raise CapacityError(f"envelope LP supports |S| <= {MAX_LP_SET}, got {t}")
    if t == 0:
        return 0.0, Hypergraph(f.m, {})
    subs = submasks(S)
    fv = f.table()[subs] if f.m <= 20 else np.array([f.value(int(T)) for T in subs])
    if np.any(fv[1:] < -CHECK_TOL):
        return -math.inf, Hypergraph(f.m, {})
    k = min(k, t)
    cols, A = _lp_structure(t, k)
    try:
        res = lp.highs(-np.ones(cols.size), A_ub=A, b_ub=np.maximum(fv[1:], 0.0))
    except SolverError as exc:
        raise SolverError(f"envelope LP failed on |S|={t}, k={k}: {exc}") from exc
    w = res.x
    keep = w > 1e-12
    edges = deposit(cols[keep], S)
    g = Hypergraph(f.m, {int(e): float(x) for e, x in zip(edges, w[keep])})
    return float(-res.objective), g


def ple_exists(f: SetFunction, S: int, k: int) -> bool:
    opt, _ = ple_max_lp(f, S, k)
    return opt >= f.value(S) - exists_tolerance(f.value(S))


def ple_lp_witness(f: SetFunction, S: int, k: int) -> PleWitness:
    _, g = ple_max_lp(f, S, k)
    return make_witness(f, g, S, k)


@dataclass(frozen=True)
class HierarchyLevel:
    """Minimal rank at which every checked restriction has an envelope.

    ``level`` is ``None`` when no level applies (non-monotone input to
    :func:`mph_level`, or negative values for :func:`ple_level`).
    ``lower_bound_only`` marks sampled runs that skipped restrictions.
    """

    level: int | None
    monotone: bool
    lower_bound_only: bool = False
    restrictions_checked: int = 0
    per_restriction_witnesses: dict[int, PleWitness] | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "level": self.level,
            "monotone": self.monotone,
            "lower_bound_only": self.lower_bound_only,
            "restrictions_checked": self.restrictions_checked,
        }


def _restriction_order(m: int, sampled: int | None, seed: int) -> tuple[list[int], bool]:
    M = full_set(m)
    if sampled is None:
        if m > MAX_LEVEL_M:
            raise CapacityError(
                f"exhaustive classification supports m <= {MAX_LEVEL_M}; pass sampled=N for m <= {MAX_SAMPLED_M}"
            )
        order = sorted(range(1, M + 1), key=lambda S: (-popcount(S), S))
        return order, False
    if m > MAX_SAMPLED_M:
        raise CapacityError(f"sampled classification supports m <= {MAX_SAMPLED_M}")
    rng = np.random.default_rng(seed)
    picks = {M} | {int(x) for x in rng.integers(1, M + 1, size=sampled)}
    # sets larger than the envelope LP cap can only be probed through M itself
    picks = {S for S in picks if popcount(S) <= MAX_LP_SET}
    order = sorted(picks, key=lambda S: (-popcount(S), S))
    return order, True


def _classify(
    f: SetFunction,
    order: list[int],
    witnesses: bool,
    threads: int,
) -> tuple[int, dict[int, PleWitness] | None]:
    level = 1
    pending = [S for S in order if popcount(S) > 1]
    chunk = max(1, 4 * threads)
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        for start in range(0, len(pending), chunk):
            batch = [S for S in pending[start : start + chunk] if popcount(S) > level]
            L = level
            if pool is not None:
                ok = list(pool.map(lambda S: ple_exists(f, S, L), batch))
            else:
                ok = [ple_exists(f, S, L) for S in batch]
            for S, good in zip(batch, ok):
                if not good and level > L:
                    good = popcount(S) <= level or ple_exists(f, S, level)
                # a rank-|S| envelope (the single edge S) always exists for f >= 0
                while not good and level < popcount(S):
                    level += 1
                    good = ple_exists(f, S, level)
        found = None
        if witnesses:
            found = {S: ple_lp_witness(f, S, level) for S in order}
    finally:
        if pool is not None:
            pool.shutdown()
    return level, found


def _table_checks(f: SetFunction):
    if f.m > MAX_SAMPLED_M:
        raise CapacityError(f"classification supports m <= {MAX_SAMPLED_M}")
    table = f.table()
    if abs(table[0]) > CHECK_TOL:
        raise InvalidInput("classification needs a normalized function (f(empty) = 0)")
    return table


def mph_level(
    f: SetFunction,
    *,
    witnesses: bool = False,
    sampled: int | None = None,
    seed: int = 0,
    threads: int = 1,
) -> HierarchyLevel:
    """Smallest ``k`` with ``f`` in the max-over-positive-hypergraphs class of rank ``k``."""
    _table_checks(f)
    order, partial = _restriction_order(f.m, sampled, seed)
    monotone = check_properties(ExplicitValuation(f.m, f.table())).monotone
    if not monotone:
        return HierarchyLevel(None, False, partial, 0)
    level, found = _classify(f, order, witnesses, threads)
    return HierarchyLevel(level, True, partial, len(order), found)


def ple_level(
    f: SetFunction,
    *,
    witnesses: bool = False,
    sampled: int | None = None,
    seed: int = 0,
    threads: int = 1,
) -> HierarchyLevel:
    """Like :func:`mph_level` without the monotonicity requirement."""
    table = _table_checks(f)
    order, partial = _restriction_order(f.m, sampled, seed)
    monotone = bool(check_properties(ExplicitValuation(f.m, table)).monotone)
    if np.any(table < -CHECK_TOL):
        return HierarchyLevel(None, monotone, partial, 0)
    level, found = _classify(f, order, witnesses, threads)
    return HierarchyLevel(level, monotone, partial, len(order), found)


def kfrac_cover_value(f: SetFunction, S: int, k: int) -> float:
    """Cheapest fractional cover of the size-<=k subsets of ``S`` by subsets of ``S``.

    Minimizes ``sum_T a_T f(T)`` subject to every nonempty ``s`` inside ``S``
    with ``|s| <= k`` being covered with total weight at least one.
    """
    t = popcount(S)
    if t > MAX_LEVEL_M:
        raise CapacityError(f"cover LP supports |S| <= {MAX_LEVEL_M}")
    subs = submasks(S)
    fv = f.table()[subs]
    sizes = popcounts(t)
    T = np.arange(1, 1 << t)
    small = np.flatnonzero((sizes >= 1) & (sizes <= k))
    cover = ((small[:, None] & ~T[None, :]) == 0).astype(float)
    res = lp.simplex(fv[1:], A_ub=-cover, b_ub=-np.ones(small.size))
    return res.objective


def kfrac_subadditive_check(f: SetFunction, k: int) -> bool:
    """True iff ``f(S)`` never exceeds the cheapest size-``k`` fractional cover of ``S``."""
    if k < 1:
        raise InvalidInput("k must be >= 1")
    if f.m > MAX_LEVEL_M:
        raise CapacityError(f"cover check supports m <= {MAX_LEVEL_M}")
    table = f.table()
    for S in sorted(range(1, 1 << f.m), key=lambda S: (-popcount(S), S)):
        # sets of size <= k cover themselves at cost f(S)
        if popcount(S) <= k:
            continue
        if kfrac_cover_value(f, S, k) < table[S] - exists_tolerance(table[S]):
            return False
    return True
