"""Set functions over a ground set of ``m`` items.

Item sets are plain ``int`` bitmasks: bit ``j`` set means item ``j`` is in
the set.  Four concrete valuation forms share the :class:`SetFunction`
interface (``value`` for one set, ``table`` for all ``2**m`` sets):

* :class:`ExplicitValuation` -- a full value table.
* :class:`Hypergraph` -- signed hyperedge weights; ``v(S)`` sums the edges
  contained in ``S``.
* :class:`SymmetricValuation` -- a value per cardinality.
* :class:`MphValuation` -- pointwise max over nonnegative hypergraphs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import CapacityError, InvalidInput

ItemSet = int

MAX_EVAL_M = 24
MAX_TABLE_M = 20
MAX_SUBADDITIVE_M = 14
MAX_SUPERMODULAR_M = 16
EDGE_TOL = 1e-12
CHECK_TOL = 1e-9


# -- bit helpers ---------------------------------------------------------


def to_mask(items: Iterable[int]) -> ItemSet:
    mask = 0
    for j in items:
        j = int(j)
        if j < 0:
            raise InvalidInput(f"negative item index {j}")
        mask |= 1 << j
    return mask


def to_items(mask: ItemSet) -> list[int]:
    out = []
    j = 0
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return out


def popcount(mask: ItemSet) -> int:
    return bin(mask).count("1")


def full_set(m: int) -> ItemSet:
    return (1 << m) - 1


def check_set(S: ItemSet, m: int) -> ItemSet:
    S = int(S)
    if S < 0 or S >> m:
        raise InvalidInput(f"item set {to_items(S) if S >= 0 else S} has bits outside ground set of size {m}")
    return S


@lru_cache(maxsize=32)
def popcounts(m: int) -> np.ndarray:
    """Cardinality of every mask in ``range(2**m)`` (read-only)."""
    out = np.bitwise_count(np.arange(1 << m, dtype=np.uint64)).astype(np.int64)
    out.flags.writeable = False
    return out


def deposit(r: np.ndarray, U: ItemSet) -> np.ndarray:
    """Scatter the low bits of each ``r`` onto the set bits of ``U``."""
    r = np.asarray(r, dtype=np.int64)
    out = np.zeros_like(r)
    for i, b in enumerate(to_items(U)):
        out |= ((r >> i) & 1) << b
    return out


def submasks(U: ItemSet) -> np.ndarray:
    """All subsets of ``U`` in increasing order of the compressed index."""
    return deposit(np.arange(1 << popcount(U), dtype=np.int64), U)


def zeta(a: np.ndarray, m: int) -> np.ndarray:
    """Subset-sum transform: ``out[S] = sum_{T <= S} a[T]``."""
    out = np.array(a, dtype=float, copy=True)
    for i in range(m):
        v = out.reshape(-1, 2, 1 << i)
        v[:, 1, :] += v[:, 0, :]
    return out


def mobius(a: np.ndarray, m: int) -> np.ndarray:
    """Inverse of :func:`zeta`."""
    out = np.array(a, dtype=float, copy=True)
    for i in range(m):
        v = out.reshape(-1, 2, 1 << i)
        v[:, 1, :] -= v[:, 0, :]
    return out


def _check_m(m: int, cap: int, what: str) -> None:
    if m < 0:
        raise InvalidInput("item count must be nonnegative")
    if m > cap:
        raise CapacityError(f"{what} supports m <= {cap}, got m={m}")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.flags.writeable = False
    return a


# -- valuation forms -----------------------------------------------------


class SetFunction:
    """Common interface. Subclasses set ``m`` and implement ``value``."""

    m: int

    def value(self, S: ItemSet) -> float:
        raise NotImplementedError

    def table(self) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, S: ItemSet) -> float:
        return self.value(S)


@dataclass(frozen=True, eq=False)
class ExplicitValuation(SetFunction):
    m: int
    values: np.ndarray
    labels: tuple[int, ...] | None = None

    def __post_init__(self):
        _check_m(self.m, MAX_TABLE_M, "explicit tables")
        vals = np.array(self.values, dtype=float)
        if vals.shape != (1 << self.m,):
            raise InvalidInput(f"table length must be 2**m = {1 << self.m}, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise InvalidInput("table contains non-finite values")
        object.__setattr__(self, "values", _readonly(vals))
        if self.labels is not None and len(self.labels) != self.m:
            raise InvalidInput("labels must name every item")

    @property
    def normalized(self) -> bool:
        return abs(self.values[0]) <= CHECK_TOL

    def value(self, S: ItemSet) -> float:
        return float(self.values[S])

    def table(self) -> np.ndarray:
        return self.values


@dataclass(frozen=True, eq=False)
class Hypergraph(SetFunction):
    """Signed hyperedge weights; the empty set never carries weight."""

    m: int
    edges: Mapping[ItemSet, float] = field(default_factory=dict)

    def __post_init__(self):
        _check_m(self.m, MAX_EVAL_M, "hypergraphs")
        clean = {}
        for S, w in dict(self.edges).items():
            S = check_set(S, self.m)
            w = float(w)
            if not math.isfinite(w):
                raise InvalidInput("edge weight is not finite")
            if w == 0.0:
                continue
            if S == 0:
                raise InvalidInput("hyperedge on the empty set")
            clean[S] = clean.get(S, 0.0) + w
        object.__setattr__(self, "edges", dict(sorted(clean.items())))
        masks = np.fromiter(self.edges.keys(), dtype=np.int64, count=len(self.edges))
        weights = np.fromiter(self.edges.values(), dtype=float, count=len(self.edges))
        object.__setattr__(self, "_masks", masks)
        object.__setattr__(self, "_weights", weights)

    @property
    def rank(self) -> int:
        return max((popcount(S) for S in self.edges), default=0)

    @property
    def positive_rank(self) -> int:
        return max((popcount(S) for S, w in self.edges.items() if w > 0), default=0)

    @property
    def negative_rank(self) -> int:
        return max((popcount(S) for S, w in self.edges.items() if w < 0), default=0)

    @property
    def is_positive(self) -> bool:
        return all(w >= 0 for w in self.edges.values())

    def total(self) -> float:
        return float(self._weights.sum())

    def value(self, S: ItemSet) -> float:
        if not self.edges:
            return 0.0
        inside = (self._masks & ~np.int64(S)) == 0
        return float(self._weights[inside].sum())

    def table(self) -> np.ndarray:
        cached = self.__dict__.get("_table")
        if cached is None:
            _check_m(self.m, MAX_EVAL_M, "hypergraph expansion")
            dense = np.zeros(1 << self.m)
            dense[self._masks] = self._weights
            cached = _readonly(zeta(dense, self.m))
            object.__setattr__(self, "_table", cached)
        return cached

    def restricted_to(self, S: ItemSet) -> Hypergraph:
        """Edges contained in ``S`` (same ground set)."""
        return Hypergraph(self.m, {e: w for e, w in self.edges.items() if e & ~S == 0})


@dataclass(frozen=True, eq=False)
class SymmetricValuation(SetFunction):
    m: int
    profile: np.ndarray

    def __post_init__(self):
        prof = np.array(self.profile, dtype=float)
        if prof.shape != (self.m + 1,):
            raise InvalidInput(f"profile needs m+1 = {self.m + 1} entries, got {prof.size}")
        if not np.all(np.isfinite(prof)):
            raise InvalidInput("profile contains non-finite values")
        object.__setattr__(self, "profile", _readonly(prof))

    @property
    def normalized(self) -> bool:
        return abs(self.profile[0]) <= CHECK_TOL

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.profile) >= -CHECK_TOL))

    def value(self, S: ItemSet) -> float:
        return float(self.profile[popcount(S)])

    def table(self) -> np.ndarray:
        cached = self.__dict__.get("_table")
        if cached is None:
            _check_m(self.m, MAX_TABLE_M, "symmetric table expansion")
            cached = _readonly(self.profile[popcounts(self.m)])
            object.__setattr__(self, "_table", cached)
        return cached

    def hypergraph_profile(self) -> np.ndarray:
        """Per-cardinality hyperedge weight ``h(t)`` (binomial inversion)."""
        m = self.m
        h = np.zeros(m + 1)
        for t in range(1, m + 1):
            h[t] = sum((-1) ** (t - s) * math.comb(t, s) * self.profile[s] for s in range(t + 1))
        return h


@dataclass(frozen=True, eq=False)
class MphValuation(SetFunction):
    """Maximum over positive hypergraphs, each of rank at most ``k``."""

    m: int
    clauses: tuple[Hypergraph, ...]
    k: int

    def __post_init__(self):
        clauses = tuple(self.clauses)
        if not clauses:
            raise InvalidInput("an MPH representation needs at least one clause")
        for c in clauses:
            if c.m != self.m:
                raise InvalidInput("clause ground set differs from the representation")
            if not c.is_positive:
                raise InvalidInput("MPH clauses must have nonnegative weights")
            if c.rank > self.k:
                raise InvalidInput(f"clause of rank {c.rank} exceeds declared k={self.k}")
        object.__setattr__(self, "clauses", clauses)

    def value(self, S: ItemSet) -> float:
        return max(c.value(S) for c in self.clauses)

    def table(self) -> np.ndarray:
        cached = self.__dict__.get("_table")
        if cached is None:
            cached = _readonly(np.max([c.table() for c in self.clauses], axis=0))
            object.__setattr__(self, "_table", cached)
        return cached


def as_explicit(v: SetFunction) -> ExplicitValuation:
    if isinstance(v, ExplicitValuation):
        return v
    return ExplicitValuation(v.m, v.table())


# -- operations ----------------------------------------------------------


def evaluate(v: SetFunction, S: ItemSet) -> float:
    return v.value(check_set(S, v.m))


def to_hypergraph(f: SetFunction) -> Hypergraph:
    """Unique hypergraph representation by Mobius inversion."""
    if isinstance(f, Hypergraph):
        return f
    table = f.table()
    if abs(table[0]) > CHECK_TOL:
        raise InvalidInput("hypergraph representation needs a normalized function (f(empty) = 0)")
    h = mobius(table, f.m)
    keep = np.flatnonzero(np.abs(h) >= EDGE_TOL)
    keep = keep[keep != 0]
    return Hypergraph(f.m, {int(S): float(h[S]) for S in keep})


def from_hypergraph(h: Hypergraph) -> ExplicitValuation:
    _check_m(h.m, MAX_TABLE_M, "from_hypergraph")
    return ExplicitValuation(h.m, h.table())


def ranks(h: Hypergraph) -> tuple[int, int, int]:
    return h.rank, h.positive_rank, h.negative_rank


@dataclass(frozen=True)
class PropertyReport:
    """Exhaustively checked structural properties.

    ``witnesses`` maps each failed property to a violating pair of sets;
    ``subadditive`` is ``None`` when the ground set is too large to check.
    """

    normalized: bool
    monotone: bool
    nonnegative: bool
    submodular: bool
    subadditive: bool | None
    symmetric: bool
    witnesses: dict[str, tuple[ItemSet, ItemSet]] = field(default_factory=dict)

    @property
    def witness(self) -> tuple[ItemSet, ItemSet] | None:
        return next(iter(self.witnesses.values()), None)

    def as_dict(self) -> dict:
        return {
            "normalized": self.normalized,
            "monotone": self.monotone,
            "nonnegative": self.nonnegative,
            "submodular": self.submodular,
            "subadditive": self.subadditive,
            "symmetric": self.symmetric,
            "witnesses": {k: [to_items(a), to_items(b)] for k, (a, b) in self.witnesses.items()},
        }


def _first_by_size(masks: np.ndarray, m: int) -> int:
    """Pick the violation whose set is smallest (then lowest mask)."""
    sizes = popcounts(m)[masks]
    order = np.lexsort((masks, sizes))
    return int(masks[order[0]])


def _monotone_witness(f: np.ndarray, m: int, tol: float):
    best = None
    for j in range(m):
        bit = 1 << j
        S = np.flatnonzero((np.arange(1 << m) & bit) == 0)
        bad = S[f[S] > f[S | bit] + tol]
        if bad.size:
            s = _first_by_size(bad, m)
            cand = (popcount(s), s, s | bit)
            if best is None or cand < best:
                best = cand
    return None if best is None else (best[1], best[2])


def _submodular_witness(f: np.ndarray, m: int, tol: float):
    """Smallest (S, S+j) such that adding j raises some item's marginal."""
    idx = np.arange(1 << m)
    best = None
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            bi, bj = 1 << i, 1 << j
            S = idx[(idx & (bi | bj)) == 0]
            gain = (f[S | bi | bj] - f[S | bj]) - (f[S | bi] - f[S])
            bad = S[gain > tol]
            if bad.size:
                s = _first_by_size(bad, m)
                cand = (popcount(s), s, s | bj)
                if best is None or cand < best:
                    best = cand
    return None if best is None else (best[1], best[2])


def _subadditive_witness(f: np.ndarray, m: int, monotone: bool, tol: float):
    n = 1 << m
    if monotone:
        # for monotone f, disjoint pairs suffice
        for U in sorted(range(n), key=lambda u: (popcount(u), u)):
            T = submasks(U)
            bad = T[f[T] + f[U ^ T] < f[U] - tol]
            if bad.size:
                t = int(bad[0])
                return (t, U ^ t)
        return None
    idx = np.arange(n)
    for S in range(n):
        bad = idx[f[S | idx] > f[S] + f[idx] + tol]
        if bad.size:
            return (S, int(bad[0]))
    return None


def check_properties(f: SetFunction, tol: float = CHECK_TOL) -> PropertyReport:
    m = f.m
    _check_m(m, MAX_TABLE_M, "check_properties")
    t = f.table()
    witnesses: dict[str, tuple[int, int]] = {}

    normalized = abs(t[0]) <= tol
    if not normalized:
        witnesses["normalized"] = (0, 0)
    neg = np.flatnonzero(t < -tol)
    nonnegative = neg.size == 0
    if not nonnegative:
        s = _first_by_size(neg, m)
        witnesses["nonnegative"] = (s, s)
    w = _monotone_witness(t, m, tol)
    monotone = w is None
    if w is not None:
        witnesses["monotone"] = w
    w = _submodular_witness(t, m, tol)
    submodular = w is None
    if w is not None:
        witnesses["submodular"] = w
    subadditive = None
    if m <= MAX_SUBADDITIVE_M and (monotone or m <= 12):
        w = _subadditive_witness(t, m, monotone, tol)
        subadditive = w is None
        if w is not None:
            witnesses["subadditive"] = w
    sizes = popcounts(m)
    symmetric = True
    for c in range(m + 1):
        layer = np.flatnonzero(sizes == c)
        vals = t[layer]
        off = np.flatnonzero(np.abs(vals - vals[0]) > tol)
        if off.size:
            symmetric = False
            witnesses["symmetric"] = (int(layer[0]), int(layer[off[0]]))
            break
    return PropertyReport(normalized, monotone, nonnegative, submodular, subadditive, symmetric, witnesses)


def additive_table(weights: Sequence[float]) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    m = w.size
    dense = np.zeros(1 << m)
    dense[1 << np.arange(m)] = w
    return zeta(dense, m)


def demand_query(v: SetFunction, prices: Sequence[float]) -> ItemSet:
    """Utility-maximizing bundle; ties go to the smallest bit pattern."""
    p = np.asarray(prices, dtype=float)
    if p.shape != (v.m,):
        raise InvalidInput(f"need {v.m} prices, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise InvalidInput("prices must be finite")
    utility = v.table() - additive_table(p)
    return int(np.argmax(utility))


def marginal(v: SetFunction, T: ItemSet, S: ItemSet) -> float:
    return v.value(T | S) - v.value(S)


class SupermodularDegree(NamedTuple):
    degree: int
    dependencies: tuple[ItemSet, ...]


def supermodular_degree(f: SetFunction, tol: float = CHECK_TOL) -> SupermodularDegree:
    """Item ``j'`` depends on ``j`` iff some ``S`` has ``f(j | S+j') > f(j | S)``."""
    m = f.m
    _check_m(m, MAX_SUPERMODULAR_M, "supermodular_degree")
    t = f.table()
    idx = np.arange(1 << m)
    deps = [0] * m
    for j in range(m):
        for jp in range(j + 1, m):
            bj, bp = 1 << j, 1 << jp
            S = idx[(idx & (bj | bp)) == 0]
            gain = t[S | bj | bp] - t[S | bp] - t[S | bj] + t[S]
            if np.any(gain > tol):
                deps[j] |= bp
                deps[jp] |= bj
    return SupermodularDegree(max((popcount(d) for d in deps), default=0), tuple(deps))


def max_plus_convolution(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    """``out[S] = max_{T <= S} a[T] + b[S - T]``."""
    out = np.empty(1 << m)
    for S in range(1 << m):
        T = submasks(S)
        out[S] = np.max(a[T] + b[S ^ T])
    return out


def combine(f: SetFunction, g: SetFunction, mode: str) -> ExplicitValuation:
    if f.m != g.m:
        raise InvalidInput(f"ground sets differ: {f.m} vs {g.m}")
    mode = mode.lower()
    if mode == "xor":
        return ExplicitValuation(f.m, np.maximum(f.table(), g.table()))
    if mode == "or":
        _check_m(f.m, MAX_SUBADDITIVE_M, "OR combination")
        return ExplicitValuation(f.m, max_plus_convolution(f.table(), g.table(), f.m))
    raise InvalidInput(f"unknown combine mode {mode!r}; use 'xor' or 'or'")


def restrict(v: SetFunction, S: ItemSet) -> ExplicitValuation:
    """``v`` on the items of ``S``, relabelled ``0..|S|-1`` in increasing order.

    ``labels[i]`` records the original index of new item ``i``.
    """
    S = check_set(S, v.m)
    subs = submasks(S)
    if v.m <= MAX_TABLE_M:
        vals = v.table()[subs]
    else:
        vals = np.array([v.value(int(T)) for T in subs])
    base = v.labels if isinstance(v, ExplicitValuation) and v.labels is not None else tuple(range(v.m))
    return ExplicitValuation(popcount(S), vals, labels=tuple(base[j] for j in to_items(S)))


def approx_ratio(f: SetFunction, g: SetFunction, tol: float = 0.0) -> float:
    """Smallest rho with rho1 <= f/g <= rho2 and rho2/rho1 = rho over nonempty sets.

    0/0 entries are ignored; x/0 with x > 0, or a zero ratio next to a
    positive one, gives ``inf``.
    """
    if f.m != g.m:
        raise InvalidInput("ground sets differ")
    a, b = f.table()[1:], g.table()[1:]
    both_zero = (np.abs(a) <= tol) & (np.abs(b) <= tol)
    a, b = a[~both_zero], b[~both_zero]
    if a.size == 0:
        return 1.0
    if np.any(np.abs(b) <= tol):
        return math.inf
    ratios = a / b
    lo, hi = float(ratios.min()), float(ratios.max())
    if lo <= 0:
        return 1.0 if hi == lo else math.inf
    return hi / lo
