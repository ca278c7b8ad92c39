"""Repeated simultaneous auctions played by multiplicative-weights learners.

Every bidder keeps Hedge weights over a finite menu of "bid ``g`` on each
item of bundle ``S``" actions and updates them with full-information
feedback: the utility every menu action would have earned against the
opponents' realized bids.  The empirical distribution of realized profiles
approximates a coarse correlated equilibrium, with the per-bidder external
regret as the certificate of how close it is.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import CapacityError, InvalidInput
from ..setfn import full_set, popcount, to_items
from ..welfare import MAX_DP_M, AuctionInstance, optimal_welfare, single_minded_set
from .simulator import check_rule


@dataclass(frozen=True)
class ActionSet:
    """Menu of one bidder: row ``a`` bids ``levels[a]`` on every item of ``bundles[a]``."""

    bundles: np.ndarray
    levels: np.ndarray
    bids: np.ndarray

    def __len__(self) -> int:
        return int(self.levels.size)


def _optimal_sets(inst: AuctionInstance) -> tuple[int, ...] | None:
    try:
        return optimal_welfare(inst)[1].assignment
    except CapacityError:
        return None


def candidate_bundles(inst: AuctionInstance, i: int, optimal: tuple[int, ...] | None = None) -> list[int]:
    """The bidder's optimal set, singletons, the full set and any desired bundle."""
    m = inst.m
    cands = [1 << j for j in range(m)] + [full_set(m)]
    if optimal is not None and optimal[i]:
        cands.append(optimal[i])
    want = single_minded_set(inst.bidders[i]) if m <= 20 else None
    if want:
        cands.append(want)
    return sorted(set(cands))


def build_action_set(
    inst: AuctionInstance,
    i: int,
    delta: float,
    optimal: tuple[int, ...] | None = None,
) -> ActionSet:
    """Uniform-on-bundle bids on the grid ``0, delta, 2 delta, ... <= v_i(S)/|S|``.

    The all-zero bid appears once, as the first action.
    """
    v = inst.bidders[i]
    bundles, levels = [0], [0.0]
    for S in candidate_bundles(inst, i, optimal):
        top = v.value(S) / popcount(S)
        steps = int(math.floor(top / delta + 1e-9))
        for s in range(1, steps + 1):
            bundles.append(S)
            levels.append(s * delta)
    bundles = np.asarray(bundles, dtype=np.int64)
    levels = np.asarray(levels)
    member = (bundles[:, None] >> np.arange(inst.m)) & 1
    return ActionSet(bundles, levels, member * levels[:, None])


@dataclass(frozen=True)
class LearningConfig:
    iterations: int = 10_000
    rule: str = "first"
    grid_step: float | None = None
    learning_rate: float | None = None
    seed: int | None = 0
    action_set_builder: Callable[[AuctionInstance, int, float], ActionSet] | None = None


@dataclass(frozen=True)
class EmpiricalCce:
    """Uniform-weight history of realized joint actions.

    ``actions[t, i]`` indexes bidder ``i``'s menu at round ``t``; every
    round carries weight ``1 / iterations``.
    """

    action_sets: tuple[ActionSet, ...]
    actions: np.ndarray
    welfare: np.ndarray
    revenue: np.ndarray
    utilities: np.ndarray
    running_regret: np.ndarray
    regret: np.ndarray
    regret_bound: np.ndarray
    rule: str
    utility_scale: float
    learning_rate: np.ndarray = field(repr=False, default=None)

    @property
    def iterations(self) -> int:
        return int(self.actions.shape[0])

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.iterations, 1.0 / self.iterations)

    def profile(self, t: int) -> np.ndarray:
        return np.stack([A.bids[a] for A, a in zip(self.action_sets, self.actions[t])])

    def profiles(self, rows: np.ndarray) -> np.ndarray:
        """Bid matrices for the given rounds, shape ``(len(rows), n, m)``."""
        return np.stack([A.bids[self.actions[rows, i]] for i, A in enumerate(self.action_sets)], axis=1)

    def trace_csv(self, every: int = 1) -> str:
        """Per-round utilities, welfare and running average regret."""
        n = self.actions.shape[1]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["iteration"]
            + [f"utility_{i}" for i in range(n)]
            + ["welfare", "revenue"]
            + [f"regret_{i}" for i in range(n)]
        )
        for t in range(0, self.iterations, every):
            w.writerow(
                [t + 1]
                + [repr(float(u)) for u in self.utilities[t]]
                + [repr(float(self.welfare[t])), repr(float(self.revenue[t]))]
                + [repr(float(r)) for r in self.running_regret[t]]
            )
        return buf.getvalue()


class _ValueLookup:
    """``v_i`` on arrays of masks, through the table when it is small enough."""

    def __init__(self, v, m: int):
        self.v = v
        self.table = v.table() if m <= 20 else None
        self.cache: dict[int, float] = {}

    def __call__(self, masks: np.ndarray) -> np.ndarray:
        if self.table is not None:
            return self.table[masks]
        out = np.empty(masks.shape)
        for idx, S in np.ndenumerate(masks):
            S = int(S)
            if S not in self.cache:
                self.cache[S] = self.v.value(S)
            out[idx] = self.cache[S]
        return out


def counterfactual_utilities(
    A: ActionSet, i: int, bids: np.ndarray, value, rule: str, pow2: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Value, payment and utility of every menu action against ``bids`` (row ``i`` ignored)."""
    n = bids.shape[0]
    if n > 1:
        opp = bids.copy()
        opp[i] = -1.0
        high = opp.max(axis=0)
        first = np.argmax(opp, axis=0)
    else:
        high = np.zeros(bids.shape[1])
        first = np.full(bids.shape[1], n)
    win = (A.bids > high) | ((A.bids == high) & (i < first))
    masks = win.astype(np.int64) @ pow2
    vals = value(masks)
    if rule == "first":
        pay = (win * A.bids).sum(axis=1)
    else:
        pay = win @ np.maximum(high, 0.0)
    return vals, pay, vals - pay


def no_regret_learn(inst: AuctionInstance, config: LearningConfig | None = None) -> EmpiricalCce:
    cfg = config or LearningConfig()
    rule = check_rule(cfg.rule)
    T = int(cfg.iterations)
    if T < 1:
        raise InvalidInput("iterations must be >= 1")
    n, m = inst.n, inst.m
    scale = max(v.value(full_set(m)) for v in inst.bidders)
    scale = scale if scale > 0 else 1.0
    delta = cfg.grid_step if cfg.grid_step is not None else 0.02 * scale
    if delta <= 0:
        raise InvalidInput("grid step must be positive")
    optimal = _optimal_sets(inst) if m <= MAX_DP_M else None
    if cfg.action_set_builder is not None:
        sets = tuple(cfg.action_set_builder(inst, i, delta) for i in range(n))
    else:
        sets = tuple(build_action_set(inst, i, delta, optimal) for i in range(n))
    for i, A in enumerate(sets):
        if len(A) == 0:
            raise InvalidInput(f"bidder {i} has an empty action set")
    sizes = np.array([len(A) for A in sets])
    if cfg.learning_rate is not None:
        eta = np.full(n, float(cfg.learning_rate))
    else:
        eta = np.sqrt(np.log(np.maximum(sizes, 2)) / T)
    values = [_ValueLookup(v, m) for v in inst.bidders]
    pow2 = (1 << np.arange(m)).astype(np.int64)

    rng = np.random.default_rng(cfg.seed)
    draws = rng.random((T, n))
    logw = [np.zeros(s) for s in sizes]
    cum = [np.zeros(s) for s in sizes]
    realized_total = np.zeros(n)
    actions = np.empty((T, n), dtype=np.int32)
    welfare = np.empty(T)
    revenue = np.empty(T)
    utilities = np.empty((T, n))
    running = np.empty((T, n))
    for t in range(T):
        chosen = np.empty(n, dtype=np.int64)
        for i in range(n):
            p = np.exp(logw[i] - logw[i].max())
            c = np.cumsum(p)
            chosen[i] = min(int(np.searchsorted(c, draws[t, i] * c[-1], side="right")), sizes[i] - 1)
        bids = np.stack([sets[i].bids[chosen[i]] for i in range(n)])
        sw = rev = 0.0
        for i in range(n):
            vals, pay, util = counterfactual_utilities(sets[i], i, bids, values[i], rule, pow2)
            a = chosen[i]
            sw += vals[a]
            rev += pay[a]
            utilities[t, i] = util[a]
            realized_total[i] += util[a]
            cum[i] += util
            logw[i] += eta[i] * util / scale
            running[t, i] = (cum[i].max() - realized_total[i]) / (t + 1)
        actions[t] = chosen
        welfare[t] = sw
        revenue[t] = rev
    regret = running[-1].copy()
    bound = 2.0 * scale * np.sqrt(np.log(np.maximum(sizes, 2)) / T)
    return EmpiricalCce(sets, actions, welfare, revenue, utilities, running, regret, bound, rule, scale, eta)


def cce_metrics(inst: AuctionInstance, cce: EmpiricalCce, opt: float | None = None) -> dict:
    """Expected welfare and revenue of the history against the optimum."""
    if opt is None:
        try:
            opt = optimal_welfare(inst)[0]
        except CapacityError:
            if "known_opt" not in inst.metadata:
                raise
            opt = float(inst.metadata["known_opt"])
    T = cce.iterations
    sw = float(cce.welfare.mean())
    sigma = float(cce.welfare.std(ddof=1) / math.sqrt(T)) if T > 1 else 0.0
    return {
        "expected_sw": sw,
        "sw_std_err": sigma,
        "opt": float(opt),
        "ratio": float(opt / sw) if sw > 0 else math.inf,
        "revenue": float(cce.revenue.mean()),
        "iterations": T,
        "regret": cce.regret.tolist(),
        "regret_bound": cce.regret_bound.tolist(),
    }


def menu_description(A: ActionSet) -> list[dict]:
    return [{"bundle": to_items(int(S)), "level": float(g)} for S, g in zip(A.bundles, A.levels)]
