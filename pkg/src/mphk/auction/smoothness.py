"""Spot checks of smoothness inequalities for simultaneous auctions.

A mechanism is ``(lambda, mu)``-smooth when every bidder ``i`` has a
deviation ``a_i*`` such that, for every profile ``a``,
``sum_i u_i(a_i*, a_-i) >= lambda * Opt - mu * sum_i P_i(a)``.

Three deviations are provided:

``density``
    Single item: the highest-value bidder bids a random ``x`` with density
    ``1/(v - x)`` on ``[0, (1 - 1/e) v]``, everyone else bids zero.  Its
    expected utility against any profile is computed in closed form, so
    the inequality is checked profile by profile.
``price_scale``
    Bidder ``i`` bids ``2k E[P_j]`` (plus a tiny epsilon) on every item
    of their optimal set, where ``P_j`` is the price of item ``j`` under the
    profile distribution.
``sample_max``
    Bidder ``i`` bids, on each item of their optimal set, the maximum of
    ``2k`` independent draws from the distribution of ``P_j``.

The last two are checked in expectation against
``Opt / 2 - 2k sum_j E[P_j]``, with the sampling error reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInput
from ..welfare import AuctionInstance, optimal_welfare
from .learning import EmpiricalCce, _ValueLookup
from .simulator import check_rule, item_payments

DEVIATIONS = ("density", "price_scale", "sample_max")
DEVIATION_EPS = 1e-9


@dataclass(frozen=True)
class SmoothnessReport:
    deviation: str
    lam: float
    mu: float
    trials: int
    lhs_mean: float
    rhs_mean: float
    margin: float
    std_err: float
    min_margin: float
    violations: int
    tol: float

    @property
    def ok(self) -> bool:
        if self.deviation == "density":
            return self.violations == 0
        return self.margin >= -3.0 * self.std_err - self.tol

    def as_dict(self) -> dict:
        return {**self.__dict__, "ok": self.ok}


def density_deviation_utility(value: np.ndarray, competing: np.ndarray, lam: float | None = None) -> np.ndarray:
    """Expected utility of the density deviation for a single item.

    ``value`` is the deviating bidder's value, ``competing`` the highest
    other bid.  The deviation draws ``x`` with density ``1/(v - x)`` on
    ``[0, top]`` with ``top = (1 - 1/e) v``; it wins when ``x`` exceeds
    ``competing`` and pays ``x``.
    """
    v = np.asarray(value, dtype=float)
    p = np.asarray(competing, dtype=float)
    top = (1.0 - math.exp(-1.0)) * v if lam is None else lam * v
    live = (p < top) & (v > 0)
    vs = np.where(live, v, 1.0)
    ps = np.where(live, np.clip(p, 0.0, None), 0.0)
    tops = np.where(live, top, 0.0)
    win = np.log((vs - ps) / (vs - tops))
    paid = vs * win - (tops - ps)
    return np.where(live, vs * win - paid, 0.0)


def sample_profiles(inst: AuctionInstance, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Independent uniform bids in ``[0, v_i(M)]`` for every bidder and item."""
    tops = np.array([v.value((1 << inst.m) - 1) for v in inst.bidders])
    return rng.random((trials, inst.n, inst.m)) * tops[None, :, None]


def _deviation_utility(
    i: int, dev: np.ndarray, profiles: np.ndarray, value: _ValueLookup, rule: str, pow2: np.ndarray
) -> np.ndarray:
    """Utility of bidder ``i`` playing ``dev`` (shape (T, m)) against each profile."""
    T, n, m = profiles.shape
    if n > 1:
        opp = profiles.copy()
        opp[:, i] = -1.0
        high = opp.max(axis=1)
        first = opp.argmax(axis=1)
    else:
        high = np.zeros((T, m))
        first = np.full((T, m), n)
    win = (dev > high) | ((dev == high) & (i < first))
    vals = value(win.astype(np.int64) @ pow2)
    if rule == "first":
        pay = (win * dev).sum(axis=1)
    else:
        pay = (win * np.maximum(high, 0.0)).sum(axis=1)
    return vals - pay


def smoothness_check(
    inst: AuctionInstance,
    lam: float,
    mu: float,
    deviation: str = "price_scale",
    *,
    profiles: np.ndarray | None = None,
    cce: EmpiricalCce | None = None,
    k: int = 1,
    trials: int = 100_000,
    seed=0,
    rule: str = "first",
    tol: float = 1e-9,
) -> SmoothnessReport:
    """Estimate both sides of the smoothness inequality over sampled profiles.

    Profiles come from ``profiles`` (shape ``(T, n, m)``), from rows drawn
    uniformly out of ``cce``, or from independent uniform bids.
    """
    if deviation not in DEVIATIONS:
        raise InvalidInput(f"unknown deviation {deviation!r}; use one of {DEVIATIONS}")
    check_rule(rule)
    rng = np.random.default_rng(seed)
    if profiles is None:
        if cce is not None:
            rows = rng.integers(0, cce.iterations, size=trials)
            profiles = cce.profiles(rows)
        else:
            profiles = sample_profiles(inst, trials, rng)
    profiles = np.asarray(profiles, dtype=float)
    if profiles.ndim != 3 or profiles.shape[1:] != (inst.n, inst.m):
        raise InvalidInput(f"profiles must have shape (T, {inst.n}, {inst.m})")
    if np.any(profiles < 0):
        raise InvalidInput("bids must be nonnegative")
    T = profiles.shape[0]
    _, pay = item_payments(profiles, rule)
    payments = pay.sum(axis=1)

    if deviation == "density":
        if inst.m != 1 or rule != "first":
            raise InvalidInput("the density deviation is defined for a single first-price item")
        values = np.array([v.value(1) for v in inst.bidders])
        star = int(np.argmax(values))
        others = np.delete(profiles[:, :, 0], star, axis=1)
        competing = others.max(axis=1) if others.shape[1] else np.zeros(T)
        lhs = density_deviation_utility(np.full(T, values[star]), competing, 1.0 - math.exp(-1.0))
        opt = float(values[star])
        rhs = lam * opt - mu * payments
    else:
        opt, alloc = optimal_welfare(inst)
        price_mean = pay.mean(axis=0)
        pow2 = (1 << np.arange(inst.m)).astype(np.int64)
        lhs = np.zeros(T)
        for i, S in enumerate(alloc.assignment):
            if not S:
                continue
            items = np.array([(S >> j) & 1 for j in range(inst.m)], dtype=bool)
            if deviation == "price_scale":
                dev = np.where(items, 2 * k * price_mean + DEVIATION_EPS, 0.0)
                dev = np.broadcast_to(dev, (T, inst.m))
            else:
                draws = pay[rng.integers(0, T, size=(T, 2 * k)), :].max(axis=1)
                dev = np.where(items[None, :], draws + DEVIATION_EPS, 0.0)
            lhs += _deviation_utility(i, dev, profiles, _ValueLookup(inst.bidders[i], inst.m), rule, pow2)
        rhs = np.full(T, lam * opt - mu * float(price_mean.sum()))

    diff = lhs - rhs
    se = float(diff.std(ddof=1) / math.sqrt(T)) if T > 1 else 0.0
    return SmoothnessReport(
        deviation,
        float(lam),
        float(mu),
        T,
        float(lhs.mean()),
        float(rhs.mean()),
        float(diff.mean()),
        se,
        float(diff.min()),
        int(np.sum(diff < -tol)),
        tol,
    )
