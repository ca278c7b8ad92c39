"""Projective-plane instance with a bad mixed equilibrium.

Each of ``planes`` copies of the plane of order ``k - 1`` carries one
single-minded unit-value bidder per line.  Plane bidders bid a common
random amount ``x`` on every item of their line, with
``Pr[x <= t] = (k t)^(1/(k-1)^2)`` on ``[0, 1/k]``; exactly one of them per
plane collects a bundle.  Auxiliary bidder ``i`` wants point ``i`` of every
plane; giving every auxiliary bidder their bundle is optimal, but against
the plane bidders' mixture the auxiliary bidders' best response is to stay out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import CapacityError, InvalidInput
from ..setfn import MAX_EVAL_M, Hypergraph, to_items
from ..welfare import AuctionInstance, projective_plane


@dataclass(frozen=True)
class NeStrategy:
    """Analytic mixed strategy: plane bidders share the CDF, auxiliaries bid zero."""

    k: int
    planes: int
    bundles: tuple[int, ...]
    plane_bidders: tuple[int, ...]
    auxiliary_bidders: tuple[int, ...]

    @property
    def exponent(self) -> float:
        return 1.0 / (self.k - 1) ** 2

    def cdf(self, t) -> np.ndarray:
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0 / self.k)
        return (self.k * t) ** self.exponent

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Inverse-CDF draws ``x = u^((k-1)^2) / k``."""
        return rng.random(size) ** ((self.k - 1) ** 2) / self.k

    def sample_profiles(self, rng: np.random.Generator, count: int, m: int) -> np.ndarray:
        n = len(self.bundles)
        bids = np.zeros((count, n, m))
        x = self.sample(rng, (count, len(self.plane_bidders)))
        for col, i in enumerate(self.plane_bidders):
            bids[:, i, to_items(self.bundles[i])] = x[:, col, None]
        return bids


def poa_lb_instance(k: int, planes: int | None = None) -> tuple[AuctionInstance, NeStrategy]:
    if k < 2:
        raise InvalidInput("k must be >= 2")
    planes = k if planes is None else int(planes)
    if planes < 1:
        raise InvalidInput("need at least one plane")
    points, lines = projective_plane(k - 1)
    m = planes * points
    if m > MAX_EVAL_M:
        raise CapacityError(f"{planes} planes of {points} points exceed {MAX_EVAL_M} items")
    bundles = []
    for p in range(planes):
        bundles.extend(L << (p * points) for L in lines)
    n_plane = len(bundles)
    for i in range(points):
        bundles.append(sum(1 << (p * points + i) for p in range(planes)))
    bidders = tuple(Hypergraph(m, {B: 1.0}) for B in bundles)
    opt = float(points)
    meta = {
        "k": k,
        "planes": planes,
        "known_opt": opt,
        "equilibrium_welfare": float(planes),
        "poa": opt / planes,
        "bundles": [to_items(B) for B in bundles],
    }
    inst = AuctionInstance(m, bidders, meta)
    strat = NeStrategy(k, planes, tuple(bundles), tuple(range(n_plane)), tuple(range(n_plane, len(bundles))))
    return inst, strat


def _competitor_counts(strat: NeStrategy, i: int) -> list[int]:
    """Plane bidders other than ``i`` that bid on each item of ``i``'s bundle.

    Also checks that no competitor is shared between two of those items, so
    the per-item contests are independent.
    """
    seen: set[int] = set()
    counts = []
    for j in to_items(strat.bundles[i]):
        rivals = {b for b in strat.plane_bidders if b != i and strat.bundles[b] >> j & 1}
        if rivals & seen:
            raise InvalidInput("competitors overlap across items; closed form does not apply")
        seen |= rivals
        counts.append(len(rivals))
    return counts


def closed_form_utility(strat: NeStrategy, i: int, x) -> tuple[np.ndarray, np.ndarray]:
    """Expected (value, payment) of bidder ``i`` bidding ``x`` on each item of its bundle.

    Every rival is an independent draw from the plane CDF, so item ``j`` is
    won with probability ``F(x)^{c_j}`` and the bundle with the product.
    """
    x = np.asarray(x, dtype=float)
    F = strat.cdf(x)
    counts = _competitor_counts(strat, i)
    win_item = [F**c for c in counts]
    value = np.prod(win_item, axis=0)
    payment = sum(x * w for w in win_item)
    return value, payment


@dataclass(frozen=True)
class NeReport:
    closed_form_max_abs_utility: float
    power_law_max_abs_gap: float
    aux_closed_form_max_utility: float
    aux_abstains: bool
    mc_equal_bid_max_abs: float
    mc_unequal_max_utility: float
    mc_aux_max_utility: float
    equilibrium_welfare: float
    equilibrium_welfare_sigma: float
    optimum: float
    samples: int
    tol: float
    mc_tol: float
    details: dict = field(default_factory=dict, repr=False)

    @property
    def closed_form_ok(self) -> bool:
        return self.closed_form_max_abs_utility <= self.tol

    @property
    def monte_carlo_ok(self) -> bool:
        return (
            self.mc_equal_bid_max_abs <= self.mc_tol
            and self.mc_unequal_max_utility <= self.mc_tol
            and self.mc_aux_max_utility <= self.mc_tol
        )

    @property
    def ok(self) -> bool:
        return self.closed_form_ok and self.monte_carlo_ok and self.aux_abstains

    def as_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "details"}
        out.update(closed_form_ok=self.closed_form_ok, monte_carlo_ok=self.monte_carlo_ok, ok=self.ok)
        return out


def verify_mixed_ne(
    inst: AuctionInstance,
    strat: NeStrategy,
    samples: int = 1_000_000,
    tol: float = 1e-6,
    mc_tol: float = 1e-2,
    grid: int = 100,
    seed=0,
) -> NeReport:
    """Check the analytic mixture is an equilibrium, in closed form and by sampling."""
    k = strat.k
    rng = np.random.default_rng(seed)
    xs = np.arange(1, grid + 1) / grid / k
    i0 = strat.plane_bidders[0]

    # (a) closed form on the grid, derived from the competitor structure
    value, payment = closed_form_utility(strat, i0, xs)
    closed = float(np.max(np.abs(value - payment)))
    kx = k * xs
    power_gap = float(
        max(np.max(np.abs(value - kx ** (k / (k - 1)))), np.max(np.abs(payment - k * xs * kx ** (1 / (k - 1)))))
    )
    aux = strat.auxiliary_bidders[0]
    a_val, a_pay = closed_form_utility(strat, aux, xs)
    aux_util = a_val - a_pay
    aux_abstains = bool(np.all(aux_util[:-1] < 0) and aux_util[-1] <= tol)

    # (b) Monte Carlo against sampled rival bids
    counts = _competitor_counts(strat, i0)
    rivals = [strat.sample(rng, (samples, c)).max(axis=1) for c in counts]
    probe = xs[:: max(1, grid // 10)]
    eq_abs = 0.0
    uneq = -math.inf
    for x in probe:
        wins = [r < x for r in rivals]
        util = np.all(wins, axis=0).mean() - sum(x * w.mean() for w in wins)
        eq_abs = max(eq_abs, abs(float(util)))
        for d in (0.1 * x, 0.3 * x):
            bid = [x + d, x - d] + [x] * (len(rivals) - 2)
            wins = [r < b for r, b in zip(rivals, bid)]
            util = np.all(wins, axis=0).mean() - sum(b * w.mean() for b, w in zip(bid, wins))
            uneq = max(uneq, float(util))
    a_counts = _competitor_counts(strat, aux)
    a_rivals = [strat.sample(rng, (samples, c)).max(axis=1) for c in a_counts]
    aux_mc = -math.inf
    for x in probe:
        wins = [r < x for r in a_rivals]
        util = np.all(wins, axis=0).mean() - sum(x * w.mean() for w in wins)
        aux_mc = max(aux_mc, float(util))

    # equilibrium welfare: the top bidder of each plane takes its whole line
    n_plane = len(strat.plane_bidders)
    per_plane = n_plane // strat.planes
    welfare = np.zeros(samples)
    lines = np.array([strat.bundles[b] for b in strat.plane_bidders[:per_plane]], dtype=np.int64)
    items = inst.m // strat.planes
    member = ((lines[:, None] >> np.arange(items)) & 1).astype(bool)
    for _ in range(strat.planes):
        x = strat.sample(rng, (samples, per_plane))
        high = np.where(member[None], x[:, :, None], -1.0).max(axis=1)
        won = np.all(~member[None] | (x[:, :, None] >= high[:, None, :]), axis=2)
        welfare += won.sum(axis=1)
    sigma = float(welfare.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return NeReport(
        closed,
        power_gap,
        float(aux_util.max()),
        aux_abstains,
        eq_abs,
        uneq,
        aux_mc,
        float(welfare.mean()),
        sigma,
        float(inst.metadata.get("known_opt", math.nan)),
        samples,
        tol,
        mc_tol,
        {"grid": xs.tolist()},
    )
