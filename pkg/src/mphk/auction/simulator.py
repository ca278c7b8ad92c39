"""Simultaneous single-item auctions: one sealed bid per (bidder, item).

Each item goes to its highest bidder, ties to the lowest bidder index.  The
winner pays either their own bid (first price) or the highest competing bid
(second price).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInput
from ..welfare import Allocation, AuctionInstance

RULES = ("first", "second")


@dataclass(frozen=True)
class BidProfile:
    bids: np.ndarray

    def __post_init__(self):
        b = np.array(self.bids, dtype=float)
        if b.ndim != 2:
            raise InvalidInput("bids must be an n x m matrix")
        if not np.all(np.isfinite(b)):
            raise InvalidInput("bids must be finite")
        if np.any(b < 0):
            raise InvalidInput("bids must be nonnegative")
        b.flags.writeable = False
        object.__setattr__(self, "bids", b)

    @classmethod
    def zeros(cls, n: int, m: int) -> BidProfile:
        return cls(np.zeros((n, m)))


@dataclass(frozen=True)
class AuctionOutcome:
    allocation: Allocation
    payments: np.ndarray
    utilities: np.ndarray
    prices: np.ndarray
    values: np.ndarray

    @property
    def welfare(self) -> float:
        return float(self.values.sum())

    @property
    def revenue(self) -> float:
        return float(self.payments.sum())

    def as_dict(self) -> dict:
        return {
            **self.allocation.as_dict(),
            "payments": self.payments.tolist(),
            "utilities": self.utilities.tolist(),
            "prices": self.prices.tolist(),
            "welfare": self.welfare,
            "revenue": self.revenue,
        }


def check_rule(rule: str) -> str:
    if rule not in RULES:
        raise InvalidInput(f"unknown payment rule {rule!r}; use one of {RULES}")
    return rule


def item_payments(bids: np.ndarray, rule: str) -> tuple[np.ndarray, np.ndarray]:
    """Winner index and amount paid for every item (works on stacked profiles).

    ``bids`` has shape ``(..., n, m)``; returns arrays of shape ``(..., m)``.
    """
    winners = np.argmax(bids, axis=-2)
    if rule == "first":
        pay = np.max(bids, axis=-2)
    elif bids.shape[-2] == 1:
        pay = np.zeros(bids.shape[:-2] + bids.shape[-1:])
    else:
        pay = np.sort(bids, axis=-2)[..., -2, :]
    return winners, pay


def run_auction(inst: AuctionInstance, b: BidProfile | np.ndarray, rule: str = "first") -> AuctionOutcome:
    check_rule(rule)
    if not isinstance(b, BidProfile):
        b = BidProfile(b)
    bids = b.bids
    if bids.shape != (inst.n, inst.m):
        raise InvalidInput(f"bid matrix is {bids.shape}, instance needs {(inst.n, inst.m)}")
    winners, pay = item_payments(bids, rule)
    sets = [0] * inst.n
    payments = np.zeros(inst.n)
    for j, w in enumerate(winners):
        sets[w] |= 1 << j
        payments[w] += pay[j]
    values = np.array([v.value(S) for v, S in zip(inst.bidders, sets)])
    prices = bids.max(axis=0) if inst.n else np.zeros(inst.m)
    return AuctionOutcome(Allocation(tuple(sets)), payments, values - payments, prices, values)
