"""Envelopes and worst-case bounds for symmetric set functions.

For a symmetric ``f`` the uniform hypergraph putting ``f(m) / C(m, R)`` on
every ``R``-subset is the canonical rank-``R`` candidate: if any rank-``R``
envelope exists then this one does, so classification reduces to binomial
inequalities between profile entries.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .. import lp
from ..errors import CapacityError, InvalidInput
from ..setfn import CHECK_TOL, Hypergraph, SymmetricValuation, to_mask
from .envelope import ENVELOPE_TOL, PleWitness

MAX_CANONICAL_EDGES = 200_000
MAX_LP_M = 200
MAX_LP_RANK = 6


@lru_cache(maxsize=16)
def binomials(n: int) -> np.ndarray:
    """``B[a, b] = C(a, b)`` as floats for ``0 <= a, b <= n``."""
    B = np.zeros((n + 1, n + 1))
    for a in range(n + 1):
        for b in range(a + 1):
            B[a, b] = math.comb(a, b)
    B.flags.writeable = False
    return B


def canonical_profile(m: int, top: float, R: int) -> np.ndarray:
    """Value per cardinality of the uniform rank-``R`` hypergraph worth ``top`` on all items."""
    B = binomials(m)
    return B[:, R] / B[m, R] * top


def canonical_violation(f: SymmetricValuation, R: int) -> float:
    g = canonical_profile(f.m, f.profile[-1], R)
    return float(max(0.0, np.max(g - f.profile)))


def canonical_symmetric_ple(f: SymmetricValuation, R: int, *, explicit: bool = True) -> PleWitness:
    """Uniform rank-``R`` candidate; ``valid`` iff it never exceeds ``f``.

    With ``explicit=False`` the (possibly huge) edge list is not materialized
    and the returned envelope is empty; the validity flag is unaffected.
    """
    m = f.m
    if not 1 <= R <= m:
        raise InvalidInput(f"rank must lie in 1..{m}, got {R}")
    viol = canonical_violation(f, R)
    edges: dict[int, float] = {}
    if explicit:
        count = math.comb(m, R)
        if count > MAX_CANONICAL_EDGES or m > 24:
            raise CapacityError(f"canonical envelope would have {count} edges; use explicit=False")
        w = f.profile[-1] / count
        edges = {to_mask(c): w for c in itertools.combinations(range(m), R)}
    return PleWitness(Hypergraph(m, edges), (1 << m) - 1, R, viol <= ENVELOPE_TOL, viol)


def _require_monotone_normalized(f: SymmetricValuation) -> None:
    if not f.normalized:
        raise InvalidInput("symmetric classification needs f(0) = 0")
    if not f.monotone:
        raise InvalidInput("symmetric classification needs a nondecreasing profile")


def symmetric_level_holds(f: SymmetricValuation, R: int, tol: float = CHECK_TOL) -> bool:
    """Every restriction to ``t`` items has a valid canonical rank-``R`` envelope."""
    m = f.m
    p = f.profile
    B = binomials(m)
    for t in range(R + 1, m + 1):
        g = B[: t + 1, R] / B[t, R] * p[t]
        if np.any(g > p[: t + 1] + tol * max(1.0, abs(p[t]))):
            return False
    return True


def symmetric_mph_level(f: SymmetricValuation) -> int:
    """Smallest ``R`` such that every restriction has a rank-``R`` envelope."""
    _require_monotone_normalized(f)
    for R in range(1, f.m + 1):
        if symmetric_level_holds(f, R):
            return R
    return max(f.m, 1)


def symmetric_from_hypergraph_profile(m: int, weights) -> SymmetricValuation:
    """Symmetric function whose every ``i``-subset carries ``weights[i-1]``."""
    B = binomials(m)
    w = np.asarray(weights, dtype=float)
    prof = np.array([sum(B[t, i + 1] * w[i] for i in range(w.size)) for t in range(m + 1)])
    return SymmetricValuation(m, prof)


@dataclass(frozen=True)
class SymmetricLpCertificate:
    """Primal/dual pair for the worst drop ``f(m-1)`` of a rank-``r`` symmetric function.

    The primal chooses per-cardinality hyperedge weights ``x_1..x_r`` with
    nonnegative marginals and ``f(m) = m``; ``objective`` is the minimal
    ``f(m-1)``.  ``dual_y`` (one entry per marginal constraint) and
    ``dual_z`` (the scaling constraint) certify it with value ``m * z``.
    """

    m: int
    r: int
    primal_x: np.ndarray
    dual_y: np.ndarray
    dual_z: float
    objective: float

    @property
    def dual_objective(self) -> float:
        return self.m * self.dual_z

    @property
    def gap(self) -> float:
        return abs(self.objective - self.dual_objective)

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "r": self.r,
            "primal_x": [float(v) for v in self.primal_x],
            "dual_y": [float(v) for v in self.dual_y],
            "dual_z": float(self.dual_z),
            "objective": self.objective,
            "gap": self.gap,
        }


def primal_residual(m: int, r: int, x) -> float:
    """Largest violation of the primal constraints by ``x``."""
    B = binomials(m)
    marg = np.array([sum(B[t, i - 1] * x[i - 1] for i in range(1, r + 1)) for t in range(m)])
    top = sum(B[m, i] * x[i - 1] for i in range(1, r + 1))
    return float(max(0.0, -marg.min(), abs(top - m)))


def dual_residual(m: int, r: int, y, z):
    """Largest violation of the dual system; exact when given ``Fraction`` inputs."""
    worst = max(0, -min(y))
    for i in range(1, r + 1):
        lhs = sum(math.comb(t, i - 1) * y[t] for t in range(m) if y[t]) + math.comb(m, i) * z
        worst = max(worst, abs(lhs - math.comb(m - 1, i)))
    return worst


def symmetric_worstcase_lp(m: int, r: int) -> SymmetricLpCertificate:
    if not 3 <= m <= MAX_LP_M:
        raise InvalidInput(f"m must lie in 3..{MAX_LP_M}")
    if not 1 <= r <= min(MAX_LP_RANK, m):
        raise InvalidInput(f"r must lie in 1..{min(MAX_LP_RANK, m)}")
    B = binomials(m)
    idx = np.arange(1, r + 1)
    scale = B[m, idx]  # solve for u_i = C(m, i) x_i to keep coefficients O(1)
    c = B[m - 1, idx] / scale
    A_ub = -np.array([[B[t, i - 1] for i in idx] for t in range(m)]) / scale
    res = lp.simplex(c, A_ub=A_ub, b_ub=np.zeros(m), A_eq=np.ones((1, r)), b_eq=[m], free=range(r))
    x = res.x / scale
    y = np.maximum(-res.duals_ub, 0.0)
    return SymmetricLpCertificate(m, r, x, y, float(res.duals_eq[0]), res.objective)


def closed_form_dual(m: int, r: int) -> tuple[list[Fraction], Fraction]:
    """Hand-derived dual solutions for ranks 3 and 4 (exact rationals)."""
    F = Fraction
    y = [F(0)] * m

    def put(t: int, val: Fraction) -> None:
        if not 0 <= t < m:
            raise InvalidInput(f"closed form needs a larger m (index {t})")
        y[t] += val

    if r == 3:
        if m < 6:
            raise InvalidInput("rank-3 closed form needs m >= 6")
        if m % 3 == 1:
            put((m - 4) // 3, F(2 * (m - 1), m + 2))
            put((m - 1) // 3, F(1))
            put(2 * (m - 1) // 3, F(6, m + 2))
        elif m % 3 == 2:
            put((m - 5) // 3, F(1))
            put((m - 2) // 3, F(2 * (m - 5), m - 2))
            put(2 * (m - 2) // 3, F(6, m - 2))
        else:
            put((m - 3) // 3, F(3 * m - 23, m - 3))
            put((m - 6) // 3, F(8, m))
            put(2 * (m - 3) // 3, F(6 * (m + 4), m * (m - 3)))
        return y, F(m - 4, m)
    if r == 4:
        if m < 5:
            raise InvalidInput("rank-4 closed form needs m >= 5")
        put(0, F(1))
        if m % 2 == 0:
            put(m // 2 - 1, F(2 * m - 2, m + 2))
            put(m // 2, F(2 * m - 2, m + 2))
            return y, F(m - 4, m + 2)
        put((m - 1) // 2, F(4 * (m - 2), m + 1))
        return y, F((m - 2) * (m - 3), m * (m + 1))
    raise InvalidInput("closed-form duals are available for r = 3 and r = 4 only")
