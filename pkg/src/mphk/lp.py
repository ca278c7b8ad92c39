"""Linear programming back ends.

``simplex`` is a self-contained dense two-phase tableau method used for the
small certificate-style LPs (configuration LP, cover LPs, symmetric
worst-case LPs); ``exact_simplex_max`` is its rational counterpart for
certification.  ``highs`` wraps SciPy's HiGHS for the larger envelope
LPs, so the two families of checks never share a solver.

Both minimize ``c @ x`` subject to ``A_ub x <= b_ub`` and ``A_eq x = b_eq``
and report duals as marginals: the derivative of the optimum with respect
to each right-hand side (``<= 0`` for the inequality rows of a minimization).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.optimize
import scipy.sparse

from .errors import InfeasibleError, SolverError, UnboundedError

FEAS_TOL = 1e-9
_DEGENERATE_STREAK = 50


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    objective: float
    duals_ub: np.ndarray
    duals_eq: np.ndarray
    iterations: int
    solver: str
    status: str = "optimal"


def _as_2d(A, ncols: int) -> np.ndarray:
    if A is None:
        return np.zeros((0, ncols))
    if scipy.sparse.issparse(A):
        A = A.toarray()
    A = np.asarray(A, dtype=float)
    return A.reshape(-1, ncols)


def _as_1d(b, nrows: int) -> np.ndarray:
    if b is None:
        return np.zeros(nrows)
    return np.asarray(b, dtype=float).reshape(nrows)


class _Tableau:
    """Constraint rows followed by a reduced-cost row; last column is the rhs."""

    def __init__(self, T: np.ndarray, basis: np.ndarray, tol: float, max_iter: int):
        self.T = T
        self.basis = basis
        self.tol = tol
        self.max_iter = max_iter
        self.iterations = 0

    def pivot(self, r: int, s: int) -> None:
        T = self.T
        T[r] /= T[r, s]
        col = T[:, s].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = s

    def run(self, allowed: np.ndarray) -> None:
        """Primal simplex on the current basis.

        Uses the most-negative reduced cost until a long run of degenerate
        pivots is seen, then falls back to Bland's rule for good, which
        cannot cycle.
        """
        T, tol = self.T, self.tol
        bland = False
        streak = 0
        while True:
            d = T[-1, :-1]
            cand = np.flatnonzero((d < -tol) & allowed)
            if cand.size == 0:
                return
            s = int(cand[0]) if bland else int(cand[np.argmin(d[cand])])
            col = T[:-1, s]
            rows = np.flatnonzero(col > tol)
            if rows.size == 0:
                raise UnboundedError("LP is unbounded")
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = int(ties[np.argmin(self.basis[ties])])
            streak = streak + 1 if best <= tol else 0
            if streak > _DEGENERATE_STREAK:
                bland = True
            self.pivot(r, s)
            self.iterations += 1
            if self.iterations > self.max_iter:
                raise SolverError(f"simplex exceeded {self.max_iter} iterations")


def simplex(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    free=None,
    tol: float = FEAS_TOL,
    max_iter: int = 200_000,
) -> LPResult:
    """Minimize ``c @ x`` with ``x >= 0`` except the indices in ``free``."""
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    Aub = _as_2d(A_ub, n)
    Aeq = _as_2d(A_eq, n)
    p, q = Aub.shape[0], Aeq.shape[0]
    bub, beq = _as_1d(b_ub, p), _as_1d(b_eq, q)
    free_idx = np.asarray(sorted(set(free or ())), dtype=int)

    # split free variables into differences of nonnegative parts
    cc = np.concatenate([c, -c[free_idx]])
    Aub2 = np.hstack([Aub, -Aub[:, free_idx]])
    Aeq2 = np.hstack([Aeq, -Aeq[:, free_idx]])
    nv = cc.size

    R = p + q
    M = np.zeros((R, nv + p))
    M[:p, :nv] = Aub2
    M[:p, nv:] = np.eye(p)
    M[p:, :nv] = Aeq2
    b = np.concatenate([bub, beq])
    sign = np.where(b < 0, -1.0, 1.0)
    M *= sign[:, None]
    b = b * sign

    needs_art = np.ones(R, dtype=bool)
    needs_art[:p] = sign[:p] < 0
    art_rows = np.flatnonzero(needs_art)
    ncols = nv + p + art_rows.size
    T = np.zeros((R + 1, ncols + 1))
    T[:R, : nv + p] = M
    T[art_rows, nv + p + np.arange(art_rows.size)] = 1.0
    T[:R, -1] = b
    basis = np.empty(R, dtype=int)
    basis[:p] = nv + np.arange(p)
    basis[art_rows] = nv + p + np.arange(art_rows.size)

    tab = _Tableau(T, basis, tol, max_iter)
    is_art = np.zeros(ncols, dtype=bool)
    is_art[nv + p:] = True
    if art_rows.size:
        T[-1, :] = -T[art_rows, :].sum(axis=0)
        T[-1, :-1][is_art] = 0.0
        tab.run(np.ones(ncols, dtype=bool))
        infeas = -T[-1, -1]
        if infeas > tol * max(1.0, float(np.abs(b).max(initial=0.0))) * 10:
            raise InfeasibleError(f"LP is infeasible (phase-one residual {infeas:.3g})")
        # drive remaining artificials out of the basis or drop their rows
        keep = np.ones(R, dtype=bool)
        for r in range(R):
            if is_art[tab.basis[r]]:
                cand = np.flatnonzero((np.abs(T[r, :-1]) > tol) & ~is_art)
                if cand.size:
                    tab.pivot(r, int(cand[0]))
                else:
                    keep[r] = False
        rows = np.concatenate([np.flatnonzero(keep), [R]])
        T = T[rows][:, np.concatenate([np.flatnonzero(~is_art), [ncols]])]
        tab.T = T
        tab.basis = tab.basis[keep]
    else:
        keep = np.ones(R, dtype=bool)
        T = T[:, np.concatenate([np.arange(nv + p), [ncols]])]
        tab.T = T

    cost = np.concatenate([cc, np.zeros(p)])
    cB = cost[tab.basis]
    T[-1, :-1] = cost - cB @ T[:-1, :-1]
    T[-1, -1] = -cB @ T[:-1, -1]
    tab.run(np.ones(nv + p, dtype=bool))

    z = np.zeros(nv + p)
    z[tab.basis] = T[:-1, -1]
    x = z[:n].copy()
    x[free_idx] -= z[n:nv]
    objective = float(c @ x)

    # duals from B^T y = c_B on the (sign-normalized) original columns
    kept = np.flatnonzero(keep)
    y = np.zeros(R)
    if kept.size:
        B = M[kept][:, tab.basis]
        try:
            y[kept] = np.linalg.solve(B.T, cost[tab.basis])
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular final basis: {exc}") from exc
    y *= sign
    return LPResult(x, objective, y[:p], y[p:], tab.iterations, "simplex")


def highs(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, free=None) -> LPResult:
    """Same contract as :func:`simplex`, solved by HiGHS."""
    c = np.asarray(c, dtype=float).ravel()
    bounds = [(0, None)] * c.size
    for j in free or ():
        bounds[j] = (None, None)
    res = scipy.optimize.linprog(
        c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs"
    )
    if res.status == 2:
        raise InfeasibleError(f"LP is infeasible: {res.message}")
    if res.status == 3:
        raise UnboundedError(f"LP is unbounded: {res.message}")
    if res.status != 0:
        raise SolverError(f"HiGHS failed (status {res.status}): {res.message}")
    duals_ub = np.asarray(res.ineqlin.marginals) if A_ub is not None else np.zeros(0)
    duals_eq = np.asarray(res.eqlin.marginals) if A_eq is not None else np.zeros(0)
    return LPResult(np.asarray(res.x), float(res.fun), duals_ub, duals_eq, int(res.nit), "highs")


@dataclass(frozen=True)
class ExactLPResult:
    x: list[Fraction]
    duals: list[Fraction]
    objective: Fraction
    iterations: int


def exact_simplex_max(c, A, b, basis=None, max_iter: int = 100_000) -> ExactLPResult:
    """Maximize ``c @ x`` s.t. ``A x <= b``, ``x >= 0`` in rational arithmetic.

    Requires ``b >= 0`` so the slack basis is feasible.  ``basis`` may list
    structural columns to pivot in first (a warm start, e.g. the support of
    a floating-point optimum); it is dropped if the resulting basis is not
    feasible.  Bland's rule guarantees termination.  ``duals`` are the
    nonnegative row prices, so ``objective == duals @ b`` at the optimum.
    """
    rows, ncol = len(A), len(c)
    rhs = [Fraction(v) for v in b]
    if any(v < 0 for v in rhs):
        raise SolverError("exact simplex needs a nonnegative right-hand side")
    width = ncol + rows
    T = [
        [Fraction(a) for a in A[r]] + [Fraction(int(k == r)) for k in range(rows)] + [rhs[r]]
        for r in range(rows)
    ]
    z = [Fraction(v) for v in c] + [Fraction(0)] * (rows + 1)
    bas = [ncol + r for r in range(rows)]

    def pivot(r: int, j: int) -> None:
        inv = 1 / T[r][j]
        T[r] = [a * inv for a in T[r]]
        for i in range(rows):
            if i != r and T[i][j]:
                f = T[i][j]
                T[i] = [a - f * p for a, p in zip(T[i], T[r])]
        if z[j]:
            f = z[j]
            z[:] = [a - f * p for a, p in zip(z, T[r])]
        bas[r] = j

    if basis:
        saved = ([row[:] for row in T], z[:], bas[:])
        for j in basis:
            r = next((i for i in range(rows) if bas[i] >= ncol and T[i][j] != 0), None)
            if r is not None:
                pivot(r, j)
        if any(row[-1] < 0 for row in T):
            T, z, bas = [row[:] for row in saved[0]], saved[1][:], saved[2][:]

    for it in range(max_iter):
        j = next((k for k in range(width) if z[k] > 0), None)
        if j is None:
            break
        best = None
        for r in range(rows):
            if T[r][j] > 0:
                key = (T[r][-1] / T[r][j], bas[r])
                if best is None or key < best[0]:
                    best = (key, r)
        if best is None:
            raise UnboundedError("exact LP is unbounded")
        pivot(best[1], j)
    else:
        raise SolverError(f"exact simplex hit the iteration limit ({max_iter})")
    x = [Fraction(0)] * ncol
    for r in range(rows):
        if bas[r] < ncol:
            x[bas[r]] = T[r][-1]
    duals = [-z[ncol + r] for r in range(rows)]
    return ExactLPResult(x, duals, -z[-1], it)
