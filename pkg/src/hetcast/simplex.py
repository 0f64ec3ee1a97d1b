"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves ``min c.x  s.t.  A_ub x <= b_ub, A_eq x = b_eq, x >= 0``. Intended for
small problems where robustness matters more than speed. Pricing is Dantzig's
most-negative reduced cost while the objective keeps improving; after
``DEGENERATE_LIMIT`` pivots without progress it switches to Bland's
smallest-index rule until the objective moves again.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SolverError

TOL = 1e-10
DEGENERATE_LIMIT = 20


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    # c_B B^-1 per constraint row (ub rows first, then eq rows); <= 0 on binding ub rows
    marginals: np.ndarray
    basis: np.ndarray
    iterations: int


def _pivot(T, row, col):
    T[row] /= T[row, col]
    piv = T[row]
    colv = T[:, col].copy()
    colv[row] = 0.0
    nz = np.flatnonzero(np.abs(colv) > 0)
    T[nz] -= np.outer(colv[nz], piv)


def _run(T, basis, allowed, max_iter):
    """Pivot on tableau ``T`` (last row: reduced costs) until optimal."""
    m = T.shape[0] - 1
    it = 0
    stalled = 0
    while True:
        cost = T[-1, :-1]
        cand = np.flatnonzero((cost < -TOL) & allowed)
        if cand.size == 0:
            return it
        if stalled >= DEGENERATE_LIMIT:
            col = int(cand[0])
        else:
            col = int(cand[np.argmin(cost[cand])])
        colv = T[:m, col]
        pos = np.flatnonzero(colv > TOL)
        if pos.size == 0:
            raise SolverError("linear program is unbounded")
        ratios = T[pos, -1] / colv[pos]
        best = ratios.min()
        ties = pos[ratios <= best + TOL * max(1.0, abs(best))]
        row = int(ties[np.argmin(basis[ties])])
        before = T[-1, -1]
        _pivot(T, row, col)
        stalled = stalled + 1 if abs(T[-1, -1] - before) <= TOL * max(1.0, abs(before)) else 0
        basis[row] = col
        it += 1
        if it > max_iter:
            raise SolverError("simplex iteration limit reached")


def simplex(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_iter=100_000):
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    mu, me = A_ub.shape[0], A_eq.shape[0]
    m = mu + me

    # columns: structural | slacks (one per ub row) | artificials (one per row needing one)
    sign = np.where(b_ub < 0, -1.0, 1.0)
    need_art = np.concatenate((b_ub < 0, np.ones(me, dtype=bool)))
    art_rows = np.flatnonzero(need_art)
    na = art_rows.size
    width = n + mu + na
    T = np.zeros((m + 1, width + 1))
    T[:mu, :n] = A_ub * sign[:, None]
    T[:mu, n:n + mu] = np.diag(sign)
    T[:mu, -1] = b_ub * sign
    eq_sign = np.where(b_eq < 0, -1.0, 1.0)
    T[mu:m, :n] = A_eq * eq_sign[:, None]
    T[mu:m, -1] = b_eq * eq_sign
    basis = np.empty(m, dtype=int)
    basis[:mu] = n + np.arange(mu)
    for k, r in enumerate(art_rows):
        T[r, n + mu + k] = 1.0
        basis[r] = n + mu + k

    iterations = 0
    allowed = np.ones(width, dtype=bool)
    if na:
        # phase 1: minimize the sum of artificials
        T[-1, :] = 0.0
        T[-1, n + mu:width] = 1.0
        for r in art_rows:
            T[-1] -= T[r]
        iterations += _run(T, basis, allowed, max_iter)
        if -T[-1, -1] > 1e-8 * max(1.0, np.abs(T[:m, -1]).max(initial=0.0)):
            raise SolverError("linear program is infeasible")
        for r in range(m):
            if basis[r] >= n + mu:
                nz = np.flatnonzero(np.abs(T[r, : n + mu]) > TOL)
                if nz.size:
                    _pivot(T, r, int(nz[0]))
                    basis[r] = int(nz[0])
        allowed[n + mu:] = False

    # phase 2 with the true costs
    cost = np.zeros(width + 1)
    cost[:n] = c
    T[-1] = cost
    for r in range(m):
        if cost[basis[r]] != 0.0:
            T[-1] -= cost[basis[r]] * T[r]
    iterations += _run(T, basis, allowed, max_iter)

    x = np.zeros(width)
    x[basis] = T[:m, -1]
    # reduced cost of a unit column e_r is -pi_r; recover duals for the original rows
    pi = np.zeros(m)
    pi[:mu] = -T[-1, n:n + mu]
    for k, r in enumerate(art_rows):
        if r >= mu:
            pi[r] = -T[-1, n + mu + k] * eq_sign[r - mu]
    return SimplexResult(x[:n].copy(), float(c @ x[:n]), pi, basis.copy(), iterations)
