"""Degree-distribution design: LPs minimizing server delivery time.

With ``a_j = t p_j`` (or ``(t - 1) p_j`` after an uncoded round) the ripple
condition of every user becomes linear in ``a``:
``sum_j j a_j x^(j-1) >= rhs_i(x)`` on each user's grid, and the objective is
``sum_j a_j``. The LP is handed to the simplex in its dual form (``dmax``
constraints instead of one per grid point); the primal ``a`` is read off the
dual prices.

The ripple condition also has to hold at ``x = 0``, where it reads
``(1 - eps_i) a_1 > 0``: without degree-1 packets peeling never starts. On a
finite stream this is imposed as ``(1 - eps_i) a_1 N >= min_degree_one``, i.e.
every user expects at least that many degree-1 arrivals; the row vanishes as
``N`` grows, leaving the asymptotic optimum unchanged.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .degree_model import (
    DEFAULT_GRID_STEP,
    DegreeDistribution,
    Scenario,
    grid_points,
    lt_delivery_time,
    systematic_delivery_time,
)
from .errors import SolverError, UnsupportedDemand, UsageError
from .simplex import simplex

DUST = 1e-6
DEFAULT_MIN_DEGREE_ONE = 8.0


def dmax_for(z_max):
    """Highest degree an optimal distribution ever needs for demands up to ``z_max``."""
    if z_max >= 1:
        raise UnsupportedDemand("z_max = 1 admits no finite maximum degree")
    if z_max <= 0:
        raise UsageError("z_max must be positive")
    return max(1, math.ceil(1.0 / (1.0 - z_max) - 1e-9) - 1)


@dataclass
class LpProblem:
    var_count: int
    systematic: bool
    A: np.ndarray  # (rows, var_count): j x^(j-1)
    rhs: np.ndarray
    row_user: np.ndarray
    row_x: np.ndarray
    grid_step: float = DEFAULT_GRID_STEP

    @property
    def objective(self):
        return np.ones(self.var_count)

    @property
    def row_count(self):
        return self.rhs.size


@dataclass
class OptimizationResult:
    t0: float
    dist: DegreeDistribution
    dmax_used: int
    systematic: bool
    a: np.ndarray
    # (user index, x) of constraints tight at the optimum
    binding: list = field(default_factory=list)
    iterations: int = 0


def build_lp(scenario: Scenario, systematic=False, grid_step=DEFAULT_GRID_STEP, dmax_override=None,
             min_degree_one=DEFAULT_MIN_DEGREE_ONE):
    for u in scenario.users:
        if u.z >= 1:
            raise UnsupportedDemand("LT design needs every z < 1")
    d = dmax_override if dmax_override is not None else dmax_for(scenario.z_max)
    if d < 1:
        raise UsageError("dmax must be >= 1")
    blocks, rhs, who, xs = [], [], [], []
    powers = np.arange(d)
    for i, u in enumerate(scenario.users):
        if systematic:
            if u.z <= 1.0 - u.eps:
                continue
            x = grid_points(1.0 - u.eps, u.z, grid_step)
            r = (-np.log1p(-x) + math.log(u.eps)) / (1.0 - u.eps)
        else:
            x = grid_points(0.0, u.z, grid_step)
            r = -np.log1p(-x) / (1.0 - u.eps)
        blocks.append((powers + 1) * x[:, None] ** powers)
        rhs.append(r)
        who.append(np.full(x.size, i))
        xs.append(x)
        if not systematic and min_degree_one > 0:
            # x = 0 row: only the degree-1 coefficient survives
            row = np.zeros((1, d))
            row[0, 0] = 1.0
            blocks.append(row)
            rhs.append(np.array([min_degree_one / ((1.0 - u.eps) * scenario.N)]))
            who.append(np.array([i]))
            xs.append(np.array([0.0]))
    if blocks:
        A = np.vstack(blocks)
        return LpProblem(d, systematic, A, np.concatenate(rhs), np.concatenate(who), np.concatenate(xs), grid_step)
    return LpProblem(d, systematic, np.zeros((0, d)), np.zeros(0), np.zeros(0, int), np.zeros(0), grid_step)


def solve_lp(problem: LpProblem):
    d = problem.var_count
    base = 1.0 if problem.systematic else 0.0
    if problem.row_count == 0:
        return OptimizationResult(base, DegreeDistribution.point_mass(1), 1, problem.systematic, np.zeros(d))
    # dual: max rhs.y  s.t.  A^T y <= 1, y >= 0
    res = simplex(-problem.rhs, A_ub=problem.A.T, b_ub=np.ones(d))
    a = np.clip(-res.marginals, 0.0, None)
    lhs = problem.A @ a
    slack = lhs - problem.rhs
    if slack.min() < -1e-7 * max(1.0, problem.rhs.max()):
        raise SolverError(f"recovered primal violates a constraint by {-slack.min():.3g}")
    total = float(a.sum())
    if total <= 0:
        raise SolverError("optimal degree weights vanished")
    tight = np.flatnonzero(res.x > 1e-12)
    binding = [(int(problem.row_user[k]), float(problem.row_x[k])) for k in tight]
    dist = DegreeDistribution.normalized(a, dust=DUST)
    return OptimizationResult(base + total, dist, dist.dmax, problem.systematic, a, binding, res.iterations)


def server_delivery_time(dist, scenario, systematic=False, grid_step=DEFAULT_GRID_STEP):
    fn = systematic_delivery_time if systematic else lt_delivery_time
    return max(fn(dist, u.z, u.eps, grid_step) for u in scenario.users)


def optimize_scenario(scenario, systematic=False, grid_step=DEFAULT_GRID_STEP, dmax_override=None,
                      min_degree_one=DEFAULT_MIN_DEGREE_ONE):
    problem = build_lp(scenario, systematic, grid_step, dmax_override, min_degree_one)
    result = solve_lp(problem)
    if problem.row_count == 0:
        # every demand fits inside the uncoded round
        result.t0 = max(u.z / (1.0 - u.eps) for u in scenario.users)
        return result
    # the normalized (dust-pruned) distribution must meet every demand by t0
    check = server_delivery_time(result.dist, scenario, systematic, grid_step)
    if not math.isfinite(check) or check > result.t0 + 1e-4 * max(1.0, result.t0):
        raise SolverError(f"LP optimum {result.t0:.6f} disagrees with re-analysis {check:.6f}")
    return result
