"""Growth codes: degree-1 packets first, then degree 2, 3, ... on a fixed schedule.

Phase ``j`` nominally lasts ``A_j`` packets. Each phase is stretched by a scale
factor (``1/(1-eps)`` matches one user's channel), and after phase ``m`` the
stream switches to the cumulative distribution ``p_j = A_j / sum_{i<=m} A_i``.
Decoding is the LT peeling decoder.
"""

import bisect
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .degree_model import (
    DEFAULT_GRID_STEP,
    DegreeDistribution,
    lt_recoverable_fraction,
    recoverable_fraction_curve,
)
from .errors import UsageError
from .kernels import Xorshift64Star, mix
from .lt_codec import lt_packet, sample_degree


def growth_phase_lengths(N):
    """``A_1..A_{N-1}``; the probability that a degree-``j`` packet is immediately
    useful with ``s`` packets decoded is ``C(s, j-1) (N-s) / C(N, j)``."""
    if N < 2:
        raise UsageError("growth codes need N >= 2")
    out = np.zeros(N - 1)
    prev = -1  # floor(R_0) with R_0 = -1
    for j in range(1, N):
        hi = (j * N - 1) // (j + 1)
        cnj = math.comb(N, j)
        total = 0.0
        for s in range(prev + 1, hi + 1):
            total += cnj / (math.comb(s, j - 1) * (N - s))
        out[j - 1] = total
        prev = hi
    return out


@lru_cache(maxsize=64)
def _phase_lengths_cached(N):
    a = growth_phase_lengths(N)
    a.setflags(write=False)
    return a


def fallback_stage(z_max, N):
    if z_max >= 1:
        return N - 1
    return min(N - 1, max(1, math.ceil(1.0 / (1.0 - z_max) - 1e-9)))


@dataclass(frozen=True)
class GrowthSchedule:
    N: int
    phase_lengths: np.ndarray
    scale: float
    fallback_m: int
    fallback_dist: DegreeDistribution
    # ends[j-1]: first transmission index after phase j (j = 1..m)
    ends: tuple

    @property
    def scheduled_length(self):
        return self.ends[-1]

    def degree_at(self, t):
        """Scheduled degree of packet ``t``, or ``None`` once the fallback phase begins."""
        if t >= self.ends[-1]:
            return None
        return bisect.bisect_right(self.ends, t) + 1

    def degree_histogram(self, count):
        """Expected degree counts among the first ``count`` packets."""
        m = self.fallback_m
        hist = np.zeros(m)
        start = 0
        for j, end in enumerate(self.ends):
            hist[j] = max(0, min(count, end) - start)
            start = end
        if count > self.ends[-1]:
            fb = self.fallback_dist.probs
            hist[: fb.size] += (count - self.ends[-1]) * fb
        return hist


def growth_schedule(N, scale, z_max):
    if scale < 1:
        raise UsageError("scale must be >= 1")
    a = _phase_lengths_cached(N)
    m = fallback_stage(z_max, N)
    ends = tuple(int(v) for v in np.floor(scale * np.cumsum(a[:m]) + 1e-9))
    head = a[:m]
    return GrowthSchedule(N, a, float(scale), m, DegreeDistribution(head / head.sum()), ends)


def growth_degree(schedule, master_seed, t):
    d = schedule.degree_at(t)
    if d is None:
        d = sample_degree(schedule.fallback_dist, Xorshift64Star(mix(master_seed, t)))
    return d


def growth_encode_next(schedule, master_seed, payloads, t):
    size = len(payloads[0]) if payloads else 0
    return lt_packet(master_seed, t, growth_degree(schedule, master_seed, t), schedule.N, payloads, size)


def _received_dist(schedule, count):
    hist = schedule.degree_histogram(count)
    return DegreeDistribution(hist / hist.sum())


def growth_analytic_recovery(schedule, t, eps, grid_step=DEFAULT_GRID_STEP):
    """Recoverable fraction after ``t`` normalized transmissions.

    Erasures thin the stream uniformly, so the received degree mix equals the
    sent mix of the first ``floor(t N)`` packets.
    """
    if t < 0:
        raise UsageError("t must be nonnegative")
    count = math.floor(t * schedule.N + 1e-9)
    if count == 0:
        return 0.0
    return lt_recoverable_fraction(_received_dist(schedule, count), t, eps, grid_step)


def growth_recovery_curve(schedule, t_values, eps, grid_step=DEFAULT_GRID_STEP):
    t_values = np.asarray(t_values, dtype=float)
    counts = np.floor(t_values * schedule.N + 1e-9).astype(int)
    rows = np.array([schedule.degree_histogram(c) for c in np.maximum(counts, 1)])
    rows /= rows.sum(axis=1, keepdims=True)
    out = recoverable_fraction_curve(rows, t_values, eps, grid_step)
    out[counts == 0] = 0.0
    return out


def growth_delivery_time(schedule, z, eps, grid_step=DEFAULT_GRID_STEP, t_cap=50.0, t_step=0.01):
    """First normalized time (a multiple of 1/N) whose predicted recovery reaches ``z``."""
    N = schedule.N
    block = 400
    lo_t = 0.0
    while lo_t < t_cap:
        # whole packet counts, so the bracket ends are exact evaluations
        ts = np.unique(np.ceil((lo_t + t_step * np.arange(1, block + 1)) * N - 1e-9)) / N
        ts = ts[ts <= t_cap + 1e-12]
        if ts.size == 0:
            break
        curve = growth_recovery_curve(schedule, ts, eps, grid_step)
        hit = np.flatnonzero(curve >= z)
        if hit.size:
            k_hi = math.floor(ts[hit[0]] * N + 1e-9)
            k_lo = math.floor((ts[hit[0] - 1] if hit[0] else lo_t) * N + 1e-9)
            # bisect on packet count inside the bracket
            while k_hi - k_lo > 1:
                mid = (k_lo + k_hi) // 2
                if growth_analytic_recovery(schedule, mid / N, eps, grid_step) >= z:
                    k_hi = mid
                else:
                    k_lo = mid
            return k_hi / N
        lo_t = ts[-1]
    return math.inf


@lru_cache(maxsize=4096)
def _server_time(N, scale, z_max, users, grid_step, t_cap):
    sched = growth_schedule(N, scale, z_max)
    return max(growth_delivery_time(sched, z, eps, grid_step, t_cap) for z, eps in users)


def growth_server_time(scenario, scale, grid_step=DEFAULT_GRID_STEP, t_cap=50.0):
    users = tuple((u.z, u.eps) for u in scenario.users)
    return _server_time(scenario.N, round(float(scale), 12), scenario.z_max, users, grid_step, t_cap)


def best_scale(scenario, scale_grid_step=0.01, grid_step=DEFAULT_GRID_STEP, t_cap=50.0):
    """Grid search of the scale factor over ``[1/(1-eps_min), 1/(1-eps_max)]``."""
    eps = [u.eps for u in scenario.users]
    lo, hi = 1.0 / (1.0 - min(eps)), 1.0 / (1.0 - max(eps))
    count = max(1, math.floor((hi - lo) / scale_grid_step + 1e-9))
    scales = np.unique(np.append(lo + scale_grid_step * np.arange(count + 1), hi))
    scales = scales[scales <= hi + 1e-12]
    best = (lo, math.inf)
    for s in scales:
        t = growth_server_time(scenario, float(s), grid_step, t_cap)
        if t < best[1]:
            best = (float(s), t)
    return best
