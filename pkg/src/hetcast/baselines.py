"""Reference delivery times: lower bound, separate unicasts, time-shared degraded message sets."""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BaselineReport:
    lower_bound: float
    unicast_total: float
    timeshare: float


def _rate_time(z, eps):
    return math.inf if eps >= 1 else z / (1.0 - eps)


def lower_bound(scenario):
    return max(_rate_time(u.z, u.eps) for u in scenario.users)


def unicast_total(scenario):
    return sum(_rate_time(u.z, u.eps) for u in scenario.users)


def timeshare_delivery(scenario):
    """Layer ``i`` holds demands ``(z_{i-1}, z_i]`` and is coded at rate ``1 - max_{j>=i} eps_j``."""
    users = sorted(scenario.users, key=lambda u: (u.z, -u.eps))
    total, prev = 0.0, 0.0
    for i, u in enumerate(users):
        worst = max(v.eps for v in users[i:])
        width = u.z - prev
        if width > 0:
            if worst >= 1:
                return math.inf
            total += width / (1.0 - worst)
        prev = u.z
    return total


def baseline_report(scenario):
    return BaselineReport(lower_bound(scenario), unicast_total(scenario), timeshare_delivery(scenario))
