"""Degree distributions and asymptotic LT analytics.

Continuous-``x`` constraints are evaluated on a uniform grid ``k * grid_step``
(``x = 0`` excluded, the right endpoint always included); the strict inequality
of the ripple condition is taken as ``>=`` on that grid, so suprema become maxima.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DeadChannel, UnsupportedDemand, UsageError

DEFAULT_GRID_STEP = 1e-3
SUM_TOL = 1e-9
ROUNDOFF = 1e-12


class DegreeDistribution:
    """Probabilities ``p_1..p_dmax`` of a coded-packet degree (``probs[j-1] = p_j``)."""

    __slots__ = ("probs", "_cdf")

    def __init__(self, probs):
        p = np.asarray(probs, dtype=float).ravel()
        if p.size == 0:
            raise UsageError("degree distribution needs dmax >= 1")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise UsageError("degree probabilities must be finite and nonnegative")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise UsageError(f"degree probabilities sum to {p.sum():.12g}, not 1")
        # trailing zeros carry no information
        last = int(np.flatnonzero(p)[-1]) + 1
        self.probs = p[:last].copy()
        self.probs.setflags(write=False)
        self._cdf = None

    @classmethod
    def from_mapping(cls, mapping):
        """Build from ``{degree: probability}`` (keys may be strings, as in JSON)."""
        items = {int(k): float(v) for k, v in mapping.items()}
        if not items or min(items) < 1:
            raise UsageError("degrees must be integers >= 1")
        p = np.zeros(max(items))
        for d, v in items.items():
            p[d - 1] = v
        return cls(p)

    @classmethod
    def point_mass(cls, degree):
        p = np.zeros(degree)
        p[degree - 1] = 1.0
        return cls(p)

    @classmethod
    def normalized(cls, weights, dust=1e-6):
        """Normalize nonnegative weights, zeroing entries below ``dust`` and renormalizing."""
        w = np.clip(np.asarray(weights, dtype=float), 0.0, None)
        if w.sum() <= 0:
            raise UsageError("weights have no positive mass")
        p = w / w.sum()
        p[p < dust] = 0.0
        return cls(p / p.sum())

    @property
    def dmax(self):
        return self.probs.size

    def p(self, degree):
        return float(self.probs[degree - 1]) if 1 <= degree <= self.dmax else 0.0

    def mean(self):
        return float(np.dot(np.arange(1, self.dmax + 1), self.probs))

    def cdf(self):
        if self._cdf is None:
            c = np.cumsum(self.probs)
            c[-1] = 1.0
            self._cdf = c
        return self._cdf

    def evaluate(self, x):
        # P(x) = sum_j p_j x^j
        coeffs = np.concatenate(([0.0], self.probs))
        return np.polynomial.polynomial.polyval(x, coeffs)

    def derivative(self, x):
        # P'(x) = sum_j j p_j x^(j-1)
        coeffs = self.probs * np.arange(1, self.dmax + 1)
        return np.polynomial.polynomial.polyval(x, coeffs)

    def to_mapping(self):
        return {j + 1: float(v) for j, v in enumerate(self.probs) if v > 0}

    def __eq__(self, other):
        return isinstance(other, DegreeDistribution) and np.array_equal(self.probs, other.probs)

    def __repr__(self):
        terms = " + ".join(f"{v:.4f}x^{j}" for j, v in self.to_mapping().items())
        return f"DegreeDistribution({terms})"


def parse_fraction(value):
    """Accept floats, ints, or ``"a/b"`` strings."""
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"not a number or fraction: {value!r}") from exc
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise UsageError(f"not a number: {value!r}")
    return float(value)


@dataclass(frozen=True)
class User:
    z: float
    eps: float
    label: str = ""

    def __post_init__(self):
        if not 0 < self.z <= 1:
            raise UsageError(f"demand z={self.z} outside (0, 1]")
        if not 0 <= self.eps < 1:
            raise UsageError(f"erasure rate eps={self.eps} outside [0, 1)")


@dataclass(frozen=True)
class Scenario:
    N: int
    users: tuple
    payload_bytes: int = 32

    def __post_init__(self):
        if self.N < 1:
            raise UsageError("N must be >= 1")
        if self.payload_bytes < 0:
            raise UsageError("payload_bytes must be >= 0")
        users = tuple(u if isinstance(u, User) else User(*u) for u in self.users)
        if not users:
            raise UsageError("scenario needs at least one user")
        object.__setattr__(self, "users", users)

    @property
    def z_max(self):
        return max(u.z for u in self.users)

    def demand_count(self, i):
        """Packets user ``i`` must decode: ceil(z_i * N), robust to float noise."""
        return min(self.N, math.ceil(self.users[i].z * self.N - 1e-9))

    def with_user(self, i, **changes):
        users = list(self.users)
        u = users[i]
        users[i] = User(changes.get("z", u.z), changes.get("eps", u.eps), changes.get("label", u.label))
        return Scenario(self.N, tuple(users), self.payload_bytes)


@dataclass(frozen=True)
class AnalysisResult:
    t: tuple
    scheme: str = ""

    @property
    def t0(self):
        return max(self.t)


def _check_rate(eps):
    if eps >= 1:
        raise DeadChannel(f"erasure rate {eps} leaves nothing to receive")
    if eps < 0:
        raise UsageError(f"erasure rate {eps} < 0")


def _check_demand(z):
    if z >= 1:
        raise UnsupportedDemand("z = 1 is not reachable by the asymptotic ripple condition")
    if z <= 0:
        raise UsageError(f"demand z={z} must be positive")


def grid_points(lo, hi, step):
    """Grid ``k * step`` strictly inside ``(lo, hi)``, followed by ``hi`` itself."""
    if step <= 0:
        raise UsageError("grid_step must be positive")
    k0 = math.floor(lo / step + 1e-9) + 1
    k1 = math.ceil(hi / step - 1e-9) - 1
    pts = np.arange(k0, k1 + 1, dtype=float) * step if k1 >= k0 else np.empty(0)
    pts = pts[(pts > lo + 1e-12) & (pts < hi - 1e-12)]
    return np.append(pts, hi)


def mgf_derivative(dist, x):
    if not 0 <= x <= 1:
        raise UsageError(f"x={x} outside [0, 1]")
    return float(dist.derivative(x))


def expected_ripple(dist, v, u):
    """Normalized expected ripple ``u (v P'(1-u) + ln u)`` with ``u`` still unrecovered."""
    if not 0 < u <= 1:
        raise UsageError(f"unrecovered fraction u={u} outside (0, 1]")
    if v < 0:
        raise UsageError("received count must be nonnegative")
    return u * (v * float(dist.derivative(1.0 - u)) + math.log(u))


def _max_ratio(num, den, scale):
    if np.any((den <= 0) & (num > 0)):
        return math.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(num > 0, num / (scale * den), 0.0)
    return float(ratio.max())


def lt_delivery_time(dist, z, eps, grid_step=DEFAULT_GRID_STEP):
    """Normalized transmissions until the ripple condition holds on (0, z]."""
    _check_demand(z)
    _check_rate(eps)
    x = grid_points(0.0, z, grid_step)
    return _max_ratio(-np.log1p(-x), dist.derivative(x), 1.0 - eps)


def systematic_delivery_time(dist, z, eps, grid_step=DEFAULT_GRID_STEP):
    """Delivery time with one uncoded round first, then parity packets drawn from ``dist``."""
    _check_demand(z)
    _check_rate(eps)
    if z <= 1.0 - eps:
        return z / (1.0 - eps)
    # below 1 - eps the condition holds for every P since ln(1-x) >= ln eps
    x = grid_points(1.0 - eps, z, grid_step)
    num = -np.log1p(-x) + math.log(eps)
    return 1.0 + _max_ratio(num, dist.derivative(x), 1.0 - eps)


def recovery_grid(grid_step):
    k = math.ceil(1.0 / grid_step - 1e-9)
    return np.arange(1, k, dtype=float) * grid_step


def _failing(x, g):
    # '>=' on the grid, with slack for roundoff when t sits exactly on a tangent point
    return g < -ROUNDOFF * (1.0 - np.log1p(-x))


def _first_crossing(x, g):
    """Root of the first sign change of ``g`` along ``x`` (linear interpolation)."""
    fail = np.flatnonzero(_failing(x, g))
    if fail.size == 0:
        return float(x[-1])
    k = int(fail[0])
    if k == 0:
        return 0.0
    g0, g1 = g[k - 1], g[k]
    return float(x[k - 1] + (x[k] - x[k - 1]) * g0 / (g0 - g1))


def lt_recoverable_fraction(dist, t, eps, grid_step=DEFAULT_GRID_STEP):
    """Largest fraction whose ripple condition holds at ``t`` normalized transmissions.

    The scan stops at the first failing grid point; the crossing inside that
    last cell is located by linear interpolation.
    """
    _check_rate(eps)
    if t < 0:
        raise UsageError("t must be nonnegative")
    if t == 0:
        return 0.0
    x = recovery_grid(grid_step)
    g = (1.0 - eps) * t * dist.derivative(x) + np.log1p(-x)
    if _failing(x[:1], g[:1])[0]:
        # condition already fails inside the first cell; g(0) = (1-eps) t p_1 >= 0
        g0 = (1.0 - eps) * t * dist.p(1)
        return float(x[0] * g0 / (g0 - g[0])) if g0 > 0 else 0.0
    return _first_crossing(x, g)


def recoverable_fraction_curve(prob_rows, t_values, eps, grid_step=DEFAULT_GRID_STEP):
    """Vectorized ``lt_recoverable_fraction`` for one distribution per ``t`` value.

    ``prob_rows`` has shape ``(T, dmax)`` with row ``r`` holding ``p_1..p_dmax``.
    """
    _check_rate(eps)
    prob_rows = np.atleast_2d(np.asarray(prob_rows, dtype=float))
    t_values = np.asarray(t_values, dtype=float)
    x = recovery_grid(grid_step)
    d = prob_rows.shape[1]
    powers = x[None, :] ** np.arange(d)[:, None]  # (d, G)
    deriv = (prob_rows * np.arange(1, d + 1)) @ powers  # (T, G)
    g = (1.0 - eps) * t_values[:, None] * deriv + np.log1p(-x)[None, :]
    out = np.zeros(len(t_values))
    neg = _failing(x[None, :], g)
    any_fail = neg.any(axis=1)
    first = np.where(any_fail, neg.argmax(axis=1), len(x) - 1)
    for r in range(len(t_values)):
        if t_values[r] <= 0:
            continue
        if not any_fail[r]:
            out[r] = x[-1]
            continue
        k = first[r]
        if k == 0:
            g0 = (1.0 - eps) * t_values[r] * prob_rows[r, 0]
            out[r] = x[0] * g0 / (g0 - g[r, 0]) if g0 > 0 else 0.0
        else:
            g0, g1 = g[r, k - 1], g[r, k]
            out[r] = x[k - 1] + (x[k] - x[k - 1]) * g0 / (g0 - g1)
    return out


class SideInfoTransform:
    """Degree generating function after removing packets already held as side information.

    A packet of degree ``d`` keeps each neighbour independently with probability
    ``eps`` (the neighbours not received uncoded), so ``P_hat(x) = P(1 - eps + eps x)``.
    """

    def __init__(self, dist, eps):
        if not 0 <= eps <= 1:
            raise UsageError(f"eps={eps} outside [0, 1]")
        self.dist = dist
        self.eps = eps

    def _inner(self, x):
        return 1.0 - self.eps + self.eps * np.asarray(x, dtype=float)

    def evaluate(self, x):
        return self.dist.evaluate(self._inner(x))

    def derivative(self, x):
        return self.eps * self.dist.derivative(self._inner(x))


def side_info_transform(dist, eps):
    return SideInfoTransform(dist, eps)


def coupon_collector_time(z):
    """Normalized draws (with replacement) to see a fraction ``z`` of distinct items."""
    if z < 0:
        raise UsageError("z must be nonnegative")
    if z >= 1:
        return math.inf
    return -math.log1p(-z)


def lt_analysis(dist, scenario, systematic=False, grid_step=DEFAULT_GRID_STEP):
    fn = systematic_delivery_time if systematic else lt_delivery_time
    t = tuple(fn(dist, u.z, u.eps, grid_step) for u in scenario.users)
    return AnalysisResult(t, "lt-sys" if systematic else "lt")
