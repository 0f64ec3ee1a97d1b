"""Regularized incomplete gamma and adaptive Simpson quadrature."""

import math

from .errors import UsageError

_EPS = 1e-16
_FPMIN = 1e-300
_MAX_ITER = 10_000


def _prefactor(a, x):
    return math.exp(-x + a * math.log(x) - math.lgamma(a))


def _series(a, x):
    ap = a
    term = total = 1.0 / a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * _prefactor(a, x)
    raise ArithmeticError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _continued_fraction(a, x):
    # modified Lentz
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return _prefactor(a, x) * h
    raise ArithmeticError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")


def gamma_pq(a, x):
    """``(P(a, x), Q(a, x))``, each computed directly where it is the small one."""
    if a <= 0:
        raise UsageError("a must be positive")
    if x < 0:
        raise UsageError("x must be nonnegative")
    if x == 0:
        return 0.0, 1.0
    if x < a + 1.0:
        p = _series(a, x)
        return p, 1.0 - p
    q = _continued_fraction(a, x)
    return 1.0 - q, q


def gammaincc(a, x):
    return gamma_pq(a, x)[1]


def adaptive_simpson(f, a, b, tol=1e-8, panels=16, max_depth=48):
    """Integrate ``f`` on ``[a, b]``; local errors use the Richardson estimate."""
    if b <= a:
        return 0.0
    total = 0.0
    width = (b - a) / panels
    local_tol = tol / panels
    for p in range(panels):
        lo = a + p * width
        hi = lo + width
        flo, fhi = f(lo), f(hi)
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        whole = (hi - lo) * (flo + 4.0 * fmid + fhi) / 6.0
        stack = [(lo, hi, flo, fmid, fhi, whole, local_tol, 0)]
        while stack:
            lo_, hi_, fa, fm, fb, s, eps, depth = stack.pop()
            m = 0.5 * (lo_ + hi_)
            lm, rm = 0.5 * (lo_ + m), 0.5 * (m + hi_)
            flm, frm = f(lm), f(rm)
            left = (m - lo_) * (fa + 4.0 * flm + fm) / 6.0
            right = (hi_ - m) * (fm + 4.0 * frm + fb) / 6.0
            diff = left + right - s
            if depth >= max_depth or abs(diff) <= 15.0 * eps:
                total += left + right + diff / 15.0
            else:
                stack.append((lo_, m, fa, flm, fm, left, eps / 2.0, depth + 1))
                stack.append((m, hi_, fm, frm, fb, right, eps / 2.0, depth + 1))
    return total
