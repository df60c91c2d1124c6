"""Orthogonal two-device allocation.

The robot and the actuator get disjoint blocklengths ``m1`` and ``m2``. At the
optimum the robot's error constraint and the energy budget are both tight, so
for each ``m1`` the robot power follows from a bisection and the actuator
receives all the remaining energy; only the blocklengths are enumerated.
"""

import math

from ._jit import jit
from .bounds import BlocklengthBounds, two_phase_bounds
from .exceptions import Infeasible, NumericError
from .fbl import (
    LN2,
    ErrorProb,
    _log_eps,
    _min_blocklength,
    _power_for_error,
    q_tail_inv,
)
from .results import OmaAllocation, SchemeOutcome

HIGH_SNR_GAMMA = 100.0
TIE_RTOL = 1e-12


def improves(new, best):
    """Strict improvement of a log-error, ignoring ties within TIE_RTOL."""
    return new < best - TIE_RTOL * abs(best)


@jit
def _oma_scan_m2(e2, lo, hi, d, h2):
    best_m = -1
    best = 0.0
    for m2 in range(lo, hi + 1):
        le = _log_eps(e2 / m2 * h2, float(m2), d, False)
        if best_m < 0 or le < best - 1e-12 * abs(best):
            best = le
            best_m = m2
    return best_m, best


def oma_bounds(s):
    return two_phase_bounds(s.E, s.M, (s.D, s.h1), (s.D, s.h2))


def m2_lower_given_m1(s, m1, p1_star):
    """Smallest m2 whose rate-margin energy fits in what the robot leaves over."""
    residual = s.E - m1 * p1_star
    hi = s.M - m1
    if residual > 0:
        m2 = _min_blocklength(residual, float(s.D), float(s.h2), 1, hi, False)
        if m2 <= hi:
            return int(m2)
    raise Infeasible(f"no m2 <= {hi} fits the residual energy {residual!r}")


def _g_tilde(m, e2h2, d):
    return math.sqrt(m) * (math.log2(1.0 + e2h2 / m) - d / m)


def _g_tilde_prime(m, e2h2, d):
    rm = math.sqrt(m)
    return (
        math.log1p(e2h2 / m) / (2.0 * LN2 * rm)
        - e2h2 / (m + e2h2) / (LN2 * rm)
        + 0.5 * d * m ** -1.5
    )


def solve_oma_highsnr_inner(s, m1, p1):
    """Best m2 under V = 1 when the high-SNR objective is concave.

    Raises ValueError when the concavity condition does not hold; callers
    then fall back to enumerating m2.
    """
    e2 = s.E - m1 * p1
    top = s.M - m1
    e2h2 = e2 * s.h2
    if not (top >= 1 and e2h2 / top >= math.e - 1.0):
        raise ValueError("high-SNR concavity condition violated")
    lo = m2_lower_given_m1(s, m1, p1)
    d = s.D
    if _g_tilde_prime(lo, e2h2, d) <= 0:
        m2 = lo
    elif _g_tilde_prime(top, e2h2, d) >= 0:
        m2 = top
    else:
        a, b = float(lo), float(top)
        for _ in range(200):
            c = 0.5 * (a + b)
            if _g_tilde_prime(c, e2h2, d) > 0:
                a = c
            else:
                b = c
            if b - a <= 1e-12 * b:
                break
        k = int(math.floor(0.5 * (a + b)))
        cands = [m for m in (k, k + 1) if lo <= m <= top]
        m2 = max(cands, key=lambda m: (_g_tilde(m, e2h2, d), -m))
    return m2, e2 / m2


def solve_oma(s, fast_path=True):
    """Jointly optimal blocklengths and powers for the orthogonal scheme."""
    try:
        b = oma_bounds(s)
    except Infeasible:
        return SchemeOutcome.infeasible("oma")
    d = float(s.D)
    log_cap = math.log(s.eps1_max)
    x_target = q_tail_inv(s.eps1_max)
    best = None
    best_le = 0.0
    for m1 in range(b.m1_lb, b.m1_ub + 1):
        # necessary-condition screen with all energy on the robot
        if _log_eps(s.E / m1 * s.h1, float(m1), d, False) > log_cap:
            continue
        p1 = _power_for_error(s.h1, float(m1), d, x_target, False)
        if math.isnan(p1):
            raise NumericError(f"robot power bisection failed at m1={m1}")
        try:
            m2_lo = m2_lower_given_m1(s, m1, p1)
        except Infeasible:
            continue
        e2 = s.E - m1 * p1
        top = s.M - m1
        m2 = -1
        if fast_path and e2 * s.h2 / top >= HIGH_SNR_GAMMA:
            m2, _ = solve_oma_highsnr_inner(s, m1, p1)
            le = _log_eps(e2 / m2 * s.h2, float(m2), d, False)
        if m2 < 0:
            m2, le = _oma_scan_m2(e2, m2_lo, top, d, float(s.h2))
        if best is None or improves(le, best_le):
            best = (m1, int(m2), p1, e2 / m2)
            best_le = le
    if best is None:
        return SchemeOutcome.infeasible("oma")
    m1, m2, p1, p2 = best
    eps1 = _log_eps(p1 * s.h1, float(m1), d, False)
    return SchemeOutcome(
        "oma", True, OmaAllocation(m1, m2, p1, p2), ErrorProb.from_log(best_le), ErrorProb.from_log(eps1)
    )


__all__ = [
    "BlocklengthBounds",
    "oma_bounds",
    "m2_lower_given_m1",
    "solve_oma",
    "solve_oma_highsnr_inner",
]
