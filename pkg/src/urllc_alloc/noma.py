"""Superposition-coded (NOMA) transmission over the whole block.

The robot first decodes the actuator's packet and cancels it (SIC). When
cancellation fails it decodes its own packet with the actuator's signal as
interference, so its error is the two-branch average

    eps_bar1 = eps1 * (1 - eps21) + eps1_hat * eps21.

The energy budget is tight at the optimum and the robot's averaged error
constraint is tight as well, which leaves a one-dimensional root search in p1.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._jit import jit
from .exceptions import Infeasible, NumericError
from .fbl import ErrorProb, _log_add, _log_eps, _log_success, power_for_error
from .results import NomaAllocation, SchemeOutcome

N_GRID = 2000


@dataclass(frozen=True)
class NomaErrorBundle:
    eps_2_at_1: ErrorProb
    eps_1: ErrorProb
    eps_1_hat: ErrorProb
    eps_bar_1: ErrorProb
    eps_2: ErrorProb


@jit
def _noma_logs(p1, p2, m, d, h1, h2):
    g21 = p2 * h1 / (p1 * h1 + 1.0)
    g1 = p1 * h1
    g1hat = p1 * h1 / (p2 * h1 + 1.0)
    g2 = p2 * h2 / (p1 * h2 + 1.0)
    l21 = _log_eps(g21, m, d, False)
    l1 = _log_eps(g1, m, d, False)
    l1hat = _log_eps(g1hat, m, d, False)
    lbar1 = _log_add(l1 + _log_success(g21, m, d, False), l1hat + l21)
    l2 = _log_eps(g2, m, d, False)
    return l21, l1, l1hat, lbar1, l2


@jit
def _excess(p1, etot, m, d, h1, h2, log_cap):
    r = _noma_logs(p1, etot / m - p1, m, d, h1, h2)
    return r[3] - log_cap


@jit
def _bisect_root(a, b, etot, m, d, h1, h2, log_cap):
    """Root of the excess between a and b (opposite signs); returns the feasible end."""
    fa = _excess(a, etot, m, d, h1, h2, log_cap)
    for _ in range(200):
        c = 0.5 * (a + b)
        if c <= min(a, b) or c >= max(a, b):
            break
        fc = _excess(c, etot, m, d, h1, h2, log_cap)
        if (fc > 0.0) == (fa > 0.0):
            a = c
            fa = fc
        else:
            b = c
    if fa <= 0.0:
        return a
    return b


@jit
def _noma_search(etot, m, d, h1, h2, log_cap, lo, hi, n_grid):
    """Return (p1, log eps2) of the best root; p1 is NaN when none exists."""
    xs = np.empty(n_grid)
    cs = np.empty(n_grid)
    for i in range(n_grid):
        x = lo + (hi - lo) * i / (n_grid - 1)
        xs[i] = x
        cs[i] = _excess(x, etot, m, d, h1, h2, log_cap)
    roots = np.empty(2 * n_grid + 2)
    nr = 0
    if cs[0] <= 0.0:
        roots[nr] = xs[0]
        nr += 1
    for i in range(1, n_grid):
        if (cs[i - 1] > 0.0) != (cs[i] > 0.0):
            roots[nr] = _bisect_root(xs[i - 1], xs[i], etot, m, d, h1, h2, log_cap)
            nr += 1
    if nr == 0:
        # narrow dip between grid points: refine around the smallest excess
        k = 0
        for i in range(1, n_grid):
            if cs[i] < cs[k]:
                k = i
        a = xs[max(k - 1, 0)]
        b = xs[min(k + 1, n_grid - 1)]
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        c = b - invphi * (b - a)
        e = a + invphi * (b - a)
        fc = _excess(c, etot, m, d, h1, h2, log_cap)
        fe = _excess(e, etot, m, d, h1, h2, log_cap)
        for _ in range(200):
            if b - a <= 1e-13 * b:
                break
            if fc < fe:
                b = e
                e = c
                fe = fc
                c = b - invphi * (b - a)
                fc = _excess(c, etot, m, d, h1, h2, log_cap)
            else:
                a = c
                c = e
                fc = fe
                e = a + invphi * (b - a)
                fe = _excess(e, etot, m, d, h1, h2, log_cap)
            if fc <= 0.0 or fe <= 0.0:
                break
        xm = c if fc <= fe else e
        if min(fc, fe) <= 0.0:
            roots[nr] = _bisect_root(xs[max(k - 1, 0)], xm, etot, m, d, h1, h2, log_cap)
            nr += 1
    best_p = math.nan
    best_l = 0.0
    for j in range(nr):
        p1 = roots[j]
        l2 = _noma_logs(p1, etot / m - p1, m, d, h1, h2)[4]
        if best_p != best_p or l2 < best_l - 1e-12 * abs(best_l):
            best_p = p1
            best_l = l2
    return best_p, best_l


def noma_sinrs(p1, p2, s):
    """SINRs (robot decoding x2, robot after SIC, robot without SIC, actuator)."""
    h1, h2 = s.h1, s.h2
    return (
        p2 * h1 / (p1 * h1 + 1.0),
        p1 * h1,
        p1 * h1 / (p2 * h1 + 1.0),
        p2 * h2 / (p1 * h2 + 1.0),
    )


def noma_error_bundle(p1, p2, s):
    logs = _noma_logs(float(p1), float(p2), float(s.M), float(s.D), float(s.h1), float(s.h2))
    return NomaErrorBundle(*(ErrorProb.from_log(v) for v in logs))


def noma_p1_bounds(s):
    """Admissible robot power range [p1_lb, p1_ub] at blocklength M."""
    M, E = s.M, s.E
    p1_lb = power_for_error(s.h1, M, s.D, s.eps1_max)
    r = 2.0 ** (-s.D / M)
    # meaningful SINR for both decodings of x2, and p1 <= p2
    ub = min(E * r / M - (1.0 - r) / h for h in (s.h1, s.h2))
    p1_ub = min(ub, E / (2.0 * M))
    if p1_lb > p1_ub:
        raise Infeasible(f"empty p1 range [{p1_lb!r}, {p1_ub!r}]")
    return p1_lb, p1_ub


def solve_noma(s, n_grid=N_GRID):
    try:
        lo, hi = noma_p1_bounds(s)
    except Infeasible:
        return SchemeOutcome.infeasible("noma")
    M = float(s.M)
    p1, l2 = _noma_search(
        float(s.E), M, float(s.D), float(s.h1), float(s.h2), math.log(s.eps1_max), lo, hi, int(n_grid)
    )
    if math.isnan(p1):
        return SchemeOutcome.infeasible("noma")
    p2 = s.E / s.M - p1
    b = noma_error_bundle(p1, p2, s)
    if not math.isfinite(b.eps_2.log_value):
        raise NumericError("non-finite NOMA error")
    return SchemeOutcome("noma", True, NomaAllocation(p1, p2, s.M), b.eps_2, b.eps_bar_1)


__all__ = ["NomaErrorBundle", "noma_sinrs", "noma_error_bundle", "noma_p1_bounds", "solve_noma"]
