"""Decode-and-forward relaying through the robot.

Phase 1 (``m1`` symbols) broadcasts the combined ``2D``-bit packet; phase 2
(``m2`` symbols) has the robot forward the actuator's ``D`` bits over ``h3``.
If the relayed packet is lost the actuator falls back on its own phase-1
reception:

    eps_bar2 = ((1 - eps1) * eps2 + eps1) * eps2_hat.

The energy budget is tight at the optimum but the robot's error constraint
need not be, so for each blocklength pair the broadcast power is found by a
one-dimensional search.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._jit import jit
from .bounds import two_phase_bounds
from .exceptions import Infeasible, NumericError
from .fbl import (
    ErrorProb,
    _log_add,
    _log_eps,
    _log_success,
    _min_blocklength,
    _pmin,
    _power_for_error,
    q_tail_inv,
)
from .results import RelayAllocation, SchemeOutcome

N_GRID = 2000
GOLDEN_RTOL = 1e-9
INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
N_SEG = 40
WARM_GRID = 64


@dataclass(frozen=True)
class RelayErrorBundle:
    eps_1: ErrorProb
    eps_2: ErrorProb
    eps_2_hat: ErrorProb
    eps_bar_2: ErrorProb


@jit
def _relay_logs(ps, pr, m1, m2, d, h1, h2, h3):
    l1 = _log_eps(ps * h1, m1, 2.0 * d, False)
    s1 = _log_success(ps * h1, m1, 2.0 * d, False)
    l2 = _log_eps(pr * h3, m2, d, False)
    l2hat = _log_eps(ps * h2, m1, 2.0 * d, False)
    return l1, l2, l2hat, _log_add(s1 + l2, l1) + l2hat


@jit
def _relay_obj(ps, etot, m1, m2, d, h1, h2, h3):
    pr = (etot - m1 * ps) / m2
    return _relay_logs(ps, pr, m1, m2, d, h1, h2, h3)[3]


@jit
def _golden(a, b, etot, m1, m2, d, h1, h2, h3, rtol):
    c = b - INVPHI * (b - a)
    e = a + INVPHI * (b - a)
    fc = _relay_obj(c, etot, m1, m2, d, h1, h2, h3)
    fe = _relay_obj(e, etot, m1, m2, d, h1, h2, h3)
    for _ in range(200):
        if b - a <= rtol * b:
            break
        if fc < fe:
            b = e
            e = c
            fe = fc
            c = b - INVPHI * (b - a)
            fc = _relay_obj(c, etot, m1, m2, d, h1, h2, h3)
        else:
            a = c
            c = e
            fc = fe
            e = a + INVPHI * (b - a)
            fe = _relay_obj(e, etot, m1, m2, d, h1, h2, h3)
    if fc <= fe:
        return c, fc
    return e, fe


@jit
def _segment_bound(a, b, etot, m1, m2, d, h1, h2, h3):
    """Lower bound of log eps_bar2 over ps in [a, b].

    eps1 and eps2_hat fall with ps while eps2 rises (pr shrinks), and
    eps_bar2 >= max(eps1, eps2) * eps2_hat.
    """
    l1 = _log_eps(b * h1, m1, 2.0 * d, False)
    l2 = _log_eps((etot - m1 * a) / m2 * h3, m2, d, False)
    l2hat = _log_eps(b * h2, m1, 2.0 * d, False)
    return max(l1, l2) + l2hat


@jit
def _relay_pair(etot, m1, m2, d, h1, h2, h3, lo, hi, n_grid, rtol, cutoff, n_seg):
    """Grid then golden section over ps in [lo, hi]; returns (ps, log eps_bar2).

    Grid points in segments whose lower bound exceeds ``cutoff`` are skipped;
    each segment bound also covers one grid step on either side, so a skipped
    point cannot seed a refinement that beats ``cutoff``. Returns NaN for ps
    when every point was skipped.
    """
    step = (hi - lo) / (n_grid - 1)
    per = (n_grid + n_seg - 1) // n_seg
    k = -1
    best = 0.0
    for s in range(n_seg):
        i0 = s * per
        i1 = min(i0 + per, n_grid)
        if i0 >= i1:
            break
        a = max(lo + step * (i0 - 1), lo)
        b = min(lo + step * i1, hi)
        if _segment_bound(a, b, etot, m1, m2, d, h1, h2, h3) > cutoff:
            continue
        for i in range(i0, i1):
            x = lo + step * i
            v = _relay_obj(x, etot, m1, m2, d, h1, h2, h3)
            if k < 0 or v < best:
                best = v
                k = i
    if k < 0:
        return math.nan, math.inf
    ps = lo + step * k
    a = lo + step * max(k - 1, 0)
    b = lo + step * min(k + 1, n_grid - 1)
    if b > a:
        x, v = _golden(a, b, etot, m1, m2, d, h1, h2, h3, rtol)
        if v < best:
            ps = x
            best = v
    return ps, best


@jit
def _relay_m1(etot, M, m1, d, h1, h2, h3, ps_lb, m2_lo, n_grid, rtol, incumbent, have_incumbent, bound):
    """Best (log eps, m2, ps) over m2 for one m1, or m2 = -1 if nothing beats ``incumbent``.

    ``bound`` is any achievable log eps_bar2 (an upper bound on the optimum)
    used only for pruning.
    """
    best = incumbent
    have = have_incumbent
    best_m2 = -1
    best_ps = math.nan
    fm1 = float(m1)
    for m2 in range(m2_lo, M - m1 + 1):
        fm2 = float(m2)
        pr_lb = _pmin(h3, fm2, d)
        ps_ub = (etot - fm2 * pr_lb) / fm1
        if ps_ub < ps_lb:
            continue
        cut = min(bound, best) if have else bound
        cut = cut + 1e-12 * abs(cut)
        if _segment_bound(ps_lb, ps_ub, etot, fm1, fm2, d, h1, h2, h3) > cut:
            continue
        ps, v = _relay_pair(etot, fm1, fm2, d, h1, h2, h3, ps_lb, ps_ub, n_grid, rtol, cut, N_SEG)
        if ps != ps:
            continue
        if not have or v < best - 1e-12 * abs(best):
            best = v
            have = True
            best_m2 = m2
            best_ps = ps
    return best, best_m2, best_ps


@jit
def _warm_bound(etot, M, m1_lo, m1_hi, d, h1, h2, h3, x_target):
    """Cheap achievable value: every m1 with all remaining symbols, coarse grid."""
    best = math.inf
    for m1 in range(m1_lo, m1_hi + 1):
        fm1 = float(m1)
        fm2 = float(M - m1)
        ps_lb = _power_for_error(h1, fm1, 2.0 * d, x_target, False)
        if ps_lb != ps_lb:
            continue
        ps_ub = (etot - fm2 * _pmin(h3, fm2, d)) / fm1
        if ps_ub < ps_lb:
            continue
        for i in range(WARM_GRID):
            x = ps_lb + (ps_ub - ps_lb) * i / (WARM_GRID - 1)
            v = _relay_obj(x, etot, fm1, fm2, d, h1, h2, h3)
            if v < best:
                best = v
    return best


def relay_error_bundle(ps, pr, m1, m2, s):
    for g in (ps * s.h1, pr * s.h3, ps * s.h2):
        if not g > 0:
            raise ValueError("relay SNRs must be positive")
    logs = _relay_logs(float(ps), float(pr), float(m1), float(m2), float(s.D), s.h1, s.h2, s.h3)
    return RelayErrorBundle(*(ErrorProb.from_log(v) for v in logs))


def relay_bounds(s):
    return two_phase_bounds(s.E, s.M, (2 * s.D, s.h1), (s.D, s.h3))


def relay_m2_lower_given_m1(s, m1, ps_lb):
    residual = s.E - m1 * ps_lb
    hi = s.M - m1
    if residual > 0:
        m2 = _min_blocklength(residual, float(s.D), float(s.h3), 1, hi, False)
        if m2 <= hi:
            return int(m2)
    raise Infeasible(f"no relay-phase blocklength fits at m1={m1}")


def relay_ps_range(s, m1, m2):
    """[ps_lb, ps_ub]: robot constraint met and the relay hop still meaningful."""
    ps_lb = _power_for_error(s.h1, float(m1), 2.0 * s.D, q_tail_inv(s.eps1_max), False)
    if math.isnan(ps_lb):
        raise NumericError(f"broadcast power bisection failed at m1={m1}")
    pr_lb = _pmin(s.h3, float(m2), float(s.D))
    ps_ub = s.E / m1 - m2 / m1 * pr_lb
    if ps_ub < ps_lb:
        raise Infeasible(f"empty broadcast power range at (m1, m2) = ({m1}, {m2})")
    return ps_lb, ps_ub


def solve_relay(s, n_grid=N_GRID, rtol=GOLDEN_RTOL):
    try:
        b = relay_bounds(s)
    except Infeasible:
        return SchemeOutcome.infeasible("relay")
    d = float(s.D)
    x_target = q_tail_inv(s.eps1_max)
    bound = _warm_bound(float(s.E), s.M, b.m1_lb, b.m1_ub, d, s.h1, s.h2, s.h3, x_target)
    if not math.isfinite(bound):
        bound = 0.0
    best = 0.0
    found = None
    for m1 in range(b.m1_lb, b.m1_ub + 1):
        ps_lb = _power_for_error(s.h1, float(m1), 2.0 * d, x_target, False)
        if math.isnan(ps_lb):
            raise NumericError(f"broadcast power bisection failed at m1={m1}")
        try:
            m2_lo = relay_m2_lower_given_m1(s, m1, ps_lb)
        except Infeasible:
            continue
        v, m2, ps = _relay_m1(
            float(s.E), s.M, m1, d, s.h1, s.h2, s.h3, ps_lb, m2_lo, int(n_grid), rtol, best, found is not None, bound
        )
        if m2 >= 0:
            best = v
            found = (m1, int(m2), ps)
    if found is None:
        return SchemeOutcome.infeasible("relay")
    m1, m2, ps = found
    pr = (s.E - m1 * ps) / m2
    bundle = relay_error_bundle(ps, pr, m1, m2, s)
    return SchemeOutcome("relay", True, RelayAllocation(m1, m2, ps, pr), bundle.eps_bar_2, bundle.eps_1)


__all__ = [
    "RelayErrorBundle",
    "relay_error_bundle",
    "relay_bounds",
    "relay_m2_lower_given_m1",
    "relay_ps_range",
    "solve_relay",
]
