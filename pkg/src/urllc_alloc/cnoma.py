"""Cooperative NOMA: superposition broadcast, then the robot relays.

Phase 1 (``m1`` symbols) superposes both packets as in the NOMA scheme, phase 2
(``m2`` symbols) forwards the actuator's packet from the robot over ``h3``.
The actuator keeps its own phase-1 attempt as a fallback:

    eps_bar2 = ((1 - eps21) * eps2 + eps21) * eps2_hat.

The search treats ``t = p1 + p2`` as one variable. For fixed ``(m1, t)`` the
robot's averaged error constraint pins ``p1`` and nothing in phase 1 depends
on ``m2``, so phase-1 solves are shared by every ``m2`` on a common ``t`` grid.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._jit import jit
from .bounds import two_phase_bounds
from .exceptions import Infeasible, NumericError
from .fbl import ErrorProb, _log_add, _log_eps, _log_success, _min_blocklength, _pmin, _power_for_error, q_tail_inv
from .noma import _noma_logs
from .results import CnomaAllocation, SchemeOutcome

N_T = 2000
N_SCAN = 64
GOLDEN_RTOL = 1e-9
N_SEG = 40
WARM_T = 24
BNB_DEPTH = 60
BNB_BUDGET = 2000
INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CnomaErrorBundle:
    eps_2_at_1: ErrorProb
    eps_1: ErrorProb
    eps_1_hat: ErrorProb
    eps_bar_1: ErrorProb
    eps_2: ErrorProb
    eps_2_hat: ErrorProb
    eps_bar_2: ErrorProb


@jit
def _cnoma_logs(p1, p2, pr, m1, m2, d, h1, h2, h3):
    l21, l1, l1hat, lbar1, l2hat = _noma_logs(p1, p2, m1, d, h1, h2)
    l2 = _log_eps(pr * h3, m2, d, False)
    s21 = _log_success(p2 * h1 / (p1 * h1 + 1.0), m1, d, False)
    lbar2 = _log_add(s21 + l2, l21) + l2hat
    return l21, l1, l1hat, lbar1, l2, l2hat, lbar2


@jit
def _excess(p1, t, m1, d, h1, h2, log_cap):
    return _noma_logs(p1, t - p1, m1, d, h1, h2)[3] - log_cap


@jit
def _root(a, b, fa, fb, t, m1, d, h1, h2, log_cap):
    """Illinois iteration on a bracket with fa > 0 >= fb; returns the feasible end."""
    side = 0
    for _ in range(200):
        if fb >= -1e-12 or abs(b - a) <= 4e-16 * abs(b):
            break
        c = (a * fb - b * fa) / (fb - fa)
        if not (min(a, b) < c < max(a, b)):
            c = 0.5 * (a + b)
        fc = _excess(c, t, m1, d, h1, h2, log_cap)
        if fc > 0.0:
            a = c
            fa = fc
            if side == -1:
                fb *= 0.5
            side = -1
        else:
            b = c
            fb = fc
            if side == 1:
                fa *= 0.5
            side = 1
    return b


@jit
def _p1_up(t, m1, d, h1):
    r = 2.0 ** (-d / m1)
    return min(t * r - (1.0 - r) / h1, 0.5 * t)


@jit
def _scan_point(lo, span, j, n):
    u = j / (n - 1.0)
    return lo + span * u * u * u


@jit
def _excess_bound(a, b, t, m1, d, h1, log_cap):
    """Lower bound of the excess over p1 in [a, b] at fixed t.

    eps_bar1 = eps1 + eps21 * (eps1_hat - eps1) with eps1_hat >= eps1; eps1
    and eps1_hat fall with p1 while eps21 rises.
    """
    l1b = _log_eps(b * h1, m1, d, False)
    l1a = _log_eps(a * h1, m1, d, False)
    lhb = _log_eps(b * h1 / ((t - b) * h1 + 1.0), m1, d, False)
    l21a = _log_eps((t - a) * h1 / (a * h1 + 1.0), m1, d, False)
    if lhb > l1a:
        return _log_add(l1b, l21a + lhb + math.log1p(-math.exp(l1a - lhb))) - log_cap
    return l1b - log_cap


@jit
def _phase1_p1(t, m1, d, h1, h2, log_cap, p1_lb, n_scan):
    """Smallest p1 in [p1_lb, p1_up) meeting the robot constraint with equality.

    eps21 and eps2_hat both grow with p1 at fixed t, so the leftmost root is
    the best one for every m2. Scan points cluster near p1_lb, where the
    first crossing sits; brackets the scan cannot resolve are searched
    leftmost-first with interval bounds. NaN when no root exists.
    """
    up = _p1_up(t, m1, d, h1)
    if not up > p1_lb:
        return math.nan
    c0 = _excess(p1_lb, t, m1, d, h1, h2, log_cap)
    if c0 <= 0.0:
        return p1_lb
    if _excess_bound(p1_lb, up, t, m1, d, h1, log_cap) > 0.0:
        return math.nan
    span = up - p1_lb
    xs = np.empty(n_scan)
    cs = np.empty(n_scan)
    xs[0] = p1_lb
    cs[0] = c0
    for j in range(1, n_scan):
        x = _scan_point(p1_lb, span, j, n_scan)
        c = _excess(x, t, m1, d, h1, h2, log_cap)
        if c <= 0.0:
            return _root(xs[j - 1], x, cs[j - 1], c, t, m1, d, h1, h2, log_cap)
        xs[j] = x
        cs[j] = c
    # every scan point infeasible: a dip may hide between two of them
    size = n_scan + 4 * BNB_DEPTH
    sa = np.empty(size)
    sb = np.empty(size)
    sf = np.empty(size)
    top = 0
    for j in range(n_scan - 1, 0, -1):
        sa[top] = xs[j - 1]
        sb[top] = xs[j]
        sf[top] = cs[j - 1]
        top += 1
    pops = 0
    while top > 0 and pops < BNB_BUDGET:
        top -= 1
        pops += 1
        a = sa[top]
        b = sb[top]
        fa = sf[top]
        if b - a <= 1e-13 * b:
            continue
        if _excess_bound(a, b, t, m1, d, h1, log_cap) > 0.0:
            continue
        mid = 0.5 * (a + b)
        fm = _excess(mid, t, m1, d, h1, h2, log_cap)
        if fm <= 0.0:
            return _root(a, mid, fa, fm, t, m1, d, h1, h2, log_cap)
        if top + 2 > size:
            continue
        sa[top] = mid
        sb[top] = b
        sf[top] = fm
        top += 1
        sa[top] = a
        sb[top] = mid
        sf[top] = fa
        top += 1
    return math.nan


@jit
def _pair_value(t, etot, m1, m2, d, h1, h2, h3, log_cap, p1_lb, n_scan):
    p1 = _phase1_p1(t, m1, d, h1, h2, log_cap, p1_lb, n_scan)
    if p1 != p1:
        return 0.0, p1
    pr = (etot - m1 * t) / m2
    if not pr > 0.0:
        return 0.0, math.nan
    return _cnoma_logs(p1, t - p1, pr, m1, m2, d, h1, h2, h3)[6], p1


@jit
def _t_bound(a, b, etot, m1, m2, d, h1, h2, h3, p1_lb):
    """Lower bound of log eps_bar2 over t in [a, b] for the pair (m1, m2)."""
    q = b - p1_lb
    l21 = _log_eps(q * h1 / (p1_lb * h1 + 1.0), m1, d, False)
    l2hat = _log_eps(q * h2 / (p1_lb * h2 + 1.0), m1, d, False)
    l2 = _log_eps((etot - m1 * a) / m2 * h3, m2, d, False)
    return max(l21, l2) + l2hat


@jit
def _refine_t(a, b, etot, m1, m2, d, h1, h2, h3, log_cap, p1_lb, n_scan, rtol):
    c = b - INVPHI * (b - a)
    e = a + INVPHI * (b - a)
    fc = _pair_value(c, etot, m1, m2, d, h1, h2, h3, log_cap, p1_lb, n_scan)[0]
    fe = _pair_value(e, etot, m1, m2, d, h1, h2, h3, log_cap, p1_lb, n_scan)[0]
    for _ in range(200):
        if b - a <= rtol * b:
            break
        if fc < fe:
            b = e
            e = c
            fe = fc
            c = b - INVPHI * (b - a)
            fc = _pair_value(c, etot, m1, m2, d, h1, h2, h3, log_cap, p1_lb, n_scan)[0]
        else:
            a = c
            c = e
            fc = fe
            e = a + INVPHI * (b - a)
            fe = _pair_value(e, etot, m1, m2, d, h1, h2, h3, log_cap, p1_lb, n_scan)[0]
    if fc <= fe:
        return c, fc
    return e, fe


@jit
def _cnoma_m1(etot, M, m1, d, h1, h2, h3, log_cap, p1_lb, m2_lo, n_t, n_scan, rtol, incumbent, have_incumbent, bound):
    """Best (log eps, m2, t) over m2 for one m1; m2 = -1 if nothing beats ``incumbent``."""
    best = incumbent
    have = have_incumbent
    best_m2 = -1
    best_t = math.nan
    fm1 = float(m1)
    c = 2.0 ** (d / fm1)
    t_lb = p1_lb + (c - 1.0) / h1 * (1.0 + p1_lb * h1)
    m2_hi = M - m1
    t_hi = (etot - _pmin(h3, float(m2_hi), d) * m2_hi) / fm1
    if not t_hi > t_lb:
        return best, best_m2, best_t
    step = (t_hi - t_lb) / (n_t - 1)
    # phase-1 solves on the shared grid, filled on demand
    done = np.zeros(n_t, dtype=np.bool_)
    p1s = np.empty(n_t)
    l21s = np.empty(n_t)
    s21s = np.empty(n_t)
    l2hs = np.empty(n_t)
    per = (n_t + N_SEG - 1) // N_SEG
    for m2 in range(m2_lo, m2_hi + 1):
        fm2 = float(m2)
        t_ub = (etot - _pmin(h3, fm2, d) * fm2) / fm1
        if not t_ub > t_lb:
            continue
        cut = min(bound, best) if have else bound
        cut = cut + 1e-12 * abs(cut)
        if _t_bound(t_lb, t_ub, etot, fm1, fm2, d, h1, h2, h3, p1_lb) > cut:
            continue
        n_ok = min(int((t_ub - t_lb) / step) + 1, n_t)
        k = -1
        vbest = 0.0
        for s in range(N_SEG):
            i0 = s * per
            i1 = min(i0 + per, n_ok)
            if i0 >= i1:
                break
            a = t_lb + step * max(i0 - 1, 0)
            b = min(t_lb + step * i1, t_ub)
            if _t_bound(a, b, etot, fm1, fm2, d, h1, h2, h3, p1_lb) > cut:
                continue
            for i in range(i0, i1):
                t = t_lb + step * i
                if not done[i]:
                    p1 = _phase1_p1(t, fm1, d, h1, h2, log_cap, p1_lb, n_scan)
                    p1s[i] = p1
                    if p1 == p1:
                        p2 = t - p1
                        g21 = p2 * h1 / (p1 * h1 + 1.0)
                        l21s[i] = _log_eps(g21, fm1, d, False)
                        s21s[i] = _log_success(g21, fm1, d, False)
                        l2hs[i] = _log_eps(p2 * h2 / (p1 * h2 + 1.0), fm1, d, False)
                    done[i] = True
                if p1s[i] != p1s[i]:
                    continue
                pr = (etot - fm1 * t) / fm2
                if not pr > 0.0:
                    continue
                l2 = _log_eps(pr * h3, fm2, d, False)
                v = _log_add(s21s[i] + l2, l21s[i]) + l2hs[i]
                if k < 0 or v < vbest:
                    vbest = v
                    k = i
        if k < 0 or vbest > cut:
            continue
        t_best = t_lb + step * k
        a = t_lb + step * max(k - 1, 0)
        b = min(t_lb + step * (k + 1), t_ub)
        if b > a:
            tr, vr = _refine_t(a, b, etot, fm1, fm2, d, h1, h2, h3, log_cap, p1_lb, n_scan, rtol)
            if vr < vbest:
                t_best = tr
                vbest = vr
        if not have or vbest < best - 1e-12 * abs(best):
            best = vbest
            have = True
            best_m2 = m2
            best_t = t_best
    return best, best_m2, best_t


@jit
def _warm_bound(etot, M, m1_lo, m1_hi, d, h1, h2, h3, log_cap, x_target, n_scan):
    """Achievable value from a coarse t grid with all remaining symbols on the hop."""
    best = math.inf
    for m1 in range(m1_lo, m1_hi + 1):
        fm1 = float(m1)
        fm2 = float(M - m1)
        p1_lb = _power_for_error(h1, fm1, d, x_target, False)
        if p1_lb != p1_lb:
            continue
        c = 2.0 ** (d / fm1)
        t_lb = p1_lb + (c - 1.0) / h1 * (1.0 + p1_lb * h1)
        t_ub = (etot - _pmin(h3, fm2, d) * fm2) / fm1
        if not t_ub > t_lb:
            continue
        for i in range(WARM_T):
            t = t_lb + (t_ub - t_lb) * i / (WARM_T - 1)
            v, p1 = _pair_value(t, etot, fm1, fm2, d, h1, h2, h3, log_cap, p1_lb, n_scan)
            if p1 == p1 and v < best:
                best = v
    return best


def cnoma_error_bundle(p1, p2, pr, m1, m2, s):
    for g in (p1 * s.h1, p2, pr * s.h3):
        if not g > 0:
            raise ValueError("C-NOMA SNRs must be positive")
    logs = _cnoma_logs(float(p1), float(p2), float(pr), float(m1), float(m2), float(s.D), s.h1, s.h2, s.h3)
    return CnomaErrorBundle(*(ErrorProb.from_log(v) for v in logs))


def cnoma_bounds(s):
    # with t = p1 + p2 phase 1 needs t >= (2^(2D/m1) - 1) / h1
    return two_phase_bounds(s.E, s.M, (2 * s.D, s.h1), (s.D, s.h3))


def cnoma_t_range(s, m1, m2):
    """[t_lb, t_ub] for the pair; raises Infeasible when empty."""
    p1_lb = _power_for_error(s.h1, float(m1), float(s.D), q_tail_inv(s.eps1_max), False)
    if math.isnan(p1_lb):
        raise NumericError(f"robot power bisection failed at m1={m1}")
    c = 2.0 ** (s.D / m1)
    t_lb = p1_lb + (c - 1.0) / s.h1 * (1.0 + p1_lb * s.h1)
    t_ub = (s.E - _pmin(s.h3, float(m2), float(s.D)) * m2) / m1
    if not t_ub > t_lb:
        raise Infeasible(f"empty t range at (m1, m2) = ({m1}, {m2})")
    return t_lb, t_ub


def cnoma_m2_lower_given_m1(s, m1):
    p1_lb = _power_for_error(s.h1, float(m1), float(s.D), q_tail_inv(s.eps1_max), False)
    if math.isnan(p1_lb):
        raise NumericError(f"robot power bisection failed at m1={m1}")
    p2_lb = (2.0 ** (s.D / m1) - 1.0) / s.h1 * (1.0 + p1_lb * s.h1)
    residual = s.E - m1 * (p1_lb + p2_lb)
    hi = s.M - m1
    if residual > 0:
        m2 = _min_blocklength(residual, float(s.D), float(s.h3), 1, hi, False)
        if m2 <= hi:
            return int(m2)
    raise Infeasible(f"no relay-phase blocklength fits at m1={m1}")


def solve_cnoma(s, n_t=N_T, n_scan=N_SCAN, rtol=GOLDEN_RTOL):
    try:
        b = cnoma_bounds(s)
    except Infeasible:
        return SchemeOutcome.infeasible("cnoma")
    d = float(s.D)
    log_cap = math.log(s.eps1_max)
    x_target = q_tail_inv(s.eps1_max)
    bound = _warm_bound(float(s.E), s.M, b.m1_lb, b.m1_ub, d, s.h1, s.h2, s.h3, log_cap, x_target, int(n_scan))
    if not math.isfinite(bound):
        bound = 0.0
    best = 0.0
    found = None
    for m1 in range(b.m1_lb, b.m1_ub + 1):
        p1_lb = _power_for_error(s.h1, float(m1), d, x_target, False)
        if math.isnan(p1_lb):
            raise NumericError(f"robot power bisection failed at m1={m1}")
        try:
            m2_lo = cnoma_m2_lower_given_m1(s, m1)
        except Infeasible:
            continue
        v, m2, t = _cnoma_m1(
            float(s.E), s.M, m1, d, s.h1, s.h2, s.h3, log_cap, p1_lb, m2_lo,
            int(n_t), int(n_scan), rtol, best, found is not None, bound,
        )
        if m2 >= 0:
            best = v
            found = (m1, int(m2), t, p1_lb)
    if found is None:
        return SchemeOutcome.infeasible("cnoma")
    m1, m2, t, p1_lb = found
    p1 = _phase1_p1(t, float(m1), d, s.h1, s.h2, log_cap, p1_lb, int(n_scan))
    if math.isnan(p1):
        raise NumericError("C-NOMA phase-1 root vanished on re-evaluation")
    pr = (s.E - m1 * t) / m2
    bundle = cnoma_error_bundle(p1, t - p1, pr, m1, m2, s)
    return SchemeOutcome(
        "cnoma", True, CnomaAllocation(m1, m2, p1, t - p1, pr), bundle.eps_bar_2, bundle.eps_bar_1
    )


__all__ = [
    "CnomaErrorBundle",
    "cnoma_error_bundle",
    "cnoma_bounds",
    "cnoma_t_range",
    "cnoma_m2_lower_given_m1",
    "solve_cnoma",
]
