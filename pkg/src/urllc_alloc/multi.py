"""Orthogonal allocation for K devices, minimizing the last device's error.

Under the high-SNR model (V = 1) device k needs power chi(m) at blocklength
m to hit its error target exactly, so its energy is g(m) = m * chi(m). The
target device takes whatever energy is left. For each candidate target
blocklength the remaining symbols are split by a continuous relaxation
solved through its Lagrange dual, then rounded greedily.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Sequence, Tuple

from .exceptions import Infeasible
from .fbl import LN2, ErrorProb, _log_eps, q_tail_inv
from .results import MultiAllocation, SchemeOutcome

LAMBDA_ITERS = 200
ROOT_ITERS = 200


@dataclass(frozen=True)
class MultiScenario:
    data_bits: int
    budget_symbols: int
    energy_budget: float
    # (h_k, eps_max_k) for the K-1 constrained devices, strongest first
    devices: Tuple[Tuple[float, float], ...]
    h_target: float

    def __post_init__(self):
        object.__setattr__(self, "devices", tuple((float(h), float(e)) for h, e in self.devices))
        if self.data_bits < 1 or self.budget_symbols < 2:
            raise ValueError("need D >= 1 and M >= 2")
        if not self.energy_budget > 0:
            raise ValueError("energy_budget must be positive")
        if not self.devices:
            raise ValueError("need at least one constrained device (K >= 2)")
        gains = [h for h, _ in self.devices] + [self.h_target]
        if any(not g > 0 for g in gains):
            raise ValueError("channel gains must be positive")
        if any(a <= b for a, b in zip(gains, gains[1:])):
            raise ValueError("channel gains must be strictly decreasing")
        for _, e in self.devices:
            if not 0 < e < 0.5:
                raise ValueError("error targets must lie in (0, 0.5)")

    @property
    def K(self):
        return len(self.devices) + 1


@dataclass(frozen=True)
class DualState:
    lam: float
    m_continuous: Tuple[float, ...]


@dataclass(frozen=True)
class MultiBounds:
    m_lb: Tuple[int, ...]
    mK_lb: int
    mK_ub: int
    trace: Tuple[Tuple[int, int], ...] = ()


def _a(eps):
    return q_tail_inv(eps) / LN2


def chi(m, D, eps_max, h):
    return math.expm1((D / m + _a(eps_max) / math.sqrt(m)) * LN2) / h


def g_energy(m, D, eps_max, h):
    """Energy m * chi(m) and its derivative in m."""
    a = _a(eps_max)
    x = (D / m + a / math.sqrt(m)) * LN2
    value = m * math.expm1(x) / h
    slope = (math.exp(x) * (1.0 - D * LN2 / m - 0.5 * LN2 * a / math.sqrt(m)) - 1.0) / h
    return value, slope


def convexity_limit(D, eps_max):
    """Right-hand side of the sqrt(m) bound under which g is decreasing and convex."""
    a = _a(eps_max)
    return (0.75 * a * LN2 + math.sqrt(9.0 / 16.0 * LN2**2 * a * a + 8.0 * D * LN2)) / 2.0


def _q(m, D, h):
    return m * math.expm1(D / m * LN2) / h


def _smallest(fn, budget, hi):
    """Smallest integer m in [1, hi] with fn(m) < budget for decreasing fn, else None."""
    if hi < 1 or not fn(hi) < budget:
        return None
    lo = 1
    if fn(lo) < budget:
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fn(mid) < budget:
            hi = mid
        else:
            lo = mid
    return hi


def _g(ms, k):
    h, e = ms.devices[k]
    return lambda m: g_energy(m, ms.data_bits, e, h)[0]


def multi_bounds(ms):
    D, M, E = ms.data_bits, ms.budget_symbols, ms.energy_budget
    n = len(ms.devices)
    gs = [_g(ms, k) for k in range(n)]
    q = lambda m: _q(m, D, ms.h_target)
    lb = [_smallest(g, E, M) for g in gs]
    lbK = _smallest(q, E, M)
    if lbK is None or any(v is None for v in lb):
        raise Infeasible("a single device cannot be served with the whole budget")
    trace = []
    prev = None
    for _ in range(10 * M):
        total = sum(lb) + lbK
        ub = [M - (total - v) for v in lb]
        ubK = M - (total - lbK)
        if ubK < lbK or any(u < v for u, v in zip(ub, lb)):
            raise Infeasible("blocklength bounds crossed")
        trace.append((lbK, ubK))
        if (tuple(lb), lbK, ubK) == prev:
            break
        prev = (tuple(lb), lbK, ubK)
        spent = [g(u) for g, u in zip(gs, ub)]
        q_ub = q(ubK)
        new_lb = []
        for k in range(n):
            v = _smallest(gs[k], E - (sum(spent) - spent[k]) - q_ub, ub[k])
            if v is None:
                raise Infeasible(f"device {k + 1} cannot meet its target")
            new_lb.append(max(v, lb[k]))
        vK = _smallest(q, E - sum(spent), ubK)
        if vK is None:
            raise Infeasible("target device cannot be served")
        lb, lbK = new_lb, max(vK, lbK)
    limit = [convexity_limit(D, e) ** 2 for _, e in ms.devices]
    if any(u >= lim for u, lim in zip(ub, limit)):
        warnings.warn("blocklength range leaves the region where g is convex", RuntimeWarning, stacklevel=2)
    return MultiBounds(tuple(lb), lbK, ubK, tuple(trace))


def _stationary(lam, lo, hi, D, eps, h):
    """argmin of g(m) + lam*m on [lo, hi] for convex g."""
    if g_energy(lo, D, eps, h)[1] + lam >= 0.0:
        return float(lo)
    if g_energy(hi, D, eps, h)[1] + lam <= 0.0:
        return float(hi)
    a, b = float(lo), float(hi)
    for _ in range(ROOT_ITERS):
        c = 0.5 * (a + b)
        if c <= a or c >= b:
            break
        if g_energy(c, D, eps, h)[1] + lam < 0.0:
            a = c
        else:
            b = c
    return 0.5 * (a + b)


def allocation_at(ms, lam, m_lb, cap):
    D = ms.data_bits
    return tuple(_stationary(lam, lo, cap, D, e, h) for lo, (h, e) in zip(m_lb, ms.devices))


def solve_relaxed_dual(ms, mK, m_lb=None):
    """Continuous split of the M - mK remaining symbols minimizing total energy."""
    if m_lb is None:
        m_lb = multi_bounds(ms).m_lb
    cap = ms.budget_symbols - mK
    if sum(m_lb) > cap:
        raise Infeasible(f"lower bounds exceed the {cap} available symbols")
    if len(m_lb) == 1:
        return DualState(0.0, (float(cap),))
    D = ms.data_bits
    lo = 0.0
    hi = max(-g_energy(m, D, e, h)[1] for m, (h, e) in zip(m_lb, ms.devices))
    hi = max(hi, 0.0)
    ms_hi = allocation_at(ms, hi, m_lb, cap)
    if sum(ms_hi) >= cap:
        return DualState(hi, ms_hi)
    for _ in range(LAMBDA_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if sum(allocation_at(ms, mid, m_lb, cap)) > cap:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    return DualState(lam, allocation_at(ms, lam, m_lb, cap))


def greedy_round(m_bar: Sequence[float], ms, mK):
    cap = ms.budget_symbols - mK
    m = [int(math.floor(v + 1e-9)) for v in m_bar]
    D = ms.data_bits
    g = [lambda x, h=h, e=e: g_energy(x, D, e, h)[0] for h, e in ms.devices]
    while sum(m) < cap:
        gains = [gk(mk) - gk(mk + 1) for gk, mk in zip(g, m)]
        k = max(range(len(m)), key=lambda i: (gains[i], -i))
        m[k] += 1
    return tuple(m)


def _target_log_eps(ms, mK, m, high_snr):
    D = ms.data_bits
    spent = sum(g_energy(mk, D, e, h)[0] for mk, (h, e) in zip(m, ms.devices))
    pK = (ms.energy_budget - spent) / mK
    if not pK > 0:
        return 0.0, pK
    return _log_eps(pK * ms.h_target, float(mK), float(D), high_snr), pK


def solve_multi_oma(ms, high_snr=True):
    """Enumerate the target blocklength, relax, round and keep the best.

    The target device's error is evaluated with the same V = 1 model used to
    size the other devices unless ``high_snr`` is False.
    """
    try:
        b = multi_bounds(ms)
    except Infeasible:
        return SchemeOutcome.infeasible("oma_multi")
    D = ms.data_bits
    certified = True
    limits = [convexity_limit(D, e) ** 2 for _, e in ms.devices]
    best = None
    for mK in range(b.mK_lb, b.mK_ub + 1):
        try:
            dual = solve_relaxed_dual(ms, mK, b.m_lb)
        except Infeasible:
            continue
        m = greedy_round(dual.m_continuous, ms, mK)
        if any(mk + 1 >= lim for mk, lim in zip(m, limits)):
            certified = False
        le, pK = _target_log_eps(ms, mK, m, high_snr)
        if best is None or le < best[0] - 1e-12 * abs(best[0]):
            best = (le, mK, m, pK)
    if best is None or best[0] >= 0.0:
        return SchemeOutcome("oma_multi", False, certified=certified)
    le, mK, m, pK = best
    powers = tuple(chi(mk, D, e, h) for mk, (h, e) in zip(m, ms.devices)) + (pK,)
    robot = max(
        _log_eps(p * h, float(mk), float(D), True) for mk, p, (h, _) in zip(m, powers, ms.devices)
    )
    return SchemeOutcome(
        "oma_multi",
        True,
        MultiAllocation(m + (mK,), powers),
        ErrorProb.from_log(le),
        ErrorProb.from_log(robot),
        certified,
    )


__all__ = [
    "MultiScenario",
    "DualState",
    "MultiBounds",
    "chi",
    "g_energy",
    "convexity_limit",
    "multi_bounds",
    "allocation_at",
    "solve_relaxed_dual",
    "greedy_round",
    "solve_multi_oma",
]
