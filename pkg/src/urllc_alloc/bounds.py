"""Iterative blocklength bounds for two-phase schemes.

Each phase ``i`` needs at least ``g_i(m) = m * (2^(bits_i / m) - 1) / h_i``
energy at blocklength ``m``, and ``g_i`` decreases in ``m``. Starting from the
energy-only lower bound of one phase, the other phase is charged its cheapest
possible energy (all remaining symbols), which raises the first phase's lower
bound; this repeats until the bound stops moving.
"""

from dataclasses import dataclass
from typing import Tuple

from .exceptions import Infeasible
from .fbl import _g_energy, _min_blocklength


@dataclass(frozen=True)
class BlocklengthBounds:
    m1_lb: int
    m1_ub: int
    m2_lb: int
    trace_m1: Tuple[int, ...] = ()
    trace_m2: Tuple[int, ...] = ()


def smallest_blocklength(energy, bits, h, M, strict=True):
    """Smallest m in [1, M] whose rate-margin energy is below ``energy``, or None."""
    if not energy > 0:
        return None
    m = _min_blocklength(float(energy), float(bits), float(h), 1, int(M), bool(strict))
    return m if m <= M else None


def _tighten(E, M, own, other, start, cap):
    cur = start
    trace = [cur]
    while True:
        if M - cur < 1:
            raise Infeasible("no symbols left for the other phase")
        reserve = _g_energy(float(M - cur), float(other[0]), float(other[1]))
        nxt = smallest_blocklength(E - reserve, own[0], own[1], M)
        if nxt is None or nxt > cap:
            raise Infeasible("blocklength lower bound exceeds the budget")
        trace.append(nxt)
        if nxt == cur or nxt == cap:
            return nxt, tuple(trace)
        cur = nxt


def two_phase_bounds(E, M, phase1, phase2):
    """Converged bounds; ``phase1``/``phase2`` are ``(bits, h)`` pairs."""
    a0 = smallest_blocklength(E, phase1[0], phase1[1], M)
    b0 = smallest_blocklength(E, phase2[0], phase2[1], M)
    if a0 is None or b0 is None or a0 + b0 > M:
        raise Infeasible("energy budget cannot support both phases")
    m1_lb, t1 = _tighten(E, M, phase1, phase2, a0, M - b0)
    m2_lb, t2 = _tighten(E, M, phase2, phase1, b0, M - a0)
    m1_ub = M - m2_lb
    if m1_lb > m1_ub:
        raise Infeasible("empty blocklength search region")
    return BlocklengthBounds(m1_lb, m1_ub, m2_lb, t1, t2)
