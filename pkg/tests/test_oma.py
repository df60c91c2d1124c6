import math

import mpmath
import numpy as np
import pytest

import oracles
from instances import T0_ARGS, T0_WEAK_ARGS, s0
from urllc_alloc import Scenario
from urllc_alloc.exceptions import Infeasible
from urllc_alloc.fbl import LN2, decode_error, power_for_error
from urllc_alloc.oma import (
    m2_lower_given_m1,
    oma_bounds,
    solve_oma,
    solve_oma_highsnr_inner,
    _g_tilde_prime,
)


def rate_energy(m, d, h):
    return m * (2.0 ** (d / m) - 1.0) / h


def relaxed_pairs(s):
    """All (m1, m2) whose rate-margin energies fit strictly inside E."""
    return [
        (a, b)
        for a in range(1, s.M)
        for b in range(1, s.M - a + 1)
        if rate_energy(a, s.D, s.h1) + rate_energy(b, s.D, s.h2) < s.E
    ]


@pytest.mark.parametrize("args", [T0_ARGS, T0_WEAK_ARGS, (32, 40, 3.0, 1e-3, 50.0, 5.0, 20.0)])
def test_bounds_match_exhaustive_scan(args):
    s = Scenario(*args)
    pairs = relaxed_pairs(s)
    if not pairs:
        with pytest.raises(Infeasible):
            oma_bounds(s)
        return
    b = oma_bounds(s)
    assert b.m1_lb == min(a for a, _ in pairs)
    assert b.m2_lb == min(m for _, m in pairs)
    assert b.m1_ub == s.M - b.m2_lb
    assert b.m1_lb <= b.m1_ub


def test_bounds_collapse_with_unbounded_energy():
    b = oma_bounds(Scenario(32, 40, 1e30, 1e-3, 50.0, 5.0))
    assert (b.m1_lb, b.m2_lb, b.m1_ub) == (1, 1, 39)


def test_bounds_trace_is_monotone(t0):
    b = oma_bounds(t0)
    for tr in (b.trace_m1, b.trace_m2):
        assert all(x <= y for x, y in zip(tr, tr[1:]))


def test_m2_lower_matches_linear_scan(t0):
    b = oma_bounds(t0)
    checked = 0
    for m1 in range(b.m1_lb, b.m1_ub + 1):
        p1 = power_for_error(t0.h1, m1, t0.D, t0.eps1_max)
        residual = t0.E - m1 * p1
        scan = [m for m in range(1, t0.M - m1 + 1) if rate_energy(m, t0.D, t0.h2) <= residual]
        if scan:
            assert m2_lower_given_m1(t0, m1, p1) == scan[0]
            checked += 1
        else:
            with pytest.raises(Infeasible):
                m2_lower_given_m1(t0, m1, p1)
    assert checked > 0


def test_m2_lower_unbounded_residual():
    s = Scenario(32, 40, 1e30, 1e-3, 50.0, 5.0)
    assert m2_lower_given_m1(s, 5, 1.0) == 1


def test_m2_lower_keeps_boundary_integer():
    # residual equal to the rate-margin energy at m2 = 12 keeps 12 in range
    s0_ = Scenario(32, 40, 10.0, 1e-3, 50.0, 5.0)
    m1, k = 10, 12
    need = rate_energy(k, s0_.D, s0_.h2)
    p1 = (s0_.E - need) / m1
    assert m2_lower_given_m1(s0_, m1, p1) == k


def test_m2_lower_raises_without_room():
    s = Scenario(32, 40, 1.0, 1e-3, 50.0, 5.0)
    with pytest.raises(Infeasible):
        m2_lower_given_m1(s, 39, 0.02)


def test_solve_matches_oracle(t0):
    out = solve_oma(t0)
    ref, _ = oracles.oma(*T0_ARGS[:6])
    le = out.eps_target.log_value
    assert out.feasible
    assert abs(le - ref) <= 1e-3 * abs(ref)
    # the grid can only be worse than the continuous optimum
    assert le <= ref + 1e-9 * abs(ref)


def test_solution_invariants(t0):
    out = solve_oma(t0)
    a = out.allocation
    assert a.m1 + a.m2 <= t0.M
    assert a.energy() == pytest.approx(t0.E, rel=1e-9)
    e1 = decode_error(a.p1 * t0.h1, a.m1, t0.D)
    assert abs(e1.value - t0.eps1_max) <= 1e-6 * t0.eps1_max
    e2 = decode_error(a.p2 * t0.h2, a.m2, t0.D)
    assert e2.log_value == pytest.approx(out.eps_target.log_value, rel=1e-10)
    assert out.eps_robot.log_value == pytest.approx(e1.log_value, rel=1e-12)


def test_s0_regression():
    out = solve_oma(s0())
    a = out.allocation
    assert out.feasible
    assert (a.m1, a.m2) == (31, 69)
    assert out.eps_target.log_value == pytest.approx(-5.130306543250523, rel=1e-9)


def test_infeasible_when_budget_too_short(t0):
    b = oma_bounds(t0)
    s = Scenario(t0.D, b.m1_lb + b.m2_lb - 1, t0.E, t0.eps1_max, t0.h1, t0.h2, t0.h3)
    out = solve_oma(s)
    assert not out.feasible
    assert out.eps_target.value == 1.0


def test_weak_t0_is_infeasible(t0_weak):
    assert not solve_oma(t0_weak).feasible


def test_more_symbols_never_hurt(t0):
    prev = 0.0
    for M in range(20, 61, 4):
        s = Scenario(t0.D, M, t0.E, t0.eps1_max, t0.h1, t0.h2)
        le = solve_oma(s).eps_target.log_value
        assert le <= prev + 1e-12
        prev = le


def test_fast_path_agrees_with_enumeration():
    s = s0(energy_joule=5e-4)
    fast, slow = solve_oma(s), solve_oma(s, fast_path=False)
    assert (fast.allocation.m1, fast.allocation.m2) == (slow.allocation.m1, slow.allocation.m2)
    assert fast.eps_target.log_value == pytest.approx(slow.eps_target.log_value, rel=1e-12)


# ---------------------------------------------------------------- high-SNR inner step


def g_tilde(m, e2h2, d):
    return math.sqrt(m) * (math.log2(1.0 + e2h2 / m) - d / m)


def _inner_case(E):
    s = Scenario(32, 40, E, 1e-3, 5000.0, 500.0)
    m1 = 10
    p1 = power_for_error(s.h1, m1, s.D, s.eps1_max)
    return s, m1, p1


@pytest.mark.parametrize("E", [30.0, 300.0, 3000.0, 3e5])
def test_highsnr_inner_matches_integer_scan(E):
    s, m1, p1 = _inner_case(E)
    m2, p2 = solve_oma_highsnr_inner(s, m1, p1)
    lo = m2_lower_given_m1(s, m1, p1)
    e2h2 = (s.E - m1 * p1) * s.h2
    scan = max(range(lo, s.M - m1 + 1), key=lambda m: (g_tilde(m, e2h2, s.D), -m))
    assert m2 == scan
    assert p2 == pytest.approx((s.E - m1 * p1) / m2, rel=1e-15)


def test_highsnr_inner_endpoints():
    # tiny payload: more symbols always help, so the top endpoint wins
    s = Scenario(1, 40, 3e5, 1e-3, 5000.0, 500.0)
    p1 = power_for_error(s.h1, 10, s.D, s.eps1_max)
    assert solve_oma_highsnr_inner(s, 10, p1)[0] == 30


@pytest.mark.parametrize("D", [1, 5, 32, 100, 400])
@pytest.mark.parametrize("E", [30.0, 3e3, 3e5, 3e7])
def test_highsnr_lower_endpoint_never_binds(D, E):
    # at the residual-energy boundary the slope is y - 1 + exp(-y) >= 0, so the
    # lower endpoint is returned only through the scan, never the slope rule
    s = Scenario(D, 100, E, 1e-3, 5000.0, 500.0)
    p1 = power_for_error(s.h1, 10, s.D, s.eps1_max)
    try:
        lo = m2_lower_given_m1(s, 10, p1)
    except Infeasible:
        return
    e2h2 = (s.E - 10 * p1) * s.h2
    assert _g_tilde_prime(lo, e2h2, D) > 0


def test_highsnr_inner_rejects_low_snr():
    s = Scenario(32, 40, 1.0, 1e-3, 50.0, 5.0)
    with pytest.raises(ValueError):
        solve_oma_highsnr_inner(s, 10, 0.01)


# ---------------------------------------------------------------- analytic properties


def test_g_tilde_concave_where_condition_holds():
    mpmath.mp.dps = 40
    d = 100
    for e2h2 in (50.0, 200.0, 1e3, 1e5):
        for top in (20, 60, 99):
            if e2h2 / top < math.e - 1:
                continue
            f = lambda m: mpmath.sqrt(m) * (mpmath.log(1 + e2h2 / m) / mpmath.log(2) - d / m)
            for m in np.linspace(1.5, top, 25):
                assert float(mpmath.diff(f, mpmath.mpf(m), 2)) <= 1e-9


def test_rate_energy_decreasing_convex():
    for d, h in ((100, 131.26), (32, 5.0)):
        m = np.arange(2, 501, dtype=float)
        g = m * np.expm1(d * LN2 / m) / h
        assert np.all(np.diff(g) < 0)
        assert np.all(np.diff(g, 2) >= -1e-12 * g[1:-1])
