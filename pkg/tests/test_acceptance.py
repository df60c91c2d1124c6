"""End-to-end acceptance checks, one PASS/FAIL line per criterion."""

import math
import os
import subprocess
import sys
from pathlib import Path

import mpmath
import numpy as np
import pytest

import oracles
from instances import T0_ARGS, s0
from urllc_alloc import (
    MultiScenario,
    Scenario,
    SweepConfig,
    cnoma_error_bundle,
    dispersion,
    draw_fading,
    network_availability,
    noma_error_bundle,
    relay_error_bundle,
    solve_cnoma,
    solve_multi_oma,
    solve_noma,
    solve_oma,
    solve_relay,
)
from urllc_alloc.fbl import LN2, decode_error, q_tail_inv
from urllc_alloc.harness import multi_scenario_from, scenario_from
from urllc_alloc.multi import convexity_limit, g_energy
from urllc_alloc.oma import _g_tilde

ROOT = Path(__file__).resolve().parent.parent
SOLVERS = {"oma": solve_oma, "noma": solve_noma, "relay": solve_relay, "cnoma": solve_cnoma}


@pytest.fixture
def verdict(capsys):
    def report(name, ok, detail=""):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {name}: {detail}")
        assert ok, detail

    return report


def test_c01_constant_anchors(verdict):
    a = q_tail_inv(1e-9) / LN2
    rhs = convexity_limit(100, 1e-9)
    top = math.floor(rhs**2)
    ok = abs(a - 8.653) <= 1e-3 and abs(rhs - 14.236) <= 1e-3 and top == 202
    verdict("C1 constant anchors", ok, f"A={a:.5f} rhs={rhs:.5f} m_max={top}")


def test_c02_dispersion(verdict):
    v = dispersion(100.0)
    verdict("C2 dispersion at SNR 100", v > 0.99, f"V={v:.6f}")


def test_c03_oracle_equivalence(verdict):
    s = Scenario(*T0_ARGS)
    refs = {
        "oma": (oracles.oma(*T0_ARGS[:6])[0], 1e-3),
        "noma": (oracles.noma(*T0_ARGS[:6])[0], 1e-3),
        "relay": (oracles.relay(*T0_ARGS)[0], 1e-3),
        "cnoma": (oracles.cnoma(*T0_ARGS)[0], 1e-2),
    }
    parts, ok = [], True
    for name, (ref, tol) in refs.items():
        got = SOLVERS[name](s).eps_target.log_value
        rel = abs(got - ref) / abs(ref)
        ok &= rel <= tol
        parts.append(f"{name} {got:.4f}/{ref:.4f} rel={rel:.1e}")
    verdict("C3 oracle equivalence", ok, "; ".join(parts))


def _random_scenario(rng):
    while True:
        h1, h2, h3 = 10.0 ** rng.uniform((0.5, -0.5, 0.5), (2.5, 1.5, 2.0))
        if h1 > h2:
            break
    return Scenario(
        int(rng.integers(16, 65)),
        int(rng.integers(30, 81)),
        float(rng.uniform(5.0, 100.0)),
        float(10.0 ** rng.uniform(-6.0, -2.0)),
        float(h1),
        float(h2),
        float(h3),
    )


def _robot_error(name, s, a):
    if name == "oma":
        return decode_error(a.p1 * s.h1, a.m1, s.D)
    if name == "noma":
        return noma_error_bundle(a.p1, a.p2, s).eps_bar_1
    if name == "relay":
        return relay_error_bundle(a.ps, a.pr, a.m1, a.m2, s).eps_1
    return cnoma_error_bundle(a.p1, a.p2, a.pr, a.m1, a.m2, s).eps_bar_1


def test_c04_robot_cap_met_with_equality(verdict):
    worst_gap = worst_res = 0.0
    ok = True
    for k, name in enumerate(SOLVERS):
        rng = np.random.default_rng(400 + k)
        n = 0
        while n < 50:
            s = _random_scenario(rng)
            out = SOLVERS[name](s)
            if not out.feasible:
                continue
            n += 1
            a = out.allocation
            eps1 = _robot_error(name, s, a).value
            gap = (eps1 - s.eps1_max) / s.eps1_max
            res = abs(a.energy() - s.E) / s.E
            worst_res = max(worst_res, res)
            if name == "relay":
                ok &= gap <= 1e-6
            else:
                ok &= abs(gap) <= 1e-6
                worst_gap = max(worst_gap, abs(gap))
            ok &= res <= 1e-9
    verdict("C4 robot cap tight, energy spent", ok, f"max robot-cap gap={worst_gap:.1e} max energy residual={worst_res:.1e}")


def test_c05_concavity_certificates(verdict):
    rng = np.random.default_rng(5)
    worst_oma = -math.inf
    checked = 0
    d = 100
    while checked < 200:
        top = int(rng.integers(5, 200))
        e2h2 = float(10.0 ** rng.uniform(0.0, 5.0))
        if e2h2 / top < math.e - 1:
            continue
        checked += 1
        h = 1e-3
        for m in np.linspace(1.0 + h, top, 30):
            dd = (_g_tilde(m + h, e2h2, d) - 2 * _g_tilde(m, e2h2, d) + _g_tilde(m - h, e2h2, d)) / h**2
            worst_oma = max(worst_oma, dd)
    slope_max, curv_min = -math.inf, math.inf
    for m in np.linspace(5.0, 202.0, 400):
        step = 1e-4 * m
        slope_max = max(slope_max, g_energy(m, d, 1e-9, 1.0)[1])
        fd2 = (g_energy(m + step, d, 1e-9, 1.0)[1] - g_energy(m - step, d, 1e-9, 1.0)[1]) / (2 * step)
        curv_min = min(curv_min, fd2)
    # independent high-precision second derivative at the region's far end
    mpmath.mp.dps = 40
    a = mpmath.mpf(q_tail_inv(1e-9)) / mpmath.log(2)
    g = lambda m: m * (mpmath.power(2, d / m + a / mpmath.sqrt(m)) - 1)
    edge = float(mpmath.diff(g, mpmath.mpf(202), 2))
    ok = worst_oma <= 1e-6 and slope_max < 0 and curv_min >= -1e-9 and edge >= -1e-9
    verdict(
        "C5 concavity certificates",
        ok,
        f"max oma g'' = {worst_oma:.2e}; multi max g' = {slope_max:.3e}, min g'' = {curv_min:.3e}, g''(202) = {edge:.3e}",
    )


def _unimodal(v):
    k = int(np.argmin(v))
    return all(a >= b for a, b in zip(v[:k], v[1 : k + 1])) and all(a <= b for a, b in zip(v[k:], v[k + 1 :]))


def test_c06_trend_regressions(verdict):
    lo = solve_relay(s0(symbols=50)).eps_target.value
    hi = solve_relay(s0(symbols=100)).eps_target.value
    anchors = lo >= 0.1 / 1e3 and hi <= 1e-20 * 1e3
    at50 = {n: f(s0(symbols=50)).eps_target.log_value for n, f in SOLVERS.items()}
    best = min(at50, key=at50.get)
    noma_best = best == "noma" and all(v > at50["noma"] for n, v in at50.items() if n != "noma")
    d1 = [float(v) for v in range(50, 451, 50)]
    curves = {n: [f(s0(d1=x)).eps_target.log_value for x in d1] for n, f in SOLVERS.items()}
    mono = all(all(b >= a for a, b in zip(c, c[1:])) for c in (curves["oma"], curves["noma"]))
    uni = _unimodal(curves["relay"]) and _unimodal(curves["cnoma"])
    ok = anchors and noma_best and mono and uni
    verdict(
        "C6 trend regressions",
        ok,
        f"relay eps M=50 {lo:.3g}, M=100 {hi:.3g}; best at M=50 {best}; monotone={mono} unimodal={uni}",
    )


def test_c07_relay_dominates_cooperative_noma(verdict):
    cfg = SweepConfig()
    n = i = bad = 0
    worst = -math.inf
    while n < 20:
        s = scenario_from(cfg, draw_fading(7, i))
        i += 1
        r, c = solve_relay(s), solve_cnoma(s)
        if not (r.feasible and c.feasible):
            continue
        n += 1
        lr, lc = r.eps_target.log_value, c.eps_target.log_value
        worst = max(worst, lr - lc)
        bad += lr > lc + 1e-6 * abs(lc)
    verdict("C7 relay dominance", bad == 0, f"{n} instances, violations={bad}, max ln gap={worst:.3f}")


def test_c08_multi_device_consistency(verdict):
    gaps = []
    for s in (Scenario(*T0_ARGS[:6], 1.0), s0()):
        ms = MultiScenario(s.D, s.M, s.E, ((s.h1, s.eps1_max),), s.h2)
        gaps.append(abs(solve_multi_oma(ms).eps_target.log_value - solve_oma(s).eps_target.log_value))
    cfg = SweepConfig(sweep_param="K", sweep_values=(2, 3, 4))
    le = [solve_multi_oma(multi_scenario_from(c)).eps_target.log_value for _, c in cfg.points()]
    ok = max(gaps) <= 1.0 and all(b >= a for a, b in zip(le, le[1:]))
    verdict("C8 multi-device consistency", ok, f"K=2 ln gaps {gaps[0]:.3f}, {gaps[1]:.3f}; ln eps_K {[round(x, 3) for x in le]}")


@pytest.mark.slow
def test_c09_network_availability(verdict, capsys):
    frac = {}
    for name in SOLVERS:
        (rep,) = network_availability(SweepConfig(scheme=name, energy_joule=5e-4), 1000, 2024, 1e-9)
        frac[name] = rep.fraction
    ok = frac["relay"] >= 0.90 and all(frac["relay"] >= v for v in frac.values())
    near = abs(frac["relay"] - 0.98) <= 0.05
    verdict(
        "C9 network availability",
        ok,
        f"{frac}; relay within 5 points of 98%: {'yes' if near else 'no'}",
    )


def _cli(*args):
    return [sys.executable, "-m", "urllc_alloc", *args]


def test_c10_determinism(verdict, tmp_path):
    env = dict(os.environ)
    sweep = ["sweep", "--sweep", "M", "--values", "60,80,100"]
    avail = ["availability", "--scheme", "noma", "--energy-joule", "5e-4", "--draws", "40", "--seed", "9", "--target", "1e-9"]
    outputs = {}
    for tag, args in (("sweep", sweep), ("avail", avail)):
        procs = [
            subprocess.Popen(_cli(*args, "--workers", str(w), "--out", str(tmp_path / f"{tag}{j}.csv")), env=env, cwd=ROOT)
            for j, w in enumerate((1, 3, 3))
        ]
        codes = [p.wait(timeout=600) for p in procs]
        outputs[tag] = [(tmp_path / f"{tag}{j}.csv").read_bytes() for j in range(3)]
        assert codes == [0, 0, 0]
    ok = all(len(set(v)) == 1 for v in outputs.values())
    verdict("C10 determinism", ok, "sweep and availability CSV identical across 3 concurrent runs (workers 1, 3, 3)")
