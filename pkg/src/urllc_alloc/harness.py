"""Scenario construction, parameter sweeps and Monte-Carlo availability runs."""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .cnoma import solve_cnoma
from .model import ChannelModel, Scenario, normalized_gain
from .multi import MultiScenario, solve_multi_oma
from .noma import solve_noma
from .oma import solve_oma
from .relay import solve_relay
from .results import SchemeOutcome

SOLVERS = {
    "oma": solve_oma,
    "noma": solve_noma,
    "relay": solve_relay,
    "cnoma": solve_cnoma,
}
TWO_DEVICE = tuple(SOLVERS)
SCHEMES = TWO_DEVICE + ("oma_multi",)
SWEEP_PARAMS = ("d1", "M", "D", "E_tot", "K")
# relative slack when checking a constraint that is met with equality
CONSTRAINT_RTOL = 1e-6


@dataclass(frozen=True)
class FadingDraw:
    g1: float
    g2: float
    g3: float


@dataclass(frozen=True)
class SweepConfig:
    scheme: str = "all"
    sweep_param: Optional[str] = None
    sweep_values: Tuple[float, ...] = ()
    d1: float = 200.0
    d2: float = 500.0
    d3: Optional[float] = None
    bits: int = 100
    symbols: int = 100
    energy_joule: float = 5e-5
    eps1_max: float = 1e-9
    h1: Optional[float] = None
    h2: Optional[float] = None
    h3: Optional[float] = None
    # number of devices for oma_multi; constrained device k sits at k * device_spacing
    devices: int = 2
    device_spacing: float = 50.0
    channel: ChannelModel = field(default_factory=ChannelModel)

    def __post_init__(self):
        if self.scheme != "all" and self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.sweep_param is not None and self.sweep_param not in SWEEP_PARAMS:
            raise ValueError(f"unknown sweep parameter {self.sweep_param!r}")
        vals = tuple(self.sweep_values)
        object.__setattr__(self, "sweep_values", vals)
        if self.sweep_param is None and vals:
            raise ValueError("sweep values given without a sweep parameter")
        if self.sweep_param is not None and not vals:
            raise ValueError("sweep parameter given without values")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if any(not v > 0 for v in vals):
            raise ValueError("sweep values must be positive")
        for name in ("d1", "d2", "energy_joule", "eps1_max", "device_spacing"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.bits < 1 or self.symbols < 2 or self.devices < 2:
            raise ValueError("need bits >= 1, symbols >= 2 and devices >= 2")
        for name in ("d3", "h1", "h2", "h3"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")

    def schemes(self):
        if self.sweep_param == "K":
            if self.scheme not in ("all", "oma_multi"):
                raise ValueError("a K sweep only applies to oma_multi")
            return ("oma_multi",)
        if self.scheme == "all":
            return TWO_DEVICE
        return (self.scheme,)

    def at(self, value):
        """Copy with the swept parameter set to ``value``."""
        p = self.sweep_param
        if p is None:
            return self
        if p == "d1":
            return replace(self, d1=float(value), d3=None, sweep_param=None, sweep_values=())
        key = {"M": "symbols", "D": "bits", "E_tot": "energy_joule", "K": "devices"}[p]
        v = float(value) if p == "E_tot" else int(value)
        return replace(self, **{key: v}, sweep_param=None, sweep_values=())

    def points(self):
        if self.sweep_param is None:
            return [(None, self)]
        return [(v, self.at(v)) for v in self.sweep_values]


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    sweep_param: Optional[str]
    sweep_value: Optional[float]
    outcome: object


@dataclass(frozen=True)
class AvailabilityReport:
    scheme: str
    n_draws: int
    n_available: int
    seed: int
    target: float
    sweep_param: Optional[str] = None
    sweep_value: Optional[float] = None

    @property
    def fraction(self):
        return self.n_available / self.n_draws


def build_scenario(channel, d1, d2, d3, D, M, energy_joule, eps1_max, fading=None, h=(None, None, None)):
    """Two-device Scenario from geometry; explicit gains in ``h`` replace path-loss ones."""
    for d in (d1, d2, d3):
        if not d > 0:
            raise ValueError("distances must be positive")
    g = fading or FadingDraw(1.0, 1.0, 1.0)
    gains = []
    for override, d, f in zip(h, (d1, d2, d3), (g.g1, g.g2, g.g3)):
        gains.append(override * f if override is not None else normalized_gain(channel, d, f))
    return Scenario(
        int(D),
        int(M),
        energy_joule * channel.bandwidth_hz,
        eps1_max,
        *gains,
        check_order=fading is None,
    )


def scenario_from(cfg, fading=None):
    d3 = cfg.d3 if cfg.d3 is not None else cfg.d2 - cfg.d1
    return build_scenario(
        cfg.channel, cfg.d1, cfg.d2, d3, cfg.bits, cfg.symbols, cfg.energy_joule, cfg.eps1_max,
        fading, (cfg.h1, cfg.h2, cfg.h3),
    )


def multi_scenario_from(cfg):
    ch = cfg.channel
    devices = tuple(
        (normalized_gain(ch, cfg.device_spacing * k), cfg.eps1_max) for k in range(1, cfg.devices)
    )
    return MultiScenario(cfg.bits, cfg.symbols, cfg.energy_joule * ch.bandwidth_hz, devices, normalized_gain(ch, cfg.d2))


def solve_point(cfg, scheme):
    if scheme == "oma_multi":
        return solve_multi_oma(multi_scenario_from(cfg))
    return SOLVERS[scheme](scenario_from(cfg))


def _workers(workers):
    return workers or os.cpu_count() or 1


def run_sweep(cfg, workers=None):
    """One row per (scheme, sweep value), ordered by scheme then sweep value."""
    jobs = [(s, v, c) for s in cfg.schemes() for v, c in cfg.points()]

    def work(job):
        scheme, value, c = job
        try:
            out = solve_point(c, scheme)
        except ValueError:
            # e.g. the robot moved past the actuator; record and keep going
            out = SchemeOutcome.infeasible(scheme)
        return SweepRow(scheme, cfg.sweep_param, value, out)

    with ThreadPoolExecutor(max_workers=_workers(workers)) as pool:
        return list(pool.map(work, jobs))


def draw_fading(seed, index):
    """Unit-mean exponential power gains; draw ``index`` depends only on (seed, index)."""
    rng = np.random.default_rng([int(seed), int(index)])
    g = rng.exponential(1.0, size=3)
    return FadingDraw(float(g[0]), float(g[1]), float(g[2]))


def available(outcome, eps1_max, target):
    if not outcome.feasible:
        return False
    if outcome.eps_target.log_value > math.log(target) + CONSTRAINT_RTOL:
        return False
    robot = outcome.eps_robot
    return robot is None or robot.log_value <= math.log(eps1_max) + CONSTRAINT_RTOL


def _draw_flags(cfg, schemes, seed, index, target):
    s = scenario_from(cfg, draw_fading(seed, index))
    return tuple(available(SOLVERS[name](s), cfg.eps1_max, target) for name in schemes)


def _check_run(cfg, n_draws, target):
    if n_draws < 1:
        raise ValueError("n_draws must be at least 1")
    if not 0 < target <= 1:
        raise ValueError("target must lie in (0, 1]")
    schemes = cfg.schemes()
    if "oma_multi" in schemes:
        raise ValueError("availability covers the two-device schemes only")
    return schemes


def availability_flags(cfg, n_draws, seed, target, workers=None):
    """Per-draw availability of each scheme, one tuple per draw in index order.

    ``cfg`` must not carry a sweep.
    """
    if cfg.sweep_param is not None:
        raise ValueError("availability_flags takes a single point; use network_availability for sweeps")
    schemes = _check_run(cfg, n_draws, target)
    with ThreadPoolExecutor(max_workers=_workers(workers)) as pool:
        return list(pool.map(lambda i: _draw_flags(cfg, schemes, seed, i, target), range(n_draws)))


def network_availability(cfg, n_draws, seed, target, workers=None):
    """Per scheme (and sweep value) count of draws where every device meets its target."""
    schemes = _check_run(cfg, n_draws, target)
    reports = []
    for value, c in cfg.points():
        flags = availability_flags(c, n_draws, seed, target, workers)
        for j, name in enumerate(schemes):
            n_ok = sum(f[j] for f in flags)
            reports.append(AvailabilityReport(name, n_draws, n_ok, int(seed), target, cfg.sweep_param, value))
    return reports


__all__ = [
    "FadingDraw",
    "SweepConfig",
    "SweepRow",
    "AvailabilityReport",
    "build_scenario",
    "scenario_from",
    "multi_scenario_from",
    "solve_point",
    "run_sweep",
    "draw_fading",
    "available",
    "availability_flags",
    "network_availability",
]
