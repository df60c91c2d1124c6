"""Shared problem instances for the test modules."""

from urllc_alloc import Scenario, SweepConfig
from urllc_alloc.harness import scenario_from

# Small instance where all four two-device schemes are feasible.
T0_ARGS = (32, 40, 30.0, 1e-3, 50.0, 5.0, 20.0)
# Gains (10, 0.5, 1) at the same D, M, E: too weak for any scheme.
T0_WEAK_ARGS = (32, 40, 30.0, 1e-3, 10.0, 0.5, 1.0)


def t0():
    return Scenario(*T0_ARGS)


def t0_weak():
    return Scenario(*T0_WEAK_ARGS)


def s0(**kw):
    """Path-loss geometry with d1=200, d2=500, d3=300 and 5e-5 J unless overridden."""
    return scenario_from(SweepConfig(**kw))
