"""Joint blocklength and power allocation for short-packet downlink transmission."""

from ._jit import USING_NUMBA
from .cnoma import CnomaErrorBundle, cnoma_bounds, cnoma_error_bundle, solve_cnoma
from .exceptions import Infeasible, NumericError
from .fbl import ErrorProb, decode_error, dispersion, power_for_error, q_tail, q_tail_inv, rate_margin
from .harness import (
    AvailabilityReport,
    FadingDraw,
    SweepConfig,
    build_scenario,
    availability_flags,
    draw_fading,
    network_availability,
    run_sweep,
)
from .model import ChannelModel, Scenario, normalized_gain
from .multi import MultiScenario, chi, g_energy, greedy_round, multi_bounds, solve_multi_oma, solve_relaxed_dual
from .noma import NomaErrorBundle, noma_error_bundle, noma_p1_bounds, solve_noma
from .oma import oma_bounds, solve_oma
from .relay import RelayErrorBundle, relay_bounds, relay_error_bundle, relay_ps_range, solve_relay
from .results import (
    CnomaAllocation,
    MultiAllocation,
    NomaAllocation,
    OmaAllocation,
    RelayAllocation,
    SchemeOutcome,
)

__version__ = "0.1.0"
