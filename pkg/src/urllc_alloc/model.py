"""Physical channel model and problem instances."""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ChannelModel:
    bandwidth_hz: float = 1e6
    noise_psd_dbm_per_hz: float = -173.0
    pathloss_intercept_db: float = 35.3
    pathloss_exponent_coeff_db: float = 37.6

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth_hz must be positive")

    @property
    def symbol_time(self):
        return 1.0 / self.bandwidth_hz

    def noise_power(self):
        """Noise power over the band, in watts."""
        dbm = self.noise_psd_dbm_per_hz + 10.0 * math.log10(self.bandwidth_hz)
        return 10.0 ** ((dbm - 30.0) / 10.0)

    def path_loss_db(self, distance_m):
        return self.pathloss_intercept_db + self.pathloss_exponent_coeff_db * math.log10(distance_m)


def normalized_gain(model, distance_m, fading_power=1.0):
    """Channel power gain over noise power (1/W), so that SNR = p * h."""
    if not distance_m > 0:
        raise ValueError("distance must be positive")
    if not fading_power > 0:
        raise ValueError("fading power must be positive")
    return fading_power * 10.0 ** (-model.path_loss_db(distance_m) / 10.0) / model.noise_power()


@dataclass(frozen=True)
class Scenario:
    """Two-device instance.

    ``energy_budget`` is in watt-symbols (joules times bandwidth). ``h1`` is
    the robot, ``h2`` the actuator and ``h3`` the robot-actuator link.
    Set ``check_order=False`` to admit fading draws where ``h1 <= h2``.
    """

    data_bits: int
    budget_symbols: int
    energy_budget: float
    eps1_max: float
    h1: float
    h2: float
    h3: float = 1.0
    check_order: bool = True

    def __post_init__(self):
        if self.data_bits < 1:
            raise ValueError("data_bits must be >= 1")
        if self.budget_symbols < 2:
            raise ValueError("budget_symbols must be >= 2")
        if not self.energy_budget > 0:
            raise ValueError("energy_budget must be positive")
        if not 0 < self.eps1_max < 0.1:
            raise ValueError("eps1_max must lie in (0, 0.1)")
        if not (self.h1 > 0 and self.h2 > 0 and self.h3 > 0):
            raise ValueError("channel gains must be positive")
        if self.check_order and not self.h1 > self.h2:
            raise ValueError("the robot must have the stronger channel (h1 > h2)")

    @property
    def D(self):
        return self.data_bits

    @property
    def M(self):
        return self.budget_symbols

    @property
    def E(self):
        return self.energy_budget
