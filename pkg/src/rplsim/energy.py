"""Per-node time accounting and battery models.

Nodes are either in CPU-active or low-power mode, so t_cpu + t_lpm always
equals elapsed time; the radio timers (TX/RX) accrue independently on top.
Energy follows as sum(state time x state current) x supply voltage, and
batteries integrate that draw either linearly or through a two-well kinetic
model that captures the rate-capacity and recovery effects.
"""

from __future__ import annotations

from dataclasses import dataclass


class ZeroWindow(Exception):
    pass


@dataclass
class CurrentProfile:
    """Supply currents per node state, milliamps, plus supply voltage."""
    i_lpm: float = 0.020
    i_cpu: float = 0.426
    i_tx: float = 17.4
    i_rx: float = 18.8
    voltage: float = 3.0

    def __post_init__(self):
        for name in ("i_lpm", "i_cpu", "i_tx", "i_rx", "voltage"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass
class EnergyTimers:
    """Cumulative microseconds spent in each state.

    ``t_cpu`` is accrued explicitly per handled event; ``t_lpm`` is the
    complement and is materialised by ``settle``.
    """
    t_cpu: int = 0
    t_lpm: int = 0
    t_tx: int = 0
    t_rx: int = 0

    def accrue_cpu(self, d: int, now: int) -> None:
        if d < 0:
            raise ValueError("negative accrual")
        # a node cannot be busy for longer than wall time
        self.t_cpu = min(self.t_cpu + d, now)

    def accrue_tx(self, d: int) -> None:
        if d < 0:
            raise ValueError("negative accrual")
        self.t_tx += d

    def accrue_rx(self, d: int) -> None:
        if d < 0:
            raise ValueError("negative accrual")
        self.t_rx += d

    def settle(self, now: int) -> None:
        """Bring t_lpm up to date so t_cpu + t_lpm == now."""
        if self.t_cpu > now:
            self.t_cpu = now
        self.t_lpm = now - self.t_cpu

    def snapshot(self, now: int) -> "EnergyTimers":
        self.settle(now)
        return EnergyTimers(self.t_cpu, self.t_lpm, self.t_tx, self.t_rx)

    def charge_mah(self, profile: CurrentProfile) -> float:
        """Total charge drawn so far (after settle), in mAh."""
        ua_us = (self.t_cpu * profile.i_cpu + self.t_lpm * profile.i_lpm
                 + self.t_tx * profile.i_tx + self.t_rx * profile.i_rx)
        return ua_us / 3.6e9  # us * mA -> mAh

    def energy_mj(self, profile: CurrentProfile) -> float:
        ua_us = (self.t_cpu * profile.i_cpu + self.t_lpm * profile.i_lpm
                 + self.t_tx * profile.i_tx + self.t_rx * profile.i_rx)
        return profile.voltage * ua_us / 1e6  # us * mA * V -> mJ


def average_power(timers: EnergyTimers, profile: CurrentProfile, window: int) -> float:
    """Mean power over ``window`` ticks, in milliwatts."""
    if window <= 0:
        raise ZeroWindow("window must be positive")
    ma_us = (timers.t_cpu * profile.i_cpu + timers.t_lpm * profile.i_lpm
             + timers.t_tx * profile.i_tx + timers.t_rx * profile.i_rx)
    return profile.voltage * ma_us / window


class LinearBattery:
    """Charge counter: consumed charge accumulates 1:1 with drawn charge."""

    kind = "linear"

    def __init__(self, capacity_mah: float):
        if capacity_mah <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity_mah
        self.consumed = 0.0

    def step(self, current_ma: float, dt_s: float) -> None:
        if dt_s <= 0:
            raise ValueError("dt must be positive")
        if current_ma < 0:
            raise ValueError("discharge current must be non-negative")
        self.consumed = min(self.capacity, self.consumed + current_ma * dt_s / 3600.0)

    def state_of_charge(self) -> float:
        return 1.0 - self.consumed / self.capacity

    def is_empty(self) -> bool:
        return self.consumed >= self.capacity


class KineticBattery:
    """Two-well kinetic battery model.

    Charge is split between an available well (fraction ``c``) and a bound
    well.  Load is served from the available well only; bound charge seeps
    across at ``k_rate`` times the head difference, which reproduces the
    recovery effect under pulsed loads and early cutoff under heavy ones.
    """

    kind = "kinetic"

    def __init__(self, capacity_mah: float, c: float = 0.625,
                 k_rate: float = 4.5e-5):
        if capacity_mah <= 0:
            raise ValueError("capacity must be positive")
        if not 0 < c < 1:
            raise ValueError("well split c must be in (0, 1)")
        if k_rate <= 0:
            raise ValueError("k_rate must be positive")
        self.capacity = capacity_mah
        self.c = c
        self.k_rate = k_rate
        self.available = c * capacity_mah
        self.bound = (1.0 - c) * capacity_mah
        self._empty = False

    def step(self, current_ma: float, dt_s: float) -> None:
        if dt_s <= 0:
            raise ValueError("dt must be positive")
        if current_ma < 0:
            raise ValueError("discharge current must be non-negative")
        if self._empty:
            return
        h_avail = self.available / self.c
        h_bound = self.bound / (1.0 - self.c)
        flow = self.k_rate * (h_bound - h_avail) * dt_s
        # the bound well can neither overdraw nor absorb beyond its content
        flow = max(-self.available, min(flow, self.bound))
        self.available += flow - current_ma * dt_s / 3600.0
        self.bound -= flow
        if self.available <= 0.0:
            self.available = 0.0
            self._empty = True

    def state_of_charge(self) -> float:
        return (self.available + self.bound) / self.capacity

    def is_empty(self) -> bool:
        return self._empty


Battery = LinearBattery | KineticBattery
