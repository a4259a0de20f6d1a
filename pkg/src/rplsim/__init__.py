"""Deterministic discrete-event simulator for battery-draining attacks on
RPL-based low-power networks."""

from .attacks import AttackConfig, AttackKind
from .energy import CurrentProfile, EnergyTimers, KineticBattery, LinearBattery, \
    average_power
from .kernel import Event, EventKind, Kernel, SchedulingInPast, TICKS_PER_SECOND, \
    seconds
from .medium import BROADCAST, Frame, FrameKind, Medium, Position, RadioParams, \
    airtime
from .metrics import RunMetrics, compare_report, expected_drop_fraction, \
    honest_mean, percent_increase, read_csv, write_csv
from .rpl import INFINITE_RANK, MIN_HOP_RANK_INCREASE, ROOT_RANK, compute_rank
from .runner import Network, run_scenario
from .scenario import NodeSpec, Role, ScenarioConfig, generate_topology, \
    load_preset, load_scenario, preset_names, serialize

__version__ = "0.1.0"
