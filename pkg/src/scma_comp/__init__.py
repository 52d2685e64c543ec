"""Downlink system-level simulator for open-loop MU-SCMA with CoMP joint transmission."""

__version__ = "0.1.0"

from .config import ConfigError, SimConfig, load_config
from .network import hex_layout
from .scheduler import PfState, RateModel, SchedulerConfig, schedule_cluster, update_pf
from .scma import build_signature_set, capacity_kernel
from .sim import emit_outputs, run_case_sweep, run_simulation

__all__ = [
    "ConfigError", "PfState", "RateModel", "SchedulerConfig", "SimConfig", "build_signature_set",
    "capacity_kernel", "emit_outputs", "hex_layout", "load_config", "run_case_sweep",
    "run_simulation", "schedule_cluster", "update_pf",
]
