"""Simulation configuration: defaults, validation and the flat TOML file format."""

from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class SimConfig:
    case: int = 6
    speed_kmh: float = 3.0
    n_drops: int = 20
    ttis_per_drop: int = 2000
    n_users: int = 70
    seed: int = 1

    # radio
    bandwidth_hz: float = 10e6
    subbands: int = 10
    coherence_bandwidth_hz: float = 1e6
    tti_seconds: float = 1e-3
    carrier_hz: float = 2.6e9
    tone_spacing_hz: float = 15e3
    tx_power_dbm: float = 46.0
    noise_density_dbm_hz: float = -174.0
    noise_figure_db: float = 9.0
    rx_antennas: int = 2

    # geometry
    isd_m: float = 500.0
    shadowing_db: float = 8.0
    pl_intercept_db: float = 128.1
    pl_slope_db: float = 37.6

    # SCMA signature set (cases 1-2 always use OFDMA)
    scma_k: int = 4
    scma_j: int = 6
    scma_n: int = 2
    layer_split: int = 3

    # scheduler
    rsrp_threshold_db: float = 6.0
    comp_sinr_threshold_db: float = 5.0
    pf_window: float = 100.0
    pf_epsilon: float = 1.0
    dual_variant: str = "prose"
    sic_order: bool = True
    optimizer: str = "golden"
    tolerance: float = 1e-2  # on the sharing factor; WSR error is second order in it
    multiple_comp_sets: bool = False

    # outputs
    out_dir: str = "out"
    trace: bool = False
    sinr_dump: bool = False

    def __post_init__(self):
        _check(self.case in range(1, 7), "case", f"must be in 1..6, got {self.case}")
        _check(self.speed_kmh >= 0, "speed_kmh", "must be >= 0")
        for name in ("n_drops", "ttis_per_drop", "n_users"):
            _check(isinstance(getattr(self, name), int) and getattr(self, name) >= 0, name,
                   "must be a nonnegative integer")
        _check(isinstance(self.seed, int) and 0 <= self.seed < 2**64, "seed", "must be a u64 integer")
        for name in ("bandwidth_hz", "coherence_bandwidth_hz", "tti_seconds", "carrier_hz",
                     "tone_spacing_hz", "isd_m", "pf_window", "pf_epsilon", "tolerance"):
            _check(getattr(self, name) > 0, name, "must be positive")
        _check(self.subbands >= 1, "subbands", "must be >= 1")
        _check(math.isclose(self.subbands * self.coherence_bandwidth_hz, self.bandwidth_hz, rel_tol=1e-9),
               "subbands", "subbands x coherence_bandwidth_hz must equal bandwidth_hz")
        _check(self.rx_antennas >= 1, "rx_antennas", "must be >= 1")
        _check(self.shadowing_db >= 0, "shadowing_db", "must be >= 0")
        _check(self.scma_k >= 2 and 1 <= self.scma_n < self.scma_k, "scma_n", "need 1 <= N < K, K >= 2")
        _check(self.scma_j >= 2, "scma_j", "must be >= 2")
        _check(1 <= self.layer_split < self.scma_j, "layer_split", "must leave both users >= 1 layer")
        _check(self.rsrp_threshold_db >= 0, "rsrp_threshold_db", "must be >= 0 dB")
        _check(self.pf_window >= 1, "pf_window", "must be >= 1 TTI")
        _check(self.dual_variant in ("prose", "printed"), "dual_variant", "must be 'prose' or 'printed'")
        _check(self.optimizer in ("golden", "grid"), "optimizer", "must be 'golden' or 'grid'")

    @property
    def ofdma(self) -> bool:
        return self.case <= 2

    @property
    def tones_per_subband(self) -> float:
        return self.bandwidth_hz / self.subbands / self.tone_spacing_hz

    @property
    def power_per_tone_w(self) -> float:
        n_tones = self.bandwidth_hz / self.tone_spacing_hz
        return 10 ** ((self.tx_power_dbm - 30) / 10) / n_tones

    @property
    def noise_per_tone_w(self) -> float:
        dbm = self.noise_density_dbm_hz + self.noise_figure_db + 10 * math.log10(self.tone_spacing_hz)
        return 10 ** ((dbm - 30) / 10)

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _check(ok: bool, name: str, message: str) -> None:
    if not ok:
        raise ConfigError(name, message)


FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SimConfig)}


def _coerce(name: str, value):
    kind = FIELD_TYPES[name]
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(name, f"expected a boolean, got {value!r}")
        return value
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(name, f"expected an integer, got {value!r}")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(name, f"expected a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(name, f"expected a string, got {value!r}")
    return value


def config_from_mapping(values: dict, base: SimConfig | None = None) -> SimConfig:
    unknown = sorted(set(values) - set(FIELD_TYPES))
    if unknown:
        raise ConfigError(unknown[0], "unknown configuration key")
    coerced = {k: _coerce(k, v) for k, v in values.items()}
    return (base or SimConfig()).replace(**coerced)


def load_config(path) -> SimConfig:
    """Read a flat TOML file; every key must be a ``SimConfig`` field."""
    try:
        data = tomllib.loads(Path(path).read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"cannot parse {path}: {exc}") from None
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(nested[0], "tables are not allowed, the config file is flat")
    return config_from_mapping(data)
