"""Drop / TTI / subband simulation loop and hot-cell statistics.

Seeding: drop ``d`` of a run with master seed ``s`` uses
``SeedSequence(s).spawn(n_drops)[d].spawn(2)`` for (user placement, fading).
Neither stream depends on the case, so every case sees identical users and
channels; all cases of a sweep therefore run in lockstep on one channel.
"""

from __future__ import annotations

import csv
import json
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _fast as fk
from .config import SimConfig
from .network import (cluster_sinrs, drop_users, evolve_channel, hex_layout, init_channel,
                      open_sinr_dump, strongest_other_tp, write_sinr_dump)
from .scheduler import PfState, RateModel, SchedulerConfig, _model_args, build_decision, update_pf
from .scma import build_signature_set

SUMMARY_HEADER = ["case", "speed_kmh", "tput_mbps", "cov_kbps", "gain_tput_pct", "gain_cov_pct"]
USER_HEADER = ["case", "speed_kmh", "drop", "user", "rate_kbps"]


@dataclass
class DropResult:
    drop: int
    users: np.ndarray  # hot-cell user ids
    bits: np.ndarray  # cumulative bits per hot-cell user
    ttis: int
    duration_s: float

    @property
    def user_rates_bps(self) -> np.ndarray:
        if self.duration_s == 0:
            return np.zeros(len(self.users))
        return self.bits / self.duration_s

    @property
    def cell_throughput_bps(self) -> float:
        return float(self.bits.sum() / self.duration_s) if self.duration_s else 0.0


@dataclass
class StatsAccumulator:
    case: int
    speed_kmh: float
    drops: list[DropResult] = field(default_factory=list)
    mean_wsr_gain: float = 0.0  # average chosen minus all-single-TP cluster WSR

    def add(self, result: DropResult) -> None:
        self.drops.append(result)

    @property
    def throughput_mbps(self) -> float:
        if not self.drops:
            return 0.0
        return float(np.mean([d.cell_throughput_bps for d in self.drops])) / 1e6

    def user_rates_kbps(self, drop_idx=None) -> np.ndarray:
        drops = self.drops if drop_idx is None else [self.drops[i] for i in drop_idx]
        if not drops:
            return np.zeros(0)
        return np.concatenate([d.user_rates_bps for d in drops]) / 1e3

    @property
    def coverage_kbps(self) -> float:
        rates = self.user_rates_kbps()
        return float(np.percentile(rates, 5)) if len(rates) else 0.0


def case_config(cfg: SimConfig, case: int) -> tuple[RateModel, SchedulerConfig]:
    if case <= 2:
        model = RateModel.ofdma()
    else:
        S = build_signature_set(cfg.scma_k, cfg.scma_j, cfg.scma_n)
        model = RateModel.from_signature(S, (cfg.layer_split,))
    sched = SchedulerConfig.for_case(case, sic_order=cfg.sic_order, dual_variant=cfg.dual_variant,
                                     optimizer=cfg.optimizer, tolerance=cfg.tolerance,
                                     multiple_comp_sets=cfg.multiple_comp_sets)
    return model, sched


def drop_seeds(seed: int, n_drops: int) -> list[tuple[np.random.SeedSequence, np.random.SeedSequence]]:
    return [tuple(ss.spawn(2)) for ss in np.random.SeedSequence(seed).spawn(n_drops)]


def comp_eligibility(longterm: np.ndarray, serving: np.ndarray, partner: np.ndarray, cfg: SimConfig):
    """CoMP candidates: partner within the RSRP threshold, or low geometry SINR."""
    idx = np.arange(len(serving))
    p_s, p_p = longterm[idx, serving], longterm[idx, partner]
    gap_db = 10 * np.log10(p_s / p_p)
    power, noise = cfg.power_per_tone_w, cfg.noise_per_tone_w
    geometry = p_s * power / (noise + (longterm.sum(axis=1) - p_s) * power)
    return (gap_db <= cfg.rsrp_threshold_db) | (10 * np.log10(geometry) < cfg.comp_sinr_threshold_db)


def mode_record(tti: int, decision, mode) -> dict:
    rec = {"tti": tti, "subband": decision.subband, "mode": mode.tag,
           "participants": list(mode.participants)}
    for name in ("alpha", "alpha1", "alpha2"):
        if hasattr(mode, name):
            rec[name] = getattr(mode, name)
    rec["rates"] = {str(u): decision.user_rates.get(u, 0.0) for u in mode.participants}
    rec["wsr"] = decision.wsr
    return rec


class _CaseRunner:
    """Per-case scheduler state inside one drop."""

    def __init__(self, cfg: SimConfig, case: int, n_users: int, n_cells: int, n_pairs: int):
        self.case = case
        self.model, self.sched = case_config(cfg, case)
        self.kargs = (*_model_args(self.model), *self.sched.kernel_args(),
                      self.sched.multiple_comp_sets)
        self.pf = PfState.initial(n_users, cfg.pf_epsilon, cfg.pf_window)
        # block rate -> bits per TTI: spectral efficiency x subband bandwidth x TTI length
        self.bits_per_unit = cfg.bandwidth_hz / cfg.subbands * cfg.tti_seconds / self.model.K
        B = cfg.subbands
        self.cell_recs = np.zeros((B, n_cells, fk.REC))
        self.pair_recs = np.zeros((B, n_pairs, fk.REC))
        self.active = np.zeros((B, n_pairs), dtype=np.bool_)
        self.rates = np.zeros((n_users, B))
        self.wsr = np.zeros((B, 2))
        self.bits = np.zeros(n_users)
        self.wsr_gain = 0.0

    def step(self, cfg, cell, partner, eligible, g, gc1, gc2, n_cells, pairs):
        fk.schedule_tti(cell, partner, eligible, g, gc1, gc2, self.pf.weights, n_cells, pairs,
                        *self.kargs, self.cell_recs, self.pair_recs, self.active, self.rates, self.wsr)
        bits = self.rates.sum(axis=1) * self.bits_per_unit
        self.bits += bits
        self.wsr_gain += float(np.sum(self.wsr[:, 0] - self.wsr[:, 1]))
        self.pf = update_pf(self.pf, bits / cfg.tti_seconds)

    def decisions(self, pairs):
        for b in range(self.rates.shape[1]):
            yield build_decision(b, self.cell_recs[b], self.pair_recs[b], self.active[b], pairs,
                                 self.rates[:, b], self.wsr[b, 0], self.wsr[b, 1])


def simulate_drop(cfg: SimConfig, cases, drop: int, seeds=None, trace_files=None,
                  sinr_writer=None) -> dict[int, tuple[DropResult, float]]:
    """Run every case in ``cases`` on drop ``drop``; returns ``{case: (result, wsr_gain)}``."""
    layout = hex_layout(cfg.isd_m)
    pairs = np.array(layout.adjacent_pairs(), dtype=np.int64)
    user_ss, chan_ss = (seeds or drop_seeds(cfg.seed, cfg.n_drops))[drop]
    users = drop_users(layout, cfg.n_users, np.random.default_rng(user_ss), speed=cfg.speed_kmh,
                       shadowing_db=cfg.shadowing_db, rx_antennas=cfg.rx_antennas,
                       noise_power_per_tone=cfg.noise_per_tone_w, pf_epsilon=cfg.pf_epsilon,
                       pl_intercept_db=cfg.pl_intercept_db, pl_slope_db=cfg.pl_slope_db)
    U, T = len(users), layout.n_tps
    if U == 0:
        empty = DropResult(drop, np.zeros(0, dtype=int), np.zeros(0), cfg.ttis_per_drop,
                           cfg.ttis_per_drop * cfg.tti_seconds)
        return {c: (empty, 0.0) for c in cases}

    serving = np.array([u.serving_tp for u in users], dtype=np.int64)
    longterm = np.vstack([u.longterm_gain for u in users])
    partner = strongest_other_tp(longterm, serving).astype(np.int64)
    eligible = comp_eligibility(longterm, serving, partner, cfg)
    hot = np.flatnonzero(serving == layout.hot_cell_index)

    rng = np.random.default_rng(chan_ss)
    channel = init_channel(users, cfg.subbands, rng)
    runners = [_CaseRunner(cfg, c, U, T, len(pairs)) for c in cases]
    noise, power = cfg.noise_per_tone_w, cfg.power_per_tone_w
    comp_size = np.where(eligible, 2, 1)

    for t in range(cfg.ttis_per_drop):
        if t > 0:
            channel = evolve_channel(channel, t, cfg.speed_kmh, rng, cfg.carrier_hz, cfg.tti_seconds)
        rx = channel.power() * power
        g, gc1, gc2 = cluster_sinrs(rx, serving, partner, noise)
        if sinr_writer is not None:
            write_sinr_dump(sinr_writer, t, rx, serving, partner, comp_size, noise)
        for run in runners:
            run.step(cfg, serving, partner, eligible, g, gc1, gc2, T, pairs)
            if trace_files is not None:
                fh = trace_files[run.case]
                for dec in run.decisions(pairs):
                    for mode in dec.modes:
                        rec = mode_record(t, dec, mode)
                        rec["drop"] = drop
                        fh.write(json.dumps(rec) + "\n")

    duration = cfg.ttis_per_drop * cfg.tti_seconds
    n_dec = max(cfg.ttis_per_drop * cfg.subbands, 1)
    return {run.case: (DropResult(drop, hot, run.bits[hot].copy(), cfg.ttis_per_drop, duration),
                       run.wsr_gain / n_dec)
            for run in runners}


def _run_cases(cfg: SimConfig, cases, trace_dir=None, sinr_path=None) -> dict[int, StatsAccumulator]:
    stats = {c: StatsAccumulator(c, cfg.speed_kmh) for c in cases}
    if cfg.ttis_per_drop == 0 or cfg.n_drops == 0:
        return stats
    seeds = drop_seeds(cfg.seed, cfg.n_drops)
    handles = []
    trace_files = None
    sinr_writer = None
    try:
        if trace_dir is not None:
            Path(trace_dir).mkdir(parents=True, exist_ok=True)
            trace_files = {}
            for c in cases:
                fh = open(Path(trace_dir) / f"trace_case{c}_v{cfg.speed_kmh:g}.jsonl", "w")
                handles.append(fh)
                trace_files[c] = fh
        if sinr_path is not None:
            fh, sinr_writer = open_sinr_dump(sinr_path)
            handles.append(fh)
        gains = {c: [] for c in cases}
        for d in range(cfg.n_drops):
            for c, (res, gain) in simulate_drop(cfg, cases, d, seeds, trace_files, sinr_writer).items():
                stats[c].add(res)
                gains[c].append(gain)
        for c in cases:
            stats[c].mean_wsr_gain = float(np.mean(gains[c]))
    finally:
        for fh in handles:
            fh.close()
    return stats


def run_simulation(config: SimConfig, trace_dir=None, sinr_path=None) -> StatsAccumulator:
    return _run_cases(config, [config.case], trace_dir, sinr_path)[config.case]


@dataclass(frozen=True)
class SummaryRow:
    case: int
    speed_kmh: float
    tput_mbps: float
    cov_kbps: float
    gain_tput_pct: float
    gain_cov_pct: float


@dataclass
class SweepResult:
    rows: list[SummaryRow]
    stats: dict  # (case, speed) -> StatsAccumulator


def _pct(x: float, ref: float) -> float:
    return 100.0 * (x - ref) / ref if ref else 0.0


def summary_rows(stats: list[StatsAccumulator]) -> list[SummaryRow]:
    """Gains are against Case 1 at the same speed, or the first case listed if Case 1 is absent.

    Runs without any drop (no TTIs) produce no row.
    """
    stats = [s for s in stats if s.drops]
    rows = []
    for s in stats:
        same = [o for o in stats if o.speed_kmh == s.speed_kmh]
        base = next((o for o in same if o.case == 1), same[0])
        rows.append(SummaryRow(s.case, s.speed_kmh, s.throughput_mbps, s.coverage_kbps,
                               _pct(s.throughput_mbps, base.throughput_mbps),
                               _pct(s.coverage_kbps, base.coverage_kbps)))
    return rows


def run_case_sweep(template: SimConfig, cases, speeds=None, trace_dir=None) -> SweepResult:
    cases = list(cases)
    if not cases:
        raise ValueError("need at least one case")
    speeds = [template.speed_kmh] if speeds is None else list(speeds)
    ordered = []
    stats = {}
    for v in speeds:
        cfg = template.replace(speed_kmh=float(v))
        for c, st in _run_cases(cfg, cases, trace_dir).items():
            stats[(c, float(v))] = st
        ordered.extend(stats[(c, float(v))] for c in cases)
    return SweepResult(summary_rows(ordered), stats)


def bootstrap_diff(a: StatsAccumulator, b: StatsAccumulator, metric: str = "coverage",
                   n_boot: int = 2000, seed: int = 0, level: float = 0.95):
    """Paired bootstrap over drops of ``metric(b) - metric(a)``; returns ``(point, lo, hi)``.

    Both runs must share drops (same seeds), so drop ``d`` is resampled jointly.
    """
    n = len(a.drops)
    if n != len(b.drops) or n == 0:
        raise ValueError("paired bootstrap needs two runs over the same nonempty drop set")

    def value(st, idx):
        if metric == "coverage":
            return float(np.percentile(st.user_rates_kbps(idx), 5))
        if metric == "throughput":
            return float(np.mean([st.drops[i].cell_throughput_bps for i in idx])) / 1e6
        raise ValueError(f"unknown metric {metric!r}")

    full = np.arange(n)
    point = value(b, full) - value(a, full)
    rng = np.random.default_rng(seed)
    boot = np.empty(n_boot)
    for k in range(n_boot):
        idx = rng.integers(0, n, n)
        boot[k] = value(b, idx) - value(a, idx)
    q = (1 - level) / 2
    lo, hi = np.quantile(boot, [q, 1 - q])
    return point, float(lo), float(hi)


def _versions() -> dict:
    import numba
    import scipy

    from . import __version__
    return {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
            "numba": numba.__version__, "scma_comp": __version__}


def emit_outputs(result, out_dir, config: SimConfig | None = None) -> dict[str, Path]:
    """Write summary CSV, per-user CSV and a JSON manifest; returns their paths.

    ``result`` is a ``SweepResult`` or a single ``StatsAccumulator``. Floats
    are written with ``repr`` so parsing the CSV gives back identical values.
    """
    if isinstance(result, StatsAccumulator):
        result = SweepResult(summary_rows([result]), {(result.case, result.speed_kmh): result})
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"summary": out / "summary.csv", "users": out / "user_rates.csv",
             "manifest": out / "manifest.json"}

    with open(paths["summary"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_HEADER)
        for r in result.rows:
            w.writerow([r.case, repr(r.speed_kmh), repr(r.tput_mbps), repr(r.cov_kbps),
                        repr(r.gain_tput_pct), repr(r.gain_cov_pct)])

    with open(paths["users"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(USER_HEADER)
        for r in result.rows:
            st = result.stats[(r.case, r.speed_kmh)]
            for d in st.drops:
                for u, rate in zip(d.users, d.user_rates_bps / 1e3):
                    w.writerow([st.case, repr(st.speed_kmh), d.drop, int(u), repr(float(rate))])

    manifest = {
        "config": config.to_dict() if config is not None else None,
        "seed": config.seed if config is not None else None,
        "runs": [{"case": r.case, "speed_kmh": r.speed_kmh,
                  "mean_wsr_gain": result.stats[(r.case, r.speed_kmh)].mean_wsr_gain}
                 for r in result.rows],
        "versions": _versions(),
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    paths["manifest"].write_text(json.dumps(manifest, indent=2) + "\n")
    return paths


def read_summary(path) -> list[SummaryRow]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [SummaryRow(int(r["case"]), float(r["speed_kmh"]), float(r["tput_mbps"]), float(r["cov_kbps"]),
                       float(r["gain_tput_pct"]), float(r["gain_cov_pct"])) for r in rows]
