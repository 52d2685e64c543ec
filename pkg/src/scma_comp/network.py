"""Seven-cell hexagonal cluster, user drops, fading channels and SINRs."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0

SPEED_OF_LIGHT = 299_792_458.0
MIN_DISTANCE_M = 35.0


@dataclass(frozen=True)
class NetworkLayout:
    tp_positions: np.ndarray
    inter_site_distance: float
    hot_cell_index: int = 0

    @property
    def n_tps(self) -> int:
        return len(self.tp_positions)

    def cell_of(self, points) -> np.ndarray:
        """Index of the hexagon (nearest TP) containing each point."""
        points = np.atleast_2d(points)
        d = np.linalg.norm(points[:, None, :] - self.tp_positions[None, :, :], axis=-1)
        return np.argmin(d, axis=1)

    def adjacent_pairs(self) -> list[tuple[int, int]]:
        """TP pairs whose sites are one inter-site distance apart."""
        pairs = []
        for a in range(self.n_tps):
            for b in range(a + 1, self.n_tps):
                d = np.linalg.norm(self.tp_positions[a] - self.tp_positions[b])
                if abs(d - self.inter_site_distance) < 1e-6 * self.inter_site_distance:
                    pairs.append((a, b))
        return pairs


def hex_layout(isd: float = 500.0) -> NetworkLayout:
    """Center site at the origin plus a ring of six neighbours at ``isd``."""
    angles = np.deg2rad(60.0 * np.arange(6))
    ring = isd * np.column_stack([np.cos(angles), np.sin(angles)])
    pos = np.vstack([[0.0, 0.0], ring])
    return NetworkLayout(pos, float(isd), hot_cell_index=0)


def _in_hexagon(p: np.ndarray, apothem: float) -> np.ndarray:
    dirs = np.deg2rad(60.0 * np.arange(3))
    proj = np.abs(p @ np.column_stack([np.cos(dirs), np.sin(dirs)]).T)
    return np.all(proj <= apothem, axis=-1)


def pathloss_db(d_m, pl_intercept_db=128.1, pl_slope_db=37.6):
    d_km = np.maximum(np.asarray(d_m, dtype=float), MIN_DISTANCE_M) / 1000.0
    return pl_intercept_db + pl_slope_db * np.log10(d_km)


@dataclass
class UserState:
    id: int
    position: np.ndarray
    speed: float
    serving_tp: int
    longterm_gain: np.ndarray  # linear pathloss x shadowing to each TP
    rx_antennas: int = 2
    pf_average_rate: float = 1.0
    noise_power_per_tone: float = 1e-13

    @property
    def longterm_db(self) -> np.ndarray:
        return 10.0 * np.log10(self.longterm_gain)


def drop_users(layout: NetworkLayout, n_users: int, rng_seed, *, speed=3.0,
               shadowing_db=8.0, rx_antennas=2, noise_power_per_tone=1e-13,
               pf_epsilon=1.0, pl_intercept_db=128.1, pl_slope_db=37.6) -> list[UserState]:
    """Drop users uniformly over the seven hexagons.

    The serving TP is the one with the strongest pathloss + shadowing gain.
    """
    if n_users <= 0:
        return []
    rng = np.random.default_rng(rng_seed)
    apothem = layout.inter_site_distance / 2.0
    circum = apothem * 2.0 / math.sqrt(3.0)

    positions = np.empty((n_users, 2))
    cells = rng.integers(0, layout.n_tps, size=n_users)
    for u in range(n_users):
        while True:
            p = rng.uniform(-circum, circum, size=2)
            if _in_hexagon(p, apothem):
                break
        positions[u] = layout.tp_positions[cells[u]] + p

    d = np.linalg.norm(positions[:, None, :] - layout.tp_positions[None, :, :], axis=-1)
    shadow = rng.normal(0.0, shadowing_db, size=d.shape)
    gain = 10.0 ** (-(pathloss_db(d, pl_intercept_db, pl_slope_db) + shadow) / 10.0)
    serving = np.argmax(gain, axis=1)
    return [
        UserState(u, positions[u], float(speed), int(serving[u]), gain[u],
                  rx_antennas=rx_antennas, pf_average_rate=pf_epsilon,
                  noise_power_per_tone=noise_power_per_tone)
        for u in range(n_users)
    ]


def select_comp_set(user: UserState, rsrp_threshold_db: float) -> list[int]:
    """Serving TP plus the strongest other TP if it is within the threshold."""
    if rsrp_threshold_db < 0:
        raise ValueError("RSRP threshold must be >= 0 dB")
    p = user.longterm_db
    s = user.serving_tp
    others = [t for t in range(len(p)) if t != s]
    if not others:
        return [s]
    second = max(others, key=lambda t: (p[t], -t))
    if p[s] - p[second] <= rsrp_threshold_db:
        return [s, second]
    return [s]


def strongest_other_tp(longterm_gain: np.ndarray, serving: np.ndarray) -> np.ndarray:
    g = np.array(longterm_gain, dtype=float, copy=True)
    g[np.arange(len(serving)), serving] = -np.inf
    return np.argmax(g, axis=1)


def fading_correlation(speed_kmh: float, carrier_hz: float = 2.6e9, tti_s: float = 1e-3) -> float:
    """AR(1) coefficient J0(2 pi f_D T) of the Jakes Doppler spectrum."""
    f_d = speed_kmh / 3.6 * carrier_hz / SPEED_OF_LIGHT
    return float(j0(2.0 * np.pi * f_d * tti_s))


@dataclass
class ChannelRealization:
    """Complex gains ``h[r, u, t, b]``, flat over the tones of one subband."""

    longterm_gain: np.ndarray  # (U, T)
    fading: np.ndarray  # (R, U, T, B), unit mean power
    tti: int = 0

    @property
    def gains(self) -> np.ndarray:
        return np.sqrt(self.longterm_gain)[None, :, :, None] * self.fading

    def power(self) -> np.ndarray:
        """``||h_{u,t,b}||^2`` summed over receive antennas, shape (U, T, B)."""
        f = self.fading
        return self.longterm_gain[:, :, None] * np.sum(f.real**2 + f.imag**2, axis=0)


def _cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def init_channel(users: list[UserState], n_subbands: int, rng) -> ChannelRealization:
    if not users:
        return ChannelRealization(np.zeros((0, 0)), np.zeros((0, 0, 0, n_subbands), complex))
    longterm = np.vstack([u.longterm_gain for u in users])
    R = users[0].rx_antennas
    return ChannelRealization(longterm, _cn(rng, (R,) + longterm.shape + (n_subbands,)), 0)


def evolve_channel(state: ChannelRealization, tti_index: int, speed: float, rng_stream,
                   carrier_hz: float = 2.6e9, tti_s: float = 1e-3) -> ChannelRealization:
    """Advance the fast fading one TTI; subbands fade independently."""
    rho = fading_correlation(speed, carrier_hz, tti_s)
    if rho == 1.0:
        return ChannelRealization(state.longterm_gain, state.fading, tti_index)
    innov = _cn(rng_stream, state.fading.shape)
    fading = rho * state.fading + math.sqrt(1.0 - rho * rho) * innov
    return ChannelRealization(state.longterm_gain, fading, tti_index)


@dataclass
class SinrReport:
    gamma_noncomp: np.ndarray  # per TP
    gamma_comp: np.ndarray  # per TP, relative to comp_set
    comp_set: list[int] = field(default_factory=list)


def compute_sinrs(user: UserState, channel: ChannelRealization, comp_set, total_power_per_tone: float,
                  subband: int = 0) -> SinrReport:
    noise = user.noise_power_per_tone
    if noise <= 0:
        raise ValueError("noise power must be positive")
    if not comp_set:
        raise ValueError("comp_set must be nonempty")
    rx = channel.power()[user.id, :, subband] * total_power_per_tone
    total = rx.sum()
    nc = rx / (noise + (total - rx))
    cs = list(comp_set)
    outside = total - rx[cs].sum()
    comp = nc.copy()
    comp[cs] = rx[cs] / (noise + outside)
    return SinrReport(nc, comp, cs)


def cluster_sinrs(rx_power: np.ndarray, serving: np.ndarray, partner: np.ndarray, noise: float):
    """Vectorised SINRs for scheduling.

    ``rx_power`` is received power (U, T, B). Returns ``(g, gc1, gc2)``, each
    (U, B): non-CoMP SINR to the serving TP, and CoMP SINRs to the serving
    and partner TPs for the set {serving, partner}.
    """
    idx = np.arange(len(serving))
    total = rx_power.sum(axis=1)
    p_s = rx_power[idx, serving, :]
    p_p = rx_power[idx, partner, :]
    g = p_s / (noise + total - p_s)
    outside = np.maximum(total - p_s - p_p, 0.0)
    gc1 = p_s / (noise + outside)
    gc2 = p_p / (noise + outside)
    return g, gc1, gc2


def write_sinr_dump(writer, tti: int, rx_power: np.ndarray, serving, partner, comp_size, noise: float):
    """Append per-link SINR rows (dB) for one TTI to a ``csv.writer``."""
    U, T, B = rx_power.shape
    total = rx_power.sum(axis=1)
    for b in range(B):
        for u in range(U):
            cs = [serving[u]] + ([partner[u]] if comp_size[u] == 2 else [])
            outside = total[u, b] - rx_power[u, cs, b].sum()
            for t in range(T):
                p = rx_power[u, t, b]
                nc = p / (noise + total[u, b] - p)
                gc = p / (noise + outside) if t in cs else nc
                writer.writerow([tti, b, u, t, f"{10 * np.log10(nc):.4f}", f"{10 * np.log10(gc):.4f}"])


SINR_DUMP_HEADER = ["tti", "subband", "user", "tp", "gamma_noncomp_db", "gamma_comp_db"]


def open_sinr_dump(path):
    fh = open(path, "w", newline="")
    w = csv.writer(fh)
    w.writerow(SINR_DUMP_HEADER)
    return fh, w
