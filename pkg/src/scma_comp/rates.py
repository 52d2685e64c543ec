"""Achievable rates of the single-TP and two-TP transmission schemes.

Rates are in bits per SCMA block (``K`` tones); divide by ``K`` for
spectral efficiency. SINR arguments are linear. ``gc_*`` are CoMP SINRs
(interference from the cooperating TPs removed), ``g_*`` non-CoMP SINRs.
Roles follow the usual labelling: ``i`` is the CoMP (cell-edge) user,
``j`` and ``k`` are good users of TP1/TP2 respectively.

Layer counts ``J_{u,t}`` are the column counts of the signature blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scma import capacity_kernel

PRINTED = "printed"
PROSE = "prose"


@dataclass(frozen=True)
class ModeRates:
    """Per (role, tp) rate components plus the SINR inputs that produced them."""

    components: dict[tuple[str, str], float]
    sinrs: dict[str, float] = field(default_factory=dict)

    def total(self, role: str) -> float:
        return sum(r for (u, _), r in self.components.items() if u == role)

    def totals(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for (u, _), r in self.components.items():
            out[u] = out.get(u, 0.0) + r
        return out

    def __getitem__(self, key) -> float:
        return self.components[key]


def _check_alpha(*alphas):
    for a in alphas:
        if not 0.0 <= a <= 1.0:
            raise ValueError(f"power-sharing factor must lie in [0, 1], got {a}")


def _rate(S, num, den=1.0):
    S = np.atleast_2d(S)
    J = S.shape[1]
    return capacity_kernel(S, num / (J * den))


def rate_single_user(g, S) -> ModeRates:
    if g < 0:
        raise ValueError("SINR must be nonnegative")
    return ModeRates({("i", "tp1"): _rate(S, g)}, {"g_i": g})


def rates_su_comp(gc_i1, gc_i2, s_i1, s_i2) -> ModeRates:
    """Single-user CoMP: one user served at full power by both TPs.

    Same code path as remote pairing at ``alpha = 1``, minus the idle good user.
    """
    full = rates_remote_pairing(gc_i1, gc_i2, 0.0, 1.0, s_i1, s_i2, s_i2)
    comps = {key: r for key, r in full.components.items() if key[0] == "i"}
    return ModeRates(comps, {"gc_i1": gc_i1, "gc_i2": gc_i2})


def rates_remote_pairing(gc_i1, gc_i2, g_j2, alpha, s_i1, s_i2, s_j2) -> ModeRates:
    """TP1 serves i alone; TP2 splits power ``alpha`` / ``1 - alpha`` between i and j.

    i decodes its TP2 stream first, then its TP1 stream with only j's signal
    left as interference. j cancels i's TP2 stream (degraded model).
    """
    _check_alpha(alpha)
    x = 1.0 - alpha
    comps = {
        ("i", "tp1"): _rate(s_i1, gc_i1, 1.0 + x * gc_i2),
        ("i", "tp2"): _rate(s_i2, alpha * gc_i2, 1.0 + gc_i1 + x * gc_i2),
        ("j", "tp2"): _rate(s_j2, x * g_j2),
    }
    return ModeRates(comps, {"gc_i1": gc_i1, "gc_i2": gc_i2, "g_j2": g_j2})


def rates_local_pairing(gc_i1, gc_i2, g_j1, alpha, s_i1, s_i2, s_j1) -> ModeRates:
    """TP1 splits power between i and its own good user j; TP2 serves i alone."""
    _check_alpha(alpha)
    x = 1.0 - alpha
    comps = {
        ("i", "tp1"): _rate(s_i1, alpha * gc_i1, 1.0 + x * gc_i1 + gc_i2),
        ("i", "tp2"): _rate(s_i2, gc_i2, 1.0 + x * gc_i1),
        ("j", "tp1"): _rate(s_j1, x * g_j1),
    }
    return ModeRates(comps, {"gc_i1": gc_i1, "gc_i2": gc_i2, "g_j1": g_j1})


def rates_mu_scma_single_tp(g_i, g_j, alpha, s_i, s_j) -> ModeRates:
    """Two users on one TP; weak user i gets ``alpha`` of the power, j decodes after SIC."""
    _check_alpha(alpha)
    x = 1.0 - alpha
    comps = {
        ("i", "tp1"): _rate(s_i, alpha * g_i, 1.0 + x * g_i),
        ("j", "tp1"): _rate(s_j, x * g_j),
    }
    return ModeRates(comps, {"g_i": g_i, "g_j": g_j})


def rates_dual_pairing(gc_i1, gc_i2, g_j1, g_k2, alpha1, alpha2,
                       s_i1, s_i2, s_j1, s_k2, variant=PROSE, g_i1=None) -> ModeRates:
    """Both TPs split power between CoMP user i and their own good user.

    i decodes its TP1 stream first. With ``variant="prose"`` the TP2 streams
    count as interference for that step; ``variant="printed"`` drops TP2 from
    the denominator and uses ``g_i1`` (non-CoMP, defaults to ``gc_i1``).
    """
    _check_alpha(alpha1, alpha2)
    x1, x2 = 1.0 - alpha1, 1.0 - alpha2
    if variant == PROSE:
        r_i1 = _rate(s_i1, alpha1 * gc_i1, 1.0 + x1 * gc_i1 + gc_i2)
    elif variant == PRINTED:
        g = gc_i1 if g_i1 is None else g_i1
        r_i1 = _rate(s_i1, alpha1 * g, 1.0 + x1 * g)
    else:
        raise ValueError(f"unknown dual-pairing variant {variant!r}")
    comps = {
        ("i", "tp1"): r_i1,
        ("i", "tp2"): _rate(s_i2, alpha2 * gc_i2, 1.0 + x1 * gc_i1 + x2 * gc_i2),
        ("j", "tp1"): _rate(s_j1, x1 * g_j1),
        ("k", "tp2"): _rate(s_k2, x2 * g_k2),
    }
    return ModeRates(comps, {"gc_i1": gc_i1, "gc_i2": gc_i2, "g_j1": g_j1, "g_k2": g_k2})


def wsr(mode_rates: ModeRates, weights: dict[str, float]) -> float:
    """Weighted sum of per-user total rates; roles without a weight count as zero."""
    return float(sum(weights.get(u, 0.0) * r for u, r in mode_rates.totals().items()))


# Transmission modes -------------------------------------------------------

@dataclass(frozen=True)
class SingleUser:
    user: int
    tp: int
    tag = "single_user"

    @property
    def participants(self):
        return (self.user,)


@dataclass(frozen=True)
class MuScmaSingleTp:
    """``comp_user`` is the weak (lower-SINR) user receiving ``alpha`` of the power."""

    comp_user: int
    good_user: int
    tp: int
    alpha: float
    tag = "mu_scma"

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.comp_user == self.good_user:
            raise ValueError("participants must be distinct")

    @property
    def participants(self):
        return (self.comp_user, self.good_user)


@dataclass(frozen=True)
class SuComp:
    user: int
    tp_set: tuple[int, int]
    tag = "su_comp"

    def __post_init__(self):
        if self.tp_set[0] == self.tp_set[1]:
            raise ValueError("TP roles must be distinct")

    @property
    def participants(self):
        return (self.user,)


@dataclass(frozen=True)
class RemotePairing:
    comp_user: int
    good_user: int
    tp1: int
    tp2: int
    alpha: float
    tag = "remote"

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.comp_user == self.good_user or self.tp1 == self.tp2:
            raise ValueError("participants and TP roles must be distinct")

    @property
    def participants(self):
        return (self.comp_user, self.good_user)


@dataclass(frozen=True)
class LocalPairing:
    comp_user: int
    good_user: int
    tp1: int
    tp2: int
    alpha: float
    tag = "local"

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.comp_user == self.good_user or self.tp1 == self.tp2:
            raise ValueError("participants and TP roles must be distinct")

    @property
    def participants(self):
        return (self.comp_user, self.good_user)


@dataclass(frozen=True)
class DualPairing:
    comp_user: int
    good_user_tp1: int
    good_user_tp2: int
    tp1: int
    tp2: int
    alpha1: float
    alpha2: float
    tag = "dual"

    def __post_init__(self):
        _check_alpha(self.alpha1, self.alpha2)
        users = {self.comp_user, self.good_user_tp1, self.good_user_tp2}
        if len(users) != 3 or self.tp1 == self.tp2:
            raise ValueError("participants and TP roles must be distinct")

    @property
    def participants(self):
        return (self.comp_user, self.good_user_tp1, self.good_user_tp2)


TransmissionMode = SingleUser | MuScmaSingleTp | SuComp | RemotePairing | LocalPairing | DualPairing
