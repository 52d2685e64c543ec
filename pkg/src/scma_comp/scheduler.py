"""Per-subband mode selection: single-TP MU-SCMA per cell, CoMP candidates per TP pair,
and the cluster-wide max-WSR switch between them.

Heavy lifting happens in the compiled kernels of ``_fast``; this module
owns the configuration, the PF state and the conversion of raw decision
records into transmission modes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _fast as fk
from .rates import (DualPairing, LocalPairing, MuScmaSingleTp, RemotePairing, SingleUser, SuComp,
                    TransmissionMode)
from .scma import SignatureMatrix, build_signature_set, gram_eigenvalues, split_columns

FAMILY_FLAGS = {
    "mu_scma": fk.F_MU,
    "su_comp": fk.F_SU_COMP,
    "remote": fk.F_REMOTE,
    "local": fk.F_LOCAL,
    "dual": fk.F_DUAL,
}

# candidate families per evaluation case; each SCMA case extends the previous one
CASE_FAMILIES = {
    1: (),
    2: ("su_comp",),
    3: ("mu_scma", "su_comp"),
    4: ("mu_scma", "su_comp", "remote"),
    5: ("mu_scma", "su_comp", "remote", "local"),
    6: ("mu_scma", "su_comp", "remote", "local", "dual"),
}


def case_flags(case: int) -> int:
    flags = 0
    for fam in CASE_FAMILIES[case]:
        flags |= FAMILY_FLAGS[fam]
    return flags


@dataclass(frozen=True)
class RateModel:
    """Gram eigenvalues of the signature blocks the scheduler hands out.

    A user alone on a TP gets every layer; two users sharing a TP split the
    layers, the weaker (or CoMP) user taking the first ``split`` columns.
    """

    signature: SignatureMatrix
    splits: tuple[int, ...]
    lam_full: np.ndarray
    J_full: float
    lam_weak: np.ndarray
    J_weak: np.ndarray
    lam_strong: np.ndarray
    J_strong: np.ndarray

    @classmethod
    def from_signature(cls, S: SignatureMatrix, splits=None) -> "RateModel":
        J = S.J
        if splits is None:
            splits = (max(J // 2, 1),)
        L = max(J, 1)

        def padded(cols):
            lam = gram_eigenvalues(S.columns(cols))
            out = np.zeros(L)
            out[: len(lam)] = lam
            return out

        full = padded(range(J))
        lw, ls, jw, js = [], [], [], []
        for s in splits:
            weak, strong = split_columns(J, s)
            lw.append(padded(weak))
            ls.append(padded(strong))
            jw.append(float(len(weak)))
            js.append(float(len(strong)))
        return cls(S, tuple(splits), full, float(J), np.array(lw), np.array(jw),
                   np.array(ls), np.array(js))

    @classmethod
    def ofdma(cls) -> "RateModel":
        return cls.from_signature(build_signature_set(1, 1, 1))

    @property
    def K(self) -> int:
        return self.signature.K

    @property
    def coef_full(self) -> np.ndarray:
        return _trimmed(kernel_coefficients(self.lam_full))[0]

    @property
    def coef_weak(self) -> np.ndarray:
        return _trimmed([kernel_coefficients(x) for x in self.lam_weak])

    @property
    def coef_strong(self) -> np.ndarray:
        return _trimmed([kernel_coefficients(x) for x in self.lam_strong])

    def block_columns(self, split_index: int):
        return split_columns(self.signature.J, self.splits[split_index])


def kernel_coefficients(lam) -> np.ndarray:
    """Elementary symmetric polynomials ``e_1..e_n`` of the eigenvalues (input to the compiled kernel)."""
    return np.poly(-np.asarray(lam, dtype=float))[1:].real.copy()


def _trimmed(rows) -> np.ndarray:
    # zero eigenvalues give exactly zero high-order coefficients; dropping
    # them shortens every Horner loop without changing a single value
    rows = np.atleast_2d(rows)
    nz = np.flatnonzero(np.any(rows != 0.0, axis=0))
    keep = nz[-1] + 1 if len(nz) else 1
    return np.ascontiguousarray(rows[:, :keep])


@dataclass(frozen=True)
class SchedulerConfig:
    families: tuple[str, ...] = CASE_FAMILIES[6]
    sic_order: bool = True  # good users must out-SINR the CoMP user they cancel
    dual_variant: str = "prose"
    optimizer: str = "golden"  # or "grid"
    grid_points: int = 101
    coarse_points: int = 6  # mesh seeding the golden search; also yields the pruning bound
    tolerance: float = 1e-4
    dual_rounds: int = 20
    dual_coarse_points: int = 6  # per axis, same role for the dual search
    multiple_comp_sets: bool = False

    def __post_init__(self):
        unknown = set(self.families) - set(FAMILY_FLAGS)
        if unknown:
            raise ValueError(f"unknown candidate families: {sorted(unknown)}")
        if self.optimizer not in ("golden", "grid"):
            raise ValueError(f"optimizer must be 'golden' or 'grid', got {self.optimizer!r}")
        if self.dual_variant not in ("prose", "printed"):
            raise ValueError(f"dual_variant must be 'prose' or 'printed', got {self.dual_variant!r}")

    @classmethod
    def for_case(cls, case: int, **kw) -> "SchedulerConfig":
        return cls(families=CASE_FAMILIES[case], **kw)

    @property
    def flags(self) -> int:
        f = 0
        for fam in self.families:
            f |= FAMILY_FLAGS[fam]
        return f

    def kernel_args(self):
        return (self.flags, self.sic_order, self.dual_variant == "printed",
                fk.OPT_GRID if self.optimizer == "grid" else fk.OPT_GOLDEN,
                self.grid_points, self.coarse_points, self.tolerance, self.dual_rounds,
                self.dual_coarse_points)


@dataclass
class SubbandSinrs:
    """What the scheduler sees of every user on one subband.

    ``g``: non-CoMP SINR to the serving TP; ``gc1``/``gc2``: CoMP SINRs to
    the serving and partner TP for the set {serving, partner}.
    """

    cell: np.ndarray
    partner: np.ndarray
    eligible: np.ndarray
    g: np.ndarray
    gc1: np.ndarray
    gc2: np.ndarray

    def __post_init__(self):
        self.cell = np.asarray(self.cell, dtype=np.int64)
        self.partner = np.asarray(self.partner, dtype=np.int64)
        self.eligible = np.asarray(self.eligible, dtype=np.bool_)
        for name in ("g", "gc1", "gc2"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite and nonnegative")
            setattr(self, name, arr)

    @property
    def n_users(self) -> int:
        return len(self.cell)


@dataclass(frozen=True)
class PfState:
    avg_rate: np.ndarray
    window: float = 100.0
    floor: float = 1e-6

    @classmethod
    def initial(cls, n_users: int, epsilon: float = 1.0, window: float = 100.0) -> "PfState":
        return cls(np.full(n_users, float(epsilon)), float(window))

    @property
    def weights(self) -> np.ndarray:
        return 1.0 / self.avg_rate


def update_pf(pf: PfState, realized_rates) -> PfState:
    """Exponential smoothing; users that were not scheduled enter with rate 0."""
    r = np.asarray(realized_rates, dtype=float)
    if np.any(r < 0):
        raise ValueError("realized rates must be nonnegative")
    beta = 1.0 / pf.window
    avg = np.maximum((1.0 - beta) * pf.avg_rate + beta * r, pf.floor)
    return PfState(avg, pf.window, pf.floor)


@dataclass
class ScheduleDecision:
    subband: int
    modes: list[TransmissionMode]
    user_rates: dict[int, float]
    wsr: float
    single_tp_wsr: float
    source: str
    candidate_wsrs: dict = field(default_factory=dict)

    def scheduled_users(self) -> list[int]:
        return [u for m in self.modes for u in m.participants]


def record_to_mode(rec) -> TransmissionMode | None:
    mode = int(rec[fk.R_MODE])
    tp1, tp2 = int(rec[fk.R_TP1]), int(rec[fk.R_TP2])
    i, j, k = int(rec[fk.R_I]), int(rec[fk.R_J]), int(rec[fk.R_K])
    a1, a2 = float(rec[fk.R_A1]), float(rec[fk.R_A2])
    if mode == fk.SINGLE_USER:
        return SingleUser(i, tp1)
    if mode == fk.MU_SCMA:
        return MuScmaSingleTp(i, j, tp1, a1)
    if mode == fk.SU_COMP:
        return SuComp(i, (tp1, tp2))
    if mode == fk.REMOTE:
        return RemotePairing(i, j, tp1, tp2, a1)
    if mode == fk.LOCAL:
        return LocalPairing(i, j, tp1, tp2, a1)
    if mode == fk.DUAL:
        return DualPairing(i, j, k, tp1, tp2, a1, a2)
    return None


def _model_args(model: RateModel):
    return (model.coef_full, model.J_full, model.coef_weak, model.J_weak,
            model.coef_strong, model.J_strong)


def schedule_single_tp(cell: int, sinrs: SubbandSinrs, pf: PfState, model: RateModel,
                       config: SchedulerConfig = SchedulerConfig()):
    """Returns ``(mode, wsr)``; ``mode`` is None for an empty cell."""
    flags, _, _, method, n_grid, n_coarse, tol, _, _ = config.kernel_args()
    rec = np.zeros(fk.REC)
    fk.single_tp(cell, sinrs.cell, sinrs.g, pf.weights, *_model_args(model),
                 flags, method, n_grid, n_coarse, tol, rec)
    return record_to_mode(rec), float(rec[fk.R_WSR])


def schedule_comp_set(tp_pair, sinrs: SubbandSinrs, pf: PfState, model: RateModel,
                      config: SchedulerConfig = SchedulerConfig()):
    """Best CoMP candidate for a TP pair; ``(None, 0.0)`` if nobody is eligible."""
    ta, tb = tp_pair
    args = config.kernel_args()
    flags, _, _, method, n_grid, n_coarse, tol, _, _ = args
    n_cells = int(max(sinrs.cell.max(), sinrs.partner.max(), ta, tb)) + 1
    cell_recs = np.zeros((n_cells, fk.REC))
    for c in (ta, tb):
        fk.single_tp(c, sinrs.cell, sinrs.g, pf.weights, *_model_args(model),
                     flags, method, n_grid, n_coarse, tol, cell_recs[c])
    rec = np.zeros(fk.REC)
    if not fk.pair_eligible(ta, tb, sinrs.cell, sinrs.partner, sinrs.eligible):
        return None, 0.0
    fk.comp_set(ta, tb, sinrs.cell, sinrs.partner, sinrs.eligible, sinrs.g, sinrs.gc1, sinrs.gc2,
                pf.weights, cell_recs, *_model_args(model), *args, 0.0, 0.0, -np.inf, rec)
    return record_to_mode(rec), float(rec[fk.R_WSR])


def schedule_cluster(n_cells: int, pairs, sinrs: SubbandSinrs, pf: PfState, model: RateModel,
                     config: SchedulerConfig = SchedulerConfig(), subband: int = 0) -> ScheduleDecision:
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    cell_recs = np.zeros((n_cells, fk.REC))
    pair_recs = np.zeros((len(pairs), fk.REC))
    active = np.zeros(len(pairs), dtype=np.bool_)
    rates = np.zeros(sinrs.n_users)
    total, single = fk.schedule_subband(
        sinrs.cell, sinrs.partner, sinrs.eligible, sinrs.g, sinrs.gc1, sinrs.gc2, pf.weights,
        n_cells, pairs, *_model_args(model), *config.kernel_args(), config.multiple_comp_sets,
        cell_recs, pair_recs, active, rates)
    return build_decision(subband, cell_recs, pair_recs, active, pairs, rates, total, single)


def build_decision(subband, cell_recs, pair_recs, active, pairs, rates, total, single) -> ScheduleDecision:
    modes: list[TransmissionMode] = []
    covered = set()
    for p in np.flatnonzero(active):
        modes.append(record_to_mode(pair_recs[p]))
        covered.update(int(t) for t in pairs[p])
    for c in range(len(cell_recs)):
        if c not in covered:
            m = record_to_mode(cell_recs[c])
            if m is not None:
                modes.append(m)
    candidates = {"single_tp": float(single)}
    for p, (a, b) in enumerate(pairs):
        if pair_recs[p, fk.R_MODE] != fk.IDLE:
            # same association order as the kernel, so the chosen total matches bit for bit
            gain = pair_recs[p, fk.R_WSR] - cell_recs[a, fk.R_WSR] - cell_recs[b, fk.R_WSR]
            candidates[(int(a), int(b))] = float(single + gain)
    user_rates = {int(u): float(r) for u, r in enumerate(rates) if r > 0}
    return ScheduleDecision(subband, modes, user_rates, float(total), float(single),
                            "multi_tp" if active.any() else "single_tp", candidates)
