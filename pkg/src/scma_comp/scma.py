"""SCMA signature sets and the linear-equivalent capacity kernel.

Every achievable-rate expression in the package reduces to

    log2 det(I + c * S^H S)

for a block of signature columns ``S`` and an effective per-layer SINR ``c``.
The kernel is evaluated through the eigenvalues of the Gram matrix, so the
rate only depends on ``S`` through ``eig(S^H S)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class SignatureMatrix:
    """K x J complex signature matrix (rows = tones, columns = layers)."""

    entries: np.ndarray
    n_nonzero: int

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2:
            raise ValueError("signature matrix must be 2-D")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def K(self) -> int:
        return self.entries.shape[0]

    @property
    def J(self) -> int:
        return self.entries.shape[1]

    def columns(self, idx) -> np.ndarray:
        return self.entries[:, list(idx)]

    def gram(self) -> np.ndarray:
        return self.entries.conj().T @ self.entries


def _ordered_supports(K: int, N: int) -> list[tuple[int, ...]]:
    supports = list(itertools.combinations(range(K), N))
    if K != 2 * N:
        return supports
    # Interleave each support containing tone 0 with its complement so that
    # any leading block of columns spreads evenly over the tones.
    ordered = []
    for sup in supports:
        if 0 in sup:
            ordered.append(sup)
            ordered.append(tuple(t for t in range(K) if t not in sup))
    return ordered


def build_signature_set(K: int = 4, J: int = 6, N: int = 2) -> SignatureMatrix:
    """Deterministic sparse signature set with ``||column||^2 = K``.

    ``K == 1`` is the OFDMA special case: every column is ``[1]``.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    if K == 1:
        return SignatureMatrix(np.ones((1, J), dtype=complex), n_nonzero=1)
    if not 1 <= N < K:
        raise ValueError(f"need 1 <= N < K, got N={N}, K={K}")

    supports = _ordered_supports(K, N)
    amp = np.sqrt(K / N)
    phase = np.zeros((J, N), dtype=int)
    for j in range(J):
        phase[j] = [(j * n) % J for n in range(N)]
    phase = _flatten_spectrum([supports[j % len(supports)] for j in range(J)], phase, K, J)
    S = np.zeros((K, J), dtype=complex)
    for j in range(J):
        sup = supports[j % len(supports)]
        S[list(sup), j] = amp * np.exp(2j * np.pi * phase[j] / J)
    return SignatureMatrix(S, n_nonzero=N)


def _flatten_spectrum(supports, phase, K: int, J: int, max_sweeps: int = 50) -> np.ndarray:
    """Coordinate ascent of log det(I + S S^H) over the phase grid 2*pi*k/J.

    The first slot of every column stays at phase 0 (a common column phase does
    not change S^H S). A flatter spectrum of S S^H brings the single-user rate
    closer to the orthogonal bound; the starting point is the plain (j*n) mod J rule.
    """
    amp = np.sqrt(K / len(supports[0]))
    phase = phase.copy()
    phase[:, 0] = 0

    def logdet(ph):
        S = np.zeros((K, J), dtype=complex)
        for j, sup in enumerate(supports):
            S[list(sup), j] = amp * np.exp(2j * np.pi * ph[j] / J)
        return np.linalg.slogdet(np.eye(K) + S @ S.conj().T)[1]

    best = logdet(phase)
    for _ in range(max_sweeps):
        improved = False
        for j in range(J):
            for ks in itertools.product(range(J), repeat=phase.shape[1] - 1):
                trial = phase.copy()
                trial[j, 1:] = ks
                v = logdet(trial)
                if v > best + 1e-9:
                    phase, best, improved = trial, v, True
        if not improved:
            break
    return phase


def ofdma_signature() -> SignatureMatrix:
    return build_signature_set(1, 1, 1)


def gram_eigenvalues(S_sub) -> np.ndarray:
    """Nonnegative eigenvalues of ``S_sub^H S_sub`` (ascending)."""
    S_sub = np.atleast_2d(np.asarray(S_sub, dtype=complex))
    lam = np.linalg.eigvalsh(S_sub.conj().T @ S_sub)
    # rank-deficient Gram matrices leave round-off eigenvalues near zero
    lam[lam < 1e-12 * max(lam.max(), 1.0)] = 0.0
    return lam


def capacity_kernel(S_sub, c: float) -> float:
    """``log2 det(I + c S_sub^H S_sub)`` in bits per SCMA block."""
    if c < 0:
        raise ValueError(f"effective SINR must be nonnegative, got {c}")
    return kernel_from_eigenvalues(gram_eigenvalues(S_sub), c)


def kernel_from_eigenvalues(lam: np.ndarray, c: float) -> float:
    return float(np.sum(np.log2(1.0 + c * lam)))


@dataclass
class LayerAllocation:
    """Columns of the signature matrix assigned to each (user, TP)."""

    J: int
    columns: dict[tuple[int, int], tuple[int, ...]] = field(default_factory=dict)

    def assign(self, user: int, tp: int, cols) -> None:
        cols = tuple(int(c) for c in cols)
        if any(c < 0 or c >= self.J for c in cols):
            raise ValueError(f"column index out of range for J={self.J}")
        taken = {c for (u, t), cs in self.columns.items() if t == tp and u != user for c in cs}
        if taken.intersection(cols):
            raise ValueError(f"columns {sorted(taken.intersection(cols))} already used at TP {tp}")
        self.columns[(user, tp)] = cols

    def layer_count(self, user: int, tp: int) -> int:
        return len(self.columns.get((user, tp), ()))

    def load(self, tp: int) -> int:
        return sum(len(cs) for (_, t), cs in self.columns.items() if t == tp)


def split_columns(J: int, n_first: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split layers ``0..J-1`` into a leading block of ``n_first`` and the rest."""
    if J == 1:
        # one layer cannot be split; both users superpose on it
        return (0,), (0,)
    if not 1 <= n_first < J:
        raise ValueError(f"split must leave both users >= 1 layer, got {n_first} of {J}")
    return tuple(range(n_first)), tuple(range(n_first, J))


def save_signatures(path, S: SignatureMatrix) -> None:
    """Write as text: a header line, then one row per tone of ``re im`` pairs."""
    lines = [f"# K={S.K} J={S.J} N={S.n_nonzero}"]
    for row in S.entries:
        lines.append(" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_signatures(path) -> SignatureMatrix:
    text = Path(path).read_text().splitlines()
    header = dict(tok.split("=") for tok in text[0].lstrip("#").split())
    K, J, N = int(header["K"]), int(header["J"]), int(header["N"])
    rows = []
    for line in text[1:]:
        if not line.strip():
            continue
        vals = [float(v) for v in line.split()]
        rows.append([complex(vals[2 * j], vals[2 * j + 1]) for j in range(J)])
    entries = np.array(rows, dtype=complex)
    if entries.shape != (K, J):
        raise ValueError(f"expected {K}x{J} entries, got {entries.shape}")
    return SignatureMatrix(entries, n_nonzero=N)
