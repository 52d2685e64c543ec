"""Power-sharing factor optimization.

The weighted sum rate (WSR) in the sharing factor is a sum of logs of
ratio-of-affine terms and need not be concave, so closed-form stationary
points are only ever treated as candidates next to the interval endpoints.

OFDMA closed forms (``x = 1 - alpha``, ``gd`` the CoMP user's SINR from the
power-donating TP, ``gg`` the good user's SINR):

    remote / local:  alpha* = [w_i gd (1 + gg) - w_j gg (1 + gd)] / [(w_i - w_j) gd gg]

Dual pairing is solved by enumerating every KKT point of the box
``[0, 1]^2``; see ``docs/derivations.md``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
DEGENERATE_EPS = 1e-9

CLOSED_FORM = "closed_form"
GRID = "grid"
GOLDEN = "golden_section"
ALTERNATING = "alternating"


@dataclass(frozen=True)
class AlphaSolution:
    alpha: float
    wsr_value: float
    method: str
    alpha2: float | None = None

    @property
    def alphas(self) -> tuple[float, ...]:
        return (self.alpha,) if self.alpha2 is None else (self.alpha, self.alpha2)


def _best(cands):
    """Max value; ties go to the lexicographically smallest alphas."""
    best = None
    for x, v in cands:
        if best is None or v > best[1] or (v == best[1] and x < best[0]):
            best = (x, v)
    return best


def optimize_alpha_grid(wsr_of_alpha, resolution: int = 101) -> AlphaSolution:
    """Grid argmax over ``[0, 1]`` including both endpoints."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    xs = np.linspace(0.0, 1.0, resolution)
    vals = np.array([wsr_of_alpha(float(x)) for x in xs])
    k = int(np.argmax(vals))  # first maximum -> smallest alpha
    return AlphaSolution(float(xs[k]), float(vals[k]), GRID)


def golden_max(f, lo: float, hi: float, tol: float):
    """Golden-section maximisation on ``[lo, hi]``; returns ``(x, f(x))``."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def optimize_alpha_golden(wsr_of_alpha, tolerance: float = 1e-6, coarse: int = 21) -> AlphaSolution:
    """Golden section inside the bracket of the best coarse-grid point.

    Returns the best of the golden result and the coarse grid (which
    contains both endpoints).
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    xs = np.linspace(0.0, 1.0, coarse)
    vals = [wsr_of_alpha(float(x)) for x in xs]
    k = int(np.argmax(vals))
    lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, coarse - 1)]
    xg, vg = golden_max(wsr_of_alpha, float(lo), float(hi), tolerance)
    x, v = _best([(float(xs[k]), float(vals[k])), (float(xg), float(vg))])
    method = GOLDEN if x == xg and vg > vals[k] else GRID
    return AlphaSolution(x, v, method)


# OFDMA scalar WSRs -- transcriptions of the rate formulas with S = [1]

def wsr_remote_ofdma(alpha, w_i, w_j, gc_i1, gc_i2, g_j2):
    x = 1.0 - alpha
    r_i1 = math.log2(1.0 + gc_i1 / (1.0 + x * gc_i2))
    r_i2 = math.log2(1.0 + alpha * gc_i2 / (1.0 + gc_i1 + x * gc_i2))
    r_j = math.log2(1.0 + x * g_j2)
    return w_i * (r_i1 + r_i2) + w_j * r_j


def wsr_local_ofdma(alpha, w_i, w_j, gc_i1, gc_i2, g_j1):
    x = 1.0 - alpha
    r_i1 = math.log2(1.0 + alpha * gc_i1 / (1.0 + x * gc_i1 + gc_i2))
    r_i2 = math.log2(1.0 + gc_i2 / (1.0 + x * gc_i1))
    r_j = math.log2(1.0 + x * g_j1)
    return w_i * (r_i1 + r_i2) + w_j * r_j


def wsr_dual_ofdma(alpha1, alpha2, w_i, w_j, w_k, gc_i1, gc_i2, g_j1, g_k2, printed=False):
    x1, x2 = 1.0 - alpha1, 1.0 - alpha2
    if printed:
        r_i1 = math.log2(1.0 + alpha1 * gc_i1 / (1.0 + x1 * gc_i1))
    else:
        r_i1 = math.log2(1.0 + alpha1 * gc_i1 / (1.0 + x1 * gc_i1 + gc_i2))
    r_i2 = math.log2(1.0 + alpha2 * gc_i2 / (1.0 + x1 * gc_i1 + x2 * gc_i2))
    return (w_i * (r_i1 + r_i2) + w_j * math.log2(1.0 + x1 * g_j1)
            + w_k * math.log2(1.0 + x2 * g_k2))


def _degenerate(a, b):
    return abs(a - b) <= DEGENERATE_EPS * max(abs(a), abs(b))


def _two_user_stationary(w_i, w_j, gd, gg):
    """Stationary sharing factor of ``w_i r_i + w_j r_j`` for the shared-TP forms."""
    return (w_i * gd * (1.0 + gg) - w_j * gg * (1.0 + gd)) / ((w_i - w_j) * gd * gg)


def _closed_form_1d(f, w_i, w_j, gd, gg):
    if _degenerate(w_i, w_j) or gd <= 0 or gg <= 0:
        grid = optimize_alpha_grid(f, 1001)
        x, v = _best([(0.0, f(0.0)), (1.0, f(1.0)), (grid.alpha, grid.wsr_value)])
        return AlphaSolution(x, v, GRID)
    a = min(max(_two_user_stationary(w_i, w_j, gd, gg), 0.0), 1.0)
    x, v = _best([(0.0, f(0.0)), (a, f(a)), (1.0, f(1.0))])
    return AlphaSolution(x, v, CLOSED_FORM)


def closed_form_remote_ofdma(w_i, w_j, gc_i2, g_j2, gc_i1=0.0) -> AlphaSolution:
    """Optimal share of TP2's power for the CoMP user (``gc_i1`` only affects the WSR value)."""
    f = lambda a: wsr_remote_ofdma(a, w_i, w_j, gc_i1, gc_i2, g_j2)
    return _closed_form_1d(f, w_i, w_j, gc_i2, g_j2)


def closed_form_local_ofdma(w_i, w_j, gc_i1, gc_i2, g_j1) -> AlphaSolution:
    """Optimal share of TP1's power for the CoMP user; the TP2 SINR drops out of the optimum."""
    f = lambda a: wsr_local_ofdma(a, w_i, w_j, gc_i1, gc_i2, g_j1)
    return _closed_form_1d(f, w_i, w_j, gc_i1, g_j1)


def _dual_kkt_points(w_i, w_j, w_k, g1, g2, gj, gk):
    """Candidate ``(x1, x2)`` points with ``x = 1 - alpha``."""
    pts = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
    can_x1 = not _degenerate(w_i, w_j) and g1 > 0 and gj > 0
    can_x2 = not _degenerate(w_i, w_k) and g2 > 0 and gk > 0

    def x1_of(x2):  # step i: dWSR/dx1 = 0 for fixed x2
        return (w_i * g1 - w_j * gj * (1.0 + x2 * g2)) / ((w_j - w_i) * g1 * gj)

    def x2_of(x1):  # dWSR/dx2 = 0 for fixed x1
        return (w_i * g2 - w_k * gk * (1.0 + x1 * g1)) / ((w_k - w_i) * g2 * gk)

    # steps ii-iv: stationary x2 of WSR(x1*(x2), x2), then back-substitute
    den = (w_j - w_i + w_k) * gj * g2 * gk
    if can_x1 and g2 > 0 and gk > 0 and not _degenerate(w_j + w_k, w_i):
        x2 = (w_k * gk * (g1 - gj) + (w_i - w_j) * gj * g2) / den
        pts.append((x1_of(x2), x2))
    for edge in (0.0, 1.0):
        if can_x1:
            pts.append((x1_of(edge), edge))
        if can_x2:
            pts.append((edge, x2_of(edge)))
    return [(min(max(x1, 0.0), 1.0), min(max(x2, 0.0), 1.0)) for x1, x2 in pts]


def optimize_dual_ofdma(w_i, w_j, w_k, gc_i1, gc_i2, g_j1, g_k2,
                        variant: str = "prose", grid_check: int = 101) -> AlphaSolution:
    """Maximise the dual-pairing OFDMA WSR over ``(alpha1, alpha2)``.

    The prose variant has closed-form stationary points on every face of the
    box, so the global optimum is among a handful of candidates. The printed
    variant has no closed form and is searched numerically. Either way the
    result is compared against a ``grid_check`` x ``grid_check`` grid
    (0 disables) and the better point wins.
    """
    printed = variant == "printed"
    f = lambda a1, a2: wsr_dual_ofdma(a1, a2, w_i, w_j, w_k, gc_i1, gc_i2, g_j1, g_k2, printed)
    if printed:
        sol = optimize_dual_scma(f)
        cands, method = [((sol.alpha, sol.alpha2), sol.wsr_value)], ALTERNATING
    else:
        pts = _dual_kkt_points(w_i, w_j, w_k, gc_i1, gc_i2, g_j1, g_k2)
        cands = []
        for x1, x2 in pts:
            a = (1.0 - x1, 1.0 - x2)
            cands.append((a, f(*a)))
        method = CLOSED_FORM
    best = _best(cands)
    if grid_check:
        g = _grid_2d(f, grid_check)
        if g[1] > best[1]:
            best, method = g, GRID
    (a1, a2), v = best
    return AlphaSolution(a1, v, method, alpha2=a2)


def _grid_2d(f, n):
    xs = np.linspace(0.0, 1.0, n)
    best = None
    for a1 in xs:
        for a2 in xs:
            v = f(float(a1), float(a2))
            if best is None or v > best[1]:
                best = ((float(a1), float(a2)), v)
    return best


def optimize_dual_scma(wsr_of_alphas, tolerance: float = 1e-6, coarse: int = 21,
                       rounds: int = 20) -> AlphaSolution:
    """Alternating 1-D golden searches seeded from a coarse 2-D grid."""
    (a1, a2), v = _grid_2d(wsr_of_alphas, coarse)
    method = GRID
    for _ in range(rounds):
        s1 = optimize_alpha_golden(lambda t: wsr_of_alphas(t, a2), tolerance, coarse)
        improved = False
        if s1.wsr_value > v:
            a1, v, improved = s1.alpha, s1.wsr_value, True
        s2 = optimize_alpha_golden(lambda t: wsr_of_alphas(a1, t), tolerance, coarse)
        if s2.wsr_value > v:
            a2, v, improved = s2.alpha, s2.wsr_value, True
        if not improved:
            break
        method = ALTERNATING
    return AlphaSolution(a1, v, method, alpha2=a2)
