"""Compiled scheduling kernels.

Mirrors the rate formulas of ``rates`` and the searches of ``power``,
specialised to the SINR layout the scheduler uses. Signature blocks enter
only through the elementary symmetric polynomials of the eigenvalues of
``S^H S`` (see ``kern``), padded with zeros to a common length.

Decision records are float rows of length ``REC``:
``mode, tp1, tp2, u_i, u_j, u_k, alpha1, alpha2, wsr, split, r_i, r_j, r_k``.
"""

import math

import numpy as np
from numba import njit

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_LN2 = 1.0 / math.log(2.0)

IDLE, SINGLE_USER, MU_SCMA, SU_COMP, REMOTE, LOCAL, DUAL = 0, 1, 2, 3, 4, 5, 6

F_MU, F_SU_COMP, F_REMOTE, F_LOCAL, F_DUAL = 1, 2, 4, 8, 16

OPT_GRID, OPT_GOLDEN = 0, 1

REC = 13
R_MODE, R_TP1, R_TP2, R_I, R_J, R_K, R_A1, R_A2, R_WSR, R_SPLIT, R_RI, R_RJ, R_RK = range(REC)


@njit(cache=True, inline="always")
def kern(cf, c):
    """``log2 det(I + c S^H S)`` from ``cf[k] = e_{k+1}(eig(S^H S))``.

    ``prod(1 + c lam) = 1 + sum_k e_k c^k``, so one log1p of a Horner
    polynomial replaces a log per eigenvalue.
    """
    acc = 0.0
    for k in range(cf.shape[0] - 1, -1, -1):
        acc = acc * c + cf[k]
    return math.log1p(c * acc) * INV_LN2


# shared-TP two-user form: remote (donor = TP2), local (donor = TP1),
# single-TP MU-SCMA (no second TP, go = 0)

@njit(cache=True, inline="always")
def shared_rates(a, gd, go, gj, cf_d, Jd, cf_o, Jo, cf_j, Jj):
    x = 1.0 - a
    r_d = kern(cf_d, a * gd / (Jd * (1.0 + x * gd + go)))
    r_o = 0.0
    if go > 0.0:
        r_o = kern(cf_o, go / (Jo * (1.0 + x * gd)))
    r_j = kern(cf_j, x * gj / Jj)
    return r_d, r_o, r_j


@njit(cache=True, inline="always")
def shared_wsr(a, wi, wj, gd, go, gj, cf_d, Jd, cf_o, Jo, cf_j, Jj):
    r_d, r_o, r_j = shared_rates(a, gd, go, gj, cf_d, Jd, cf_o, Jo, cf_j, Jj)
    return wi * (r_d + r_o) + wj * r_j


@njit(cache=True, inline="always")
def _golden(lo, hi, tol, wi, wj, wk, g1, g2, gj, gk, printed, axis, other,
            cf_1, J1, cf_2, J2, cf_3, J3, cf_4, J4):
    """Golden-section max of one sharing factor on ``[lo, hi]``.

    ``axis`` < 0 selects the shared two-user form (``g1, g2, gj`` =
    ``gd, go, gj``); 0 / 1 move alpha1 / alpha2 of the dual form with the
    other factor held at ``other``.
    """
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc = _eval(c, wi, wj, wk, g1, g2, gj, gk, printed, axis, other, cf_1, J1, cf_2, J2, cf_3, J3, cf_4, J4)
    fd = _eval(d, wi, wj, wk, g1, g2, gj, gk, printed, axis, other, cf_1, J1, cf_2, J2, cf_3, J3, cf_4, J4)
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = _eval(c, wi, wj, wk, g1, g2, gj, gk, printed, axis, other,
                       cf_1, J1, cf_2, J2, cf_3, J3, cf_4, J4)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = _eval(d, wi, wj, wk, g1, g2, gj, gk, printed, axis, other,
                       cf_1, J1, cf_2, J2, cf_3, J3, cf_4, J4)
    if fc >= fd:
        return c, fc
    return d, fd


@njit(cache=True)
def opt_shared(wi, wj, gd, go, gj, cf_d, Jd, cf_o, Jo, cf_j, Jj, method, n_grid, n_coarse, tol, bar):
    """Best sharing factor of the two-user form; ``(alpha, wsr)``.

    Golden mode seeds from an ``n_coarse`` mesh that doubles as an exact
    upper bound: the CoMP (or weak) user's rate rises with alpha and the
    good user's falls, so on a mesh cell the WSR is at most the former at
    the upper end plus the latter at the lower end. If that bound does not
    exceed ``bar`` the search stops and returns ``(0, -inf)``.
    """
    if method == OPT_GRID:
        best_a, best_v = 0.0, -np.inf
        for k in range(n_grid):
            a = k / (n_grid - 1)
            v = shared_wsr(a, wi, wj, gd, go, gj, cf_d, Jd, cf_o, Jo, cf_j, Jj)
            if v > best_v:
                best_a, best_v = a, v
        return best_a, best_v

    n = n_coarse
    best_v, kb, ub, rj_lo = -np.inf, 0, -np.inf, 0.0
    for k in range(n):
        r_d, r_o, r_j = shared_rates(k / (n - 1), gd, go, gj, cf_d, Jd, cf_o, Jo, cf_j, Jj)
        v = wi * (r_d + r_o) + wj * r_j
        if v > best_v:
            best_v, kb = v, k
        if k > 0:
            ub = max(ub, wi * (r_d + r_o) + wj * rj_lo)
        rj_lo = r_j
    if ub <= bar:
        return 0.0, -np.inf
    best_a = kb / (n - 1)
    lo = max(kb - 1, 0) / (n - 1)
    hi = min(kb + 1, n - 1) / (n - 1)
    xg, vg = _golden(lo, hi, tol, wi, wj, 0.0, gd, go, gj, 0.0, False, -1, 0.0,
                     cf_d, Jd, cf_o, Jo, cf_j, Jj, cf_j, Jj)
    if vg > best_v:
        best_a, best_v = xg, vg
    return best_a, best_v


# dual pairing

@njit(cache=True, inline="always")
def dual_rates(a1, a2, g1, g2, gj, gk, printed, cf_i1, Ji1, cf_i2, Ji2, cf_j, Jj, cf_k, Jk):
    x1 = 1.0 - a1
    x2 = 1.0 - a2
    if printed:
        c1 = a1 * g1 / (Ji1 * (1.0 + x1 * g1))
    else:
        c1 = a1 * g1 / (Ji1 * (1.0 + x1 * g1 + g2))
    r_i = kern(cf_i1, c1) + kern(cf_i2, a2 * g2 / (Ji2 * (1.0 + x1 * g1 + x2 * g2)))
    return r_i, kern(cf_j, x1 * gj / Jj), kern(cf_k, x2 * gk / Jk)


@njit(cache=True, inline="always")
def dual_wsr(a1, a2, wi, wj, wk, g1, g2, gj, gk, printed,
             cf_i1, Ji1, cf_i2, Ji2, cf_j, Jj, cf_k, Jk):
    r_i, r_j, r_k = dual_rates(a1, a2, g1, g2, gj, gk, printed,
                               cf_i1, Ji1, cf_i2, Ji2, cf_j, Jj, cf_k, Jk)
    return wi * r_i + wj * r_j + wk * r_k


@njit(cache=True, inline="always")
def _eval(t, wi, wj, wk, g1, g2, gj, gk, printed, axis, other, cf_1, J1, cf_2, J2, cf_3, J3, cf_4, J4):
    if axis < 0:
        return shared_wsr(t, wi, wj, g1, g2, gj, cf_1, J1, cf_2, J2, cf_3, J3)
    if axis == 0:
        return dual_wsr(t, other, wi, wj, wk, g1, g2, gj, gk, printed,
                        cf_1, J1, cf_2, J2, cf_3, J3, cf_4, J4)
    return dual_wsr(other, t, wi, wj, wk, g1, g2, gj, gk, printed,
                    cf_1, J1, cf_2, J2, cf_3, J3, cf_4, J4)


@njit(cache=True)
def opt_dual(wi, wj, wk, g1, g2, gj, gk, printed, cf_i1, Ji1, cf_i2, Ji2, cf_j, Jj, cf_k, Jk,
             method, n_grid, tol, rounds, n_mesh, bar):
    """Best ``(alpha1, alpha2, wsr)`` of the dual form.

    Golden mode: an ``n_mesh`` x ``n_mesh`` mesh gives the seed and an exact
    upper bound (same monotonicity argument as ``opt_shared``); then
    alternating golden line searches within one mesh step of the current
    point until a round brings no gain.
    """
    if method == OPT_GRID:
        n = n_grid
        b1, b2, bv = 0.0, 0.0, -np.inf
        for k1 in range(n):
            for k2 in range(n):
                v = dual_wsr(k1 / (n - 1), k2 / (n - 1), wi, wj, wk, g1, g2, gj, gk, printed,
                             cf_i1, Ji1, cf_i2, Ji2, cf_j, Jj, cf_k, Jk)
                if v > bv:
                    b1, b2, bv = k1 / (n - 1), k2 / (n - 1), v
        return b1, b2, bv

    n = n_mesh
    rj = np.empty(n)
    rk = np.empty(n)
    for m in range(n):
        x = 1.0 - m / (n - 1)
        rj[m] = kern(cf_j, x * gj / Jj)
        rk[m] = kern(cf_k, x * gk / Jk)
    b1, b2, bv, ub = 0.0, 0.0, -np.inf, -np.inf
    for m1 in range(n):
        for m2 in range(n):
            r_i, _, _ = dual_rates(m1 / (n - 1), m2 / (n - 1), g1, g2, 0.0, 0.0, printed,
                                   cf_i1, Ji1, cf_i2, Ji2, cf_j, Jj, cf_k, Jk)
            v = wi * r_i + wj * rj[m1] + wk * rk[m2]
            if v > bv:
                b1, b2, bv = m1 / (n - 1), m2 / (n - 1), v
            if m1 > 0 and m2 > 0:
                ub = max(ub, wi * r_i + wj * rj[m1 - 1] + wk * rk[m2 - 1])
    if ub <= bar:
        return 0.0, 0.0, -np.inf

    h = 1.0 / (n - 1)
    for _ in range(rounds):
        start = bv
        a, v = _golden(max(b1 - h, 0.0), min(b1 + h, 1.0), tol, wi, wj, wk, g1, g2, gj, gk, printed,
                       0, b2, cf_i1, Ji1, cf_i2, Ji2, cf_j, Jj, cf_k, Jk)
        if v > bv:
            b1, bv = a, v
        a, v = _golden(max(b2 - h, 0.0), min(b2 + h, 1.0), tol, wi, wj, wk, g1, g2, gj, gk, printed,
                       1, b1, cf_i1, Ji1, cf_i2, Ji2, cf_j, Jj, cf_k, Jk)
        if v > bv:
            b2, bv = a, v
        if bv - start <= 1e-9 * abs(bv):
            break
    return b1, b2, bv


# scheduling

@njit(cache=True)
def _clear(rec):
    for q in range(REC):
        rec[q] = 0.0
    rec[R_I] = -1.0
    rec[R_J] = -1.0
    rec[R_K] = -1.0
    rec[R_TP1] = -1.0
    rec[R_TP2] = -1.0


@njit(cache=True)
def single_tp(c, cell, g, w, cf_full, J_full, cf_w, J_w, cf_s, J_s,
              flags, method, n_grid, n_coarse, tol, rec):
    """Single-TP PF pick, optionally paired with the best MU-SCMA partner.

    Partners are visited in decreasing order of their full-power bound so
    the search stops at the first one that cannot beat the incumbent.
    """
    _clear(rec)
    rec[R_TP1] = c
    U = cell.shape[0]
    istar, best = -1, -np.inf
    r_star = 0.0
    for u in range(U):
        if cell[u] != c:
            continue
        r = kern(cf_full, g[u] / J_full)
        m = w[u] * r
        if m > best:
            istar, best, r_star = u, m, r
    if istar < 0:
        return
    rec[R_MODE] = SINGLE_USER
    rec[R_I] = istar
    rec[R_WSR] = best
    rec[R_RI] = r_star
    rec[R_A1] = 1.0
    if not flags & F_MU:
        return

    n_split = cf_w.shape[0]
    neg_ub = np.empty(U * n_split)
    ids = np.empty(U * n_split, dtype=np.int64)
    n = 0
    for j in range(U):
        if cell[j] != c or j == istar:
            continue
        weak, strong = (istar, j) if g[istar] <= g[j] else (j, istar)
        for s in range(n_split):
            neg_ub[n] = -(w[weak] * kern(cf_w[s], g[weak] / J_w[s])
                          + w[strong] * kern(cf_s[s], g[strong] / J_s[s]))
            ids[n] = j * n_split + s
            n += 1
    partner_id = U
    for q in np.argsort(neg_ub[:n], kind="mergesort"):
        if -neg_ub[q] <= rec[R_WSR]:
            break
        j, s = ids[q] // n_split, ids[q] % n_split
        weak, strong = (istar, j) if g[istar] <= g[j] else (j, istar)
        a, v = opt_shared(w[weak], w[strong], g[weak], 0.0, g[strong],
                          cf_w[s], J_w[s], cf_full, J_full, cf_s[s], J_s[s],
                          method, n_grid, n_coarse, tol, rec[R_WSR])
        if v > rec[R_WSR] or (v == rec[R_WSR] and rec[R_MODE] == MU_SCMA and j < partner_id):
            r_d, r_o, r_j = shared_rates(a, g[weak], 0.0, g[strong],
                                         cf_w[s], J_w[s], cf_full, J_full, cf_s[s], J_s[s])
            rec[R_MODE] = MU_SCMA
            rec[R_I] = weak
            rec[R_J] = strong
            rec[R_A1] = a
            rec[R_WSR] = v
            rec[R_SPLIT] = s
            rec[R_RI] = r_d + r_o
            rec[R_RJ] = r_j
            partner_id = j


@njit(cache=True)
def _good_user(rec):
    if rec[R_MODE] == MU_SCMA:
        return int(rec[R_J])
    if rec[R_MODE] == SINGLE_USER:
        return int(rec[R_I])
    return -1


@njit(cache=True)
def _take(rec, mode, t1, t2, ui, uj, uk, a1, a2, v, s, ri, rj, rk):
    rec[R_MODE] = mode
    rec[R_TP1] = t1
    rec[R_TP2] = t2
    rec[R_I] = ui
    rec[R_J] = uj
    rec[R_K] = uk
    rec[R_A1] = a1
    rec[R_A2] = a2
    rec[R_WSR] = v
    rec[R_SPLIT] = s
    rec[R_RI] = ri
    rec[R_RJ] = rj
    rec[R_RK] = rk


@njit(cache=True)
def _beats(v, rec, base_a, base_b, gain_floor):
    return v > rec[R_WSR] and v - base_a - base_b > gain_floor


@njit(cache=True)
def _bar(rec, base_a, base_b, gain_floor):
    """Value a candidate must exceed to pass ``_beats`` (used for pruning only)."""
    return max(rec[R_WSR], base_a + base_b + gain_floor)


@njit(cache=True)
def comp_set(ta, tb, cell, partner, eligible, g, gc1, gc2, w, cell_recs,
             cf_full, J_full, cf_w, J_w, cf_s, J_s,
             flags, sic_order, printed, method, n_grid, n_coarse, tol, rounds, n_coarse2,
             base_a, base_b, gain_floor, rec):
    """Best CoMP candidate for the TP pair (ta, tb), both donor directions.

    Only candidates with ``wsr - base_a - base_b > gain_floor`` are kept.
    Pairing candidates are visited in decreasing order of their full-power
    bound (exact, since rates are monotone in the sharing factors) and the
    search stops at the first bound that cannot win. Leaves
    ``rec[R_MODE] == IDLE`` when nothing qualifies.
    """
    _clear(rec)
    rec[R_WSR] = -np.inf
    U = cell.shape[0]
    n_split = cf_w.shape[0]
    cap = 2 * 3 * U * n_split
    neg_ub = np.empty(cap)
    kind = np.empty(cap, dtype=np.int64)
    who = np.empty(cap, dtype=np.int64)  # (direction, user, split) packed
    n = 0
    goods = np.full(2, -1, dtype=np.int64)
    stars = np.full(2, -1, dtype=np.int64)
    for direction in range(2):
        t1 = ta if direction == 0 else tb
        t2 = tb if direction == 0 else ta
        # PF pick of the CoMP user among eligible users of t1 cooperating with t2
        istar, best_pf = -1, -np.inf
        for u in range(U):
            if cell[u] != t1 or partner[u] != t2 or not eligible[u]:
                continue
            m = w[u] * kern(cf_full, g[u] / J_full)
            if m > best_pf:
                istar, best_pf = u, m
        if istar < 0:
            continue
        stars[direction] = istar
        i = istar

        if flags & F_SU_COMP:
            for u in range(U):
                if cell[u] != t1 or partner[u] != t2 or not eligible[u]:
                    continue
                ri = kern(cf_full, gc1[u] / J_full) + kern(cf_full, gc2[u] / (J_full * (1.0 + gc1[u])))
                v = w[u] * ri
                if _beats(v, rec, base_a, base_b, gain_floor):
                    _take(rec, SU_COMP, t1, t2, u, -1, -1, 1.0, 0.0, v, 0, ri, 0.0, 0.0)

        for j in range(U):
            if flags & F_REMOTE and cell[j] == t2 and not (sic_order and not g[j] > gc2[i]):
                for s in range(n_split):
                    r_d, r_o, _ = shared_rates(1.0, gc2[i], gc1[i], g[j], cf_w[s], J_w[s],
                                               cf_full, J_full, cf_s[s], J_s[s])
                    neg_ub[n] = -(w[i] * (r_d + r_o) + w[j] * kern(cf_s[s], g[j] / J_s[s]))
                    kind[n] = REMOTE
                    who[n] = (direction * U + j) * n_split + s
                    n += 1
            if flags & F_LOCAL and cell[j] == t1 and j != i and not (sic_order and not g[j] > gc1[i]):
                for s in range(n_split):
                    r_d, r_o, _ = shared_rates(1.0, gc1[i], gc2[i], g[j], cf_w[s], J_w[s],
                                               cf_full, J_full, cf_s[s], J_s[s])
                    neg_ub[n] = -(w[i] * (r_d + r_o) + w[j] * kern(cf_s[s], g[j] / J_s[s]))
                    kind[n] = LOCAL
                    who[n] = (direction * U + j) * n_split + s
                    n += 1

        if flags & F_DUAL:
            jj = _good_user(cell_recs[t1])
            kk = _good_user(cell_recs[t2])
            if jj < 0 or kk < 0:
                continue
            goods[direction] = jj * U + kk
            for u in range(U):
                if cell[u] != t1 or partner[u] != t2 or not eligible[u] or u == jj:
                    continue
                if sic_order and not (g[jj] > gc1[u] and g[kk] > gc2[u]):
                    continue
                for s in range(n_split):
                    ri1, _, _ = dual_rates(1.0, 1.0, gc1[u], gc2[u], g[jj], g[kk], printed,
                                           cf_w[s], J_w[s], cf_w[s], J_w[s],
                                           cf_s[s], J_s[s], cf_s[s], J_s[s])
                    neg_ub[n] = -(w[u] * ri1 + w[jj] * kern(cf_s[s], g[jj] / J_s[s])
                                  + w[kk] * kern(cf_s[s], g[kk] / J_s[s]))
                    kind[n] = DUAL
                    who[n] = (direction * U + u) * n_split + s
                    n += 1

    for q in np.argsort(neg_ub[:n], kind="mergesort"):
        if not _beats(-neg_ub[q], rec, base_a, base_b, gain_floor):
            break
        s = who[q] % n_split
        direction = who[q] // n_split // U
        u = who[q] // n_split % U
        t1 = ta if direction == 0 else tb
        t2 = tb if direction == 0 else ta
        if kind[q] == DUAL:
            i, jj, kk = u, goods[direction] // U, goods[direction] % U
            a1, a2, v = opt_dual(w[i], w[jj], w[kk], gc1[i], gc2[i], g[jj], g[kk], printed,
                                 cf_w[s], J_w[s], cf_w[s], J_w[s], cf_s[s], J_s[s],
                                 cf_s[s], J_s[s], method, n_grid, tol, rounds, n_coarse2,
                                 _bar(rec, base_a, base_b, gain_floor))
            if _beats(v, rec, base_a, base_b, gain_floor):
                ri, rj, rk = dual_rates(a1, a2, gc1[i], gc2[i], g[jj], g[kk], printed,
                                        cf_w[s], J_w[s], cf_w[s], J_w[s],
                                        cf_s[s], J_s[s], cf_s[s], J_s[s])
                _take(rec, DUAL, t1, t2, i, jj, kk, a1, a2, v, s, ri, rj, rk)
            continue
        i, j = stars[direction], u
        # remote: TP2 donates to the CoMP user; local: TP1 does
        gd, go = (gc2[i], gc1[i]) if kind[q] == REMOTE else (gc1[i], gc2[i])
        a, v = opt_shared(w[i], w[j], gd, go, g[j], cf_w[s], J_w[s], cf_full, J_full, cf_s[s], J_s[s],
                          method, n_grid, n_coarse, tol, _bar(rec, base_a, base_b, gain_floor))
        if _beats(v, rec, base_a, base_b, gain_floor):
            r_d, r_o, r_j = shared_rates(a, gd, go, g[j], cf_w[s], J_w[s], cf_full, J_full, cf_s[s], J_s[s])
            _take(rec, kind[q], t1, t2, i, j, -1, a, 0.0, v, s, r_d + r_o, r_j, 0.0)
    if rec[R_MODE] == IDLE:
        rec[R_WSR] = 0.0


@njit(cache=True)
def pair_eligible(ta, tb, cell, partner, eligible):
    for u in range(cell.shape[0]):
        if eligible[u] and ((cell[u] == ta and partner[u] == tb) or (cell[u] == tb and partner[u] == ta)):
            return True
    return False


@njit(cache=True)
def _select_sets(gain, pairs, n_cells, multi, active):
    """Choose CoMP sets: the single best positive gain, or a max-gain disjoint set."""
    P = pairs.shape[0]
    for p in range(P):
        active[p] = False
    if not multi:
        bp, bg = -1, 0.0
        for p in range(P):
            if gain[p] > bg:
                bp, bg = p, gain[p]
        if bp >= 0:
            active[bp] = True
        return
    M = 1 << n_cells
    dp = np.zeros(M)
    choice = np.full(M, -1, dtype=np.int64)
    for m in range(1, M):
        low = 0
        while not (m >> low) & 1:
            low += 1
        rest = m & ~(1 << low)
        dp[m] = dp[rest]
        choice[m] = -1
        for p in range(P):
            a, b = pairs[p, 0], pairs[p, 1]
            if a == low:
                o = b
            elif b == low:
                o = a
            else:
                continue
            if not (m >> o) & 1 or gain[p] <= 0.0:
                continue
            cand = gain[p] + dp[rest & ~(1 << o)]
            if cand > dp[m]:
                dp[m] = cand
                choice[m] = p
    m = M - 1
    while m:
        low = 0
        while not (m >> low) & 1:
            low += 1
        p = choice[m]
        if p < 0:
            m = m & ~(1 << low)
        else:
            active[p] = True
            m = m & ~(1 << pairs[p, 0]) & ~(1 << pairs[p, 1])


@njit(cache=True)
def schedule_subband(cell, partner, eligible, g, gc1, gc2, w, n_cells, pairs,
                     cf_full, J_full, cf_w, J_w, cf_s, J_s,
                     flags, sic_order, printed, method, n_grid, n_coarse, tol, rounds, n_coarse2, multi,
                     cell_recs, pair_recs, active, rates):
    """One cluster-wide decision. Returns ``(chosen_wsr, all_single_tp_wsr)``."""
    U = cell.shape[0]
    single_total = 0.0
    for c in range(n_cells):
        single_tp(c, cell, g, w, cf_full, J_full, cf_w, J_w, cf_s, J_s,
                  flags, method, n_grid, n_coarse, tol, cell_recs[c])
        single_total += cell_recs[c, R_WSR]

    P = pairs.shape[0]
    gain = np.zeros(P)
    best_gain = 0.0
    comp_flags = flags & (F_SU_COMP | F_REMOTE | F_LOCAL | F_DUAL)
    for p in range(P):
        ta, tb = pairs[p, 0], pairs[p, 1]
        _clear(pair_recs[p])
        if comp_flags == 0 or not pair_eligible(ta, tb, cell, partner, eligible):
            continue
        # a single active set only needs to beat the best pair so far
        floor = 0.0 if multi else best_gain
        comp_set(ta, tb, cell, partner, eligible, g, gc1, gc2, w, cell_recs,
                 cf_full, J_full, cf_w, J_w, cf_s, J_s,
                 flags, sic_order, printed, method, n_grid, n_coarse, tol, rounds, n_coarse2,
                 cell_recs[ta, R_WSR], cell_recs[tb, R_WSR], floor, pair_recs[p])
        if pair_recs[p, R_MODE] != IDLE:
            gain[p] = pair_recs[p, R_WSR] - cell_recs[ta, R_WSR] - cell_recs[tb, R_WSR]
            if gain[p] > best_gain:
                best_gain = gain[p]
    _select_sets(gain, pairs, n_cells, multi, active)

    for u in range(U):
        rates[u] = 0.0
    total = single_total
    covered = np.zeros(n_cells, dtype=np.bool_)
    for p in range(P):
        if active[p]:
            total += gain[p]
            covered[pairs[p, 0]] = True
            covered[pairs[p, 1]] = True
            rec = pair_recs[p]
            rates[int(rec[R_I])] += rec[R_RI]
            if rec[R_J] >= 0:
                rates[int(rec[R_J])] += rec[R_RJ]
            if rec[R_K] >= 0:
                rates[int(rec[R_K])] += rec[R_RK]
    for c in range(n_cells):
        if covered[c]:
            continue
        rec = cell_recs[c]
        if rec[R_MODE] == SINGLE_USER:
            rates[int(rec[R_I])] += rec[R_RI]
        elif rec[R_MODE] == MU_SCMA:
            rates[int(rec[R_I])] += rec[R_RI]
            rates[int(rec[R_J])] += rec[R_RJ]
    return total, single_total


@njit(cache=True)
def schedule_tti(cell, partner, eligible, g, gc1, gc2, w, n_cells, pairs,
                 cf_full, J_full, cf_w, J_w, cf_s, J_s,
                 flags, sic_order, printed, method, n_grid, n_coarse, tol, rounds, n_coarse2, multi,
                 cell_recs, pair_recs, active, rates, wsr):
    """All subbands of one TTI; SINR arrays are (U, B), outputs indexed by subband first."""
    B = g.shape[1]
    for b in range(B):
        t, s = schedule_subband(cell, partner, eligible, g[:, b].copy(), gc1[:, b].copy(),
                                gc2[:, b].copy(), w, n_cells, pairs,
                                cf_full, J_full, cf_w, J_w, cf_s, J_s,
                                flags, sic_order, printed, method, n_grid, n_coarse, tol, rounds,
                                n_coarse2, multi, cell_recs[b], pair_recs[b], active[b], rates[:, b])
        wsr[b, 0] = t
        wsr[b, 1] = s
