import numpy as np
import pytest

import oracle
from conftest import log_uniform
from scma_comp.rates import DualPairing, MuScmaSingleTp, SingleUser, SuComp
from scma_comp.scheduler import (CASE_FAMILIES, PfState, RateModel, SchedulerConfig, SubbandSinrs,
                                 schedule_cluster, schedule_comp_set, schedule_single_tp, update_pf)
from scma_comp.scma import build_signature_set

MODEL = RateModel.from_signature(build_signature_set(4, 6, 2))
GRID = dict(optimizer="grid", grid_points=21)


def random_instance(rng, n_users, n_cells=2):
    cell = rng.integers(0, n_cells, n_users)
    partner = (cell + 1) % n_cells
    g = log_uniform(rng, 0.05, 300, n_users)
    # CoMP SINRs remove the partner's interference, so the serving one can only grow
    gc1 = g * log_uniform(rng, 1.0, 5.0, n_users)
    gc2 = gc1 * log_uniform(rng, 0.1, 1.0, n_users)
    eligible = rng.random(n_users) < 0.7
    sinrs = SubbandSinrs(cell, partner, eligible, g, gc1, gc2)
    pf = PfState(log_uniform(rng, 0.5, 20, n_users))
    return sinrs, pf


def pf_of(w):
    return PfState(1.0 / np.asarray(w, dtype=float))


def test_single_user_cell():
    s = SubbandSinrs([0], [1], [False], [3.0], [3.0], [0.5])
    mode, v = schedule_single_tp(0, s, pf_of([1.0]), MODEL)
    assert mode == SingleUser(0, 0)
    assert v == pytest.approx(oracle.single_tp(0, s, [1.0], MODEL)[1])


def test_empty_cell_is_idle():
    s = SubbandSinrs([0], [1], [False], [3.0], [3.0], [0.5])
    mode, v = schedule_single_tp(1, s, pf_of([1.0]), MODEL)
    assert mode is None and v == 0.0


def test_zero_sinr_partner_never_paired():
    s = SubbandSinrs([0, 0], [1, 1], [False, False], [20.0, 0.0], [20.0, 0.0], [1.0, 0.0])
    for w in ([1.0, 1.0], [1.0, 100.0]):
        mode, _ = schedule_single_tp(0, s, pf_of(w), MODEL)
        assert mode == SingleUser(0, 0)


def test_four_user_cell_matches_oracle(rng):
    for _ in range(20):
        s, pf = random_instance(rng, 4, n_cells=1)
        s.cell[:] = 0
        mode, v = schedule_single_tp(0, s, pf, MODEL, SchedulerConfig(**GRID))
        ref_mode, ref_v, _ = oracle.single_tp(0, s, pf.weights, MODEL)
        assert v == pytest.approx(ref_v, rel=1e-12)
        if isinstance(mode, MuScmaSingleTp):
            assert ref_mode == ("mu_scma", mode.comp_user, mode.good_user)


def test_no_eligible_user_means_no_comp():
    s = SubbandSinrs([0, 1], [1, 0], [False, False], [0.1, 0.2], [0.3, 0.4], [0.2, 0.3])
    assert schedule_comp_set((0, 1), s, pf_of([1, 1]), MODEL) == (None, 0.0)
    dec = schedule_cluster(2, [(0, 1)], s, pf_of([1, 1]), MODEL)
    assert dec.source == "single_tp" and dec.wsr == dec.single_tp_wsr


def test_lone_user_su_comp_only():
    s = SubbandSinrs([0], [1], [True], [0.2], [0.25], [0.2])
    cfg = SchedulerConfig.for_case(6)
    mode, v = schedule_comp_set((0, 1), s, pf_of([1.0]), MODEL, cfg)
    assert isinstance(mode, SuComp)
    dec = schedule_cluster(2, [(0, 1)], s, pf_of([1.0]), MODEL, cfg)
    assert dec.wsr == max(dec.candidate_wsrs.values())
    assert set(dec.scheduled_users()) == {0}


def test_symmetric_dual_instance():
    # CoMP user 0 with equal SINRs to both TPs; identical good users 1 and 2
    s = SubbandSinrs([0, 0, 1], [1, 1, 0], [True, False, False],
                     [0.5, 30.0, 30.0], [1.0, 30.0, 30.0], [1.0, 1.0, 1.0])
    cfg = SchedulerConfig(families=("dual",), **GRID)
    mode, v = schedule_comp_set((0, 1), s, pf_of([3.0, 1.0, 1.0]), MODEL, cfg)
    assert isinstance(mode, DualPairing)
    cands = oracle.comp_candidates(0, 1, s, [3.0, 1.0, 1.0], MODEL, ("dual",),
                                   [("single_user", 1), ("single_user", 2)])
    assert v == pytest.approx(max(val for _, val, _ in cands), rel=1e-12)


def test_cluster_matches_oracle(rng):
    for case in (3, 4, 5, 6):
        for _ in range(8):
            s, pf = random_instance(rng, 4)
            cfg = SchedulerConfig.for_case(case, **GRID)
            dec = schedule_cluster(2, [(0, 1)], s, pf, MODEL, cfg)
            ref, single, _ = oracle.cluster(2, [(0, 1)], s, pf.weights, MODEL, CASE_FAMILIES[case])
            assert dec.single_tp_wsr == pytest.approx(single, rel=1e-12)
            assert dec.wsr == pytest.approx(ref, rel=1e-12)


def test_comp_chosen_on_toy_cluster():
    # user 0 sits on the TP0/TP1 edge; every other cell has one strong centre user
    n = 7
    cell = [0, 0] + list(range(1, n))
    partner = [1, 1] + [0] * (n - 1)
    g = [0.3, 50.0] + [80.0] * (n - 1)
    gc1 = [1.5, 55.0] + [90.0] * (n - 1)
    gc2 = [1.4, 0.1] + [0.1] * (n - 1)
    eligible = [True] + [False] * n
    s = SubbandSinrs(cell, partner, eligible, g, gc1, gc2)
    w = [50.0] + [1.0] * n  # the edge user is far behind its PF average
    pairs = [(0, t) for t in range(1, n)]
    dec = schedule_cluster(n, pairs, s, pf_of(w), MODEL, SchedulerConfig.for_case(6))
    assert dec.source == "multi_tp"
    assert 0 in dec.scheduled_users()
    assert dec.wsr > dec.single_tp_wsr
    ref, _, chosen = oracle.cluster(n, pairs, s, w, MODEL, CASE_FAMILIES[6])
    assert chosen != "single_tp"
    assert dec.wsr >= ref - 1e-9  # golden search on top of the grid oracle


def test_threshold_zero_no_comp(rng):
    s, pf = random_instance(rng, 4)
    s.eligible[:] = False
    dec = schedule_cluster(2, [(0, 1)], s, pf, MODEL, SchedulerConfig.for_case(6))
    assert dec.source == "single_tp"


def test_ofdma_model_cases():
    model = RateModel.ofdma()
    s = SubbandSinrs([0, 1], [1, 0], [True, True], [0.5, 4.0], [0.9, 5.0], [0.8, 0.5])
    for case in (1, 2):
        dec = schedule_cluster(2, [(0, 1)], s, pf_of([1, 1]), model, SchedulerConfig.for_case(case))
        ref, _, _ = oracle.cluster(2, [(0, 1)], s, [1, 1], model, CASE_FAMILIES[case])
        assert dec.wsr == pytest.approx(ref, rel=1e-12)


def test_pf_update():
    pf = PfState.initial(2, epsilon=1.0, window=100.0)
    nxt = update_pf(pf, [0.0, 2.0])
    assert nxt.avg_rate[0] == pytest.approx(1.0 * (1 - 1 / 100))
    assert nxt.avg_rate[1] == pytest.approx(0.99 + 0.02)
    for _ in range(5000):
        nxt = update_pf(nxt, [0.0, 3.0])
    assert nxt.avg_rate[1] == pytest.approx(3.0, rel=1e-9)
    with pytest.raises(ValueError):
        update_pf(pf, [-1.0, 0.0])


def test_pf_flips_to_starved_user():
    s = SubbandSinrs([0, 0], [1, 1], [False, False], [100.0, 1.0], [100.0, 1.0], [0.0, 0.0])
    pf = PfState.initial(2)
    cfg = SchedulerConfig.for_case(1)
    model = RateModel.ofdma()
    served = set()
    for _ in range(2000):
        mode, _ = schedule_single_tp(0, s, pf, model, cfg)
        served.add(mode.user)
        r = np.zeros(2)
        r[mode.user] = np.log2(1 + s.g[mode.user])
        pf = update_pf(pf, r)
    assert served == {0, 1}


def test_config_validation():
    with pytest.raises(ValueError):
        SchedulerConfig(families=("bogus",))
    with pytest.raises(ValueError):
        SchedulerConfig(optimizer="newton")
    with pytest.raises(ValueError):
        SubbandSinrs([0], [1], [True], [-1.0], [1.0], [1.0])
