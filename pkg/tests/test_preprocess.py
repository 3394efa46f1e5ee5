import io
import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _tiny import random_sparse, random_tiny
from upmclp.graph import shortest_distances
from upmclp.instance import toy_instance
from upmclp.oracle import exact_upgraded_distance
from upmclp.preprocess import (ALWAYS, NEVER, UNDECIDED, PreprocessReport, build_dmip,
                               classify_pairs, condition_i, condition_ii, condition_iii,
                               dmip_bound, max_budget_reduction)


def test_toy_classes():
    inst = toy_instance()
    rep = classify_pairs(inst)
    i, j, k, q, r, s = range(6)
    assert rep.always(i, k) and rep.always(j, k) and rep.always(i, r) and rep.always(q, s)
    assert rep.never(r, s) and rep.never(s, r)
    # k-q needs the upgrade, which the budget affords
    assert rep.status[k, q] == UNDECIDED
    assert rep.lb_upgraded[k, q] == pytest.approx(0.5)
    c = rep.counts()
    assert sum(c.values()) == 15


def test_max_budget_reduction_greedy():
    inst = toy_instance()
    assert max_budget_reduction(inst.net, 0.75) == pytest.approx(0.75)
    assert max_budget_reduction(inst.net, 0.0) == pytest.approx(0.0)
    assert max_budget_reduction(inst.net, 10.0) == pytest.approx(0.75)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_condition_i_implies_ii(seed):
    inst = random_sparse(seed, n=7)
    d = shortest_distances(inst.net)
    d_u = shortest_distances(inst.net, use_full_upgrade=True)
    for a in range(inst.n):
        for b in range(a + 1, inst.n):
            if condition_i(a, b, d, inst.net, inst.R):
                assert condition_ii(a, b, d_u, inst.R)
            assert d_u[a, b] >= d[a, b] - inst.net.max_reduction.sum() - 1e-9


@pytest.mark.parametrize("seed", range(40))
def test_never_covered_is_sound(seed):
    inst = random_tiny(seed)
    rep = classify_pairs(inst)
    for a, b in rep.pairs():
        exact = exact_upgraded_distance(inst.net, a, b, inst.B)
        assert rep.lb_upgraded[a, b] <= exact + 1e-7
        if rep.never(a, b):
            assert exact > inst.R
        if rep.always(a, b):
            assert rep.d[a, b] <= inst.R + 1e-9


@pytest.mark.parametrize("seed", range(10))
def test_dmip_relaxation_below_integer(seed):
    inst = random_sparse(seed, n=6)
    for a, b in [(0, 5), (1, 4), (2, 3)]:
        lp = dmip_bound(a, b, inst.net, inst.B)
        ip = dmip_bound(a, b, inst.net, inst.B, exact=True)
        assert lp <= ip + 1e-7
        assert ip == pytest.approx(exact_upgraded_distance(inst.net, a, b, inst.B), abs=1e-6)


def test_condition_toggles_and_reasons():
    inst = random_sparse(3, n=8, budget=0.3)
    full = classify_pairs(inst)
    none = classify_pairs(inst, conditions=())
    assert none.counts()[NEVER] == 0
    assert none.counts()[ALWAYS] == full.counts()[ALWAYS]
    assert full.counts()[NEVER] >= classify_pairs(inst, ("i",)).counts()[NEVER]
    for reason in ("i", "ii", "iii", "iv"):
        for a, b in full.never_by(reason):
            assert full.reason[b, a] == reason
    with pytest.raises(ValueError):
        classify_pairs(inst, conditions=("v",))


def test_csv_columns_and_jobs_determinism():
    inst = random_sparse(11, n=9)
    one = classify_pairs(inst, jobs=1)
    many = classify_pairs(inst, jobs=4)
    assert one.to_csv() == many.to_csv()
    rows = list(csv.reader(io.StringIO(one.to_csv())))
    assert rows[0] == ["pair_i", "pair_j", "status", "reason", "lb_upgraded"]
    assert len(rows) == 1 + inst.n * (inst.n - 1) // 2
    assert rows[1][:2] == ["1", "2"]


def test_trivial_report():
    inst = toy_instance()
    rep = PreprocessReport.trivial(inst)
    assert rep.counts()[UNDECIDED] == 15
    np.testing.assert_allclose(rep.lb_upgraded, rep.d_u)


def test_dmip_structure():
    inst = toy_instance()
    model = build_dmip(0, 3, inst.net, inst.B, relax=False)
    assert model.n_binvars == inst.net.n_arcs
    assert dmip_bound(0, 3, inst.net, inst.B, exact=True) == pytest.approx(1.5)
