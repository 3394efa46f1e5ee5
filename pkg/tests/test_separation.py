import numpy as np
import pytest

from _sepbrute import best_cutdi, best_cutsepa, probe_points
from _tiny import random_sparse, random_tiny
from upmclp.formulations import (PATH, PATHCOV, FormulationSpec, build_model, cutsepa_row,
                                 cutsepa_set, lift_solution, separate_cutdi, separate_cutsepa,
                                 separate_triangles, triangles)
from upmclp.oracle import solve_upmclp_exact


def _cuts_by_node(cuts, prefix):
    return {int(c.name.split("_")[1]) - 1: c for c in cuts if c.name.startswith(prefix)}


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("kind", (PATH, PATHCOV))
def test_cutdi_is_exact(seed, kind):
    inst = random_sparse(seed, n=6, max_degree=4)
    model, vm = build_model(inst, FormulationSpec(kind=kind))
    rng = np.random.default_rng(seed)
    for x in probe_points(model, rng, 4):
        cuts = separate_cutdi(x, vm, inst, min_violation=1e-9)
        c35, c36 = _cuts_by_node(cuts, "cutdi35"), _cuts_by_node(cuts, "cutdi36")
        for i in range(inst.n):
            for found, same in ((c35, False), (c36, True)):
                ref = best_cutdi(x, vm, inst, i, same)
                if ref > 1e-9:
                    assert i in found
                    assert found[i].violation(x) == pytest.approx(ref, abs=1e-9)
                else:
                    assert i not in found


@pytest.mark.parametrize("seed", range(10))
def test_cutsepa_is_exact(seed):
    inst = random_sparse(seed, n=6, max_degree=4, p=2)
    model, vm = build_model(inst, FormulationSpec(kind=PATHCOV))
    rng = np.random.default_rng(seed)
    for x in probe_points(model, rng, 4):
        cuts = {c.name: c for c in separate_cutsepa(x, vm, inst, min_violation=1e-9)}
        for e in range(inst.net.m):
            i, j = int(inst.net.tail[e]), int(inst.net.head[e])
            ref = best_cutsepa(x, vm, i, j)
            name = f"cutsepa_{e + 1}"
            if ref > 1e-9:
                assert cuts[name].violation(x) == pytest.approx(ref, abs=1e-9)
            else:
                assert name not in cuts


def test_cutsepa_needs_pathcov():
    inst = random_sparse(0, n=5)
    model, vm = build_model(inst, FormulationSpec(kind=PATH))
    with pytest.raises(ValueError):
        separate_cutsepa(np.zeros(model.n_vars), vm, inst)


@pytest.mark.parametrize("seed", range(20))
def test_integral_optimum_is_never_cut(seed):
    inst = random_tiny(seed)
    sol = solve_upmclp_exact(inst)
    for kind in (PATH, PATHCOV):
        model, vm = build_model(inst, FormulationSpec(kind=kind))
        x = lift_solution(model, vm, inst, sol.facilities, sol.delta)
        assert separate_cutdi(x, vm, inst, min_violation=1e-9) == []
        assert separate_triangles(x, vm, inst, min_violation=1e-9) == []
        if kind == PATHCOV:
            assert separate_cutsepa(x, vm, inst, min_violation=1e-9) == []


def test_chosen_w_beats_simple_choices():
    inst = random_sparse(2, n=6, p=2)
    model, vm = build_model(inst, FormulationSpec(kind=PATHCOV))
    rng = np.random.default_rng(0)
    for x in probe_points(model, rng, 5):
        for e in range(inst.net.m):
            i, j = int(inst.net.tail[e]), int(inst.net.head[e])
            best = cutsepa_row(vm, i, j, cutsepa_set(x, vm, i, j)).violation(x)
            for W in [set(), set(range(inst.n))] + [{k} for k in range(inst.n)]:
                assert cutsepa_row(vm, i, j, W).violation(x) <= best + 1e-12


def test_triangle_listing():
    inst = random_sparse(5, n=7, max_degree=4, extra=1.0)
    tris = triangles(inst.net)
    for a, b, c in tris:
        assert inst.net.edge_index(a, b) >= 0 and inst.net.edge_index(b, c) >= 0
        assert inst.net.edge_index(a, c) >= 0
    assert len(set(tris)) == len(tris)
