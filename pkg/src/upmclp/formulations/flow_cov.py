"""Flow-coverage formulation: one unit flow per covered pair ``i < j``."""
from __future__ import annotations

import numpy as np

from ..graph import DIST_TOL, incident_arcs
from ..instance import Instance
from ..milp import BINARY, CONTINUOUS, MilpModel
from ..preprocess import PreprocessReport, classify_pairs
from .base import FLOWCOV, FormulationSpec, VariableMap, check_normalized


def pair_arcs(net, i: int, j: int) -> list[int]:
    """Arcs usable by the ``i -> j`` flow: none entering ``i``, none leaving ``j``."""
    return [a for a in range(net.n_arcs) if net.arc_head(a) != i and net.arc_tail(a) != j]


def build_flow_cov(inst: Instance, report: PreprocessReport | None = None,
                   spec: FormulationSpec | None = None, model: MilpModel | None = None):
    """Return ``(model, VariableMap)``.

    With preprocessing, always-covered pairs lose their flow block and
    never-covered pairs also lose ``y``. ``y`` is relaxed only where the pair
    keeps its flow rows; elsewhere nothing would make it integral.
    """
    spec = spec or FormulationSpec(kind=FLOWCOV)
    if spec.kind != FLOWCOV:
        raise ValueError("spec.kind must be FlowCov")
    check_normalized(inst)
    pre = spec.use_preprocess
    if report is None:
        report = classify_pairs(inst) if pre else PreprocessReport.trivial(inst)
    net, n, R = inst.net, inst.n, inst.R
    model = model if model is not None else MilpModel(f"flowcov_{spec.flow_variant}", "max")
    vm = VariableMap(FLOWCOV, n, net.m, flow_variant=spec.flow_variant)
    counting = model.counting

    def eliminated(i, j):
        return pre and report.never(i, j)

    def has_block(i, j):
        return not (pre and (report.always(i, j) or report.never(i, j)))

    xkind = CONTINUOUS if spec.relax_x else BINARY
    vm.x = [model.add_var(f"x_{j + 1}", 0.0, 1.0, xkind) for j in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j or eliminated(i, j):
                continue
            a, b = min(i, j), max(i, j)
            relax = spec.relax_y and has_block(a, b)
            vm.y[i, j] = model.add_var(f"y_{i + 1}_{j + 1}", 0.0, 1.0,
                                       CONTINUOUS if relax else BINARY)
    vm.delta = [model.add_var(f"del_{e + 1}", 0.0, float(net.max_reduction[e]))
                for e in range(net.m)]

    model.add_constr({c: 1.0 for c in vm.x}, "=", inst.p, "facilities")
    for i in range(n):
        row = {vm.x[i]: 1.0}
        row.update({vm.y[i, j]: 1.0 for j in range(n) if (i, j) in vm.y})
        model.add_constr(row, "<=", 1.0, f"assign_{i + 1}")
    for (i, j), col in vm.y.items():
        model.add_constr({col: 1.0, vm.x[j]: -1.0}, "<=", 0.0, f"open_{i + 1}_{j + 1}")
    model.add_constr({vm.delta[e]: float(net.cost[e]) for e in range(net.m)}, "<=", inst.B,
                     "budget")

    out_arcs = [incident_arcs(net, k)[0] for k in range(n)]
    in_arcs = [incident_arcs(net, k)[1] for k in range(n)]
    length = net.length
    umax = net.max_reduction
    alpha = spec.flow_variant == "alpha"
    aux_tag = "alpha" if alpha else "gam"
    f18 = spec.has("F18_no_two_way")
    f1920 = spec.has("F19_20_path_chain")

    for i in range(n):
        for j in range(i + 1, n):
            if not has_block(i, j):
                continue
            arcs = pair_arcs(net, i, j)
            tag = f"{i + 1}_{j + 1}"
            fcol, acol = {}, {}
            for a in arcs:
                e = a >> 1
                fcol[a] = model.add_var(f"f_{tag}_{a + 1}", 0.0, 1.0, BINARY)
                ub = float(length[e]) if alpha else float(umax[e])
                acol[a] = model.add_var(f"{aux_tag}_{tag}_{a + 1}", 0.0, ub)
            vm.flow[i, j] = (arcs, [fcol[a] for a in arcs], [acol[a] for a in arcs])
            yij, yji = vm.y.get((i, j)), vm.y.get((j, i))
            if counting:
                _count_block(model, n, arcs, i, j, net, f18,
                             f1920 * ((yij is not None) + (yji is not None)))
                continue
            if alpha:
                model.add_constr({acol[a]: 1.0 for a in arcs}, "<=", R, f"len_{tag}")
                for a in arcs:
                    e = a >> 1
                    model.add_constr({acol[a]: 1.0, fcol[a]: -float(length[e]),
                                      vm.delta[e]: 1.0}, ">=", 0.0, f"alo_{tag}_{a + 1}")
                    model.add_constr({acol[a]: 1.0, vm.delta[e]: 1.0}, "<=", float(length[e]),
                                     f"ahi_{tag}_{a + 1}")
            else:
                row = {}
                for a in arcs:
                    row[fcol[a]] = float(length[a >> 1])
                    row[acol[a]] = -1.0
                model.add_constr(row, "<=", R, f"len_{tag}")
                for a in arcs:
                    e = a >> 1
                    model.add_constr({acol[a]: 1.0, fcol[a]: -float(umax[e])}, "<=", 0.0,
                                     f"gu_{tag}_{a + 1}")
                    model.add_constr({acol[a]: 1.0, vm.delta[e]: -1.0}, "<=", 0.0,
                                     f"gd_{tag}_{a + 1}")
            for k in range(n):
                if k in (i, j):
                    continue
                row = {fcol[a]: 1.0 for a in out_arcs[k] if a in fcol}
                for a in in_arcs[k]:
                    if a in fcol:
                        row[fcol[a]] = row.get(fcol[a], 0.0) - 1.0
                model.add_constr(row, "=", 0.0, f"bal_{tag}_{k + 1}")
            for name, arcset in (("src", out_arcs[i]), ("snk", in_arcs[j])):
                row = {fcol[a]: 1.0 for a in arcset}
                if yij is not None:
                    row[yij] = -1.0
                if yji is not None:
                    row[yji] = -1.0
                model.add_constr(row, "=", 0.0, f"{name}_{tag}")
            if f18:
                for e in range(net.m):
                    k, q = int(net.tail[e]), int(net.head[e])
                    if k in (i, j) or q in (i, j):
                        continue
                    model.add_constr({fcol[2 * e]: 1.0, fcol[2 * e + 1]: 1.0}, "<=", 1.0,
                                     f"vi18_{tag}_{e + 1}")
            if f1920:
                for a in arcs:
                    k = net.arc_head(a)
                    if k in (i, j):
                        continue
                    for (src, dst, lab) in ((i, j, "19"), (j, i, "20")):
                        ysd = vm.y.get((src, dst))
                        if ysd is None:
                            continue
                        row = {ysd: -1.0, fcol[a]: -1.0}
                        ykd = vm.y.get((k, dst))
                        if ykd is not None:
                            row[ykd] = 1.0
                        model.add_constr(row, ">=", -1.0, f"vi{lab}_{tag}_{k + 1}_{a + 1}")

    if spec.has("F21_closest_before"):
        _closest_rows(model, vm, report.d, report.d, report.v_hat, n, "vi21")
    if spec.has("F22_closest_delta"):
        _closest_rows(model, vm, report.lb_upgraded, report.d, report.v_hat, n, "vi22")

    obj = {vm.x[i]: float(inst.weights[i]) for i in range(n)}
    for (i, _j), col in vm.y.items():
        obj[col] = float(inst.weights[i])
    model.set_objective(obj, "max")
    return model, vm


def _closest_rows(model, vm, dist_k, d, v_hat, n, label):
    """``x_j <= sum_{k: dist_k(i,k) <= d(i,j)} y_ik + x_i`` for ``j`` in ``V^_i``."""
    for i in range(n):
        for j in v_hat[i]:
            j = int(j)
            row = {vm.x[j]: 1.0, vm.x[i]: -1.0}
            for k in range(n):
                if k != i and (i, k) in vm.y and dist_k[i, k] <= d[i, j] + DIST_TOL:
                    row[vm.y[i, k]] = row.get(vm.y[i, k], 0.0) - 1.0
            model.add_constr(row, "<=", 0.0, f"{label}_{i + 1}_{j + 1}")


def _count_block(model, n, arcs, i, j, net, f18, chain_dirs):
    """Row bookkeeping of one flow block for size-only builds."""
    alpha_rows = 1 + 2 * len(arcs)
    rows = alpha_rows + (n - 2) + 2
    if f18:
        rows += sum(1 for e in range(net.m)
                    if int(net.tail[e]) not in (i, j) and int(net.head[e]) not in (i, j))
    if chain_dirs:
        rows += chain_dirs * sum(1 for a in arcs if net.arc_head(a) not in (i, j))
    for _ in range(rows):
        model.add_constr(None, "<=", 0.0)
