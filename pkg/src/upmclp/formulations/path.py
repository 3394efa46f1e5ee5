"""Successor-forest formulations: Path (z, d) and PathCov (z, d plus assignment y).

``z[i, j] = 1`` says ``j`` is the next node on ``i``'s way to its facility;
``d[i]`` is the upgraded distance from ``i`` to that facility.
"""
from __future__ import annotations

import itertools
import logging

from ..graph import DIST_TOL, shortest_distances
from ..instance import Instance
from ..milp import BINARY, CONTINUOUS, MilpModel
from ..preprocess import PreprocessReport, classify_pairs
from .base import PATH, PATHCOV, FormulationSpec, VariableMap, check_normalized
from .flow_cov import _closest_rows

log = logging.getLogger(__name__)


def triangles(net) -> list[tuple[int, int, int]]:
    """Node triples ``i < j < k`` whose three edges all exist."""
    adj = [set() for _ in range(net.n)]
    for e in range(net.m):
        a, b = int(net.tail[e]), int(net.head[e])
        adj[a].add(b)
        adj[b].add(a)
    out = []
    for i in range(net.n):
        for j in sorted(q for q in adj[i] if q > i):
            for k in sorted(q for q in adj[i] & adj[j] if q > j):
                out.append((i, j, k))
    return out


def triangle_row(vm: VariableMap, tri) -> dict:
    i, j, k = tri
    cols = {}
    for a, b in itertools.permutations((i, j, k), 2):
        cols[vm.z[a, b]] = 1.0
    return cols


def _path_core(inst: Instance, spec: FormulationSpec, model: MilpModel, kind: str):
    net, n, R = inst.net, inst.n, inst.R
    vm = VariableMap(kind, n, net.m)
    xkind = CONTINUOUS if spec.relax_x else BINARY
    vm.x = [model.add_var(f"x_{j + 1}", 0.0, 1.0, xkind) for j in range(n)]
    nbrs = [net.neighbors(i) for i in range(n)]
    for i in range(n):
        for j, _e in nbrs[i]:
            vm.z[i, j] = model.add_var(f"z_{i + 1}_{j + 1}", 0.0, 1.0, BINARY)
    vm.d = [model.add_var(f"d_{i + 1}", 0.0, R) for i in range(n)]
    vm.delta = [model.add_var(f"del_{e + 1}", 0.0, float(net.max_reduction[e]))
                for e in range(net.m)]

    model.add_constr({c: 1.0 for c in vm.x}, "=", inst.p, "facilities")
    model.add_constr({vm.delta[e]: float(net.cost[e]) for e in range(net.m)}, "<=", inst.B,
                     "budget")
    for i in range(n):
        row = {vm.x[i]: 1.0}
        row.update({vm.z[i, j]: 1.0 for j, _ in nbrs[i]})
        model.add_constr(row, "<=", 1.0, f"assign_{i + 1}")
    for i in range(n):
        for k, _ in nbrs[i]:
            # a node pointed at by k must itself lead onwards (not back to k)
            row = {vm.z[i, j]: 1.0 for j, _ in nbrs[i] if j != k}
            row[vm.x[i]] = 1.0
            row[vm.z[k, i]] = -1.0
            model.add_constr(row, ">=", 0.0, f"chain_{k + 1}_{i + 1}")
    for i in range(n):
        row = {vm.d[i]: 1.0}
        for j, _ in nbrs[i]:
            row[vm.z[i, j]] = -R
        model.add_constr(row, "<=", 0.0, f"dmax_{i + 1}")
    reinforce = spec.has("F30_mtz_reinforced")
    for i in range(n):
        for j, e in nbrs[i]:
            ell = float(net.length[e])
            row = {vm.d[i]: 1.0, vm.d[j]: -1.0, vm.z[i, j]: -(ell + R), vm.delta[e]: 1.0}
            if reinforce and R - ell > 0:
                row[vm.z[j, i]] = -(R - ell)
            model.add_constr(row, ">=", -R, f"mtz_{i + 1}_{j + 1}")
    for e in range(net.m):
        a, b = int(net.tail[e]), int(net.head[e])
        u = float(net.max_reduction[e])
        model.add_constr({vm.delta[e]: 1.0, vm.z[a, b]: -u, vm.z[b, a]: -u}, "<=", 0.0,
                         f"upg_{e + 1}")

    if spec.has("F29_lb_dz"):
        for i in range(n):
            row = {vm.d[i]: 1.0}
            for j, e in nbrs[i]:
                row[vm.z[i, j]] = -float(net.length[e] - net.max_reduction[e])
            model.add_constr(row, ">=", 0.0, f"vi29_{i + 1}")
    if spec.has("F31_closest_path"):
        d = shortest_distances(net)
        for i in range(n):
            for j in range(n):
                if j == i or d[i, j] > R + DIST_TOL:
                    continue
                row = {vm.x[j]: 1.0, vm.x[i]: -1.0}
                for k, e in nbrs[i]:
                    if net.length[e] - net.max_reduction[e] <= d[i, j] + DIST_TOL:
                        row[vm.z[i, k]] = row.get(vm.z[i, k], 0.0) - 1.0
                model.add_constr(row, "<=", 0.0, f"vi31_{i + 1}_{j + 1}")
    if spec.has("F34_triangle_cycle"):
        tris = triangles(net)
        if len(tris) > spec.triangle_cap:
            log.warning("%d triangles, keeping the first %d as static rows",
                        len(tris), spec.triangle_cap)
            tris = tris[:spec.triangle_cap]
        for tri in tris:
            model.add_constr(triangle_row(vm, tri), "<=", 2.0,
                             "vi34_" + "_".join(str(t + 1) for t in tri))
    return vm


def _z_objective(inst, vm, model):
    obj = {vm.x[i]: float(inst.weights[i]) for i in range(inst.n)}
    for (i, _j), col in vm.z.items():
        obj[col] = float(inst.weights[i])
    model.set_objective(obj, "max")


def build_path(inst: Instance, spec: FormulationSpec | None = None,
               model: MilpModel | None = None):
    """Return ``(model, VariableMap)`` for the Path formulation."""
    spec = spec or FormulationSpec(kind=PATH)
    if spec.kind != PATH:
        raise ValueError("spec.kind must be Path")
    check_normalized(inst)
    model = model if model is not None else MilpModel("path", "max")
    vm = _path_core(inst, spec, model, PATH)
    _z_objective(inst, vm, model)
    return model, vm


def build_path_cov(inst: Instance, report: PreprocessReport | None = None,
                   spec: FormulationSpec | None = None, model: MilpModel | None = None):
    """Return ``(model, VariableMap)`` for PathCov. ``y`` is dropped for never-covered pairs."""
    spec = spec or FormulationSpec(kind=PATHCOV)
    if spec.kind != PATHCOV:
        raise ValueError("spec.kind must be PathCov")
    check_normalized(inst)
    pre = spec.use_preprocess
    if report is None:
        report = classify_pairs(inst) if pre else PreprocessReport.trivial(inst)
    net, n = inst.net, inst.n
    model = model if model is not None else MilpModel("pathcov", "max")
    vm = _path_core(inst, spec, model, PATHCOV)

    ykind = CONTINUOUS if spec.relax_y else BINARY
    for i in range(n):
        for j in range(n):
            if i != j and not (pre and report.never(i, j)):
                vm.y[i, j] = model.add_var(f"y_{i + 1}_{j + 1}", 0.0, 1.0, ykind)
    for (i, j), col in vm.y.items():
        model.add_constr({col: 1.0, vm.x[j]: -1.0}, "<=", 0.0, f"open_{i + 1}_{j + 1}")
    nbrs = [net.neighbors(i) for i in range(n)]
    for i in range(n):
        row = {vm.y[i, k]: 1.0 for k in range(n) if (i, k) in vm.y}
        for j, _ in nbrs[i]:
            row[vm.z[i, j]] = -1.0
        model.add_constr(row, "=", 0.0, f"yz_{i + 1}")
    for i in range(n):
        for j, _ in nbrs[i]:
            link = {vm.z[i, j]: -1.0, vm.z[j, i]: -1.0}
            # linked nodes share their facility
            for k in range(n):
                if k in (i, j) or (j, k) not in vm.y:
                    continue
                row = dict(link)
                row[vm.y[j, k]] = -1.0
                if (i, k) in vm.y:
                    row[vm.y[i, k]] = 1.0
                model.add_constr(row, ">=", -1.0, f"same_{i + 1}_{j + 1}_{k + 1}")
            row = dict(link)
            row[vm.x[j]] = -1.0
            if (i, j) in vm.y:
                row[vm.y[i, j]] = 1.0
            model.add_constr(row, ">=", -1.0, f"host_{i + 1}_{j + 1}")

    if spec.has("F40_lb_dy"):
        for i in range(n):
            row = {vm.d[i]: 1.0}
            for k in range(n):
                if (i, k) in vm.y:
                    # pairs beyond reach (lb > R) only need some coefficient above R
                    lb = min(float(report.lb_upgraded[i, k]), 2.0 * inst.R + 1.0)
                    row[vm.y[i, k]] = -lb
            model.add_constr(row, ">=", 0.0, f"vi40_{i + 1}")
    if spec.has("F22_closest_delta"):
        _closest_rows(model, vm, report.lb_upgraded, report.d, report.v_hat, n, "vi22")
    _z_objective(inst, vm, model)
    return model, vm
