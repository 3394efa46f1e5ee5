"""Lift a (facilities, delta) pair to a full column vector of a built model.

Used to check that valid inequalities and cuts never cut off integral
optima. Coverage follows a shortest-path forest rooted at the facilities
under lengths ``l - delta``; reductions off the forest are dropped, which
keeps every covered node covered and never raises the spend.
"""
from __future__ import annotations

import heapq

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from ..graph import shortest_distances
from ..instance import Instance
from ..milp import MilpModel
from .base import FLOWCOV, PATHCOV, VariableMap

TOL = 1e-9


def forest(inst: Instance, facilities, delta):
    """``(dist, parent, parent_edge, root)`` of the multi-source shortest-path
    forest, restricted to nodes within ``R``. Ties break on node index."""
    net, n, R = inst.net, inst.n, inst.R
    w = net.length - np.asarray(delta, dtype=float)
    dist = np.full(n, np.inf)
    parent = np.full(n, -1)
    pedge = np.full(n, -1)
    root = np.full(n, -1)
    heap = []
    for f in sorted(facilities):
        dist[f] = 0.0
        root[f] = f
        heap.append((0.0, f))
    heapq.heapify(heap)
    done = np.zeros(n, dtype=bool)
    while heap:
        dv, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        for nb, e in sorted(net.neighbors(v)):
            nd = dv + w[e]
            if nd > R + TOL or done[nb]:
                continue
            if nd < dist[nb] - 1e-12:
                dist[nb], parent[nb], pedge[nb], root[nb] = nd, v, e, root[v]
                heapq.heappush(heap, (nd, nb))
    return dist, parent, pedge, root


def _tree_path(parent, pedge, i):
    """Arcs from ``i`` up to its root, as (tail, head, edge)."""
    out = []
    while parent[i] >= 0:
        out.append((i, int(parent[i]), int(pedge[i])))
        i = int(parent[i])
    return out


def _shortest_arcs(inst, src, dst):
    """Arcs of an unreduced shortest ``src -> dst`` path."""
    net = inst.net
    mat = csr_matrix((np.concatenate([net.length, net.length]),
                      (np.concatenate([net.tail, net.head]),
                       np.concatenate([net.head, net.tail]))), shape=(inst.n, inst.n))
    _, pred = dijkstra(mat, indices=dst, return_predecessors=True)
    out = []
    v = src
    while v != dst:
        nxt = int(pred[v])
        out.append((v, nxt, net.edge_index(v, nxt)))
        v = nxt
    return out


def lift_solution(model: MilpModel, vm: VariableMap, inst: Instance, facilities, delta,
                  closest_before: bool = False) -> np.ndarray:
    """Column vector for ``model`` encoding ``facilities`` and ``delta``.

    ``closest_before`` assigns each node to its nearest facility under the
    unreduced lengths when one lies within ``R`` (needed by the closest
    assignment rows of FlowCov).
    """
    net, n, R = inst.net, inst.n, inst.R
    delta = np.clip(np.asarray(delta, dtype=float), 0.0, net.max_reduction)
    fac = sorted(int(j) for j in facilities)
    dist, parent, pedge, root = forest(inst, fac, delta)
    on_tree = np.zeros(net.m, dtype=bool)
    on_tree[pedge[pedge >= 0]] = True
    dkeep = np.where(on_tree, delta, 0.0)

    x = np.zeros(model.n_vars)
    for j in fac:
        x[vm.x[j]] = 1.0
    for e in range(net.m):
        x[vm.delta[e]] = dkeep[e]
    for (i, j), col in vm.z.items():
        if parent[i] == j:
            x[col] = 1.0
    for i, col in enumerate(vm.d):
        x[col] = dist[i] if np.isfinite(dist[i]) else 0.0

    assign = {}       # i -> (facility, arcs from i to it)
    d0 = None
    if closest_before and vm.kind == FLOWCOV:
        d0 = shortest_distances(net)
    for i in range(n):
        if i in fac:
            continue
        if d0 is not None:
            k = min(fac, key=lambda f: (d0[i, f], f))
            if d0[i, k] <= R + TOL:
                assign[i] = (k, _shortest_arcs(inst, i, k))
                continue
        if root[i] >= 0:
            assign[i] = (int(root[i]), _tree_path(parent, pedge, i))

    if vm.kind in (FLOWCOV, PATHCOV):
        for i, (k, _arcs) in assign.items():
            col = vm.y.get((i, k))
            if col is None:
                raise ValueError(f"pair ({i + 1},{k + 1}) eliminated but covered")
            x[col] = 1.0
    if vm.kind == FLOWCOV:
        for (i, j), (arcs, fcols, acols) in vm.flow.items():
            if assign.get(i, (None,))[0] == j:
                path = assign[i][1]
            elif assign.get(j, (None,))[0] == i:
                path = [(b, a, e) for (a, b, e) in reversed(assign[j][1])]
            else:
                continue
            pos = {a: t for t, a in enumerate(arcs)}
            for (a, b, e) in path:
                arc = 2 * e if int(net.tail[e]) == a else 2 * e + 1
                t = pos[arc]
                x[fcols[t]] = 1.0
                if vm.flow_variant == "alpha":
                    x[acols[t]] = float(net.length[e]) - dkeep[e]
                else:
                    x[acols[t]] = dkeep[e]
    return x
