"""Cut separation for the forest formulations.

All routines take a node LP solution ``x`` (full column vector) and return
:class:`~upmclp.milp.Cut` rows violated by more than ``min_violation``.
"""
from __future__ import annotations

from ..instance import Instance
from ..milp import TOL, Cut
from .base import PATHCOV, VariableMap
from .path import triangle_row, triangles


def _cutdi_terms(x, vm: VariableMap, inst: Instance, i: int):
    """Per neighbour ``j``: row pieces and current values of
    ``d_j - R(1 - z_ij)`` and ``l z_ij - delta_e``."""
    net, R = inst.net, inst.R
    out = []
    for j, e in net.neighbors(i):
        zc, dc, ec = vm.z[i, j], vm.d[j], vm.delta[e]
        ell = float(net.length[e])
        a_val = x[dc] - R * (1.0 - x[zc])
        b_val = ell * x[zc] - x[ec]
        out.append((j, zc, dc, ec, ell, a_val, b_val))
    return out


def cutdi_row(vm, inst, i, s1, s2) -> Cut:
    """``d_i >= sum_{S1} (d_j - R(1 - z_ij)) + sum_{S2} (l z_ij - delta)`` as a Cut."""
    net, R = inst.net, inst.R
    coefs = {vm.d[i]: 1.0}
    rhs = 0.0
    for j, e in net.neighbors(i):
        zc = vm.z[i, j]
        if j in s1:
            coefs[vm.d[j]] = coefs.get(vm.d[j], 0.0) - 1.0
            coefs[zc] = coefs.get(zc, 0.0) - R
            rhs -= R
        if j in s2:
            coefs[zc] = coefs.get(zc, 0.0) - float(net.length[e])
            coefs[vm.delta[e]] = coefs.get(vm.delta[e], 0.0) + 1.0
    return Cut(coefs, ">=", rhs)


def separate_cutdi(x, vm: VariableMap, inst: Instance, variants=("35", "36"),
                   min_violation: float = TOL.cut_violation) -> list[Cut]:
    """Most violated member of the ``S1, S2`` family per node.

    ``35`` picks ``S1`` and ``S2`` independently (the exact maximiser);
    ``36`` uses one set ``S`` for both parts.
    """
    cuts = []
    for i in range(inst.n):
        terms = _cutdi_terms(x, vm, inst, i)
        if "35" in variants:
            s1 = {t[0] for t in terms if t[5] > 0}
            s2 = {t[0] for t in terms if t[6] > 0}
            if s1 or s2:
                cut = cutdi_row(vm, inst, i, s1, s2)
                cut.name = f"cutdi35_{i + 1}"
                if cut.violation(x) > min_violation:
                    cuts.append(cut)
        if "36" in variants:
            s = {t[0] for t in terms if t[5] + t[6] > 0}
            if s:
                cut = cutdi_row(vm, inst, i, s, s)
                cut.name = f"cutdi36_{i + 1}"
                if cut.violation(x) > min_violation:
                    cuts.append(cut)
    return cuts


def cutsepa_row(vm: VariableMap, i: int, j: int, W) -> Cut:
    """``z_ij + z_ji <= sum_{k in W} a_k + sum_{k not in W} b_k`` where
    ``a_k = y_ik`` (``x_i`` for ``k = i``) and ``b_k = y_jk`` (``x_j`` for ``k = j``)."""
    coefs = {vm.z[i, j]: 1.0, vm.z[j, i]: 1.0}
    for k in range(vm.n):
        if k in W:
            col = vm.x[i] if k == i else vm.y.get((i, k))
        else:
            col = vm.x[j] if k == j else vm.y.get((j, k))
        if col is not None:
            coefs[col] = coefs.get(col, 0.0) - 1.0
    return Cut(coefs, "<=", 0.0)


def cutsepa_set(x, vm: VariableMap, i: int, j: int) -> set:
    """``W`` minimising the right-hand side at ``x``: compare the two candidate
    terms node by node."""
    xv = lambda col: 0.0 if col is None else float(x[col])  # noqa: E731
    W = set()
    for k in range(vm.n):
        a = xv(vm.x[i]) if k == i else xv(vm.y.get((i, k)))
        b = xv(vm.x[j]) if k == j else xv(vm.y.get((j, k)))
        if a <= b:
            W.add(k)
    return W


def separate_cutsepa(x, vm: VariableMap, inst: Instance,
                     min_violation: float = TOL.cut_violation) -> list[Cut]:
    if vm.kind != PATHCOV:
        raise ValueError("cutsepa needs assignment variables (PathCov)")
    net = inst.net
    cuts = []
    # the (j, i) orientation with W is the (i, j) one with V \ W, so one side suffices
    for e in range(net.m):
        i, j = int(net.tail[e]), int(net.head[e])
        W = cutsepa_set(x, vm, i, j)
        cut = cutsepa_row(vm, i, j, W)
        cut.name = f"cutsepa_{e + 1}"
        if cut.violation(x) > min_violation:
            cuts.append(cut)
    return cuts


def separate_triangles(x, vm: VariableMap, inst: Instance, tris=None,
                       min_violation: float = TOL.cut_violation) -> list[Cut]:
    tris = triangles(inst.net) if tris is None else tris
    cuts = []
    for tri in tris:
        cut = Cut(triangle_row(vm, tri), "<=", 2.0, "tri_" + "_".join(str(t + 1) for t in tri))
        if cut.violation(x) > min_violation:
            cuts.append(cut)
    return cuts


class _Generator:
    name = "cuts"

    def __init__(self, vm: VariableMap, inst: Instance):
        self.vm, self.inst = vm, inst


class CutdiGenerator(_Generator):
    name = "SEP_35_36_cutdi"

    def __call__(self, x):
        return separate_cutdi(x, self.vm, self.inst)


class CutsepaGenerator(_Generator):
    name = "SEP_42_cutsepa"

    def __call__(self, x):
        return separate_cutsepa(x, self.vm, self.inst)


class TriangleGenerator(_Generator):
    name = "F34_as_cuts"

    def __init__(self, vm, inst):
        super().__init__(vm, inst)
        self.tris = triangles(inst.net)

    def __call__(self, x):
        cuts = separate_triangles(x, self.vm, self.inst, self.tris)
        cuts.sort(key=lambda c: -c.violation(x))
        return cuts


GENERATORS = {cls.name: cls for cls in (CutdiGenerator, CutsepaGenerator, TriangleGenerator)}


def make_generators(names, vm: VariableMap, inst: Instance) -> list:
    return [GENERATORS[n](vm, inst) for n in sorted(names)]

