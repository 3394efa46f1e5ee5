"""Brute-force separation references: enumerate every subset."""
import itertools

import numpy as np

from upmclp.milp import solve_lp


def subsets(items):
    items = list(items)
    for r in range(len(items) + 1):
        yield from itertools.combinations(items, r)


def cutdi_violation(x, vm, inst, i, s1, s2):
    """``sum_{S1}(d_j - R(1 - z_ij)) + sum_{S2}(l z_ij - delta_e) - d_i``."""
    R = inst.R
    tot = -x[vm.d[i]]
    for j, e in inst.net.neighbors(i):
        z = x[vm.z[i, j]]
        if j in s1:
            tot += x[vm.d[j]] - R * (1 - z)
        if j in s2:
            tot += inst.net.length[e] * z - x[vm.delta[e]]
    return tot


def best_cutdi(x, vm, inst, i, same_set=False):
    nbrs = [j for j, _ in inst.net.neighbors(i)]
    if same_set:
        return max(cutdi_violation(x, vm, inst, i, set(s), set(s)) for s in subsets(nbrs))
    return max(cutdi_violation(x, vm, inst, i, set(a), set(b))
               for a in subsets(nbrs) for b in subsets(nbrs))


def cutsepa_rhs(x, vm, i, j, W):
    val = lambda c: 0.0 if c is None else float(x[c])  # noqa: E731
    tot = 0.0
    for k in range(vm.n):
        if k in W:
            tot += val(vm.x[i]) if k == i else val(vm.y.get((i, k)))
        else:
            tot += val(vm.x[j]) if k == j else val(vm.y.get((j, k)))
    return tot


def best_cutsepa(x, vm, i, j):
    """Largest violation of ``z_ij + z_ji <= rhs(W)`` over every ``W``, both orientations."""
    lhs = x[vm.z[i, j]] + x[vm.z[j, i]]
    best = -np.inf
    for W in subsets(range(vm.n)):
        W = set(W)
        best = max(best, lhs - cutsepa_rhs(x, vm, i, j, W), lhs - cutsepa_rhs(x, vm, j, i, W))
    return best


def probe_points(model, rng, count):
    """The LP optimum plus random points inside the variable bounds."""
    pts = []
    lp = solve_lp(model)
    if lp.x is not None:
        pts.append(np.asarray(lp.x, dtype=float))
    lo = np.where(np.isfinite(model.lb), model.lb, 0.0)
    hi = np.where(np.isfinite(model.ub), model.ub, lo + 5.0)
    for _ in range(count):
        pts.append(rng.uniform(lo, hi))
    return pts
