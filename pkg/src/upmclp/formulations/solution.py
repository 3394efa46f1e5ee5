"""Turn raw solver vectors back into facility sets, reductions and coverage."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..graph import upgraded_distances
from ..instance import Instance
from ..milp import MilpModel, SolveResult
from .base import VariableMap

log = logging.getLogger(__name__)

COVER_TOL = 1e-6
BUDGET_TOL = 1e-6


class SolutionInvariantError(AssertionError):
    """A decoded solution breaks one of its invariants; ``invariant`` names it."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        super().__init__(f"{invariant}: {detail}" if detail else invariant)


@dataclass
class UpMclpSolution:
    facilities: tuple
    delta: np.ndarray
    covered: tuple
    objective: float
    stats: dict = field(default_factory=dict)

    def validate(self, inst: Instance) -> "UpMclpSolution":
        net = inst.net
        if len(set(self.facilities)) != inst.p:
            raise SolutionInvariantError("facility_count",
                                         f"{len(set(self.facilities))} != p={inst.p}")
        d = np.asarray(self.delta, dtype=float)
        if d.shape != (net.m,) or np.any(d < -1e-9) or np.any(d > net.max_reduction + 1e-9):
            raise SolutionInvariantError("delta_bounds", "reduction outside [0, u]")
        spent = float(net.cost @ d)
        if spent > inst.B + BUDGET_TOL:
            raise SolutionInvariantError("budget", f"spent {spent:.9g} > B={inst.B:.9g}")
        dist = upgraded_distances(net, d)[:, list(self.facilities)].min(axis=1)
        for i in self.covered:
            if dist[i] > inst.R + COVER_TOL:
                raise SolutionInvariantError("coverage", f"node {i + 1} at {dist[i]:.9g} > R")
        val = float(inst.weights[list(self.covered)].sum())
        if abs(val - self.objective) > 1e-6:
            raise SolutionInvariantError("objective", f"{self.objective} != covered weight {val}")
        return self


def decode(inst: Instance, facilities, delta) -> UpMclpSolution:
    """Solution for given facilities and reductions, coverage recomputed."""
    net = inst.net
    delta = np.clip(np.asarray(delta, dtype=float), 0.0, net.max_reduction)
    fac = tuple(sorted(int(j) for j in facilities))
    dist = upgraded_distances(net, delta)[:, list(fac)].min(axis=1)
    covered = tuple(int(i) for i in np.flatnonzero(dist <= inst.R + COVER_TOL))
    obj = float(inst.weights[list(covered)].sum())
    return UpMclpSolution(fac, delta, covered, obj)


def extract_solution(inst: Instance, vm: VariableMap, result: SolveResult) -> UpMclpSolution:
    if result.x is None:
        raise ValueError(f"no variable values to extract (status {result.status})")
    x = np.asarray(result.x, dtype=float)
    xs = x[vm.x]
    fac = np.flatnonzero(xs >= 0.5)
    if len(fac) != inst.p:
        # fractional x: fall back on the p largest values
        fac = np.sort(np.argsort(-xs, kind="stable")[:inst.p])
        log.info("x not integral after rounding, using the %d largest values", inst.p)
    raw = x[vm.delta]
    if np.any(raw < -1e-6) or np.any(raw > inst.net.max_reduction + 1e-6):
        raise SolutionInvariantError("delta_bounds", "solver returned reduction outside [0, u]")
    sol = decode(inst, fac, raw)
    sol.stats = {"status": str(result.status.value), "solver_objective": result.objective,
                 "bound": result.bound, "nodes": result.node_count,
                 "time": result.wall_time, "cuts": dict(result.cut_counts)}
    if result.objective is not None and abs(result.objective - sol.objective) > 1e-6:
        log.warning("solver objective %.9g differs from recomputed coverage %.9g",
                    result.objective, sol.objective)
    return sol.validate(inst)


def _counts(model):
    return {"c": model.n_constraints, "v": model.n_vars, "bv": model.n_binvars}


def model_size_report(model_raw: MilpModel, model_pre: MilpModel) -> dict:
    """Percent reduction in rows, columns and binary columns."""
    raw, pre = _counts(model_raw), _counts(model_pre)
    out = {}
    for key in ("c", "v", "bv"):
        if raw[key] == 0:
            raise ValueError(f"raw model has zero {key} count")
        out[f"R_{key}%"] = (raw[key] - pre[key]) / raw[key] * 100.0
    return out
