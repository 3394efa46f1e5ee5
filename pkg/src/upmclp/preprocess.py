"""Pairwise coverability classification and upgraded-distance lower bounds.

Every pair ``i < j`` ends up in one of three classes:

* always covered: ``d(i, j) <= R`` before any upgrade;
* never covered: one of four sufficient conditions proves ``d(i, j, delta) > R``
  for every budget-feasible ``delta``;
* undecided.

``lb[i, j]`` bounds the best upgraded distance of the pair from below. It is
``d(i, j, u)`` unless the relaxed shortest-path-with-upgrades LP was solved,
in which case the larger of the two is kept.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graph import DIST_TOL, Network, incident_arcs, shortest_distances
from .instance import Instance
from .milp import BINARY, CONTINUOUS, MilpModel, Status, solve_lp, solve_mip

log = logging.getLogger(__name__)

ALWAYS, NEVER, UNDECIDED = "AlwaysCovered", "NeverCovered", "Undecided"
CONDITIONS = ("i", "ii", "iii", "iv")


def _gt(a: float, b: float) -> bool:
    return a > b + DIST_TOL


def condition_i(i: int, j: int, d: np.ndarray, net: Network, R: float) -> bool:
    return _gt(d[i, j], R + float(net.max_reduction.sum()))


def condition_ii(i: int, j: int, d_u: np.ndarray, R: float) -> bool:
    return _gt(d_u[i, j], R)


def max_budget_reduction(net: Network, B: float) -> float:
    """Largest total length reduction the budget buys, cheapest edges first."""
    order = sorted(range(net.m), key=lambda e: (net.cost[e], e))
    spent = 0.0
    red = 0.0
    for pos, e in enumerate(order):
        c, u = net.cost[e], net.max_reduction[e]
        if spent + u * c <= B + 1e-12:
            spent += u * c
            red += u
            continue
        # first edge that no longer fits fully; zero-cost edges always fit
        assert c > 0, "zero-cost edge outside the affordable prefix"
        return red + (B - spent) / c
    return red


def condition_iii(i: int, j: int, d: np.ndarray, net: Network, B: float, R: float,
                  reduction: float | None = None) -> bool:
    if reduction is None:
        reduction = max_budget_reduction(net, B)
    return _gt(d[i, j], R + reduction)


def build_dmip(i: int, j: int, net: Network, B: float, relax: bool = True) -> MilpModel:
    """Shortest ``i -> j`` path when the whole budget may be spent on it.

    Variables: ``f`` and ``gam`` per arc, then ``del`` per edge.
    """
    if i == j:
        raise ValueError("DMIP needs two distinct nodes")
    model = MilpModel(f"dmip_{i + 1}_{j + 1}", "min")
    kind = CONTINUOUS if relax else BINARY
    A = net.n_arcs
    f = [model.add_var(f"f_{a}", 0.0, 1.0, kind) for a in range(A)]
    g = [model.add_var(f"gam_{a}", 0.0) for a in range(A)]
    dl = [model.add_var(f"del_{e + 1}", 0.0, float(net.max_reduction[e])) for e in range(net.m)]
    model.add_constr({dl[e]: float(net.cost[e]) for e in range(net.m)}, "<=", B, "budget")
    for k in range(net.n):
        out, inc = incident_arcs(net, k)
        row = {f[a]: 1.0 for a in out}
        for a in inc:
            row[f[a]] = -1.0
        rhs = 1.0 if k == i else -1.0 if k == j else 0.0
        model.add_constr(row, "=", rhs, f"bal_{k + 1}")
    for a in range(A):
        e = a >> 1
        model.add_constr({g[a]: 1.0, f[a]: -float(net.max_reduction[e])}, "<=", 0.0, f"gu_{a}")
        model.add_constr({g[a]: 1.0, dl[e]: -1.0}, "<=", 0.0, f"gd_{a}")
    obj = {f[a]: float(net.length[a >> 1]) for a in range(A)}
    obj.update({g[a]: -1.0 for a in range(A)})
    model.set_objective(obj)
    return model


def build_dmip_lp(i: int, j: int, net: Network, B: float) -> MilpModel:
    return build_dmip(i, j, net, B, relax=True)


def dmip_bound(i: int, j: int, net: Network, B: float, exact: bool = False,
               engine: str = "highs") -> float:
    """Optimal DMIP (or LP relaxation) value; ``inf`` when no path exists."""
    model = build_dmip(i, j, net, B, relax=not exact)
    res = solve_mip(model, engine=engine) if exact else solve_lp(model, engine)
    if res.status == Status.INFEASIBLE:
        return math.inf
    if res.status != Status.OPTIMAL:
        raise RuntimeError(f"DMIP ({i + 1},{j + 1}) ended with {res.status}")
    return float(res.objective)


@dataclass
class PreprocessReport:
    n: int
    status: np.ndarray          # (n, n) object array, symmetric
    reason: np.ndarray          # (n, n) object array: "", "i", "ii", "iii", "iv"
    lb_upgraded: np.ndarray     # (n, n) float, symmetric, zero diagonal
    d: np.ndarray
    d_u: np.ndarray
    v_hat: list = field(default_factory=list)
    elapsed_pre: float = 0.0

    def always(self, i: int, j: int) -> bool:
        return self.status[i, j] == ALWAYS

    def never(self, i: int, j: int) -> bool:
        return self.status[i, j] == NEVER

    def pairs(self):
        for i in range(self.n):
            for j in range(i + 1, self.n):
                yield i, j

    def counts(self) -> dict:
        out = {ALWAYS: 0, NEVER: 0, UNDECIDED: 0}
        for i, j in self.pairs():
            out[self.status[i, j]] += 1
        return out

    def never_by(self, reason: str) -> set:
        return {(i, j) for i, j in self.pairs()
                if self.status[i, j] == NEVER and self.reason[i, j] == reason}

    def to_csv(self, sink=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pair_i", "pair_j", "status", "reason", "lb_upgraded"])
        for i, j in self.pairs():
            w.writerow([i + 1, j + 1, self.status[i, j], self.reason[i, j],
                        f"{self.lb_upgraded[i, j]:.9g}"])
        text = buf.getvalue()
        if sink is not None:
            sink.write(text)
        return text

    @classmethod
    def trivial(cls, inst: Instance) -> "PreprocessReport":
        """Everything undecided; bounds are ``d(i, j, u)``. Used when preprocessing is off."""
        d = shortest_distances(inst.net)
        d_u = shortest_distances(inst.net, use_full_upgrade=True)
        n = inst.n
        status = np.full((n, n), UNDECIDED, dtype=object)
        reason = np.full((n, n), "", dtype=object)
        return cls(n, status, reason, d_u.copy(), d, d_u, _v_hat(d, inst.R))


def _v_hat(d, R):
    n = d.shape[0]
    return [np.array([j for j in range(n) if j != i and d[i, j] <= R + DIST_TOL], dtype=int)
            for i in range(n)]


def classify_pairs(inst: Instance, conditions=CONDITIONS, engine: str = "highs",
                   exact_dmip: bool = False, jobs: int = 1) -> PreprocessReport:
    """Classify every pair, cheapest test first.

    ``conditions`` toggles the four never-covered tests.
    """
    t0 = time.perf_counter()
    conditions = tuple(conditions)
    bad = set(conditions) - set(CONDITIONS)
    if bad:
        raise ValueError(f"unknown conditions {sorted(bad)}")
    net, R, B = inst.net, inst.R, inst.B
    n = inst.n
    d = shortest_distances(net)
    d_u = shortest_distances(net, use_full_upgrade=True)
    red = max_budget_reduction(net, B)
    status = np.full((n, n), UNDECIDED, dtype=object)
    reason = np.full((n, n), "", dtype=object)
    lb = d_u.copy()
    np.fill_diagonal(status, ALWAYS)

    lp_pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            if d[i, j] <= R + DIST_TOL:
                st, why = ALWAYS, ""
            elif "i" in conditions and condition_i(i, j, d, net, R):
                st, why = NEVER, "i"
            elif "ii" in conditions and condition_ii(i, j, d_u, R):
                st, why = NEVER, "ii"
            elif "iii" in conditions and condition_iii(i, j, d, net, B, R, red):
                st, why = NEVER, "iii"
            else:
                st, why = UNDECIDED, ""
                if "iv" in conditions:
                    lp_pairs.append((i, j))
            status[i, j] = status[j, i] = st
            reason[i, j] = reason[j, i] = why

    def bound(pair):
        i, j = pair
        try:
            return dmip_bound(i, j, net, B, exact=exact_dmip, engine=engine)
        except RuntimeError as exc:
            log.warning("pair (%d,%d) left undecided: %s", i + 1, j + 1, exc)
            return None

    if jobs > 1 and len(lp_pairs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(bound, lp_pairs))
    else:
        values = [bound(pq) for pq in lp_pairs]
    for (i, j), val in zip(lp_pairs, values):
        if val is None:
            continue
        b = max(d_u[i, j], val)
        lb[i, j] = lb[j, i] = b
        if _gt(b, R):
            status[i, j] = status[j, i] = NEVER
            reason[i, j] = reason[j, i] = "iv"
    return PreprocessReport(n, status, reason, lb, d, d_u, _v_hat(d, R),
                            time.perf_counter() - t0)
