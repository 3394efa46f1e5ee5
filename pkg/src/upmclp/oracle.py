"""Brute-force reference solvers for tiny instances.

Up-MCLP is solved by enumerating facility sets and, per set, searching over
which nodes to cover through which simple path. A selection of paths is
feasible iff the LP ``min c.delta`` s.t. every chosen path has upgraded
length at most ``R`` stays within the budget. Simple paths suffice: a walk
within the radius contains a simple path that is no longer, since reductions
are shared per edge.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import DIST_TOL, Network, shortest_distances, upgraded_distances
from .instance import Instance
from .milp.simplex import simplex

BUDGET_TOL = 1e-9


class OracleLimitError(RuntimeError):
    def __init__(self, what: str, count: int, limit: int):
        self.count = count
        super().__init__(f"oracle limit exceeded: {what} = {count} > {limit}")


@dataclass(frozen=True)
class OracleLimits:
    max_nodes: int = 7
    max_paths_per_pair: int = 64
    max_cover_subsets: int | None = None     # default 2**n search leaves
    max_facility_sets: int = 200_000

    def __post_init__(self):
        for name in ("max_nodes", "max_paths_per_pair", "max_facility_sets"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_cover_subsets is not None and self.max_cover_subsets <= 0:
            raise ValueError("max_cover_subsets must be positive")


@dataclass
class OracleSolution:
    objective: float
    facilities: tuple
    delta: np.ndarray
    covered: tuple
    stats: dict = field(default_factory=dict)


# plain MCLP ---------------------------------------------------------------

def mclp_by_enumeration(d, weights, p: int, R: float, chunk: int = 20_000):
    """Best facility set by enumeration; first (lexicographically smallest) wins ties."""
    w = np.asarray(weights, dtype=float)
    n = len(w)
    cover = np.asarray(d) <= R + DIST_TOL
    best_val, best_set = -1.0, None
    combos = itertools.combinations(range(n), p)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        block = block.reshape(-1, p)
        cov = cover[:, block].any(axis=2)          # (n, k)
        vals = w @ cov
        k = int(np.argmax(vals))
        if vals[k] > best_val + 1e-9:
            best_val, best_set = float(vals[k]), tuple(int(j) for j in block[k])
    return best_val, best_set


def mclp_by_milp(d, weights, p: int, R: float) -> float:
    """Plain MCLP optimum through the built-in branch-and-bound."""
    from .milp import BINARY, MilpModel, Status, solve_mip

    w = np.asarray(weights, dtype=float)
    n = len(w)
    cover = np.asarray(d) <= R + DIST_TOL
    m = MilpModel("mclp", "max")
    x = [m.add_var(f"x_{j + 1}", kind=BINARY) for j in range(n)]
    z = [m.add_var(f"c_{i + 1}", 0.0, 1.0) for i in range(n)]
    m.add_constr({j: 1.0 for j in x}, "=", p, "facilities")
    for i in range(n):
        row = {z[i]: 1.0}
        for j in np.flatnonzero(cover[i]):
            row[x[j]] = -1.0
        m.add_constr(row, "<=", 0.0, f"cover_{i + 1}")
    m.set_objective({z[i]: w[i] for i in range(n)})
    res = solve_mip(m)
    if res.status != Status.OPTIMAL:
        raise RuntimeError(f"MCLP solve ended with {res.status}")
    return float(res.objective)


def solve_mclp_exact(inst: Instance, limits: OracleLimits | None = None,
                     use_full_upgrade: bool = False):
    """``(value, facilities)`` of the MCLP on ``d(i, j)`` (or on ``l - u``)."""
    limits = limits or OracleLimits()
    count = math.comb(inst.n, inst.p)
    if count > limits.max_facility_sets:
        raise OracleLimitError("facility sets", count, limits.max_facility_sets)
    d = shortest_distances(inst.net, use_full_upgrade)
    return mclp_by_enumeration(d, inst.weights, inst.p, inst.R)


# path enumeration ----------------------------------------------------------

def simple_paths(net: Network, src: int, dst: int, max_base: float = math.inf):
    """Edge tuples of simple ``src -> dst`` paths with ``sum(l - u) <= max_base``."""
    low = net.length - net.max_reduction
    out = []
    visited = [False] * net.n
    visited[src] = True
    stack_edges: list[int] = []

    def dfs(v, acc):
        if v == dst:
            out.append(tuple(stack_edges))
            return
        for nb, e in net.neighbors(v):
            if visited[nb]:
                continue
            nxt = acc + low[e]
            if nxt > max_base + DIST_TOL:
                continue
            visited[nb] = True
            stack_edges.append(e)
            dfs(nb, nxt)
            stack_edges.pop()
            visited[nb] = False

    dfs(src, 0.0)
    return out


def path_reduction_cost(net: Network, path, target: float) -> float:
    """Cheapest cost to bring ``path`` down to length ``target`` (inf if impossible).

    For a single path this is a fractional knapsack: cheapest edges first.
    """
    need = sum(net.length[e] for e in path) - target
    if need <= DIST_TOL:
        return 0.0
    cost = 0.0
    for e in sorted(path, key=lambda e: (net.cost[e], e)):
        take = min(net.max_reduction[e], need)
        cost += take * net.cost[e]
        need -= take
        if need <= DIST_TOL:
            return cost
    return math.inf


def path_best_length(net: Network, path, B: float) -> float:
    """Shortest length of ``path`` after spending at most ``B`` on it."""
    length = float(sum(net.length[e] for e in path))
    budget = B
    for e in sorted(path, key=lambda e: (net.cost[e], e)):
        u, c = net.max_reduction[e], net.cost[e]
        if c == 0:
            length -= u
            continue
        take = min(u, budget / c)
        length -= take
        budget -= take * c
        if budget <= 0:
            break
    return length


def exact_upgraded_distance(net: Network, i: int, j: int, B: float) -> float:
    """``d(i, j, delta^{ij})``: whole budget spent on one simple ``i``-``j`` path."""
    if i == j:
        return 0.0
    best = math.inf
    for path in simple_paths(net, i, j):
        best = min(best, path_best_length(net, path, B))
    return best


def pair_coverable(inst: Instance, i: int, j: int) -> bool:
    """True iff some budget-feasible reduction brings ``i`` within ``R`` of ``j``."""
    return exact_upgraded_distance(inst.net, i, j, inst.B) <= inst.R + DIST_TOL


# full Up-MCLP -------------------------------------------------------------

class _FeasibilityLP:
    """Memoised budget check for a set of paths that must each fit within R."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self.cache: dict = {}
        self.solves = 0

    def __call__(self, paths: frozenset):
        hit = self.cache.get(paths)
        if hit is not None:
            return hit
        net, R = self.inst.net, self.inst.R
        edges = sorted({e for p in paths for e in p})
        rows, rhs = [], []
        for p in paths:
            need = float(sum(net.length[e] for e in p)) - R
            if need > DIST_TOL:
                rows.append([1.0 if e in p else 0.0 for e in edges])
                rhs.append(need)
        delta = np.zeros(net.m)
        if not rows:
            res = (True, delta, 0.0)
        else:
            self.solves += 1
            c = net.cost[edges]
            ub = net.max_reduction[edges]
            lp = simplex(c, np.array(rows), [">="] * len(rows), np.array(rhs),
                         np.zeros(len(edges)), ub)
            if lp.status == "optimal" and lp.objective <= self.inst.B + BUDGET_TOL:
                delta[edges] = lp.x
                res = (True, delta, float(lp.objective))
            elif lp.status in ("optimal", "infeasible"):
                res = (False, None, math.inf)
            else:
                raise RuntimeError(f"feasibility LP failed: {lp.status}")
        self.cache[paths] = res
        return res


def _certificates(inst: Instance, limits: OracleLimits):
    """Per ordered pair, simple paths that some budget-feasible reduction fits in R."""
    net, R, B = inst.net, inst.R, inst.B
    cert = {}
    for i in range(inst.n):
        for j in range(inst.n):
            if i == j:
                continue
            paths = [p for p in simple_paths(net, i, j, R)
                     if path_reduction_cost(net, p, R) <= B + BUDGET_TOL]
            if len(paths) > limits.max_paths_per_pair:
                raise OracleLimitError(f"paths for pair ({i + 1},{j + 1})", len(paths),
                                       limits.max_paths_per_pair)
            cert[i, j] = paths
    return cert


def covered_set(inst: Instance, facilities, delta) -> tuple:
    d = upgraded_distances(inst.net, delta)
    fac = list(facilities)
    near = d[:, fac].min(axis=1)
    return tuple(int(i) for i in np.flatnonzero(near <= inst.R + 1e-6))


def solve_upmclp_exact(inst: Instance, limits: OracleLimits | None = None,
                       facility_sets=None) -> OracleSolution:
    """Exact optimum; ties go to the lexicographically smallest facility set.

    ``facility_sets`` restricts the enumeration (each entry a ``p``-set).
    """
    limits = limits or OracleLimits()
    n = inst.n
    if n > limits.max_nodes:
        raise OracleLimitError("nodes", n, limits.max_nodes)
    if facility_sets is None:
        count = math.comb(n, inst.p)
        if count > limits.max_facility_sets:
            raise OracleLimitError("facility sets", count, limits.max_facility_sets)
        facility_sets = itertools.combinations(range(n), inst.p)
    leaf_cap = limits.max_cover_subsets if limits.max_cover_subsets is not None else 2 ** n

    net, R = inst.net, inst.R
    w = inst.weights
    cert = _certificates(inst, limits)
    feas = _FeasibilityLP(inst)
    free_len = lambda p: float(sum(net.length[e] for e in p)) <= R + DIST_TOL  # noqa: E731

    best = None
    leaves_total = 0
    for X in facility_sets:
        X = tuple(sorted(int(j) for j in X))
        if len(X) != inst.p:
            raise ValueError(f"facility set {X} does not have p={inst.p} nodes")
        base = set(X)
        options = {}
        for i in range(n):
            if i in base:
                continue
            opts = [p for j in X for p in cert[i, j]]
            if any(free_len(p) for p in opts):
                base.add(i)
            elif opts:
                # fewest edges first keeps the LPs small
                options[i] = sorted(set(opts), key=lambda p: (len(p), p))
        base_val = float(w[list(base)].sum())
        cand = sorted(options, key=lambda i: (-w[i], i))
        suffix = np.concatenate([np.cumsum(w[cand][::-1])[::-1], [0.0]]) if cand else [0.0]

        state = {"val": -1.0, "paths": frozenset(), "leaves": 0}
        incumbent = best.objective if best is not None else -1.0

        def dfs(pos, chosen, val):
            nonlocal leaves_total
            if val + suffix[pos] <= max(state["val"], incumbent) + 1e-9:
                return
            if pos == len(cand):
                state["leaves"] += 1
                leaves_total += 1
                if state["leaves"] > leaf_cap:
                    raise OracleLimitError("cover subsets", state["leaves"], leaf_cap)
                if val > state["val"] + 1e-9:
                    state["val"], state["paths"] = val, chosen
                return
            i = cand[pos]
            for p in options[i]:
                nxt = chosen | {p}
                ok, _delta, _cost = feas(nxt)
                if ok:
                    dfs(pos + 1, nxt, val + w[i])
                    if state["val"] >= val + suffix[pos] - 1e-9:
                        return
            dfs(pos + 1, chosen, val)

        dfs(0, frozenset(), base_val)
        if state["val"] < 0:
            continue
        ok, delta, _ = feas(state["paths"])
        cov = covered_set(inst, X, delta)
        val = float(w[list(cov)].sum())
        if best is None or val > best.objective + 1e-9:
            best = OracleSolution(val, X, delta, cov)
    if best is None:
        raise ValueError("no facility set given")
    best.stats = {"lp_solves": feas.solves, "leaves": leaves_total}
    return best
