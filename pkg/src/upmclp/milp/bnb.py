"""Best-bound branch-and-bound with a user-cut hook."""
from __future__ import annotations

import heapq
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np

from .lp import LPData
from .model import TOL, Cut, MilpModel, SolveResult, Status

log = logging.getLogger(__name__)


class CutGenerator(Protocol):
    """Called with a fractional node solution; returns rows valid for all
    integer-feasible points. ``name`` keys the per-generator cut counts."""

    name: str

    def __call__(self, x: np.ndarray) -> list[Cut]: ...


@dataclass
class Limits:
    time: float | None = None
    nodes: int | None = None
    gap: float = TOL.mip_gap
    cut_rounds: int = 3
    cuts_per_round: int = 50


def _gen_name(gen) -> str:
    return getattr(gen, "name", type(gen).__name__)


def solve_mip(model: MilpModel, cuts: Sequence[CutGenerator | Callable] = (),
              limits: Limits | None = None, engine: str = "highs") -> SolveResult:
    limits = limits or Limits()
    t0 = time.perf_counter()
    data = LPData(model)
    mask = model.integer_mask
    int_idx = np.flatnonzero(mask)
    counts = {_gen_name(g): 0 for g in cuts}

    incumbent_x = None
    incumbent = math.inf       # min-form
    nodes = 0
    seq = 0
    heap: list = []
    root_lb, root_ub = data.lb.copy(), data.ub.copy()
    heapq.heappush(heap, (-math.inf, seq, root_lb, root_ub))
    hit_limit = False
    best_bound = -math.inf

    def gap_closed(bound):
        if incumbent_x is None:
            return False
        return (incumbent - bound) <= limits.gap * max(abs(incumbent), 1e-10)

    while heap:
        best_bound = heap[0][0]
        if gap_closed(best_bound):
            break
        if limits.nodes is not None and nodes >= limits.nodes:
            hit_limit = True
            break
        if limits.time is not None and time.perf_counter() - t0 > limits.time:
            hit_limit = True
            break
        parent_bound, _, lb, ub = heapq.heappop(heap)
        if incumbent_x is not None and parent_bound >= incumbent - limits.gap * max(abs(incumbent), 1e-10):
            continue
        nodes += 1
        status, x, fun, _ = data.solve(lb, ub, engine)
        if status == Status.UNBOUNDED and nodes == 1:
            return SolveResult(Status.UNBOUNDED, node_count=nodes,
                               wall_time=time.perf_counter() - t0, cut_counts=counts)
        if status == Status.NUMERICAL:
            log.warning("LP failure at node %d; node dropped", nodes)
            continue
        if status != Status.OPTIMAL:
            continue

        for _round in range(limits.cut_rounds):
            if not cuts or _integral(x, int_idx):
                break
            added = []
            for gen in cuts:
                for cut in gen(x):
                    if len(added) >= limits.cuts_per_round:
                        break
                    if cut.violation(x) > TOL.cut_violation:
                        added.append(cut)
                        counts[_gen_name(gen)] += 1
            if not added:
                break
            data.add_rows((c.coefs, c.sense, c.rhs) for c in added)
            status, x, fun, _ = data.solve(lb, ub, engine)
            if status != Status.OPTIMAL:
                break
        if status != Status.OPTIMAL:
            continue

        if incumbent_x is not None and fun >= incumbent - limits.gap * max(abs(incumbent), 1e-10):
            continue
        if _integral(x, int_idx):
            xr = x.copy()
            xr[int_idx] = np.round(xr[int_idx])
            val = float(data.c @ xr)
            if val < incumbent:
                incumbent, incumbent_x = val, xr
            continue
        j = _branch_var(x, int_idx)
        v = x[j]
        seq += 1
        down_ub = ub.copy()
        down_ub[j] = math.floor(v)
        heapq.heappush(heap, (fun, seq, lb, down_ub))
        seq += 1
        up_lb = lb.copy()
        up_lb[j] = math.ceil(v)
        heapq.heappush(heap, (fun, seq, up_lb, ub))

    if not heap and not hit_limit:
        best_bound = incumbent
    elapsed = time.perf_counter() - t0
    if incumbent_x is None:
        status = Status.NO_SOLUTION if hit_limit else Status.INFEASIBLE
        bound = None if not hit_limit else data.sign * best_bound + data.constant
        return SolveResult(status, bound=bound, node_count=nodes, wall_time=elapsed,
                           cut_counts=counts)
    status = Status.FEASIBLE if hit_limit else Status.OPTIMAL
    bound = min(best_bound, incumbent)
    return SolveResult(
        status=status,
        objective=data.sign * incumbent + data.constant,
        bound=data.sign * bound + data.constant,
        x=incumbent_x,
        node_count=nodes,
        wall_time=elapsed,
        cut_counts=counts,
    )


def _integral(x, int_idx) -> bool:
    if int_idx.size == 0:
        return True
    xi = x[int_idx]
    return bool(np.all(np.abs(xi - np.round(xi)) <= TOL.integrality))


def _branch_var(x, int_idx) -> int:
    """Most fractional integer variable; ties go to the lowest index."""
    xi = x[int_idx]
    frac = np.abs(xi - np.floor(xi) - 0.5)
    frac[np.abs(xi - np.round(xi)) <= TOL.integrality] = np.inf
    return int(int_idx[int(np.argmin(frac))])
