"""Undirected networks with upgradable edges and all-pairs shortest distances.

Nodes are 0-based internally. Every edge ``e = [k, q]`` induces two arcs:
arc ``2e`` runs ``k -> q`` and arc ``2e + 1`` runs ``q -> k``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DIST_TOL = 1e-9


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Network:
    """Undirected network; edge ``e`` has length, max reduction and unit cost."""

    n: int
    tail: np.ndarray
    head: np.ndarray
    length: np.ndarray
    max_reduction: np.ndarray
    cost: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a network needs at least one node")
        m = len(self.tail)
        for name in ("head", "length", "max_reduction", "cost"):
            if len(getattr(self, name)) != m:
                raise ValueError(f"edge array {name!r} has the wrong length")
        seen = set()
        for e in range(m):
            k, q = int(self.tail[e]), int(self.head[e])
            if not (0 <= k < self.n and 0 <= q < self.n):
                raise ValueError(f"edge {e}: endpoint out of range [0, {self.n})")
            if k == q:
                raise ValueError(f"edge {e}: self-loop at node {k}")
            key = (min(k, q), max(k, q))
            if key in seen:
                raise ValueError(f"edge {e}: parallel edge {key}")
            seen.add(key)
            if not self.length[e] > 0:
                raise ValueError(f"edge {e}: length must be positive")
            if not 0 <= self.max_reduction[e] < self.length[e]:
                raise ValueError(f"edge {e}: need 0 <= u < length")
            if self.cost[e] < 0:
                raise ValueError(f"edge {e}: negative unit cost")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[float]]) -> "Network":
        """Build from ``(k, q, length, max_reduction, cost)`` tuples (0-based nodes)."""
        edges = list(edges)
        cols = list(zip(*edges)) if edges else [(), (), (), (), ()]
        return cls(
            n=int(n),
            tail=_frozen(cols[0], np.int64),
            head=_frozen(cols[1], np.int64),
            length=_frozen(cols[2], float),
            max_reduction=_frozen(cols[3], float),
            cost=_frozen(cols[4], float),
        )

    @property
    def m(self) -> int:
        return len(self.tail)

    def edges(self):
        for e in range(self.m):
            yield (int(self.tail[e]), int(self.head[e]), float(self.length[e]),
                   float(self.max_reduction[e]), float(self.cost[e]))

    def with_edges(self, edges) -> "Network":
        return Network.from_edges(self.n, edges)

    # arcs ---------------------------------------------------------------
    @property
    def n_arcs(self) -> int:
        return 2 * self.m

    def arc_tail(self, a: int) -> int:
        e = a >> 1
        return int(self.head[e] if a & 1 else self.tail[e])

    def arc_head(self, a: int) -> int:
        e = a >> 1
        return int(self.tail[e] if a & 1 else self.head[e])

    def edge_index(self, k: int, q: int) -> int:
        """Index of edge ``[k, q]``; raises ``KeyError`` if absent."""
        return self._edge_lookup[(min(k, q), max(k, q))]

    @property
    def _edge_lookup(self) -> dict:
        cached = self.__dict__.get("_lookup")
        if cached is None:
            cached = {(min(k, q), max(k, q)): e
                      for e, (k, q, *_rest) in enumerate(self.edges())}
            object.__setattr__(self, "_lookup", cached)
        return cached

    def neighbors(self, i: int) -> list[tuple[int, int]]:
        """``(neighbor, edge)`` pairs incident to ``i``, in edge order."""
        adj = self.__dict__.get("_adj")
        if adj is None:
            adj = [[] for _ in range(self.n)]
            for e, (k, q, *_rest) in enumerate(self.edges()):
                adj[k].append((q, e))
                adj[q].append((k, e))
            object.__setattr__(self, "_adj", adj)
        return adj[i]

    def degree(self, i: int) -> int:
        return len(self.neighbors(i))


def incident_arcs(net: Network, i: int) -> tuple[list[int], list[int]]:
    """Outgoing and incoming arc lists of node ``i``."""
    if not 0 <= i < net.n:
        raise IndexError(f"node {i} out of range [0, {net.n})")
    out, inc = [], []
    for _j, e in net.neighbors(i):
        if int(net.tail[e]) == i:
            out.append(2 * e)
            inc.append(2 * e + 1)
        else:
            out.append(2 * e + 1)
            inc.append(2 * e)
    return out, inc


def floyd_warshall(n: int, tail, head, weight) -> np.ndarray:
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    tail = np.asarray(tail, dtype=int)
    head = np.asarray(head, dtype=int)
    weight = np.asarray(weight, dtype=float)
    np.minimum.at(d, (tail, head), weight)
    np.minimum.at(d, (head, tail), weight)
    for k in range(n):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    return d


def shortest_distances(net: Network, use_full_upgrade: bool = False) -> np.ndarray:
    """All-pairs distances under ``length`` or ``length - max_reduction``."""
    w = net.length - net.max_reduction if use_full_upgrade else net.length
    return floyd_warshall(net.n, net.tail, net.head, w)


def upgraded_distances(net: Network, delta) -> np.ndarray:
    """All-pairs distances after reducing every edge ``e`` by ``delta[e]``."""
    delta = np.asarray(delta, dtype=float)
    return floyd_warshall(net.n, net.tail, net.head, net.length - delta)
