"""Exact constrained shortest distances by bicriteria label-correcting search.

This is the ground truth the labeling index and the encrypted pipeline are
checked against. Worst case is exponential in the frontier size, which is
fine for graphs of a few thousand vertices with small integer weights.
"""
from __future__ import annotations

import heapq
import math
from typing import NamedTuple

from .graph import Graph

INT64_MAX = 2**63 - 1


class ParetoLabel(NamedTuple):
    dist: int
    cost: int


class CsdQuery(NamedTuple):
    s: int
    t: int
    theta: int


def dominates(a, b) -> bool:
    """Weak Pareto dominance with at least one strict coordinate."""
    return a[0] <= b[0] and a[1] <= b[1] and (a[0] < b[0] or a[1] < b[1])


class SearchResult:
    """Per-vertex Pareto frontiers from one source, with parent pointers.

    ``frontier[v]`` lists labels in ascending distance (hence descending
    cost). ``parent[v][i]`` is ``(u, j)``: the i-th label at v extends the
    j-th label at u, or ``None`` for the source's zero label.
    """

    def __init__(self, source: int, reverse: bool, frontier, parent):
        self.source = source
        self.reverse = reverse
        self.frontier: list[list[ParetoLabel]] = frontier
        self.parent = parent

    def path(self, v: int, i: int) -> list[int]:
        """Vertex sequence realising ``frontier[v][i]`` in the graph's arc direction."""
        seq = [v]
        while self.parent[v][i] is not None:
            v, i = self.parent[v][i]
            seq.append(v)
        if not self.reverse:
            seq.reverse()
        return seq


def pareto_search(g: Graph, source: int, reverse: bool = False, cap: float = math.inf,
                  target: int | None = None) -> SearchResult:
    """Label-correcting search keeping every non-dominated (dist, cost) label.

    With ``reverse`` the search follows arcs backwards, so labels at v describe
    paths v -> source. Labels costing more than ``cap`` are discarded. When
    ``target`` is given the search stops once no further label can reach it
    non-dominated.
    """
    n = g.n
    adj = g.in_adj if reverse else g.out_adj
    frontier: list[list[ParetoLabel]] = [[] for _ in range(n)]
    parent: list[list] = [[] for _ in range(n)]
    # lowest cost among settled labels per vertex; a popped label survives only if cheaper
    best = [math.inf] * n
    heap = [(0, 0, source, -1, -1)]
    while heap:
        d, c, v, pv, pi = heapq.heappop(heap)
        if c >= best[v]:
            continue
        best[v] = c
        frontier[v].append(ParetoLabel(d, c))
        parent[v].append(None if pv < 0 else (pv, pi))
        if target is not None and c >= best[target]:
            # labels are popped in (dist, cost) order; nothing cheaper than
            # best[target] can be produced from here on via this label
            continue
        me = len(frontier[v]) - 1
        for e in adj[v]:
            nc = c + e.cost
            if nc > cap or nc >= best[e.target]:
                continue
            nd = d + e.dist
            if nd > INT64_MAX or nc > INT64_MAX:
                raise OverflowError("path weight exceeds 64-bit range")
            heapq.heappush(heap, (nd, nc, e.target, v, me))
    return SearchResult(source, reverse, frontier, parent)


def pareto_frontier(g: Graph, s: int, t: int) -> list[ParetoLabel]:
    return pareto_search(g, s, target=t).frontier[t]


def exact_csd(g: Graph, q: CsdQuery) -> int | None:
    """Minimum distance over s->t paths of cost at most theta, or None."""
    if q.theta < 0:
        return None
    labels = pareto_search(g, q.s, cap=q.theta, target=q.t).frontier[q.t]
    # first label popped at t has the smallest distance among feasible paths
    return labels[0].dist if labels else None


def cost_bounds(g: Graph, s: int, t: int) -> tuple[int, int] | None:
    """``(c_min, c_max)``: cheapest path cost, and cheapest cost among shortest paths."""
    labels = pareto_frontier(g, s, t)
    if not labels:
        return None
    return labels[-1].cost, labels[0].cost


def shortest_distance(g: Graph, s: int, t: int) -> int | None:
    labels = pareto_frontier(g, s, t)
    return labels[0].dist if labels else None
