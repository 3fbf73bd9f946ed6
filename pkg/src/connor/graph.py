"""Directed graphs with integer (distance, cost) edge attributes.

Vertices are dense indices ``0..n-1``; the label each vertex had in the
input file is kept in ``Graph.labels`` so keyed derivations can use it.
"""
from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

GRAPH_MAGIC = b"CNR1"


class GraphError(ValueError):
    """Malformed graph input or a path that does not exist."""


class Edge(NamedTuple):
    target: int
    dist: int
    cost: int


@dataclass(frozen=True)
class WeightSpec:
    seed: int
    lo: int = 1
    hi: int = 100

    def __post_init__(self):
        if not 1 <= self.lo <= self.hi:
            raise ValueError(f"need 1 <= lo <= hi, got lo={self.lo} hi={self.hi}")


@dataclass
class Graph:
    """Simple directed graph; ``out_adj[u]`` and ``in_adj[v]`` hold the same arcs."""

    out_adj: list[list[Edge]]
    in_adj: list[list[Edge]]
    labels: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.out_adj)

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.out_adj)

    def edges(self) -> list[tuple[int, int, int, int]]:
        """All arcs as ``(u, v, dist, cost)`` in ascending ``(u, v)`` order."""
        out = []
        for u, adj in enumerate(self.out_adj):
            for e in sorted(adj):
                out.append((u, e.target, e.dist, e.cost))
        return out

    def edge(self, u: int, v: int) -> Edge | None:
        for e in self.out_adj[u]:
            if e.target == v:
                return e
        return None

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels else str(v)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label) if self.labels else int(label)
        except ValueError:
            raise KeyError(f"unknown vertex label {label!r}") from None

    def degree(self, v: int) -> int:
        return len(self.out_adj[v]) + len(self.in_adj[v])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges() == other.edges()


def from_edges(n: int, edges: Iterable[Sequence[int]], labels: Sequence[str] | None = None) -> Graph:
    """Build a graph from ``(u, v, dist, cost)`` tuples over vertices ``0..n-1``.

    Duplicate arcs keep their first occurrence; self-loops are rejected.
    """
    out_adj: list[list[Edge]] = [[] for _ in range(n)]
    in_adj: list[list[Edge]] = [[] for _ in range(n)]
    seen = set()
    for u, v, d, c in edges:
        if u == v:
            raise GraphError(f"self-loop at vertex {u}")
        if d < 0 or c < 0:
            raise GraphError(f"negative weight on arc ({u}, {v})")
        if (u, v) in seen:
            continue
        seen.add((u, v))
        out_adj[u].append(Edge(v, d, c))
        in_adj[v].append(Edge(u, d, c))
    for adj in out_adj:
        adj.sort()
    for adj in in_adj:
        adj.sort()
    return Graph(out_adj, in_adj, list(labels) if labels is not None else [str(i) for i in range(n)])


def parse_edge_list(text, has_weights: bool = True) -> Graph:
    """Parse a SNAP-style edge list (``u v`` or ``u v d c`` per line, ``#`` comments).

    Vertex labels are re-indexed densely in order of first appearance.
    Without weights every arc gets ``(0, 0)`` until :func:`synthesize_weights`.
    """
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    elif not isinstance(text, str):
        text = text.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")

    index: dict[str, int] = {}
    labels: list[str] = []
    edges = []
    seen = set()
    want = 4 if has_weights else 2
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != want:
            raise GraphError(f"line {lineno}: expected {want} fields, got {len(parts)}")
        a, b = parts[0], parts[1]
        if a == b:
            raise GraphError(f"line {lineno}: self-loop on vertex {a}")
        if has_weights:
            try:
                d, c = int(parts[2]), int(parts[3])
            except ValueError:
                raise GraphError(f"line {lineno}: weights must be integers") from None
            if d < 0 or c < 0:
                raise GraphError(f"line {lineno}: negative weight")
        else:
            d = c = 0
        for lab in (a, b):
            if lab not in index:
                index[lab] = len(labels)
                labels.append(lab)
        u, v = index[a], index[b]
        if (u, v) in seen:
            continue
        seen.add((u, v))
        edges.append((u, v, d, c))
    return from_edges(len(labels), edges, labels)


def format_edge_list(g: Graph) -> str:
    lines = [f"{g.label(u)} {g.label(v)} {d} {c}" for u, v, d, c in g.edges()]
    return "\n".join(lines) + ("\n" if lines else "")


def synthesize_weights(g: Graph, spec: WeightSpec) -> Graph:
    """Redraw every arc's (dist, cost) uniformly on ``[lo, hi]``.

    One seeded stream is consumed arc by arc in ascending ``(u, v)`` order,
    dist before cost, so the result depends only on topology and spec.
    """
    edges = g.edges()
    rng = np.random.default_rng(spec.seed)
    draws = rng.integers(spec.lo, spec.hi + 1, size=(len(edges), 2))
    new = [(u, v, int(w[0]), int(w[1])) for (u, v, _, _), w in zip(edges, draws)]
    return from_edges(g.n, new, g.labels)


def path_metrics(g: Graph, path: Sequence[int]) -> tuple[int, int]:
    dist = cost = 0
    for i, (u, v) in enumerate(zip(path, path[1:])):
        e = g.edge(u, v)
        if e is None:
            raise GraphError(f"hop {i}: no arc ({u}, {v})")
        dist += e.dist
        cost += e.cost
    return dist, cost


def serialize_graph(g: Graph) -> bytes:
    edges = g.edges()
    buf = io.BytesIO()
    buf.write(GRAPH_MAGIC)
    buf.write(struct.pack("<II", g.n, len(edges)))
    for rec in edges:
        buf.write(struct.pack("<IIII", *rec))
    return buf.getvalue()


def deserialize_graph(data: bytes) -> Graph:
    if data[:4] != GRAPH_MAGIC:
        raise GraphError("bad magic, not a CNR1 graph")
    if len(data) < 12:
        raise GraphError("truncated header")
    n, m = struct.unpack_from("<II", data, 4)
    if len(data) != 12 + 16 * m:
        raise GraphError(f"expected {12 + 16 * m} bytes, got {len(data)}")
    edges = [struct.unpack_from("<IIII", data, 12 + 16 * i) for i in range(m)]
    return from_edges(n, edges)


# --- synthetic topologies for desk-scale experiments ---

def erdos_renyi(n: int, avg_degree: float, seed: int) -> Graph:
    """Directed G(n, m) with ``m = round(n * avg_degree)`` distinct arcs, zero weights."""
    rng = np.random.default_rng(seed)
    target = min(int(round(n * avg_degree)), n * (n - 1))
    arcs: set[tuple[int, int]] = set()
    while len(arcs) < target:
        u, v = rng.integers(0, n, size=2)
        if u != v:
            arcs.add((int(u), int(v)))
    return from_edges(n, [(u, v, 0, 0) for u, v in sorted(arcs)])


def small_world(n: int, k: int, p: float, seed: int) -> Graph:
    """Directed Watts-Strogatz ring: each vertex points at its next ``k`` neighbours,
    each arc rewired to a uniform random head with probability ``p``."""
    rng = np.random.default_rng(seed)
    arcs: set[tuple[int, int]] = set()
    for u in range(n):
        for j in range(1, k + 1):
            v = (u + j) % n
            if rng.random() < p:
                v = int(rng.integers(0, n))
            if v != u:
                arcs.add((u, v))
    return from_edges(n, [(u, v, 0, 0) for u, v in sorted(arcs)])
