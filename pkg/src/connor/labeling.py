"""Constrained 2-hop cover labeling with alpha-domination filtering.

Each vertex u carries an out-sketch of (hub, dist, cost) entries for paths
u -> hub and an in-sketch for paths hub -> u. A constrained query s -> t
joins ``delta_out[s]`` with ``delta_in[t]`` on the hub.

Construction is pruned landmark labeling generalised to Pareto labels.
Landmarks are taken in descending total degree. For each landmark h a
forward and a backward Pareto search run over the whole graph; a label is
skipped (and not expanded) when hubs from earlier landmarks already give a
pair that is at least as short and at least as cheap. The surviving labels
for (u, h) are then thinned with alpha-domination. Cross-hub pruning uses
plain dominance on purpose: alpha-pruning across hubs lets the
approximation error compound along hub chains.
"""
from __future__ import annotations

import heapq
import io
import logging
import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .graph import Graph
from .oracle import INT64_MAX, CsdQuery

log = logging.getLogger(__name__)

LABEL_MAGIC = b"CNL1"


class SketchEntry(NamedTuple):
    hub: int
    dist: int
    cost: int


def as_alpha(alpha) -> Fraction:
    a = Fraction(alpha) if not isinstance(alpha, str) else Fraction(alpha.strip())
    if a < 1:
        raise ValueError(f"alpha must be >= 1, got {a}")
    return a


def alpha_dominates(e1, e2, alpha) -> bool:
    """True iff ``c1 <= c2`` and ``d1 <= alpha * d2``, in exact integer arithmetic."""
    a = as_alpha(alpha)
    return e1[1] <= e2[1] and e1[0] * a.denominator <= a.numerator * e2[0]


def alpha_filter(labels, alpha: Fraction) -> list[tuple[int, int]]:
    """Thin a set of (dist, cost) labels so each dropped one is alpha-dominated by a kept one.

    Scans in ascending cost; a label is kept only if no kept (cheaper) label
    alpha-dominates it. Every removal is witnessed directly by a survivor, so
    the guarantee does not degrade along chains.
    """
    num, den = alpha.numerator, alpha.denominator
    kept: list[tuple[int, int]] = []
    shortest = math.inf
    for d, c in sorted(labels, key=lambda x: (x[1], x[0])):
        if shortest * den <= num * d:
            continue
        kept.append((d, c))
        shortest = min(shortest, d)
    return kept


@dataclass
class LabelIndex:
    delta_out: list[list[SketchEntry]]
    delta_in: list[list[SketchEntry]]
    alpha: Fraction

    @property
    def n(self) -> int:
        return len(self.delta_out)

    @property
    def max_dist_B(self) -> int:
        return max((e.dist for side in (self.delta_out, self.delta_in) for sk in side for e in sk), default=0)

    @property
    def size(self) -> tuple[int, int]:
        return sum(map(len, self.delta_out)), sum(map(len, self.delta_in))

    def __eq__(self, other):
        if not isinstance(other, LabelIndex):
            return NotImplemented
        return (self.alpha == other.alpha and self.delta_out == other.delta_out
                and self.delta_in == other.delta_in)


def _group(sketch) -> dict[int, list[tuple[int, int]]]:
    out: dict[int, list[tuple[int, int]]] = {}
    for hub, d, c in sketch:
        out.setdefault(hub, []).append((d, c))
    return out


def _covered(near: dict, far: dict, d: int, c: int) -> bool:
    """Is there a hub pair in ``near`` x ``far`` with summed dist <= d and cost <= c?"""
    if len(far) < len(near):
        near, far = far, near
    for hub, xs in near.items():
        ys = far.get(hub)
        if ys is None:
            continue
        for d1, c1 in xs:
            if d1 > d or c1 > c:
                continue
            for d2, c2 in ys:
                if d1 + d2 <= d and c1 + c2 <= c:
                    return True
    return False


def _landmark_search(g: Graph, h: int, reverse: bool, anchor: dict, sketches) -> dict[int, list]:
    """Pareto search from landmark h, dropping labels already covered by earlier hubs.

    ``anchor`` is h's own grouped sketch on the opposite side; ``sketches``
    is the per-vertex sketch list the new entries will land in.
    """
    adj = g.in_adj if reverse else g.out_adj
    best = {}
    found: dict[int, list] = {}
    grouped_cache: dict[int, dict] = {}
    heap = [(0, 0, h)]
    while heap:
        d, c, v = heapq.heappop(heap)
        if c >= best.get(v, math.inf):
            continue
        best[v] = c
        if anchor and sketches[v]:
            grouped = grouped_cache.get(v)
            if grouped is None:
                grouped = grouped_cache[v] = _group(sketches[v])
            if _covered(anchor, grouped, d, c):
                continue
        found.setdefault(v, []).append((d, c))
        for e in adj[v]:
            nc = c + e.cost
            if nc >= best.get(e.target, math.inf):
                continue
            nd = d + e.dist
            if nd > INT64_MAX or nc > INT64_MAX:
                raise OverflowError("path weight exceeds 64-bit range")
            heapq.heappush(heap, (nd, nc, e.target))
    return found


def build_index(g: Graph, alpha=Fraction(3, 2), entry_cap: int | None = None) -> LabelIndex:
    """Build the constrained 2-hop labeling of ``g``.

    For any query (s, t, theta) with a feasible path, :func:`plain_query`
    returns a distance at most ``alpha`` times the exact optimum, realised by
    a real path of cost at most theta.
    """
    a = as_alpha(alpha)
    n = g.n
    delta_out: list[list[SketchEntry]] = [[] for _ in range(n)]
    delta_in: list[list[SketchEntry]] = [[] for _ in range(n)]
    order = sorted(range(n), key=lambda v: (-g.degree(v), v))
    capped = False
    for h in order:
        fwd = _landmark_search(g, h, False, _group(delta_out[h]), delta_in)
        bwd = _landmark_search(g, h, True, _group(delta_in[h]), delta_out)
        for found, sketches in ((fwd, delta_in), (bwd, delta_out)):
            for v in sorted(found):
                kept = alpha_filter(found[v], a)
                sketches[v].extend(SketchEntry(h, d, c) for d, c in kept)
    if entry_cap is not None:
        for side in (delta_out, delta_in):
            for v, sk in enumerate(side):
                if len(sk) > entry_cap:
                    capped = True
                    side[v] = sorted(sk, key=lambda e: (e.cost, e.dist, e.hub))[:entry_cap]
        if capped:
            log.warning("entry cap %d hit; lowest-cost entries kept, alpha guarantee may not hold", entry_cap)
    return LabelIndex(delta_out, delta_in, a)


class Witness(NamedTuple):
    dist: int
    cost: int
    hub: int
    out_entry: SketchEntry
    in_entry: SketchEntry


def query_witness(idx: LabelIndex, q: CsdQuery) -> Witness | None:
    """Best hub pair for ``q``; ties broken by cost then hub for determinism."""
    outs = _group(idx.delta_out[q.s])
    best = None
    for hub, d2, c2 in idx.delta_in[q.t]:
        for d1, c1 in outs.get(hub, ()):
            c = c1 + c2
            if c > q.theta:
                continue
            key = (d1 + d2, c, hub)
            if best is None or key < best[0]:
                best = (key, SketchEntry(hub, d1, c1), SketchEntry(hub, d2, c2))
    if best is None:
        return None
    (d, c, hub), eo, ei = best
    return Witness(d, c, hub, eo, ei)


def plain_query(idx: LabelIndex, q: CsdQuery) -> int | None:
    w = query_witness(idx, q)
    return None if w is None else w.dist


def candidate_pairs(idx: LabelIndex, s: int, t: int) -> list[tuple[SketchEntry, SketchEntry]]:
    """Every (out-entry of s, in-entry of t) pair that shares a hub, unfiltered."""
    outs: dict[int, list[SketchEntry]] = {}
    for e in idx.delta_out[s]:
        outs.setdefault(e.hub, []).append(e)
    return [(eo, ei) for ei in idx.delta_in[t] for eo in outs.get(ei.hub, ())]


def serialize_label_index(idx: LabelIndex) -> bytes:
    buf = io.BytesIO()
    buf.write(LABEL_MAGIC)
    buf.write(struct.pack("<III", idx.alpha.numerator, idx.alpha.denominator, idx.n))
    for v in range(idx.n):
        for sk in (idx.delta_out[v], idx.delta_in[v]):
            buf.write(struct.pack("<I", len(sk)))
            for e in sk:
                if max(e) >= 2**32:
                    raise OverflowError("sketch entry does not fit u32 fields")
                buf.write(struct.pack("<III", *e))
    return buf.getvalue()


def deserialize_label_index(data: bytes) -> LabelIndex:
    if data[:4] != LABEL_MAGIC:
        raise ValueError("bad magic, not a CNL1 label index")
    num, den, n = struct.unpack_from("<III", data, 4)
    pos = 16
    delta_out, delta_in = [], []
    try:
        for _ in range(n):
            for side in (delta_out, delta_in):
                (cnt,) = struct.unpack_from("<I", data, pos)
                pos += 4
                side.append([SketchEntry(*struct.unpack_from("<III", data, pos + 12 * i)) for i in range(cnt)])
                pos += 12 * cnt
    except struct.error:
        raise ValueError("truncated label index") from None
    if pos != len(data):
        raise ValueError("trailing bytes after label index")
    return LabelIndex(delta_out, delta_in, Fraction(num, den))
