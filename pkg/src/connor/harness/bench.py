"""Desk-scale evaluation: query sets, precision, deviation rate, timings.

Metrics follow the usual definitions: per query, precision is
``Tp / (Tp + Fp)`` over the admitted candidate pairs (true cost within
budget vs not), averaged over queries with a non-empty candidate set; the
deviation rate is ``r_e / r_p`` between the encrypted and plaintext
answers. Truth for candidates comes from the plaintext index: the server
reports each pair's slot counters, which index the plaintext sketches.
"""
from __future__ import annotations

import gc
import os
import statistics
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from ..crypto import IntegerSwhe, SwheBackend, TransparentSwhe, z_for
from ..graph import Graph, WeightSpec, erdos_renyi, parse_edge_list, small_world, synthesize_weights
from ..labeling import LabelIndex, build_index, plain_query, serialize_label_index
from ..oracle import CsdQuery, cost_bounds
from ..query import admitted, filter_candidates, gen_token, recover_distance, server_query
from ..secure_index import (SWHE_HEADROOM_BITS, ClientKeys, EncryptedIndex, SetupParams, index_file_size, params_for,
                            setup)
from ..tree import Verdict


@dataclass
class BenchConfig:
    query_count: int = 200          # (s, t) pairs
    thetas_per_pair: int = 50
    alpha: Fraction = Fraction(3, 2)
    depth_range: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5, 6])
    seed: int = 0
    deviation_depth: int = 6
    timing_reps: int = 5
    timing_queries: int | None = 100   # queries used for wall-clock timing; None = all

    def __post_init__(self):
        self.alpha = Fraction(self.alpha)
        if self.query_count < 1 or self.thetas_per_pair < 1:
            raise ValueError("query_count and thetas_per_pair must be positive")
        env = os.environ.get("CONNOR_SEED")
        if env is not None:
            self.seed = int(env)


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    kind: str = "er"        # er | sw | file
    n: int = 100
    degree: float = 3.0     # average out-degree (er) or ring neighbours k (sw)
    rewire: float = 0.1
    seed: int = 1
    weight_seed: int = 7
    path: str | None = None
    weighted_file: bool = False


DESK_SUITE = (
    DatasetSpec("er-100", "er", 100, 3, seed=101, weight_seed=201),
    DatasetSpec("sw-100", "sw", 100, 3, seed=102, weight_seed=202),
    DatasetSpec("er-500", "er", 500, 3, seed=103, weight_seed=203),
    DatasetSpec("sw-300", "sw", 300, 3, rewire=0.2, seed=104, weight_seed=204),
)


def make_graph(spec: DatasetSpec) -> Graph:
    if spec.kind == "er":
        g = erdos_renyi(spec.n, spec.degree, spec.seed)
    elif spec.kind == "sw":
        g = small_world(spec.n, int(spec.degree), spec.rewire, spec.seed)
    elif spec.kind == "file":
        with open(spec.path, "rb") as fh:
            g = parse_edge_list(fh.read(), has_weights=spec.weighted_file)
        if spec.weighted_file:
            return g
    else:
        raise ValueError(f"unknown dataset kind {spec.kind!r}")
    return synthesize_weights(g, WeightSpec(spec.weight_seed))


def gen_query_set(g: Graph, cfg: BenchConfig) -> list[CsdQuery]:
    """Random reachable (s, t) pairs, each with theta drawn uniformly from [c_min, c_max]."""
    rng = np.random.default_rng(cfg.seed)
    out: list[CsdQuery] = []
    pairs = attempts = 0
    limit = 50 * cfg.query_count + 1000
    while pairs < cfg.query_count:
        attempts += 1
        if attempts > limit:
            raise ValueError(f"found only {pairs} reachable pairs in {limit} draws; graph too sparse")
        s, t = (int(x) for x in rng.integers(0, g.n, size=2))
        if s == t:
            continue
        bounds = cost_bounds(g, s, t)
        if bounds is None:
            continue
        lo, hi = bounds
        out.extend(CsdQuery(s, t, int(th)) for th in rng.integers(lo, hi + 1, size=cfg.thetas_per_pair))
        pairs += 1
    return out


def seeded_keys(seed: int, swhe: SwheBackend) -> ClientKeys:
    """Reproducible client keys for experiments (never for deployment)."""
    rng = np.random.default_rng([seed, 0xC0])
    return ClientKeys(rng.bytes(16), swhe.keygen(), int(rng.integers(1 << 20, (1 << 24) + 1)))


@dataclass
class BenchContext:
    g: Graph
    idx: LabelIndex
    keys: ClientKeys
    params: SetupParams
    enc: EncryptedIndex
    swhe: SwheBackend
    build_s: float = 0.0
    encrypt_s: float = 0.0

    @property
    def labels(self) -> list[str]:
        return self.g.labels


def make_swhe(backend: str, N: int) -> SwheBackend:
    if backend == "transparent":
        return TransparentSwhe(z_for(N, SWHE_HEADROOM_BITS))
    if backend == "integer":
        return IntegerSwhe.for_N(N, SWHE_HEADROOM_BITS)
    raise ValueError(f"unknown SWHE backend {backend!r}")


def prepare(g: Graph, alpha=Fraction(3, 2), seed: int = 0, backend: str = "transparent") -> BenchContext:
    t0 = time.perf_counter()
    idx = build_index(g, alpha)
    t1 = time.perf_counter()
    params = params_for(idx, phi=1 << 20)
    swhe = make_swhe(backend, params.N)
    keys = seeded_keys(seed, swhe)
    params = params_for(idx, keys.phi, swhe.z)
    t2 = time.perf_counter()
    enc = setup(keys, params, idx, g.labels, swhe)
    t3 = time.perf_counter()
    return BenchContext(g, idx, keys, params, enc, swhe, t1 - t0, t3 - t2)


class QueryTrace(NamedTuple):
    """One encrypted query with client-side truth attached."""
    admitted: list[tuple[int, int, Verdict]]   # (true dist, true cost, verdict) per pair in Y
    result_distance: int | None
    y_size: int


def trace_query(ctx: BenchContext, q: CsdQuery, depth: int) -> QueryTrace:
    truth = admitted_truth(ctx, q, depth)
    res = server_query(ctx.enc, gen_token(ctx.keys, q, depth, ctx.labels), ctx.swhe)
    return QueryTrace(truth, recover_distance(ctx.keys.swhe.sk, res, ctx.params.N, ctx.swhe), res.y_size)


def precision(flags) -> float | None:
    """Tp / (Tp + Fp) for a list of truth flags; None for an empty candidate set."""
    flags = list(flags)
    if not flags:
        return None
    return sum(1 for f in flags if f) / len(flags)


def mean_precision(per_query) -> float:
    vals = [p for p in per_query if p is not None]
    return sum(vals) / len(vals) if vals else float("nan")


def admitted_truth(ctx: BenchContext, q: CsdQuery, depth: int) -> list[tuple[int, int, Verdict]]:
    """Filter only (no homomorphic sum): truth for each admitted pair."""
    tok = gen_token(ctx.keys, q, depth, ctx.labels)
    outs, ins = ctx.idx.delta_out[q.s], ctx.idx.delta_in[q.t]
    return [(outs[p.w_out].dist + ins[p.w_in].dist, outs[p.w_out].cost + ins[p.w_in].cost, p.verdict)
            for p in admitted(filter_candidates(ctx.enc, tok))]


def bench_precision(ctx: BenchContext, queries: list[CsdQuery], depth: int) -> float:
    return mean_precision(precision(c <= q.theta for _, c, _ in admitted_truth(ctx, q, depth)) for q in queries)


class Deviation(NamedTuple):
    xis: list[float]
    excluded: int


def bench_deviation(ctx: BenchContext, queries: list[CsdQuery], depth: int) -> Deviation:
    xis, excluded = [], 0
    for q in queries:
        r_p = plain_query(ctx.idx, q)
        tok = gen_token(ctx.keys, q, depth, ctx.labels)
        r_e = recover_distance(ctx.keys.swhe.sk, server_query(ctx.enc, tok, ctx.swhe), ctx.params.N, ctx.swhe)
        if r_p is None or r_e is None or r_p == 0:
            excluded += 1
            continue
        xis.append(r_e / r_p)
    return Deviation(sorted(xis), excluded)


def _timed(fn, items, reps: int) -> tuple[float, float]:
    """Mean and stdev over reps of the per-item wall time in ms (first pass warms caches).

    The garbage collector is paused while timing, as ``timeit`` does.
    """
    for it in items[:5]:
        fn(it)
    per_rep = []
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(reps):
            t0 = time.perf_counter()
            for it in items:
                fn(it)
            per_rep.append(1000 * (time.perf_counter() - t0) / max(1, len(items)))
    finally:
        if was_enabled:
            gc.enable()
    return statistics.fmean(per_rep), (statistics.stdev(per_rep) if reps > 1 else 0.0)


def time_encrypted_queries(ctx: BenchContext, queries: list[CsdQuery], depth: int, reps: int = 5):
    tokens = [gen_token(ctx.keys, q, depth, ctx.labels) for q in queries]
    return _timed(lambda tok: server_query(ctx.enc, tok, ctx.swhe), tokens, reps)


def time_plain_queries(ctx: BenchContext, queries: list[CsdQuery], reps: int = 5):
    return _timed(lambda q: plain_query(ctx.idx, q), queries, reps)


def time_tokens(keys: ClientKeys, depth: int, reps: int = 5, count: int = 20):
    qs = [CsdQuery(0, 1, 50 + i) for i in range(count)]
    return _timed(lambda q: gen_token(keys, q, depth), qs, reps)


@dataclass
class Metrics:
    dataset: str = ""
    n: int = 0
    m: int = 0
    precision: dict[int, float] = field(default_factory=dict)
    query_time_ms: dict[int, float] = field(default_factory=dict)
    query_time_sd: dict[int, float] = field(default_factory=dict)
    plain_query_time_ms: float = 0.0
    token_bytes: dict[int, int] = field(default_factory=dict)
    token_time_ms: dict[int, float] = field(default_factory=dict)
    deviation_cdf: list[float] = field(default_factory=list)
    deviation_excluded: int = 0
    index_build_s: float = 0.0
    encrypt_s: float = 0.0
    plain_index_bytes: int = 0
    index_bytes: int = 0
    queries: int = 0


def run_bench(g: Graph, cfg: BenchConfig, name: str = "graph", ctx: BenchContext | None = None) -> Metrics:
    ctx = ctx or prepare(g, cfg.alpha, cfg.seed)
    queries = gen_query_set(g, cfg)
    timing = queries if cfg.timing_queries is None else queries[:cfg.timing_queries]
    met = Metrics(dataset=name, n=g.n, m=g.m, queries=len(queries),
                  index_build_s=ctx.build_s, encrypt_s=ctx.encrypt_s,
                  plain_index_bytes=len(serialize_label_index(ctx.idx)), index_bytes=index_file_size(ctx.enc))
    met.plain_query_time_ms, _ = time_plain_queries(ctx, timing, cfg.timing_reps)
    for d in cfg.depth_range:
        met.precision[d] = bench_precision(ctx, queries, d)
        met.query_time_ms[d], met.query_time_sd[d] = time_encrypted_queries(ctx, timing, d, cfg.timing_reps)
        met.token_bytes[d] = len(gen_token(ctx.keys, queries[0], d, ctx.labels).to_bytes())
        met.token_time_ms[d], _ = time_tokens(ctx.keys, d, cfg.timing_reps)
    dev = bench_deviation(ctx, queries, cfg.deviation_depth)
    met.deviation_cdf, met.deviation_excluded = dev.xis, dev.excluded
    return met
