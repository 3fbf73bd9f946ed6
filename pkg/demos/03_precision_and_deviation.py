"""Filtering precision and deviation rate on a seeded desk-scale graph.

Precision is the share of admitted candidate pairs that truly fit the budget;
the deviation rate is encrypted answer over plaintext-index answer.
"""
# %%
from connor.harness.bench import (BenchConfig, DatasetSpec, bench_deviation, bench_precision, gen_query_set,
                                  make_graph, prepare)

spec = DatasetSpec("er-100", "er", 100, 3, seed=101, weight_seed=201)
ctx = prepare(make_graph(spec), seed=1)
print(f"{spec.name}: {ctx.g.m} arcs, {sum(ctx.idx.size)} sketch entries, B={ctx.idx.max_dist_B}, z={ctx.params.z}")
queries = gen_query_set(ctx.g, BenchConfig(query_count=30, thetas_per_pair=10, seed=2))

# %% Precision rises with tree depth
for d in range(1, 7):
    print(f"depth {d}: mean precision {bench_precision(ctx, queries, d):.3f}")

# %% Deviation rate at depth 6
dev = bench_deviation(ctx, queries, 6)
xs = dev.xis
print(f"{len(xs)} feasible queries ({dev.excluded} excluded as infeasible)")
for cut in (1.0, 0.9, 0.8, 0.7, 0.5):
    print(f"  share with xi >= {cut}: {sum(x >= cut for x in xs) / len(xs):.3f}")
print(f"  minimum xi: {min(xs):.3f}")
