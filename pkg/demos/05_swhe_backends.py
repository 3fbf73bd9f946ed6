"""Why query time falls with tree depth, and which backend shows it.

A deeper tree rejects more candidate pairs, so the server multiplies fewer
ciphertexts. With the transparent backend a product is a plain big-integer
multiply and the saving vanishes in the noise. The integer backend performs
real modular products on ~20-40 kbit numbers, so the saving is visible.
"""
# %%
import statistics

from connor.harness.bench import (BenchConfig, DatasetSpec, gen_query_set, make_graph, prepare,
                                  time_encrypted_queries, time_plain_queries)
from connor.query import admitted, filter_candidates, gen_token

g = make_graph(DatasetSpec("er-100", "er", 100, 3, seed=101, weight_seed=201))
queries = gen_query_set(g, BenchConfig(query_count=12, thetas_per_pair=5, seed=9))

for backend in ("transparent", "integer"):
    ctx = prepare(g, seed=1, backend=backend)
    plain, _ = time_plain_queries(ctx, queries)
    print(f"\n{backend} backend, z={ctx.params.z} bits; plaintext index {plain:.3f} ms/query")
    # depths interleaved across rounds, median per depth; one block per depth drifts
    rounds = [[time_encrypted_queries(ctx, queries, d, 1)[0] for d in range(1, 7)] for _ in range(9)]
    for d, col in enumerate(zip(*rounds), 1):
        y = statistics.fmean(len(admitted(filter_candidates(ctx.enc, gen_token(ctx.keys, q, d, ctx.labels))))
                             for q in queries)
        print(f"  depth {d}: mean |Y| {y:4.2f}   median {statistics.median(col):6.2f} ms/query")
