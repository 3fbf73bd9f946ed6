"""Walk through the five-vertex running example end to end.

Run with ``python demos/01_running_example.py``.
"""
# %% The graph: every arc has a distance and a cost
from fractions import Fraction

from connor.crypto import TransparentSwhe
from connor.graph import parse_edge_list, path_metrics
from connor.labeling import build_index, plain_query, query_witness
from connor.oracle import CsdQuery, cost_bounds, exact_csd, pareto_frontier
from connor.query import gen_token, recover_distance, server_query
from connor.secure_index import keygen, leakage_profile, params_for, setup

g = parse_edge_list("""
a b 4 2
b c 2 1
a e 5 1
e b 1 1
e c 2 6
a d 1 2
d e 2 3
""")
ix = g.index_of
print("vertices:", g.labels, "arcs:", g.m)
print("path a-e-b-c has (dist, cost) =", path_metrics(g, [ix(v) for v in "aebc"]))

# %% Ground truth. From a to c there are two Pareto-optimal routes
a, c = ix("a"), ix("c")
print("frontier a->c:", pareto_frontier(g, a, c))
print("cost bounds (c_min, c_max):", cost_bounds(g, a, c))
for theta in (2, 4, 11):
    print(f"  exact CSD with budget {theta}:", exact_csd(g, CsdQuery(a, c, theta)))

# %% The plaintext 2-hop index answers from two sketches only
idx = build_index(g, Fraction(3, 2))
print("in-sketch of c:", [(g.label(h), d, co) for h, d, co in idx.delta_in[c]])
w = query_witness(idx, CsdQuery(a, c, 4))
print("budget 4 -> distance", w.dist, "through hub", g.label(w.hub), "at cost", w.cost)

# %% Encrypt. The server receives only the dictionaries
params = params_for(idx, phi=1 << 20)
swhe = TransparentSwhe(params.z)
keys = keygen(swhe=swhe)
params = params_for(idx, keys.phi, params.z)
enc = setup(keys, params, idx, g.labels, swhe)
print("server learns (n, B, |out|, |in|) =", tuple(leakage_profile(idx, enc)))
print("each record is", enc.record_bytes, "bytes")

# %% Query. The client sends a token and decrypts one ciphertext
for theta in (4, 11):
    tok = gen_token(keys, CsdQuery(a, c, theta), depth=6, labels=g.labels)
    res = server_query(enc, tok, swhe)
    r = recover_distance(keys.swhe.sk, res, params.N, swhe)
    print(f"budget {theta}: encrypted answer {r} from |Y|={res.y_size}; plaintext index says "
          f"{plain_query(idx, CsdQuery(a, c, theta))}")

# %% Why the encrypted answer can undershoot
# The server returns one encrypted sum over the |Y| admitted pairs, each term
# 2^(2N - dist). Decryption gives 2N minus the floor of log2 of that sum, so r
# sits up to bitlen(|Y|) - 1 below the best admitted distance. The self-hub
# entry (c, 0, 0) has path code 0 in the cost tree and its pairs are never
# rejected, which is why |Y| is 4 at budget 11.
