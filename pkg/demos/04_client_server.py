"""Serve an encrypted index over TCP and query it from a client.

The server process holds only the encrypted index; keys stay with the client.
"""
# %%
from connor.harness.bench import BenchConfig, DatasetSpec, gen_query_set, make_graph, prepare
from connor.harness.keystore import Keystore
from connor.harness.service import query_remote, start_server
from connor.labeling import plain_query
from connor.query import EncryptedResult, gen_token, recover_distance

ctx = prepare(make_graph(DatasetSpec("sw-100", "sw", 100, 3, seed=102, weight_seed=202)), seed=4)
keystore = Keystore(ctx.keys, ctx.params.N, ctx.params.z)
print("keystore file would be", len(keystore.to_bytes()), "bytes")

# %%
srv = start_server(ctx.enc)
addr = srv.server_address
print("serving on", addr)
for q in gen_query_set(ctx.g, BenchConfig(query_count=5, thetas_per_pair=1, seed=7)):
    raw = query_remote(addr, gen_token(ctx.keys, q, 6, ctx.labels).to_bytes())
    res = EncryptedResult.from_bytes(raw, keystore.z)
    r = recover_distance(keystore.keys.swhe.sk, res, keystore.N, ctx.swhe)
    print(f"{ctx.g.label(q.s)}->{ctx.g.label(q.t)} theta={q.theta}: encrypted {r}, plaintext index "
          f"{plain_query(ctx.idx, q)}, |Y|={res.y_size}, {len(raw)} result bytes")
srv.shutdown()
srv.server_close()
