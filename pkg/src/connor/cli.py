"""Command-line entry point.

A typical session::

    connor ingest edges.txt --no-weights --out g.bin
    connor weights --graph g.bin --seed 7 --out gw.bin
    connor build-label --graph gw.bin --alpha 3/2 --out idx.bin
    connor encrypt --graph gw.bin --label-index idx.bin --keystore keys.cnk --out enc.bin
    connor token --keystore keys.cnk --s 0 --t 5 --theta 120 --out tok.bin
    connor query --index enc.bin --token tok.bin --keystore keys.cnk

Graph files carry dense indices only; the external vertex labels live in
a ``<graph>.labels`` sidecar (one per line) written next to them.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .crypto import TransparentSwhe
from .graph import Graph, GraphError, WeightSpec, deserialize_graph, parse_edge_list, serialize_graph, synthesize_weights
from .labeling import build_index, deserialize_label_index, serialize_label_index
from .oracle import CsdQuery, exact_csd
from .query import EncryptedResult, QueryToken, gen_token, recover_distance, server_query
from .secure_index import deserialize_index, keygen, params_for, serialize_index, setup

log = logging.getLogger("connor")


def _labels_path(graph: str | Path) -> Path:
    return Path(str(graph) + ".labels")


def _write_graph(g: Graph, out: str) -> None:
    Path(out).write_bytes(serialize_graph(g))
    _labels_path(out).write_text("".join(lab + "\n" for lab in g.labels), encoding="utf-8")


def _read_graph(path: str) -> Graph:
    g = deserialize_graph(Path(path).read_bytes())
    side = _labels_path(path)
    if side.exists():
        labels = side.read_text(encoding="utf-8").splitlines()
        if len(labels) != g.n:
            raise GraphError(f"{side} lists {len(labels)} labels for {g.n} vertices")
        g.labels = labels
    return g


def _read_keystore(path: str):
    from .harness.keystore import Keystore
    return Keystore.from_bytes(Path(path).read_bytes())


def cmd_ingest(args) -> int:
    text = Path(args.edges).read_bytes() if args.edges != "-" else sys.stdin.buffer.read()
    if args.undirected:
        lines = []
        for line in text.decode("utf-8").splitlines():
            lines.append(line)
            parts = line.split()
            if parts and not line.lstrip().startswith("#") and len(parts) >= 2:
                lines.append(" ".join([parts[1], parts[0], *parts[2:]]))
        text = "\n".join(lines).encode("utf-8")
    g = parse_edge_list(text, has_weights=not args.no_weights)
    _write_graph(g, args.out)
    print(f"n={g.n} m={g.m} -> {args.out}")
    return 0


def cmd_weights(args) -> int:
    g = synthesize_weights(_read_graph(args.graph), WeightSpec(args.seed, args.lo, args.hi))
    _write_graph(g, args.out)
    print(f"weights seed={args.seed} range=[{args.lo},{args.hi}] -> {args.out}")
    return 0


def cmd_build_label(args) -> int:
    idx = build_index(_read_graph(args.graph), Fraction(args.alpha), args.entry_cap)
    Path(args.out).write_bytes(serialize_label_index(idx))
    o, i = idx.size
    print(f"alpha={idx.alpha} entries out={o} in={i} B={idx.max_dist_B} -> {args.out}")
    return 0


def cmd_encrypt(args) -> int:
    from .harness.keystore import Keystore
    idx = deserialize_label_index(Path(args.label_index).read_bytes())
    labels = _read_graph(args.graph).labels if args.graph else [str(i) for i in range(idx.n)]
    params = params_for(idx, phi=1 << 20)
    swhe = TransparentSwhe(params.z)
    keys = keygen(swhe=swhe, phi=args.phi)
    params = params_for(idx, keys.phi, params.z)
    enc = setup(keys, params, idx, labels, swhe)
    Path(args.out).write_bytes(serialize_index(enc))
    Path(args.keystore).write_bytes(Keystore(keys, params.N, params.z).to_bytes())
    print(f"N={params.N} z={params.z} records={len(enc.i_out)}+{len(enc.i_in)} -> {args.out}; keys -> {args.keystore}")
    return 0


def cmd_token(args) -> int:
    ks = _read_keystore(args.keystore)
    tok = gen_token(ks.keys, CsdQuery(0, 1, args.theta), args.depth, [args.s, args.t])
    Path(args.out).write_bytes(tok.to_bytes())
    print(f"token depth={args.depth} bytes={len(tok.to_bytes())} -> {args.out}")
    return 0


def cmd_query(args) -> int:
    token = Path(args.token).read_bytes()
    if args.addr:
        from .harness.service import parse_addr, query_remote
        raw = query_remote(parse_addr(args.addr), token)
    else:
        enc = deserialize_index(Path(args.index).read_bytes())
        raw = server_query(enc, QueryToken.from_bytes(token)).to_bytes()
    if args.out:
        Path(args.out).write_bytes(raw)
    if not args.keystore:
        if not args.out:
            sys.stdout.buffer.write(raw)
        return 0
    ks = _read_keystore(args.keystore)
    res = EncryptedResult.from_bytes(raw, ks.z)
    r = recover_distance(ks.keys.swhe.sk, res, ks.N, TransparentSwhe(ks.z))
    if r is None:
        print("INFEASIBLE")
    elif res.hide_y:
        print(r)
    else:
        print(f"{r} (|Y|={res.y_size}, true minimum at most {r + res.y_size.bit_length() - 1})")
    return 0


def cmd_oracle(args) -> int:
    g = _read_graph(args.graph)
    try:
        s, t = g.index_of(args.s), g.index_of(args.t)
    except KeyError as exc:
        raise GraphError(str(exc.args[0])) from None
    d = exact_csd(g, CsdQuery(s, t, args.theta))
    print("INFEASIBLE" if d is None else d)
    return 0


def cmd_serve(args) -> int:
    from .harness.service import serve
    enc = deserialize_index(Path(args.index).read_bytes())
    try:
        serve(enc, args.port, args.host, hide_y=args.hide_ysize)
    except KeyboardInterrupt:
        pass
    return 0


def load_bench_config(path: str | None):
    """JSON config: BenchConfig fields at top level plus an optional ``datasets`` list."""
    from .harness.bench import DESK_SUITE, BenchConfig, DatasetSpec
    raw = json.loads(Path(path).read_text()) if path else {}
    datasets = raw.pop("datasets", None)
    backend = raw.pop("backend", "transparent")
    if "alpha" in raw:
        raw["alpha"] = Fraction(str(raw["alpha"]))
    cfg = BenchConfig(**raw)
    specs = [DatasetSpec(**d) for d in datasets] if datasets is not None else list(DESK_SUITE)
    return cfg, specs, backend


def cmd_bench(args) -> int:
    from .harness.bench import make_graph, prepare, run_bench
    from .harness.report import report
    cfg, specs, backend = load_bench_config(args.config)
    backend = args.backend or backend
    metrics = []
    for spec in specs:
        log.info("dataset %s", spec.name)
        g = make_graph(spec)
        ctx = prepare(g, cfg.alpha, cfg.seed, backend)
        metrics.append(run_bench(g, cfg, spec.name, ctx))
    fmt = args.format or {".json": "json", ".txt": "text"}.get(Path(args.out).suffix if args.out else "", "csv")
    data = report(metrics, fmt)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="connor", description="Encrypted constrained shortest distance queries.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("ingest", help="parse an edge list into a graph file")
    s.add_argument("edges", help="edge-list file, '-' for stdin")
    s.add_argument("--out", required=True)
    s.add_argument("--no-weights", action="store_true", help="lines are 'u v'; weights are zero until `weights`")
    s.add_argument("--undirected", action="store_true", help="add the reverse arc for every line")
    s.set_defaults(fn=cmd_ingest)

    s = sub.add_parser("weights", help="draw uniform integer distances and costs")
    s.add_argument("--graph", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--lo", type=int, default=1)
    s.add_argument("--hi", type=int, default=100)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_weights)

    s = sub.add_parser("build-label", help="build the plaintext labeling index")
    s.add_argument("--graph", required=True)
    s.add_argument("--alpha", default="3/2")
    s.add_argument("--entry-cap", type=int, default=None)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_build_label)

    s = sub.add_parser("encrypt", help="encrypt a label index; writes the index and a client keystore")
    s.add_argument("--label-index", required=True)
    s.add_argument("--graph", help="graph whose .labels sidecar names the vertices")
    s.add_argument("--phi", type=int, default=None, help="amplification factor (default: random in [2^20, 2^24])")
    s.add_argument("--keystore", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_encrypt)

    s = sub.add_parser("token", help="make a query token")
    s.add_argument("--keystore", required=True)
    s.add_argument("--s", required=True, help="source vertex label")
    s.add_argument("--t", required=True, help="target vertex label")
    s.add_argument("--theta", type=int, required=True)
    s.add_argument("--depth", type=int, default=6)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_token)

    s = sub.add_parser("query", help="run a token against an index file or a server")
    where = s.add_mutually_exclusive_group(required=True)
    where.add_argument("--index")
    where.add_argument("--addr", help="HOST:PORT")
    s.add_argument("--token", required=True)
    s.add_argument("--keystore", help="decrypt and print the distance")
    s.add_argument("--out", help="save the raw result bytes")
    s.set_defaults(fn=cmd_query)

    s = sub.add_parser("oracle", help="exact constrained shortest distance on the plaintext graph")
    s.add_argument("--graph", required=True)
    s.add_argument("--s", required=True)
    s.add_argument("--t", required=True)
    s.add_argument("--theta", type=int, required=True)
    s.set_defaults(fn=cmd_oracle)

    s = sub.add_parser("serve", help="serve an encrypted index over TCP")
    s.add_argument("--index", required=True)
    s.add_argument("--port", type=int, required=True)
    s.add_argument("--host", default="0.0.0.0")
    s.add_argument("--hide-ysize", action="store_true", help="do not reveal |Y| to the client")
    s.set_defaults(fn=cmd_serve)

    s = sub.add_parser("bench", help="run the desk-scale evaluation")
    s.add_argument("--config", help="JSON config (default: built-in desk suite)")
    s.add_argument("--out")
    s.add_argument("--format", choices=("text", "csv", "json"))
    s.add_argument("--backend", choices=("transparent", "integer"))
    s.set_defaults(fn=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except (ValueError, OSError, ConnectionError) as exc:
        print(f"connor {args.cmd}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
