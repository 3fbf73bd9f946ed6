"""Render benchmark metrics as text, CSV or JSON.

CSV has one row per (dataset, depth) with a fixed column order; the
deviation CDF is summarised by its fraction at or above 0.90 and its
minimum (JSON keeps the full sorted list).
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json

from .bench import Metrics

CSV_COLUMNS = (
    "dataset", "n", "m", "depth", "precision", "query_time_ms", "query_time_sd",
    "plain_query_time_ms", "token_bytes", "token_time_ms", "xi_frac_ge_090", "xi_min",
    "index_build_s", "encrypt_s", "plain_index_bytes", "index_bytes", "queries",
)


def xi_summary(xis: list[float]) -> tuple[float, float]:
    if not xis:
        return float("nan"), float("nan")
    return sum(1 for x in xis if x >= 0.90) / len(xis), min(xis)


def _rows(metrics: list[Metrics]):
    for met in metrics:
        frac, lo = xi_summary(met.deviation_cdf)
        for d in sorted(met.precision):
            yield {
                "dataset": met.dataset, "n": met.n, "m": met.m, "depth": d,
                "precision": met.precision[d],
                "query_time_ms": met.query_time_ms.get(d, ""),
                "query_time_sd": met.query_time_sd.get(d, ""),
                "plain_query_time_ms": met.plain_query_time_ms,
                "token_bytes": met.token_bytes.get(d, ""),
                "token_time_ms": met.token_time_ms.get(d, ""),
                "xi_frac_ge_090": frac, "xi_min": lo,
                "index_build_s": met.index_build_s, "encrypt_s": met.encrypt_s,
                "plain_index_bytes": met.plain_index_bytes, "index_bytes": met.index_bytes,
                "queries": met.queries,
            }


def report(metrics: list[Metrics], fmt: str = "text") -> bytes:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in _rows(metrics):
            w.writerow(row)
        return buf.getvalue().encode()
    if fmt == "json":
        return json.dumps([dataclasses.asdict(m) for m in metrics], indent=2).encode()
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = []
    for met in metrics:
        frac, lo = xi_summary(met.deviation_cdf)
        lines.append(f"{met.dataset}: n={met.n} m={met.m} queries={met.queries} "
                     f"build={met.index_build_s:.2f}s encrypt={met.encrypt_s:.2f}s "
                     f"index={met.plain_index_bytes}B plain / {met.index_bytes}B encrypted")
        lines.append(f"  plain query {met.plain_query_time_ms:.3f} ms; "
                     f"xi>=0.90 for {100 * frac:.1f}% of queries, min xi {lo:.3f}")
        lines.append("  depth  precision  query_ms  token_B  token_ms")
        for d in sorted(met.precision):
            lines.append(f"  {d:5d}  {met.precision[d]:9.4f}  {met.query_time_ms.get(d, float('nan')):8.3f}"
                         f"  {met.token_bytes.get(d, 0):7d}  {met.token_time_ms.get(d, float('nan')):8.3f}")
    return ("\n".join(lines) + "\n").encode()
