"""Client token generation, server-side query execution, client-side recovery.

The server only ever sees the encrypted index and tokens. For a token it
walks the out-slots of s and the in-slots of t (counter w = 0, 1, ... until
a slot is missing), unmasks each record, pairs entries sharing the same
encrypted hub V, filters the pairs with the cost tree, and returns the
homomorphic sum of ``D_sv * D_vt`` over the admitted pairs.

Distances are encoded as ``2^(N-d)``, so a product encodes ``2^(2N - d_sv
- d_vt)`` and the sum is dominated by the shortest admitted pair. The
client recovers ``2N - floor(log2 m)``, which underestimates the minimum by
at most ``floor(log2 |Y|)``.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import NamedTuple

from .crypto import LAMBDA_BYTES, ORE_BITS, CryptoError, SwheBackend, SwheCiphertext, TransparentSwhe, prf_g, prf_h, xor_bytes
from .oracle import CsdQuery
from .secure_index import ClientKeys, EncryptedIndex, counter, ore_key, split_record, vertex_labels
from .tree import CostTree, Verdict, build_tree, path_code, verdict_from_codes

FLAG_EMPTY = 0x01
FLAG_HIDDEN_Y = 0x02


@dataclass(frozen=True)
class QueryToken:
    s_out: bytes
    t_out: bytes
    s_in: bytes
    t_in: bytes
    tree: CostTree

    def to_bytes(self) -> bytes:
        return self.s_out + self.t_out + self.s_in + self.t_in + self.tree.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "QueryToken":
        if len(data) < 4 * LAMBDA_BYTES + 1:
            raise ValueError("token too short")
        parts = [data[i * LAMBDA_BYTES:(i + 1) * LAMBDA_BYTES] for i in range(4)]
        return cls(*parts, CostTree.from_bytes(data[4 * LAMBDA_BYTES:]))


def token_size(depth: int, k: int = 128) -> int:
    return 4 * LAMBDA_BYTES + 1 + ((1 << depth) - 1) * (k // 8)


def gen_token(keys: ClientKeys, q: CsdQuery, depth: int = 6, labels: list[str] | None = None) -> QueryToken:
    """Token for ``q``; ``labels`` maps vertex indices to the labels used at setup."""
    if keys.phi < 1 << depth:
        raise ValueError(f"phi={keys.phi} must be at least 2^depth = {1 << depth}")
    theta_amp = keys.phi * q.theta
    if not 0 <= theta_amp < 1 << ORE_BITS:
        raise CryptoError("phi * theta leaves the 64-bit ORE domain")
    s_lab = labels[q.s] if labels is not None else str(q.s)
    t_lab = labels[q.t] if labels is not None else str(q.t)
    vs = vertex_labels(keys.K, s_lab)
    vt = vertex_labels(keys.K, t_lab)
    return QueryToken(vs.s_out, vs.t_out, vt.s_in, vt.t_in, build_tree(ore_key(keys.K), theta_amp, depth))


class UnrolledEntry(NamedTuple):
    w: int
    V: bytes
    D: bytes
    C: bytes


def unroll_sketch(enc: EncryptedIndex, t_label: bytes, s_label: bytes, side: str) -> list[UnrolledEntry]:
    """Walk the slots of one sketch until the first missing key."""
    table = enc.i_out if side == "out" else enc.i_in
    rec = enc.record_bytes
    out = []
    w = 0
    while (key := prf_h(t_label, counter(w))) in table:
        V, D, C = split_record(enc, xor_bytes(table[key], prf_g(s_label, counter(w), rec)))
        out.append(UnrolledEntry(w, V, D, C))
        w += 1
    return out


class CandidatePair(NamedTuple):
    w_out: int
    w_in: int
    d_sv: bytes
    d_vt: bytes
    verdict: Verdict


def filter_candidates(enc: EncryptedIndex, tok: QueryToken) -> list[CandidatePair]:
    """All hub-matched pairs with their verdicts (admitted or not)."""
    ls = unroll_sketch(enc, tok.t_out, tok.s_out, "out")
    lt = unroll_sketch(enc, tok.t_in, tok.s_in, "in")
    by_hub: dict[bytes, list[UnrolledEntry]] = {}
    for e in ls:
        by_hub.setdefault(e.V, []).append(e)
    codes: dict[bytes, int] = {}

    def code(C: bytes) -> int:
        if C not in codes:
            codes[C] = path_code(tok.tree, C)
        return codes[C]

    pairs = []
    for et in lt:
        for es in by_hub.get(et.V, ()):
            v = verdict_from_codes(code(es.C), code(et.C), tok.tree.depth)
            pairs.append(CandidatePair(es.w, et.w, es.D, et.D, v))
    return pairs


@dataclass(frozen=True)
class EncryptedResult:
    d: SwheCiphertext | None
    y_size: int
    hide_y: bool = False

    @property
    def empty(self) -> bool:
        return self.d is None

    def to_bytes(self) -> bytes:
        flags = (FLAG_EMPTY if self.d is None else 0) | (FLAG_HIDDEN_Y if self.hide_y else 0)
        body = b"" if self.d is None else self.d.blob
        return struct.pack(">BI", flags, 0 if self.hide_y else self.y_size) + body

    @classmethod
    def from_bytes(cls, data: bytes, z: int) -> "EncryptedResult":
        if len(data) < 5:
            raise ValueError("result too short")
        flags, y = struct.unpack_from(">BI", data)
        body = data[5:]
        if flags & FLAG_EMPTY:
            if body:
                raise ValueError("empty result carries a ciphertext")
            return cls(None, y, bool(flags & FLAG_HIDDEN_Y))
        if len(body) != z // 8:
            raise ValueError("result ciphertext width mismatch")
        return cls(SwheCiphertext(bytes(body), body[0]), y, bool(flags & FLAG_HIDDEN_Y))


def admitted(pairs: list[CandidatePair]) -> list[CandidatePair]:
    return [p for p in pairs if p.verdict is not Verdict.GREATER]


def server_query(enc: EncryptedIndex, tok: QueryToken, swhe: SwheBackend | None = None,
                 hide_y: bool = False) -> EncryptedResult:
    swhe = swhe or TransparentSwhe(enc.z)
    y = admitted(filter_candidates(enc, tok))
    if not y:
        return EncryptedResult(None, 0, hide_y)
    total = swhe.sum_products((swhe.from_bytes(p.d_sv), swhe.from_bytes(p.d_vt)) for p in y)
    return EncryptedResult(total, len(y), hide_y)


def recover_distance(sk: bytes, res: EncryptedResult, N: int, swhe: SwheBackend) -> int | None:
    if res.d is None:
        return None
    m = swhe.decrypt(sk, res.d)
    if m == 0:
        return None
    if m.bit_length() > 2 * N + 64:
        raise CryptoError("decrypted sum exceeds any plausible candidate count")
    return 2 * N - (m.bit_length() - 1)


def recover_from_sums(sums, N: int) -> int | None:
    """Recovery applied to plaintext pair sums; the reference for the encrypted path."""
    m = sum(1 << (2 * N - d) for d in sums)
    return None if m == 0 else 2 * N - (m.bit_length() - 1)
