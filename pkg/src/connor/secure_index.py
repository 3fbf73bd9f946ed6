"""Encrypted dictionary index built from a plaintext labeling.

Every sketch entry lands in its own dictionary slot. For vertex u the
client derives four labels from the master key K::

    S_out,u = h(K, u||1)   T_out,u = h(K, u||2)
    S_in,u  = h(K, u||3)   T_in,u  = h(K, u||4)

and the w-th out-entry (v, d, c) is stored as::

    I_out[h(T_out,u, w)] = g(S_out,u, w) XOR (V || D || C)

with ``V = h(K, v||0)``, ``D = SWHE.Enc(2^(N-d))``, ``C = ORE.Enc(phi*c)``
and ``N = 2B + 1`` for B the largest sketch distance. In-entries mirror
this with the in-labels.
"""
from __future__ import annotations

import io
import secrets
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .crypto import (LAMBDA, LAMBDA_BYTES, ORE_BITS, ORE_BYTES, ORE_K, CryptoError, Order, SwheBackend,
                     SwheCiphertext, SwheKeyPair, TransparentSwhe, keygen_prf, ore_compare, ore_encrypt, prf_g,
                     prf_h, xor_bytes, z_for)
from .graph import Graph
from .labeling import LabelIndex, SketchEntry

INDEX_MAGIC = b"CNE1"
INDEX_VERSION = 1
SWHE_HEADROOM_BITS = 20


class IndexError_(ValueError):
    """Integrity or format failure of an encrypted index."""


def vertex_key(label: str, tag: int) -> bytes:
    """PRF input ``u || tag``: the vertex's external label bytes then one tag byte."""
    return label.encode("utf-8") + bytes([tag])


def counter(w: int) -> bytes:
    return struct.pack(">Q", w)


def ore_key(K: bytes) -> bytes:
    """Separate key for the ORE digit PRF, derived from K."""
    return prf_h(K, b"ore")


@dataclass
class ClientKeys:
    K: bytes
    swhe: SwheKeyPair
    phi: int


def keygen(lam: int = LAMBDA, swhe: SwheBackend | None = None, phi: int | None = None) -> ClientKeys:
    """Fresh K, SWHE key pair and amplification factor phi.

    phi defaults to a uniform draw from [2^20, 2^24].
    """
    if lam != LAMBDA:
        raise ValueError("only lambda = 128 is supported")
    swhe = swhe or TransparentSwhe()
    if phi is None:
        phi = (1 << 20) + secrets.randbelow((1 << 24) - (1 << 20) + 1)
    return ClientKeys(keygen_prf(), swhe.keygen(), phi)


@dataclass(frozen=True)
class SetupParams:
    alpha: Fraction
    phi: int
    B: int
    z: int
    k: int = ORE_K
    lam: int = LAMBDA
    max_depth: int = 8

    @property
    def N(self) -> int:
        return 2 * self.B + 1

    @property
    def record_bytes(self) -> int:
        return (self.lam + self.z + self.k) // 8


class VertexLabels(NamedTuple):
    s_out: bytes
    t_out: bytes
    s_in: bytes
    t_in: bytes


def vertex_labels(K: bytes, label: str) -> VertexLabels:
    return VertexLabels(*(prf_h(K, vertex_key(label, tag)) for tag in (1, 2, 3, 4)))


def hub_label(K: bytes, label: str) -> bytes:
    return prf_h(K, vertex_key(label, 0))


@dataclass
class EncryptedIndex:
    lam: int
    z: int
    k: int
    N: int
    i_out: dict[bytes, bytes] = field(default_factory=dict)
    i_in: dict[bytes, bytes] = field(default_factory=dict)

    @property
    def record_bytes(self) -> int:
        return (self.lam + self.z + self.k) // 8

    def __eq__(self, other):
        if not isinstance(other, EncryptedIndex):
            return NotImplemented
        return ((self.lam, self.z, self.k, self.N, self.i_out, self.i_in)
                == (other.lam, other.z, other.k, other.N, other.i_out, other.i_in))


def check_params(params: SetupParams, idx: LabelIndex, swhe: SwheBackend) -> None:
    if params.B != idx.max_dist_B:
        raise ValueError(f"params.B={params.B} but the index has B={idx.max_dist_B}")
    if params.phi < (1 << params.max_depth):
        raise ValueError(f"phi={params.phi} must be at least 2^{params.max_depth}")
    max_cost = max((e.cost for side in (idx.delta_out, idx.delta_in) for sk in side for e in sk), default=0)
    if params.phi * max_cost >= 1 << ORE_BITS:
        raise CryptoError("phi * max cost leaves the 64-bit ORE domain")
    if params.z != swhe.z:
        raise ValueError("params.z does not match the SWHE backend width")
    if 2 * params.N + SWHE_HEADROOM_BITS >= swhe.message_bits:
        raise CryptoError(
            f"2^(2N+{SWHE_HEADROOM_BITS}) with N={params.N} does not fit the {swhe.message_bits}-bit "
            "SWHE message field; use a larger z, a smaller graph or smaller weights")


def _payload(K: bytes, keys: ClientKeys, swhe: SwheBackend, okey: bytes, N: int,
             labels: list[str], e: SketchEntry) -> bytes:
    V = hub_label(K, labels[e.hub])
    D = swhe.to_bytes(swhe.encrypt(keys.swhe.pk, 1 << (N - e.dist)))
    C = ore_encrypt(okey, keys.phi * e.cost)
    return V + D + C


def setup(keys: ClientKeys, params: SetupParams, idx: LabelIndex, labels: list[str] | None = None,
          swhe: SwheBackend | None = None) -> EncryptedIndex:
    """Encrypt ``idx`` into the split dictionary index.

    ``labels`` are the vertices' external labels (defaults to ``str(i)``);
    they must match what the client later uses to build tokens.
    """
    swhe = swhe or TransparentSwhe(params.z)
    check_params(params, idx, swhe)
    labels = labels if labels is not None else [str(i) for i in range(idx.n)]
    K = keys.K
    okey = ore_key(K)
    N = params.N
    rec = params.record_bytes
    enc = EncryptedIndex(params.lam, params.z, params.k, N)
    for u in range(idx.n):
        vl = vertex_labels(K, labels[u])
        for sketch, s_lab, t_lab, table in ((idx.delta_out[u], vl.s_out, vl.t_out, enc.i_out),
                                            (idx.delta_in[u], vl.s_in, vl.t_in, enc.i_in)):
            for w, e in enumerate(sketch):
                key = prf_h(t_lab, counter(w))
                if key in table:
                    raise IndexError_("dictionary key collision")
                table[key] = xor_bytes(prf_g(s_lab, counter(w), rec),
                                       _payload(K, keys, swhe, okey, N, labels, e))
    return enc


def setup_unsplit(keys: ClientKeys, params: SetupParams, idx: LabelIndex, labels: list[str] | None = None,
                  swhe: SwheBackend | None = None) -> tuple[dict, dict]:
    """The straightforward variant: one unmasked list per vertex under ``h(K, u||1)`` / ``h(K, u||2)``.

    Leaks sketch sizes and cost order; kept only to cross-check the split index.
    """
    swhe = swhe or TransparentSwhe(params.z)
    check_params(params, idx, swhe)
    labels = labels if labels is not None else [str(i) for i in range(idx.n)]
    okey = ore_key(keys.K)
    i_out: dict[bytes, list] = {}
    i_in: dict[bytes, list] = {}
    for u in range(idx.n):
        t_out = prf_h(keys.K, vertex_key(labels[u], 1))
        t_in = prf_h(keys.K, vertex_key(labels[u], 2))
        i_out[t_out] = [_payload(keys.K, keys, swhe, okey, params.N, labels, e) for e in idx.delta_out[u]]
        i_in[t_in] = [_payload(keys.K, keys, swhe, okey, params.N, labels, e) for e in idx.delta_in[u]]
    return i_out, i_in


def params_for(idx: LabelIndex, phi: int, z: int | None = None, max_depth: int = 8) -> SetupParams:
    """Setup parameters for ``idx``; ``z`` defaults to the smallest slot that fits 2^(2N+20)."""
    B = idx.max_dist_B
    return SetupParams(idx.alpha, phi, B, z if z is not None else z_for(2 * B + 1, SWHE_HEADROOM_BITS),
                       max_depth=max_depth)


class LeakageProfile(NamedTuple):
    n: int
    B: int
    omega_out: int
    omega_in: int


def leakage_profile(idx: LabelIndex, enc: EncryptedIndex) -> LeakageProfile:
    omega_out, omega_in = idx.size
    if omega_out != len(enc.i_out) or omega_in != len(enc.i_in):
        raise IndexError_(f"entry counts ({omega_out}, {omega_in}) do not match dictionary sizes "
                          f"({len(enc.i_out)}, {len(enc.i_in)})")
    return LeakageProfile(idx.n, idx.max_dist_B, omega_out, omega_in)


def split_record(enc: EncryptedIndex, plain: bytes) -> tuple[bytes, bytes, bytes]:
    zb = enc.z // 8
    return plain[:LAMBDA_BYTES], plain[LAMBDA_BYTES:LAMBDA_BYTES + zb], plain[LAMBDA_BYTES + zb:]


def decode_index(enc: EncryptedIndex, keys: ClientKeys, labels: list[str],
                 swhe: SwheBackend | None = None, alpha=Fraction(1)) -> LabelIndex:
    """Unmask and decrypt the whole index with the client keys.

    Hubs come back by matching V against ``h(K, v||0)``, distances from the
    exponent of the decrypted power of two, and costs by binary search with
    ORE comparisons against fresh encryptions of ``phi * c``.
    """
    swhe = swhe or TransparentSwhe(enc.z)
    K = keys.K
    okey = ore_key(K)
    hubs = {hub_label(K, lab): i for i, lab in enumerate(labels)}
    enc_cache: dict[int, bytes] = {}
    rec = enc.record_bytes
    cost_hi = ((1 << ORE_BITS) - 1) // keys.phi

    def enc_cost(c: int) -> bytes:
        if c not in enc_cache:
            enc_cache[c] = ore_encrypt(okey, keys.phi * c)
        return enc_cache[c]

    def cost_for(C: bytes) -> int:
        lo, hi = 0, cost_hi
        while lo < hi:
            mid = (lo + hi) // 2
            if ore_compare(C, enc_cost(mid)) is Order.GREATER:
                lo = mid + 1
            else:
                hi = mid
        if enc_cost(lo) != C:
            raise IndexError_("cost ciphertext is not an encryption of phi * c")
        return lo

    delta_out, delta_in = [], []
    for lab in labels:
        vl = vertex_labels(K, lab)
        for s_lab, t_lab, table, side in ((vl.s_out, vl.t_out, enc.i_out, delta_out),
                                          (vl.s_in, vl.t_in, enc.i_in, delta_in)):
            entries = []
            w = 0
            while (key := prf_h(t_lab, counter(w))) in table:
                V, D, C = split_record(enc, xor_bytes(table[key], prf_g(s_lab, counter(w), rec)))
                if V not in hubs:
                    raise IndexError_(f"unknown hub label in entry {w} of vertex {lab}")
                m = swhe.decrypt(keys.swhe.sk, swhe.from_bytes(D))
                if m <= 0 or m & (m - 1):
                    raise IndexError_("distance field is not a power of two")
                entries.append(SketchEntry(hubs[V], enc.N - (m.bit_length() - 1), cost_for(C)))
                w += 1
            side.append(entries)
    return LabelIndex(delta_out, delta_in, Fraction(alpha))


def serialize_index(enc: EncryptedIndex) -> bytes:
    buf = io.BytesIO()
    buf.write(INDEX_MAGIC)
    buf.write(struct.pack("<HIIIIQQ", INDEX_VERSION, enc.lam, enc.z, enc.k, enc.N, len(enc.i_out), len(enc.i_in)))
    rec = enc.record_bytes
    for table in (enc.i_out, enc.i_in):
        for key, val in table.items():
            if len(key) != LAMBDA_BYTES or len(val) != rec:
                raise IndexError_("record width mismatch")
            buf.write(key)
            buf.write(val)
    return buf.getvalue()


HEADER = struct.Struct("<HIIIIQQ")


def deserialize_index(data: bytes) -> EncryptedIndex:
    if data[:4] != INDEX_MAGIC:
        raise IndexError_("bad magic, not a CNE1 encrypted index")
    if len(data) < 4 + HEADER.size:
        raise IndexError_("truncated header")
    version, lam, z, k, N, n_out, n_in = HEADER.unpack_from(data, 4)
    if version != INDEX_VERSION:
        raise IndexError_(f"unsupported index version {version}")
    enc = EncryptedIndex(lam, z, k, N)
    rec = enc.record_bytes
    pos = 4 + HEADER.size
    if len(data) != pos + (LAMBDA_BYTES + rec) * (n_out + n_in):
        raise IndexError_("index body size does not match its header")
    for table, count in ((enc.i_out, n_out), (enc.i_in, n_in)):
        for _ in range(count):
            key = data[pos:pos + LAMBDA_BYTES]
            table[key] = data[pos + LAMBDA_BYTES:pos + LAMBDA_BYTES + rec]
            pos += LAMBDA_BYTES + rec
    return enc


def index_file_size(enc: EncryptedIndex) -> int:
    return 4 + HEADER.size + (LAMBDA_BYTES + enc.record_bytes) * (len(enc.i_out) + len(enc.i_in))
