"""Client-side keystore file (``CNK1``).

Layout, little-endian: magic, u64 phi, u32 N, u32 z, 16-byte K,
u32 len + SWHE secret key, u32 len + SWHE public key. N and z are kept so
the client can parse and decode results without the index.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

from ..crypto import LAMBDA_BYTES, SwheKeyPair
from ..secure_index import ClientKeys

KEYSTORE_MAGIC = b"CNK1"


@dataclass
class Keystore:
    keys: ClientKeys
    N: int = 0
    z: int = 0

    def to_bytes(self) -> bytes:
        k = self.keys
        return (KEYSTORE_MAGIC + struct.pack("<QII", k.phi, self.N, self.z) + k.K
                + struct.pack("<I", len(k.swhe.sk)) + k.swhe.sk
                + struct.pack("<I", len(k.swhe.pk)) + k.swhe.pk)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Keystore":
        if data[:4] != KEYSTORE_MAGIC:
            raise ValueError("bad magic, not a CNK1 keystore")
        try:
            phi, N, z = struct.unpack_from("<QII", data, 4)
            pos = 20
            K = data[pos:pos + LAMBDA_BYTES]
            pos += LAMBDA_BYTES
            (n_sk,) = struct.unpack_from("<I", data, pos)
            sk = data[pos + 4:pos + 4 + n_sk]
            pos += 4 + n_sk
            (n_pk,) = struct.unpack_from("<I", data, pos)
            pk = data[pos + 4:pos + 4 + n_pk]
            pos += 4 + n_pk
        except struct.error:
            raise ValueError("truncated keystore") from None
        if len(K) != LAMBDA_BYTES or len(sk) != n_sk or len(pk) != n_pk or pos != len(data):
            raise ValueError("malformed keystore")
        return cls(ClientKeys(K, SwheKeyPair(pk=pk, sk=sk), phi), N, z)
