"""Keyed PRFs, order-revealing encryption, and the SWHE backend contract.

``prf_h`` is HMAC-SHA256 truncated to 128 bits; ``prf_g`` is an AES-CTR
keystream. The ORE is the
comparison-digit scheme with limited leakage (one ternary digit per
plaintext bit, keyed on the bit prefix), over a fixed 64-bit domain, so a
ciphertext packs 64 two-bit digits into 16 bytes.

The SWHE backend is pluggable. :class:`TransparentSwhe` is the reference
backend: it carries the plaintext in the clear next to a random nonce and
exists only so the homomorphic arithmetic can be checked exactly at desk
scale. It provides no confidentiality whatsoever. :class:`IntegerSwhe` is
a noisy scheme over the integers whose multiplications cost what big
modular products cost; it is for timing studies, with toy parameters.
"""
from __future__ import annotations

import enum
import hashlib
import hmac
import secrets
import struct
from dataclasses import dataclass
from typing import Protocol

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

LAMBDA = 128
LAMBDA_BYTES = LAMBDA // 8
ORE_BITS = 64
ORE_K = 2 * ORE_BITS          # ciphertext width in bits
ORE_BYTES = ORE_K // 8
DEFAULT_Z = 2048


class CryptoError(ValueError):
    pass


def keygen_prf() -> bytes:
    return secrets.token_bytes(LAMBDA_BYTES)


def prf_h(key: bytes, msg: bytes) -> bytes:
    """h: {0,1}^128 x {0,1}^* -> {0,1}^128."""
    return hmac.digest(key, msg, "sha256")[:LAMBDA_BYTES]


def prf_g(key: bytes, msg: bytes, nbytes: int) -> bytes:
    """g: extendable keyed output; AES-128-CTR keystream, nonce = BLAKE2b(msg) with a 32-bit block counter."""
    if len(key) != LAMBDA_BYTES:
        raise CryptoError("prf_g needs a 16-byte key")
    nonce = hashlib.blake2b(msg, digest_size=12).digest() + bytes(4)
    enc = Cipher(algorithms.AES(key), modes.CTR(nonce)).encryptor()
    return enc.update(bytes(nbytes)) + enc.finalize()


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise CryptoError(f"xor width mismatch: {len(a)} vs {len(b)}")
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


# --- order-revealing encryption ---

class Order(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def ore_encrypt(key: bytes, m: int) -> bytes:
    """Encrypt a 64-bit integer; digit i is ``F(key, i || top i bits of m) + bit_i mod 3``."""
    if not 0 <= m < 1 << ORE_BITS:
        raise CryptoError(f"ORE plaintext {m} outside [0, 2^{ORE_BITS})")
    acc = 0
    for i in range(ORE_BITS):
        prefix = m >> (ORE_BITS - i)
        bit = (m >> (ORE_BITS - 1 - i)) & 1
        f = hashlib.blake2b(struct.pack(">BQ", i, prefix), key=key, digest_size=8).digest()
        acc = (acc << 2) | ((int.from_bytes(f, "big") + bit) % 3)
    return acc.to_bytes(ORE_BYTES, "big")


def ore_compare(c1: bytes, c2: bytes) -> Order:
    """Order of the plaintexts behind two ciphertexts under the same key."""
    if len(c1) != ORE_BYTES or len(c2) != ORE_BYTES:
        raise CryptoError("ORE ciphertext width mismatch")
    a = int.from_bytes(c1, "big")
    b = int.from_bytes(c2, "big")
    diff = a ^ b
    if not diff:
        return Order.EQUAL
    shift = ((diff.bit_length() - 1) // 2) * 2
    da = (a >> shift) & 3
    db = (b >> shift) & 3
    return Order.GREATER if (da - db) % 3 == 1 else Order.LESS


# --- somewhat homomorphic encryption ---

FRESH, PRODUCT = 0, 1


@dataclass(frozen=True)
class SwheCiphertext:
    blob: bytes
    level: int


@dataclass(frozen=True)
class SwheKeyPair:
    pk: bytes
    sk: bytes


class SwheBackend(Protocol):
    name: str
    z: int
    message_bits: int

    def keygen(self) -> SwheKeyPair: ...
    def encrypt(self, pk: bytes, m: int) -> SwheCiphertext: ...
    def decrypt(self, sk: bytes, c: SwheCiphertext) -> int: ...
    def add(self, c1: SwheCiphertext, c2: SwheCiphertext) -> SwheCiphertext: ...
    def mul(self, c1: SwheCiphertext, c2: SwheCiphertext) -> SwheCiphertext: ...
    def sum_products(self, pairs) -> SwheCiphertext: ...
    def from_bytes(self, data: bytes) -> SwheCiphertext: ...


class TransparentSwhe:
    """Arithmetic-faithful, deliberately insecure SWHE reference backend.

    Ciphertext layout in a ``z``-bit slot: 1 level byte, 16 nonce bytes, then
    the message as a big-endian integer filling the rest. Additions are
    unlimited; one multiplication level is allowed, as with BGN.
    """

    name = "transparent"
    HEADER = 1 + 16

    def __init__(self, z: int = DEFAULT_Z):
        if z % 8 or z // 8 <= self.HEADER:
            raise CryptoError(f"bad SWHE width z={z}")
        self.z = z
        self.zbytes = z // 8
        self.message_bits = 8 * (self.zbytes - self.HEADER)

    def keygen(self) -> SwheKeyPair:
        tag = secrets.token_bytes(16)
        return SwheKeyPair(pk=b"TRSP" + tag, sk=b"TRSP" + tag)

    def _pack(self, m: int, level: int, nonce: bytes | None = None) -> SwheCiphertext:
        if m < 0 or m.bit_length() > self.message_bits:
            raise CryptoError(f"message of {m.bit_length()} bits exceeds the {self.message_bits}-bit field")
        nonce = nonce if nonce is not None else secrets.token_bytes(16)
        blob = bytes([level]) + nonce + m.to_bytes(self.zbytes - self.HEADER, "big")
        return SwheCiphertext(blob, level)

    def _unpack(self, c: SwheCiphertext) -> int:
        if len(c.blob) != self.zbytes:
            raise CryptoError("SWHE ciphertext width mismatch")
        return int.from_bytes(c.blob[self.HEADER:], "big")

    @staticmethod
    def _derived_nonce(op: bytes, c1: SwheCiphertext, c2: SwheCiphertext) -> bytes:
        # evaluation is deterministic in its inputs, like the real schemes
        return hashlib.blake2b(op + c1.blob[1:17] + c2.blob[1:17], digest_size=16).digest()

    def encrypt(self, pk: bytes, m: int) -> SwheCiphertext:
        return self._pack(m, FRESH)

    def decrypt(self, sk: bytes, c: SwheCiphertext) -> int:
        return self._unpack(c)

    def add(self, c1: SwheCiphertext, c2: SwheCiphertext) -> SwheCiphertext:
        if c1.level != c2.level:
            raise CryptoError("cannot add ciphertexts of different levels")
        return self._pack(self._unpack(c1) + self._unpack(c2), c1.level, self._derived_nonce(b"+", c1, c2))

    def mul(self, c1: SwheCiphertext, c2: SwheCiphertext) -> SwheCiphertext:
        if c1.level != FRESH or c2.level != FRESH:
            raise CryptoError("only fresh ciphertexts can be multiplied")
        return self._pack(self._unpack(c1) * self._unpack(c2), PRODUCT, self._derived_nonce(b"*", c1, c2))

    def sum_products(self, pairs) -> SwheCiphertext:
        """Sum of ``mul(a, b)`` over ``pairs``; needs at least one pair."""
        total = None
        for a, b in pairs:
            p = self.mul(a, b)
            total = p if total is None else self.add(total, p)
        if total is None:
            raise CryptoError("empty sum")
        return total

    def to_bytes(self, c: SwheCiphertext) -> bytes:
        return c.blob

    def from_bytes(self, data: bytes) -> SwheCiphertext:
        if len(data) != self.zbytes:
            raise CryptoError("SWHE ciphertext width mismatch")
        return SwheCiphertext(bytes(data), data[0])


def z_for(N: int, max_terms_log2: int = 20) -> int:
    """Smallest slot width (multiple of 256 bits, at least the default) whose
    message field holds ``2^(2N + max_terms_log2)``."""
    need = 2 * N + max_terms_log2 + 1 + 8 * TransparentSwhe.HEADER
    z = DEFAULT_Z
    while z < need:
        z += 256
    return z


class IntegerSwhe:
    """Somewhat homomorphic encryption over the integers, one product level.

    Secret odd ``p``; public ``x0 = p*q0`` and ``tau`` encryptions of zero
    ``x_i = p*q_i + M*r_i``. A message ``m < M = 2^message_bits`` encrypts to
    ``m + M*r + sum(random subset of x_i) mod x0`` and decrypts as
    ``(c mod p) mod M``. ``p`` is sized so that a sum of up to
    ``2^max_terms_log2`` products still has its noise below ``p``.

    The parameters are far too small for the approximate-GCD problem to be
    hard. What is faithful is the arithmetic and its cost: evaluation runs
    real multiplications modulo a ``gamma``-bit ``x0``.
    """

    name = "integer"

    def __init__(self, message_bits: int, rho: int = 64, tau: int = 8, expand: int = 4,
                 max_terms_log2: int = 20, pk: bytes | None = None):
        if message_bits < 8 or rho < 8 or tau < 1 or expand < 2:
            raise CryptoError("bad integer SWHE parameters")
        self.message_bits = message_bits
        self.rho, self.tau = rho, tau
        noise = message_bits + rho + (tau + 2).bit_length()
        self.eta = 2 * noise + max_terms_log2 + 64
        self.gamma = expand * self.eta
        self.zbytes = 1 + (self.gamma + 7) // 8
        self.z = 8 * self.zbytes
        self.M = 1 << message_bits
        self._x0: int | None = None
        self._xs: list[int] = []
        self._pk: bytes | None = None
        self._sk_cache: tuple[bytes, int] | None = None
        if pk is not None:
            self.bind(pk)

    @classmethod
    def for_N(cls, N: int, max_terms_log2: int = 20, **kw) -> "IntegerSwhe":
        return cls(2 * N + max_terms_log2 + 1, max_terms_log2=max_terms_log2, **kw)

    def _int(self, b: bytes) -> int:
        return int.from_bytes(b, "big")

    def keygen(self) -> SwheKeyPair:
        rng = secrets.SystemRandom()
        p = rng.getrandbits(self.eta) | (1 << (self.eta - 1)) | 1
        qbits = self.gamma - self.eta
        q0 = rng.getrandbits(qbits) | (1 << (qbits - 1))
        x0 = p * q0
        xs = [p * rng.randrange(q0 // 2) + self.M * rng.getrandbits(self.rho) for _ in range(self.tau)]
        w = (self.gamma + 7) // 8
        pk = b"".join(x.to_bytes(w, "big") for x in [x0, *xs])
        sk = p.to_bytes((self.eta + 7) // 8, "big")
        self.bind(pk)
        return SwheKeyPair(pk=pk, sk=sk)

    def bind(self, pk: bytes) -> None:
        """Attach a public key; evaluation needs ``x0``."""
        if pk == self._pk:
            return
        w = (self.gamma + 7) // 8
        if len(pk) != w * (self.tau + 1):
            raise CryptoError("integer SWHE public key has the wrong length")
        vals = [self._int(pk[i:i + w]) for i in range(0, len(pk), w)]
        self._x0, self._xs, self._pk = vals[0], vals[1:], pk

    def _need_pk(self) -> int:
        if self._x0 is None:
            raise CryptoError("no public key bound")
        return self._x0

    def _pack(self, c: int, level: int) -> SwheCiphertext:
        return SwheCiphertext(bytes([level]) + c.to_bytes(self.zbytes - 1, "big"), level)

    def _unpack(self, c: SwheCiphertext) -> int:
        if len(c.blob) != self.zbytes:
            raise CryptoError("SWHE ciphertext width mismatch")
        return self._int(c.blob[1:])

    def encrypt(self, pk: bytes, m: int) -> SwheCiphertext:
        self.bind(pk)
        x0 = self._need_pk()
        if not 0 <= m < self.M:
            raise CryptoError(f"message of {m.bit_length()} bits exceeds the {self.message_bits}-bit field")
        rng = secrets.SystemRandom()
        c = m + self.M * rng.getrandbits(self.rho)
        for x in self._xs:
            if rng.getrandbits(1):
                c += x
        return self._pack(c % x0, FRESH)

    def decrypt(self, sk: bytes, c: SwheCiphertext) -> int:
        if self._sk_cache is None or self._sk_cache[0] != sk:
            self._sk_cache = (sk, self._int(sk))
        return (self._unpack(c) % self._sk_cache[1]) % self.M

    def add(self, c1: SwheCiphertext, c2: SwheCiphertext) -> SwheCiphertext:
        if c1.level != c2.level:
            raise CryptoError("cannot add ciphertexts of different levels")
        return self._pack((self._unpack(c1) + self._unpack(c2)) % self._need_pk(), c1.level)

    def mul(self, c1: SwheCiphertext, c2: SwheCiphertext) -> SwheCiphertext:
        if c1.level != FRESH or c2.level != FRESH:
            raise CryptoError("only fresh ciphertexts can be multiplied")
        return self._pack(self._unpack(c1) * self._unpack(c2) % self._need_pk(), PRODUCT)

    def sum_products(self, pairs) -> SwheCiphertext:
        x0 = self._need_pk()
        total, count = 0, 0
        for a, b in pairs:
            if a.level != FRESH or b.level != FRESH:
                raise CryptoError("only fresh ciphertexts can be multiplied")
            total = (total + self._unpack(a) * self._unpack(b)) % x0
            count += 1
        if not count:
            raise CryptoError("empty sum")
        return self._pack(total, PRODUCT)

    def to_bytes(self, c: SwheCiphertext) -> bytes:
        return c.blob

    def from_bytes(self, data: bytes) -> SwheCiphertext:
        if len(data) != self.zbytes:
            raise CryptoError("SWHE ciphertext width mismatch")
        return SwheCiphertext(bytes(data), data[0])
