"""Cost constraint tree and the tree-based sum comparison.

The tree for budget ``theta`` at depth d holds the ORE ciphertexts of the
boundaries ``floor(j * theta / 2^d)`` for ``j = 1 .. 2^d - 1``, root at
``j = 2^(d-1)``. Descending with E(x) yields a d-bit path code c with
``b(c) < x <= b(c+1)``. Summing two codes decides ``x + y`` against theta:
a sum of at least ``2^d`` means greater, at most ``2^d - 2`` means not
greater, and exactly ``2^d - 1`` is undecided.

Both certain verdicts are exact for any integers x, y because
``floor(j*theta/2^d) + 1 > j*theta/2^d``.
"""
from __future__ import annotations

import enum
import io
from dataclasses import dataclass

from .crypto import ORE_BITS, ORE_BYTES, CryptoError, Order, ore_compare, ore_encrypt

MAX_DEPTH = 8


class Verdict(enum.Enum):
    GREATER = ">"
    LESS_EQ = "<="
    UNCERTAIN = "?"


def boundaries(theta_amp: int, depth: int) -> list[int]:
    """In-order plaintext boundaries of the tree."""
    return [(j * theta_amp) >> depth for j in range(1, 1 << depth)]


def level_order(depth: int) -> list[int]:
    """In-order positions ``j`` listed level by level (root first)."""
    out = []
    for level in range(depth):
        step = 1 << (depth - level)
        out.extend(range(step >> 1, 1 << depth, step))
    return out


@dataclass(frozen=True)
class CostTree:
    depth: int
    nodes: tuple[bytes, ...]   # level order, 2^depth - 1 ORE ciphertexts

    def __post_init__(self):
        if not 1 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"tree depth {self.depth} outside [1, {MAX_DEPTH}]")
        if len(self.nodes) != (1 << self.depth) - 1:
            raise ValueError("node count does not match depth")

    def to_bytes(self) -> bytes:
        return bytes([self.depth]) + b"".join(self.nodes)

    @classmethod
    def from_bytes(cls, data: bytes) -> "CostTree":
        if not data:
            raise ValueError("empty tree encoding")
        depth = data[0]
        count = (1 << depth) - 1
        if len(data) != 1 + count * ORE_BYTES:
            raise ValueError(f"tree of depth {depth} needs {1 + count * ORE_BYTES} bytes, got {len(data)}")
        nodes = tuple(data[1 + i * ORE_BYTES:1 + (i + 1) * ORE_BYTES] for i in range(count))
        return cls(depth, nodes)


def build_tree(ore_key: bytes, theta_amp: int, depth: int) -> CostTree:
    if not 1 <= depth <= MAX_DEPTH:
        raise ValueError(f"tree depth {depth} outside [1, {MAX_DEPTH}]")
    if not 0 <= theta_amp < 1 << ORE_BITS:
        raise CryptoError(f"amplified budget {theta_amp} outside the ORE domain")
    bounds = boundaries(theta_amp, depth)
    nodes = tuple(ore_encrypt(ore_key, bounds[j - 1]) for j in level_order(depth))
    return CostTree(depth, nodes)


def path_code(tree: CostTree, ex: bytes) -> int:
    """Descend from the root: not greater than the node goes left (0), else right (1)."""
    code = 0
    i = 0   # 0-based level-order position
    for _ in range(tree.depth):
        right = ore_compare(ex, tree.nodes[i]) is Order.GREATER
        code = (code << 1) | right
        i = 2 * i + 1 + right
    return code


def verdict_from_codes(cx: int, cy: int, depth: int) -> Verdict:
    s = cx + cy
    if s >= 1 << depth:
        return Verdict.GREATER
    if s <= (1 << depth) - 2:
        return Verdict.LESS_EQ
    return Verdict.UNCERTAIN


def compare_sum(tree: CostTree, ex: bytes, ey: bytes) -> Verdict:
    return verdict_from_codes(path_code(tree, ex), path_code(tree, ey), tree.depth)


def plain_path_code(theta_amp: int, depth: int, x: int) -> int:
    """Path code from plaintexts; the number of boundaries strictly below x."""
    return sum(1 for b in boundaries(theta_amp, depth) if x > b)
