"""How the encrypted cost tree decides ``x + y <= theta``.

The server sees only ORE ciphertexts. It descends the tree with each cost,
adds the two path codes and gets one of three verdicts.
"""
# %%
import numpy as np

from connor.crypto import keygen_prf, ore_compare, ore_encrypt
from connor.tree import Verdict, boundaries, build_tree, path_code, verdict_from_codes

key = keygen_prf()
phi = 1 << 20                      # client-secret amplification
theta = 100
tree = build_tree(key, phi * theta, depth=3)
print("plaintext boundaries (hidden from the server):", [b // phi for b in boundaries(phi * theta, 3)])
print("ORE still orders ciphertexts:", ore_compare(ore_encrypt(key, 5), ore_encrypt(key, 9)).name)

# %% A few sums
for x, y in ((30, 40), (30, 69), (30, 71), (70, 70), (0, 500)):
    cx = path_code(tree, ore_encrypt(key, phi * x))
    cy = path_code(tree, ore_encrypt(key, phi * y))
    v = verdict_from_codes(cx, cy, 3)
    print(f"x={x:3d} y={y:3d}  codes {cx:03b}+{cy:03b}={cx + cy:2d}  verdict {v.value:>2}  truth x+y<=theta: {x + y <= theta}")

# %% Uncertainty falls as 2^-depth
rng = np.random.default_rng(0)
for depth in range(1, 7):
    cx, cy = rng.integers(0, 1 << depth, size=(2, 50_000))
    unc = np.mean([verdict_from_codes(int(a), int(b), depth) is Verdict.UNCERTAIN for a, b in zip(cx, cy)])
    print(f"depth {depth}: uncertain {unc:.4f}  (2^-d = {2 ** -depth:.4f})")
