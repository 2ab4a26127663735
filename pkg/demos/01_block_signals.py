"""Block-structured signals: partitions, mixed norms, and best block
approximation.

Run:  python demos/01_block_signals.py
"""

import numpy as np

from blockcs import (
    BlockSignal,
    BlockStructure,
    best_block_approx,
    block_support,
    mixed_norm_2_0,
    mixed_norm_2_1,
    mixed_norm_2_inf,
)

# A 10-dimensional space split into blocks of lengths (3, 2, 2, 3).
structure = BlockStructure((3, 2, 2, 3))
print("structure:", structure.block_lengths, "-> N =", structure.total_dim)

rng = np.random.Generator(np.random.Philox(key=1))
x = BlockSignal(rng.standard_normal(10), structure)
print("block norms:", np.round(x.block_norms(), 3))

# The three mixed norms used throughout the package.
print("||x||_(2,I)   =", round(mixed_norm_2_1(x), 4), " (sum of block norms)")
print("||x||_(2,0)   =", mixed_norm_2_0(x), "          (active blocks)")
print("||x||_(2,inf) =", round(mixed_norm_2_inf(x), 4), " (largest block norm)")
print("support:", sorted(block_support(x)))

# Keep the two largest blocks; the remainder is the tail.
approx = best_block_approx(x, 2)
print("\nbest 2-block approximation keeps blocks", sorted(approx.kept_blocks))
print("head norms:", np.round(approx.head.block_norms(), 3))
print("tail norms:", np.round(approx.tail.block_norms(), 3))
print("head + tail == x exactly:",
      bool(np.array_equal(approx.head.coeffs + approx.tail.coeffs, x.coeffs)))
