"""The combinatorial machinery: subset-sum and energy identities evaluate to
zero up to float noise, and members of the block polytope decompose into
convex combinations of block-sparse extreme vectors.

Run:  python demos/05_identities_and_polytope.py
"""

import numpy as np

from blockcs import (
    BlockSignal,
    BlockStructure,
    SensingMatrix,
    disjoint_pair_energy_residual,
    mixed_norm_2_0,
    mixed_norm_2_1,
    mixed_norm_2_inf,
    polytope_decompose,
    subset_energy_difference_residual,
    subset_inner_product_residual,
    subset_sum_residual,
)

rng = np.random.Generator(np.random.Philox(key=11))

vectors = [rng.standard_normal(4) for _ in range(5)]
print("subset-sum residual (s=5, m=3):          ",
      subset_sum_residual(vectors, 3))
print("pairwise inner-product residual (m=3):   ",
      subset_inner_product_residual(vectors, 3))

structure = BlockStructure.uniform(2, 6)
phi = SensingMatrix(rng.standard_normal((6, 12)) / np.sqrt(6), structure)
x = BlockSignal(rng.standard_normal(12), structure)
print("energy-difference residual (m=3, n=2):   ",
      subset_energy_difference_residual(phi, x, 3, 2))
print("disjoint-pair energy residual (m=n=2):   ",
      disjoint_pair_energy_residual(phi, x, 2, 2))

# A flat vector with six active blocks lives in the polytope for s = 2,
# alpha = 1 (block norms 0.325, mixed norm 1.95 < 2), and splits into
# 2-sparse extreme vectors.
coeffs = np.full(12, 0.23)
member = BlockSignal(coeffs, structure)
alpha, s = 1.0, 2
print("\npolytope member: ||x||_(2,inf) =", round(mixed_norm_2_inf(member), 4),
      " ||x||_(2,I) =", round(mixed_norm_2_1(member), 4), " cap s*alpha =", s * alpha)
dec = polytope_decompose(member, alpha, s)
print(f"decomposed into {len(dec.terms)} terms:")
recon = np.zeros(12)
for lam, u in dec.terms:
    print(f"  weight {lam:.4f}: {mixed_norm_2_0(u)} active blocks,"
          f" ||u||_(2,I) = {mixed_norm_2_1(u):.4f},"
          f" ||u||_(2,inf) = {mixed_norm_2_inf(u):.4f}")
    recon += lam * u.coeffs
print("reconstruction error:", np.max(np.abs(recon - member.coeffs)))
