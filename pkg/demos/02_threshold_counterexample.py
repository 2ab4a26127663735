"""The recovery threshold is sharp: an explicit operator attaining
delta = t/(4-t) on which two distinct block-sparse signals share both the
measurement and the objective value.

Run:  python demos/02_threshold_counterexample.py
"""

import numpy as np

from blockcs import apply, demo_counterexample, exact_block_ric, sharpness_instance

# The constant of the constructed operator equals t/(4-t) exactly.
inst = sharpness_instance(t=1.0, s=2, d=2, l=6)
cert = exact_block_ric(inst.phi, 2)
print("exact block RIC at order 2:", cert.delta)
print("threshold t/(4-t) at t=1:  ", 1.0 / 3.0)

# The witnesses are both block 2-sparse, disagree everywhere that matters,
# and are indistinguishable from the measurements.
gap = np.linalg.norm(apply(inst.phi, inst.x0) - apply(inst.phi, inst.x_hat))
print("\n||Phi x0 - Phi x^||_2 =", gap)
print("x0 support blocks:   ", sorted(np.nonzero(inst.x0.block_norms())[0].tolist()))
print("x^ support blocks:   ", sorted(np.nonzero(inst.x_hat.block_norms())[0].tolist()))

# The full report, including what the solver actually returns on b = Phi x0.
print()
print(demo_counterexample(1.0, 2, 2, 6).render())
