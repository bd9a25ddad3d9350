"""A few bits of an encoding say nothing about the secret.

Compares the encoding distribution restricted to a query set Q with the
block-ensemble distribution, exactly and by sampling.

Run: python demos/02_restricted_views.py
"""

from __future__ import annotations

import numpy as np

from pcuss.distributions import exact_linear_compare, restricted_equality
from pcuss.ensemble import derive_params

params = derive_params(1, 64, 2)
w = np.array([1, 1], dtype=np.uint8)
block = params.block_length

for blocks in (5, 31, 40):
    Q = range(blocks * block)
    same = exact_linear_compare(params, w, Q)
    print(f"Q = first {blocks:2d} whole blocks ({blocks * block} bits): distributions equal = {same}")

rng = np.random.default_rng(7)
Q = sorted(rng.choice(params.length, 8, replace=False).tolist())
rep = restricted_equality(params, w, Q, "statistical", budget=200_000, rng=rng)
print(f"random |Q| = 8, 200k samples each: TV estimate {float(rep.tv_estimate):.4f} vs threshold {rep.threshold:.4f} -> {rep.verdict}")
