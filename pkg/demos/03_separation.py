"""Copies-plus-proof instances: the tester and the two reductions.

Run: python demos/03_separation.py
"""

from __future__ import annotations

import numpy as np

from pcuss.ensemble import derive_params
from pcuss.separation import (
    build_far_instance,
    build_member,
    erasure_reduction,
    proof_region_distance,
    run_q_tester,
    separation_layout,
    tester_budget,
    tolerant_reduction,
)

params = derive_params(1, 64, 0)
lay = separation_layout(params, "exhaustive")
print("layout:", lay.as_dict())

rng = np.random.default_rng(3)
member = build_member(params, rng)
print("member:", run_q_tester(member, 0.6, seed=0).verdict)
for mode in ("first-copy", "all-copies"):
    far = build_far_instance(params, rng, mode=mode)
    print(f"far ({mode}):", run_q_tester(far, 0.6, seed=0).verdict)

tol = tolerant_reduction(member.y, params)
print("tolerant reduction distance to the member:", proof_region_distance(tol, member))
print("erasure reduction erased fraction:", erasure_reduction(member.y, params).erased_fraction())

for field in (64, 2**18):
    p = derive_params(1, field, 0)
    print(f"|F| = {field}: n = {p.length}, Hadamard-backend tester budget at eps 0.6 = {tester_budget(p, 0.6, 'hadamard')}")
