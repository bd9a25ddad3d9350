"""Encode a secret, prove it, and watch the verifier accept or reject.

Run: python demos/01_shared_secret.py
"""

from __future__ import annotations

import numpy as np

from pcuss import artifacts
from pcuss.ensemble import PcussSystem, derive_params, pcuss_encode, pcuss_value, pcuss_verify

params = derive_params(1, 64, 2)
print("encoding length m =", params.length, " base secret length k0 =", params.k0)

rng = np.random.default_rng(2026)
secret = np.array([1, 0], dtype=np.uint8)
enc = pcuss_encode(params, secret, rng)

# Two encodings of the same secret share no obvious structure.
other = pcuss_encode(params, secret, rng)
print("two encodings of the same secret differ in", int((enc.bits != other.bits).sum()), "positions")

system = PcussSystem(params, "exhaustive")
proof = system.build_proof(enc)
print("proof length:", proof.length)

ok = pcuss_verify(system, enc, pcuss_value(params, secret), proof, eps=0.25, delta=0.25, seed=1)
print("claim w = 10:", ok.verdict, " queries:", ok.total_queries)

bad = pcuss_verify(system, enc, pcuss_value(params, np.array([0, 1], dtype=np.uint8)), proof, 0.25, 0.25, seed=1)
print("claim w = 01:", bad.verdict)

# Artifacts round-trip bit for bit.
again = artifacts.loads(artifacts.dumps(enc))
print("artifact round trip exact:", bool(np.array_equal(again.bits, enc.bits)))
