from __future__ import annotations

import numpy as np
import pytest

from pcuss.basecode import base_membership
from pcuss.ensemble import (
    Encoding,
    PcussSystem,
    derive_params,
    iterations,
    language_L_check,
    pcuss_encode,
    pcuss_value,
    pcuss_verify,
    proof_layout,
    proof_lengths,
    sample_block_ensemble,
)
from pcuss.errors import CapabilityError, InputError, ParameterError, PreconditionError
from pcuss.goodcode import goodcode
from pcuss.poly import poly_is_low_degree

W2 = np.array([1, 0], dtype=np.uint8)


def test_lengths_per_level():
    assert derive_params(0, 64, 4).m == (16,)
    assert derive_params(1, 64, 2).m == (24, 1488)
    assert derive_params(2, 64, 2).m == (24, 1392, 86304)
    p = derive_params(1, 64, 2)
    assert (p.k0, p.top.free_points, p.top.n_blocks) == (6, 31, 62)


def test_parameter_errors():
    with pytest.raises(ParameterError):
        derive_params(-1)
    with pytest.raises(ParameterError):
        derive_params(1, 64, 34)
    with pytest.raises(ParameterError):
        derive_params(0, 64, 2)


def test_digest_is_stable():
    assert derive_params(1, 64, 2).digest() == derive_params(1, 64, 2).digest()
    assert derive_params(1, 64, 2).digest() != derive_params(1, 64, 3).digest()


def test_proof_length_arithmetic():
    p = derive_params(1, 64, 2)
    assert proof_lengths(p, "exhaustive") == [0, 37200]
    assert proof_lengths(p, "dinur")[1] == 376953552
    assert proof_layout(p, "exhaustive").total == 37200


@pytest.mark.parametrize("backend", ["exhaustive", "hadamard"])
def test_measured_proof_length_matches_layout(params1, backend):
    s = PcussSystem(params1, backend)
    enc = pcuss_encode(params1, W2, np.random.default_rng(0))
    proof = s.build_proof(enc)
    assert proof.length == proof_layout(params1, backend).total == s.proof_lengths()[-1]


def test_encoding_structure(params1, rng):
    enc = pcuss_encode(params1, W2, rng)
    lev = params1.top
    table = enc.witness.table
    assert poly_is_low_degree(table, lev.field)
    assert table[:2].tolist() == [1, 0]
    blocks = enc.bits.reshape(lev.n_blocks, params1.block_length)
    child = params1.child
    for b in range(lev.n_blocks):
        w = np.array([(int(table[2 + b]) >> i) & 1 for i in range(6)], dtype=np.uint8)
        assert base_membership(child.base, w, blocks[b])


def test_encoding_determinism(params1):
    a = pcuss_encode(params1, W2, np.random.default_rng(5)).bits
    b = pcuss_encode(params1, W2, np.random.default_rng(5)).bits
    c = pcuss_encode(params1, W2, np.random.default_rng(6)).bits
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_bad_secret(params1, rng):
    with pytest.raises(InputError):
        pcuss_encode(params1, [1, 0, 1], rng)
    with pytest.raises(InputError):
        pcuss_encode(params1, [2, 0], rng)


def test_language_check_examples(params1, rng):
    lev = params1.top
    code = goodcode(6)
    enc = pcuss_encode(params1, W2, rng)
    S = code.encode_values(enc.witness.table[lev.outside]).reshape(-1)
    assert language_L_check(lev, S, W2, code)
    assert not language_L_check(lev, S, np.array([0, 1], dtype=np.uint8), code)
    bad = S.copy()
    bad[3] ^= 1
    assert not language_L_check(lev, bad, W2, code)
    # valid block codewords of a random (high-degree) table
    rnd = code.encode_values(rng.integers(0, 64, lev.n_blocks)).reshape(-1)
    assert not language_L_check(lev, rnd, W2, code)
    with pytest.raises(InputError):
        language_L_check(lev, S[:-1], W2, code)


@pytest.mark.parametrize("ell", [0, 1])
@pytest.mark.parametrize("backend", ["exhaustive", "hadamard"])
def test_completeness(ell, backend, params0, params1):
    p = params0 if ell == 0 else params1
    s = PcussSystem(p, backend)
    for seed in range(5):
        w = np.random.default_rng(seed).integers(0, 2, p.k).astype(np.uint8)
        enc = pcuss_encode(p, w, np.random.default_rng(seed))
        rep = pcuss_verify(s, enc, pcuss_value(p, w), s.build_proof(enc), 0.25, 2.0 ** (-ell - 1), seed)
        assert rep.accepted


def test_wrong_value_rejected(params1):
    s = PcussSystem(params1)
    enc = pcuss_encode(params1, W2, np.random.default_rng(0))
    rep = pcuss_verify(s, enc, pcuss_value(params1, np.array([0, 1], dtype=np.uint8)), s.build_proof(enc), 0.25, 0.25, 0)
    assert not rep.accepted


def test_corrupted_block_rejected(params1):
    s = PcussSystem(params1)
    enc = pcuss_encode(params1, W2, np.random.default_rng(0))
    proof = s.build_proof(enc)
    bits = enc.bits.copy()
    bits[: params1.block_length * 31] ^= 1
    rejects = sum(not pcuss_verify(s, bits, pcuss_value(params1, W2), proof, 0.25, 0.25, t).accepted for t in range(10))
    assert rejects == 10


@pytest.mark.parametrize("backend", ["exhaustive", "hadamard"])
def test_budget_equals_measured(params1, backend):
    s = PcussSystem(params1, backend)
    enc = pcuss_encode(params1, W2, np.random.default_rng(0))
    rep = pcuss_verify(s, enc, pcuss_value(params1, W2), s.build_proof(enc), 0.25, 0.2, 1)
    assert rep.accepted
    assert sum(rep.total_queries.values()) == s.query_budget(0.25, 0.2)


def test_block_discipline(params1):
    # a concatenation of honest block encodings whose values are not low degree
    s = PcussSystem(params1)
    rng = np.random.default_rng(3)
    vals = rng.integers(0, 64, params1.top.n_blocks)
    enc = sample_block_ensemble(params1, vals, rng)
    assert isinstance(enc, Encoding)
    child = params1.child
    blocks = enc.bits.reshape(params1.top.n_blocks, -1)
    w0 = np.array([(int(vals[0]) >> i) & 1 for i in range(6)], dtype=np.uint8)
    assert base_membership(child.base, w0, blocks[0])


def test_amplification_required_for_large_delta(params1):
    s = PcussSystem(params1)
    enc = pcuss_encode(params1, W2, np.random.default_rng(0))
    with pytest.raises(CapabilityError):
        pcuss_verify(s, enc, pcuss_value(params1, W2), s.build_proof(enc), 0.25, 0.9, 0, amplify=False)
    runs, d = s.repetitions(0.9)
    assert d == 0.25 and runs > 1


def test_missing_witness(params1):
    enc = pcuss_encode(params1, W2, np.random.default_rng(0))
    enc.witness = None
    with pytest.raises(PreconditionError):
        PcussSystem(params1).build_proof(enc)


def test_iterations():
    assert iterations(0.25) == 24
    assert iterations(0.6) == 10
