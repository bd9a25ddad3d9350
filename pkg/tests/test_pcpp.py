from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcuss.basecode import base_encode, hardcode_generate
from pcuss.errors import CapabilityError, InputError, ParameterError, PreconditionError
from pcuss.goodcode import goodcode
from pcuss.oracle import DenseBits, HadamardBits
from pcuss.pcpp import (
    AmplifiedBackend,
    CodeFamily,
    ConstraintSystem,
    ExhaustiveBackend,
    HadamardBackend,
    QuadraticConstraint,
    amplification_repetitions,
    amplify,
    backend_prove,
    backend_verify,
    make_spiel_pcu,
    predicate_from_system,
    run_verifier,
    tensor,
)

# x = (u0, u1, u0 + u1, u2) over u in GF(2)^3
LIN = ConstraintSystem(dim=3, rows=[0b001, 0b010, 0b011, 0b100])
LIN_SPEC = predicate_from_system(LIN)
# same, with the constraint u0 * u1 = u2
QUAD = ConstraintSystem(dim=3, rows=[0b001, 0b010, 0b011, 0b100], quadratic=[QuadraticConstraint(0b001, 0b010, 0b100, 0)])
QUAD_SPEC = predicate_from_system(QUAD, "quad")


def test_linear_predicate():
    assert LIN_SPEC([1, 0, 1, 1])
    assert not LIN_SPEC([1, 1, 1, 0])
    assert not LIN_SPEC([1, 0, 1, 2])
    with pytest.raises(InputError):
        LIN_SPEC([1, 0])


def test_quadratic_predicate():
    assert QUAD_SPEC([1, 1, 0, 1])
    assert not QUAD_SPEC([1, 1, 0, 0])
    assert QUAD_SPEC([1, 0, 1, 0])


@given(st.integers(0, 7), st.integers(0, 7))
def test_tensor_identity(a, b):
    u = 0b101
    t = tensor(a, b, 3)
    lhs = (t & tensor(u, u, 3)).bit_count() & 1
    rhs = ((a & u).bit_count() & 1) & ((b & u).bit_count() & 1)
    assert lhs == rhs


def test_exhaustive_empty_proof():
    be = ExhaustiveBackend()
    assert be.proof_length(LIN_SPEC) == 0
    pi = be.prove(LIN_SPEC, [1, 0, 1, 1])
    assert pi.length == 0
    rep = backend_verify(be, LIN_SPEC, np.array([1, 0, 1, 1], dtype=np.uint8), pi, 0.1, 0.5, 0)
    assert rep.accepted and rep.input_queries == 4 and rep.proof_queries == 0
    rep = backend_verify(be, LIN_SPEC, np.array([1, 1, 1, 1], dtype=np.uint8), pi, 0.1, 0.5, 0)
    assert not rep.accepted
    with pytest.raises(PreconditionError):
        be.prove(LIN_SPEC, [1, 1, 1, 1])


def test_hadamard_micro_layout():
    be = HadamardBackend()
    assert be.proof_length(LIN_SPEC) == 8
    assert be.proof_length(QUAD_SPEC) == 8 + 512
    pi = be.prove(QUAD_SPEC, [1, 1, 0, 1])
    arr = pi.source.to_array()
    assert arr[:8].tolist() == HadamardBits(0b111, 3).to_array().tolist()
    assert arr[8:].tolist() == HadamardBits(tensor(7, 7, 3), 9).to_array().tolist()


@pytest.mark.parametrize("spec,x", [(LIN_SPEC, [0, 1, 1, 1]), (QUAD_SPEC, [1, 1, 0, 1])])
def test_hadamard_completeness(spec, x):
    be = HadamardBackend()
    pi = be.prove(spec, x)
    for seed in range(30):
        assert backend_verify(be, spec, np.array(x, dtype=np.uint8), pi, 0.3, 0.5, seed).accepted


def test_hadamard_rejects_far_input_with_honest_proof():
    be = HadamardBackend()
    pi = be.prove(LIN_SPEC, [0, 1, 1, 1])
    x = np.array([1, 0, 0, 0], dtype=np.uint8)
    rejects = sum(not backend_verify(be, LIN_SPEC, x, pi, 0.5, 0.9, s).accepted for s in range(50))
    assert rejects >= 40


def test_hadamard_rejects_wrong_quadratic_witness():
    # a table for u = 0b011 encodes x = (1,1,0,0), which violates u0 u1 = u2
    be = HadamardBackend()
    fake = np.concatenate([HadamardBits(0b011, 3).to_array(), HadamardBits(tensor(3, 3, 3), 9).to_array()])
    x = np.array([1, 1, 0, 0], dtype=np.uint8)
    rejects = sum(not backend_verify(be, QUAD_SPEC, x, DenseBits(fake), 0.9, 0.9, s).accepted for s in range(30))
    assert rejects >= 20


def test_hadamard_proof_length_mismatch():
    be = HadamardBackend()
    with pytest.raises(InputError):
        backend_verify(be, LIN_SPEC, np.zeros(4, dtype=np.uint8), np.zeros(5, dtype=np.uint8), 0.3, 0.5, 0)


def test_eps_delta_range_checked():
    be = ExhaustiveBackend()
    with pytest.raises(CapabilityError):
        backend_verify(be, LIN_SPEC, np.zeros(4, dtype=np.uint8), np.zeros(0, dtype=np.uint8), 0.0, 0.5, 0)


def test_amplification_repetitions():
    assert amplification_repetitions(0.25, 0.01) == 37
    assert amplification_repetitions(0.5, 1.0) == 0
    be = ExhaustiveBackend()
    assert amplify(be, 0.5, 1.0) is be
    amp = amplify(be, 0.25, 0.01)
    assert isinstance(amp, AmplifiedBackend) and amp.repetitions == 37
    assert amp.queries_per_call(LIN_SPEC, 0.1, 0.99)["input"] == 37 * 4
    with pytest.raises(ParameterError):
        amplification_repetitions(0.25, 0.0)


# Spiel-PCU over the level-0 hard code -------------------------------------------------


H3 = hardcode_generate(3, 0)


def _family(spec):
    from pcuss.basecode import base_membership

    return CodeFamily(3, 12, 9, spec.rows, lambda v, w: base_membership(spec, w, v), 100, "H3")


def test_repetition_factors():
    code = goodcode(6)
    fam = CodeFamily(6, 1488, 10, [0] * 1488, lambda v, w: True, 1, "x")
    assert make_spiel_pcu(fam, 1488, 6, ExhaustiveBackend(), code).xi == 2
    short = make_spiel_pcu(_family(H3), 12, 3, ExhaustiveBackend(), goodcode(3), repeat_input=True)
    assert (short.zeta, short.xi) == (25, 1)
    with pytest.raises(ParameterError):
        make_spiel_pcu(_family(H3), 12, 3, ExhaustiveBackend(), goodcode(3))


@settings(max_examples=15)
@given(st.integers(0, 7), st.sampled_from(["exhaustive", "hadamard"]))
def test_spiel_pcu_completeness_and_complemented_value(m, backend):
    be = ExhaustiveBackend() if backend == "exhaustive" else HadamardBackend()
    pcu = make_spiel_pcu(_family(H3), 12, 3, be, goodcode(3), repeat_input=True)
    w = np.array([(m >> i) & 1 for i in range(3)], dtype=np.uint8)
    enc = base_encode(H3, w, np.random.default_rng(m))
    proof = pcu.prove(enc.bits, w, enc.witness)
    tau = goodcode(3).encode(w)

    def run(v, t, p, rng):
        return pcu.verify(v, t, p, 0.3, 0.5, rng)

    assert run_verifier(run, enc.bits, tau, proof.source, m).accepted
    rejects = sum(not run_verifier(run, enc.bits, 1 - tau, proof.source, s).accepted for s in range(10))
    assert rejects >= 8


def test_prove_rejects_non_member():
    pcu = make_spiel_pcu(_family(H3), 12, 3, ExhaustiveBackend(), goodcode(3), repeat_input=True)
    enc = base_encode(H3, np.array([1, 0, 0], dtype=np.uint8), np.random.default_rng(0))
    with pytest.raises(PreconditionError):
        pcu.prove(enc.bits, np.array([0, 1, 0], dtype=np.uint8))
    assert backend_prove(ExhaustiveBackend(), LIN_SPEC, [0, 0, 0, 0]).length == 0
