from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from pcuss.errors import InputError, ParameterError, PreconditionError
from pcuss.oracle import ERASED, QueryOracle
from pcuss.separation import (
    SeparationConfig,
    build_far_instance,
    build_member,
    check_config,
    complete_erasures,
    erasure_reduction,
    far_constant,
    log_condition,
    proof_region_distance,
    reduction_oracle,
    run_q_tester,
    separation_layout,
    tester_budget as accepting_budget,
    tolerant_reduction,
)


def test_layout(sep_params):
    lay = separation_layout(sep_params, "exhaustive")
    assert (lay.n, lay.z, lay.log_term, lay.s, lay.partial) == (1536, 38400, 11, 275, 0)
    assert lay.N == 460800 == 12 * lay.z
    with pytest.raises(ParameterError):
        from pcuss.ensemble import derive_params

        separation_layout(derive_params(1, 64, 2), "exhaustive")


def test_log_condition(sep_params):
    assert log_condition(sep_params, 0.6)
    assert not log_condition(sep_params, 0.5)
    with pytest.raises(ParameterError):
        check_config(SeparationConfig(eps=(0.5,)))
    assert far_constant(1) == Fraction(1, 20)


def test_member_accepted_within_budget(sep_params):
    for seed in range(5):
        inst = build_member(sep_params, np.random.default_rng(seed))
        rep = run_q_tester(inst, 0.6, seed)
        assert rep.accepted
        assert rep.total_queries["input"] == accepting_budget(sep_params, 0.6, "exhaustive")


@pytest.mark.parametrize("mode", ["first-copy", "all-copies"])
def test_far_instances_rejected(sep_params, mode):
    for seed in range(5):
        inst = build_far_instance(sep_params, np.random.default_rng(seed), mode=mode)
        assert not run_q_tester(inst, 0.6, seed).accepted
    with pytest.raises(ParameterError):
        build_far_instance(sep_params, np.random.default_rng(0), mode="other")


def test_tester_input_checks(sep_params):
    inst = build_member(sep_params, np.random.default_rng(0))
    with pytest.raises(ParameterError):
        run_q_tester(inst, 1.5, 0)


def test_tolerant_reduction_distance(sep_params):
    member = build_member(sep_params, np.random.default_rng(1))
    red = tolerant_reduction(member.y, sep_params)
    d = proof_region_distance(red, member)
    assert 0 < d <= Fraction(1, 12)
    assert d == Fraction(int(member.source.parts[1].to_array().sum()), red.layout.N)


def test_erasure_reduction_and_completion(sep_params):
    member = build_member(sep_params, np.random.default_rng(2))
    red = erasure_reduction(member.y, sep_params)
    assert red.erased_fraction() == Fraction(1, 12)
    arr = red.to_array()
    assert np.all(arr[red.layout.proof_offset :] == ERASED)
    done = complete_erasures(red, member.source.parts[1])
    assert np.array_equal(done.to_array(), member.to_array())
    assert run_q_tester(done, 0.6, 0).accepted
    with pytest.raises(PreconditionError):
        complete_erasures(member, member.source.parts[1])
    with pytest.raises(InputError):
        tolerant_reduction(member.y[:-1], sep_params)


def test_forwarding_at_most_one_query(sep_params):
    rng = np.random.default_rng(4)
    y = QueryOracle(rng.integers(0, 2, 1536).astype(np.uint8))
    fwd = reduction_oracle(y, sep_params, erased=True)
    direct = erasure_reduction(y.source.to_array(), sep_params).source
    idx = rng.integers(0, fwd.length, 2000)
    got = fwd.query_many(idx)
    assert np.array_equal(got, direct.bits(idx))
    assert max(fwd.forwards) <= 1
    assert y.total == sum(fwd.forwards)


def test_budget_flat_in_n():
    from pcuss.ensemble import derive_params

    a = accepting_budget(derive_params(1, 64, 0), 0.6, "hadamard")
    b = accepting_budget(derive_params(1, 2**18, 0), 0.6, "hadamard")
    assert a == b
