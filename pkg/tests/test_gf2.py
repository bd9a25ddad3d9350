from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcuss import gf2
from pcuss.errors import CapabilityError

from .oracles import brute_min_weight

rows8 = st.lists(st.integers(0, 255), min_size=1, max_size=8)


def _brute_rank(rows):
    span = {0}
    for r in rows:
        span |= {s ^ r for s in span}
    return len(span).bit_length() - 1


@given(rows8)
def test_rank_matches_span_size(rows):
    assert gf2.rank(rows) == _brute_rank(rows)


@given(rows8)
def test_nullspace_is_orthogonal_and_complete(rows):
    ns = gf2.nullspace(rows, 8)
    for x in ns:
        assert all(gf2.parity(r & x) == 0 for r in rows)
    assert len(ns) == 8 - gf2.rank(rows)
    assert gf2.rank(ns) == len(ns)


@given(rows8)
def test_transpose_involution(rows):
    t = gf2.transpose(rows, 8)
    assert gf2.transpose(t, len(rows)) == rows


@given(rows8, st.integers(0, 255))
def test_solve(columns, target):
    u = gf2.solve(columns, target)
    span = {0}
    for c in columns:
        span |= {s ^ c for s in span}
    if target in span:
        acc = 0
        for i, c in enumerate(columns):
            if (u >> i) & 1:
                acc ^= c
        assert acc == target
    else:
        assert u is None


def test_span_table_order():
    t = gf2.span_table([0b001, 0b110])
    assert t.tolist() == [0, 0b001, 0b110, 0b111]
    with pytest.raises(CapabilityError):
        gf2.span_table([1 << 63])


@given(st.lists(st.integers(1, (1 << 12) - 1), min_size=1, max_size=6))
def test_min_weight_matches_brute_force(gens):
    bitrows = [[(g >> j) & 1 for j in range(12)] for g in gens]
    if gf2.rank(gens) < len(gens):
        assert gf2.min_weight(gens) == 0
    else:
        assert gf2.min_weight(gens) == brute_min_weight(bitrows)


def test_min_weight_prefix_and_chunking():
    rng = np.random.default_rng(3)
    gens = [int(x) for x in rng.integers(1, 1 << 40, 22)]
    # spans more than one enumeration chunk
    full = gf2.min_weight(gens)
    assert 0 <= full <= min(g.bit_count() for g in gens)
    assert gf2.min_weight(gens, prefix_bits=1) >= full
    assert gf2.min_weight([0b1111, 0b0001], prefix_bits=1) == 3
