from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcuss.errors import InputError
from pcuss.field import FieldParams
from pcuss.goodcode import (
    DEFAULT_MIN_DISTANCE,
    bits_to_int,
    certify_goodcode,
    goodcode,
    int_to_bits,
    spiel_decode,
    spiel_encode,
    spiel_membership,
    spiel_of_function,
)

from .oracles import brute_min_weight

CODE4 = goodcode(4)
CODE6 = goodcode(6)


def test_shape_and_systematic_prefix():
    assert CODE6.generator.shape == (6, 600)
    assert np.array_equal(CODE6.generator[:, :6], np.eye(6, dtype=np.uint8))
    assert CODE6.certified_distance >= DEFAULT_MIN_DISTANCE


def test_regeneration_is_identical():
    assert np.array_equal(goodcode.__wrapped__(6, 0).generator, CODE6.generator)


@given(st.integers(0, 15), st.integers(0, 15))
def test_linearity(a, b):
    ea, eb = CODE4.encode(int_to_bits(a, 4)), CODE4.encode(int_to_bits(b, 4))
    assert np.array_equal(ea ^ eb, CODE4.encode(int_to_bits(a ^ b, 4)))


def test_pairwise_distance_k4_against_brute_force():
    book = CODE4.codebook
    dmin = min(int(np.sum(book[i] != book[j])) for i in range(16) for j in range(i + 1, 16))
    assert dmin == brute_min_weight(CODE4.generator)
    assert certify_goodcode(CODE4) == Fraction(dmin, 400)
    assert Fraction(dmin, 400) >= DEFAULT_MIN_DISTANCE


@given(st.integers(0, 63))
def test_decode_ignores_corruption_outside_prefix(m):
    w = int_to_bits(m, 6)
    c = spiel_encode(w, CODE6)
    c[[10, 99, 599]] ^= 1
    assert np.array_equal(spiel_decode(c, CODE6), w)
    assert not spiel_membership(c, CODE6)


@given(st.integers(0, 63), st.integers(0, 599))
def test_single_flip_breaks_membership(m, pos):
    c = CODE6.encode(int_to_bits(m, 6))
    assert spiel_membership(c, CODE6)
    c[pos] ^= 1
    assert not spiel_membership(c, CODE6)


def test_members_vectorised(rng):
    blocks = CODE6.encode_values(rng.integers(0, 64, 20))
    blocks[::3, 7] ^= 1
    expect = np.array([i % 3 != 0 for i in range(20)])
    assert np.array_equal(CODE6.members(blocks), expect)


def test_bad_shapes():
    with pytest.raises(InputError):
        CODE6.encode(np.zeros(5, dtype=np.uint8))
    with pytest.raises(InputError):
        CODE6.decode(np.zeros(10, dtype=np.uint8))


def test_bit_packing_round_trip():
    for x in (0, 1, 37, 63):
        assert bits_to_int(int_to_bits(x, 6)) == x


def test_spiel_of_function_length_and_blocks():
    F = FieldParams.family(1)
    table = np.arange(64)[::-1].copy()
    out = spiel_of_function(table, F)
    assert out.size == 64 * 600 == 38400
    assert np.array_equal(out[600:1200], CODE6.encode(F.to_bits(62)))


def test_large_k_concatenated_code():
    spec = goodcode(18)
    assert spec.certification_method == "concatenation-bound"
    assert spec.certified_distance >= DEFAULT_MIN_DISTANCE
    rng = np.random.default_rng(1)
    for _ in range(20):
        w = rng.integers(0, 2, 18).astype(np.uint8)
        c = spec.encode(w)
        if w.any():
            assert Fraction(int(c.sum()), spec.n) >= spec.certified_distance
