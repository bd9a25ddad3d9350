from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcuss.errors import DomainError, ParameterError
from pcuss.field import FieldElem, FieldParams, clmul, fld_add, fld_inv, fld_mul, is_irreducible_bruteforce

from .oracles import gf_inv_search, gf_mul

F6 = FieldParams.family(1)
F18 = FieldParams.family(2)


def bits(s: str) -> int:
    """Bit string written most-significant first."""
    return int(s, 2)


def test_family_parameters():
    assert (F6.t, F6.size, F6.modulus) == (6, 64, 0b1001001)
    assert (F18.t, F18.size) == (18, 1 << 18)
    assert FieldParams.from_size(64) is F6
    with pytest.raises(ParameterError):
        FieldParams.from_size(256)
    with pytest.raises(ParameterError):
        FieldParams.from_size(100)


@pytest.mark.parametrize("F", [F6, F18])
def test_modulus_irreducible(F):
    if F.t > 18:
        pytest.skip("brute force too slow")
    assert is_irreducible_bruteforce(F.modulus)


def test_add_examples():
    assert F6.add(bits("100000"), bits("000011")) == bits("100011")
    for a in F6.elements():
        assert F6.add(a, a) == 0
        assert F6.add(a, 0) == a


def test_mul_examples():
    x = 0b10
    assert F6.mul(1 << 5, x) == bits("001001")  # x^5 * x = x^3 + 1
    for a in F6.elements():
        assert F6.mul(a, 1) == a
        assert F6.mul(a, 0) == 0


def test_inv_examples():
    assert F6.inv(1) == 1
    assert F6.inv(0b10) == bits("100100")  # x^5 + x^2
    with pytest.raises(DomainError):
        F6.inv(0)


def test_mul_matches_schoolbook_oracle_exhaustively_t6():
    for a in range(64):
        for b in range(64):
            assert F6.mul(a, b) == gf_mul(a, b, 6, F6.modulus)


def test_inv_matches_search_oracle_t6():
    for a in range(1, 64):
        assert F6.inv(a) == gf_inv_search(a, 6, F6.modulus)
        assert F6.inv_euclid(a) == F6.inv(a)


def test_group_order_exhaustive_t6():
    for a in range(1, 64):
        assert F6.pow(a, 63) == 1


def test_canonical_bits_round_trip():
    for a in F6.elements():
        b = F6.to_bits(a)
        assert b.tolist() == [(a >> i) & 1 for i in range(6)]
        assert F6.from_bits(b) == a


def test_elem_wrappers():
    a, b = F6.elem(5), F6.elem(9)
    assert isinstance(fld_add(a, b), FieldElem)
    assert int(fld_add(a, b)) == 5 ^ 9
    assert int(fld_mul(a, b)) == gf_mul(5, 9, 6, F6.modulus)
    assert int(fld_mul(a, fld_inv(a))) == 1
    with pytest.raises(DomainError):
        F6.elem(64)
    with pytest.raises(ParameterError):
        fld_add(a, F18.elem(1))


def test_vectorised_ops_agree_with_scalar(rng):
    for F in (F6, F18):
        a = rng.integers(0, F.size, 2000)
        b = rng.integers(0, F.size, 2000)
        prod = F.vmul(a, b)
        assert all(int(p) == F.mul(int(x), int(y)) for p, x, y in zip(prod[:300], a, b))
        nz = a[a != 0]
        assert np.all(F.vmul(nz, F.vinv(nz)) == 1)


def test_clmul_small():
    assert clmul(0b11, 0b11) == 0b101


elems6 = st.integers(0, 63)
elems18 = st.integers(0, (1 << 18) - 1)


@pytest.mark.parametrize("F,n", [(F6, 10**4), (F18, 10**4)])
def test_field_axioms_random_triples(F, n):
    rng = np.random.default_rng(F.t)
    a, b, c = (rng.integers(0, F.size, n) for _ in range(3))
    m = F.vmul
    assert np.array_equal(m(a, b), m(b, a))
    assert np.array_equal(m(m(a, b), c), m(a, m(b, c)))
    assert np.array_equal(m(a, b ^ c), m(a, b) ^ m(a, c))
    assert np.array_equal((a ^ b) ^ c, a ^ (b ^ c))
    # Frobenius
    assert np.array_equal(m(a ^ b, a ^ b), m(a, a) ^ m(b, b))


@given(elems18, elems18)
def test_mul_matches_oracle_t18(a, b):
    assert F18.mul(a, b) == gf_mul(a, b, 18, F18.modulus)


@given(elems18.filter(lambda x: x != 0))
def test_double_inverse_t18(a):
    assert F18.inv(F18.inv(a)) == a
    assert F18.inv_euclid(a) == F18.inv(a)
