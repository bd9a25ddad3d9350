from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcuss.errors import InputError, ParameterError
from pcuss.field import FieldParams
from pcuss.poly import (
    Poly,
    berlekamp_welch,
    cf_degree_bound,
    constrained_points,
    fn_distance,
    poly_interpolate,
    poly_is_low_degree,
    poly_sample_constrained,
    table_degree,
)

from .oracles import lagrange, naive_eval

F = FieldParams.family(1)
F18 = FieldParams.family(2)
coeff = st.integers(0, 63)


@given(st.lists(coeff, max_size=12), coeff)
def test_horner_matches_naive(cs, x):
    assert Poly(np.array(cs), F)(x) == naive_eval(cs, x, 6, F.modulus)


def test_evaluate_many_matches_scalar():
    g = Poly(np.arange(1, 20), F)
    assert g.table().tolist() == [g(x) for x in range(64)]


@given(st.lists(coeff, min_size=1, max_size=10, unique=True).flatmap(
    lambda xs: st.tuples(st.just(xs), st.lists(coeff, min_size=len(xs), max_size=len(xs)))))
def test_interpolation_matches_lagrange(data):
    xs, ys = data
    g = poly_interpolate(list(zip(xs, ys)), F)
    assert g.coeffs.tolist() == lagrange(list(zip(xs, ys)), 6, F.modulus)


@pytest.mark.parametrize("deg", [0, 1, 5, 17, 31])
def test_round_trip_through_table(deg, rng):
    c = rng.integers(0, 64, deg + 1)
    c[-1] = 1 + c[-1] % 63
    g = Poly(c, F)
    assert g.degree == deg
    pts = list(zip(range(64), g.table().tolist()))
    assert poly_interpolate(pts, F) == g
    assert table_degree(g.table(), F) == deg
    assert poly_is_low_degree(g.table(), F)


def test_interpolation_rejects_bad_points():
    with pytest.raises(InputError):
        poly_interpolate([(1, 2), (1, 3)], F)
    with pytest.raises(InputError):
        poly_interpolate([(64, 0)], F)


def test_large_field_interpolation(rng):
    xs = rng.choice(F18.size, 40, replace=False)
    g = Poly(rng.integers(0, F18.size, 40), F18)
    ys = g.evaluate_many(xs)
    assert poly_interpolate(list(zip(xs.tolist(), ys.tolist())), F18) == g


def test_constrained_points_layout():
    H = (0, 1)
    pts = constrained_points(F, H)
    assert pts.size == cf_degree_bound(F) + 1 == 33
    assert pts[:2].tolist() == [0, 1]
    assert pts[2:].tolist() == list(range(2, 33))
    with pytest.raises(ParameterError):
        constrained_points(F, tuple(range(34)))


@pytest.mark.parametrize("w", [[0, 0], [0, 1], [1, 1]])
def test_sample_constrained_hits_secret(w, rng):
    H = (3, 7)
    for _ in range(20):
        g = poly_sample_constrained(H, w, rng, F)
        assert g.in_cf()
        assert [g(h) for h in H] == w
    with pytest.raises(InputError):
        poly_sample_constrained(H, [2, 0], rng, F)


def test_constrained_sample_is_uniform_on_free_value(rng):
    # value at a point outside the constraint set is uniform over F
    counts = np.bincount([poly_sample_constrained((0,), [1], rng, F)(63) for _ in range(6400)], minlength=64)
    assert counts.min() > 50 and counts.max() < 160


def test_high_degree_monomial_is_not_low_degree():
    c = np.zeros(34, dtype=np.int64)
    c[33] = 1
    assert not poly_is_low_degree(Poly(c, F).table(), F)


def test_random_tables_are_rarely_low_degree(rng):
    hits = sum(poly_is_low_degree(rng.integers(0, 64, 64), F) for _ in range(500))
    assert hits / 500 <= 0.01


def test_fn_distance():
    f = np.arange(64)
    g = f.copy()
    g[:16] ^= 1
    assert fn_distance(f, g) == pytest.approx(0.25)
    with pytest.raises(InputError):
        fn_distance(f, g[:10])


def test_distinct_low_degree_tables_are_far(rng):
    for _ in range(50):
        a = Poly(rng.integers(0, 64, 33), F).table()
        b = Poly(rng.integers(0, 64, 33), F).table()
        if not np.array_equal(a, b):
            assert fn_distance(a, b) >= 1 - 32 / 64


def test_berlekamp_welch_corrects_errors(rng):
    g = Poly(rng.integers(0, 64, 33), F)
    xs = np.arange(64)
    ys = g.table()
    bad = rng.choice(64, 15, replace=False)
    ys[bad] ^= rng.integers(1, 64, 15)
    out = berlekamp_welch(xs, ys, 32, F)
    assert out is not None
    assert out[0] == g and out[1] == 15
