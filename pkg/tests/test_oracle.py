from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcuss.oracle import (
    ERASED,
    ConcatBits,
    ConstBits,
    CorruptedBits,
    DenseBits,
    HadamardBits,
    JoinedView,
    QueryOracle,
    RepeatBits,
    random_bits,
)


def test_hadamard_entries():
    h = HadamardBits(0b101, 3)
    assert h.length == 8
    assert [h.bit(a) for a in range(8)] == [bin(a & 5).count("1") % 2 for a in range(8)]
    assert h.bits(np.arange(8)).tolist() == [h.bit(a) for a in range(8)]


def test_huge_hadamard_scalar_path():
    u = (1 << 100) | 3
    h = HadamardBits(u, 120)
    assert h.bit((1 << 100) | 1) == 0
    assert h.bits(np.array([1, 2, 3], dtype=np.int64)).tolist() == [1, 1, 0]


@given(st.lists(st.lists(st.integers(0, 1), min_size=1, max_size=9), min_size=1, max_size=4))
def test_concat_matches_numpy(parts):
    src = ConcatBits([DenseBits(np.array(p, dtype=np.uint8)) for p in parts])
    flat = np.concatenate([np.array(p, dtype=np.uint8) for p in parts])
    assert src.to_array().tolist() == flat.tolist()
    idx = np.arange(flat.size)[::-1]
    assert src.bits(idx).tolist() == flat[idx].tolist()
    assert src.slice(1, flat.size).tolist() == flat[1:].tolist()


def test_repeat_truncated():
    src = RepeatBits(DenseBits(np.array([1, 0, 0], dtype=np.uint8)), 3, length=7)
    assert src.to_array().tolist() == [1, 0, 0, 1, 0, 0, 1]
    assert src.slice(2, 6).tolist() == [0, 1, 0, 0]


def test_corruption_rate_and_determinism():
    src = CorruptedBits(ConstBits(0, 200_000), 0.2, seed=7)
    a = src.to_array()
    assert abs(a.mean() - 0.2) < 0.01
    assert np.array_equal(a, CorruptedBits(ConstBits(0, 200_000), 0.2, seed=7).to_array())
    assert a[:50].tolist() == [src.bit(i) for i in range(50)]
    assert np.all(CorruptedBits(ConstBits(0, 10), 1.0, 1).to_array() == 1)


def test_corruption_keeps_erasures():
    src = CorruptedBits(ConstBits(ERASED, 100), 0.5, 3)
    assert np.all(src.to_array() == ERASED)


def test_random_bits_balanced():
    assert abs(random_bits(100_000, 1).to_array().mean() - 0.5) < 0.01


def test_query_counting_distinct_positions():
    o = QueryOracle(np.arange(100) % 2)
    o.query(5)
    o.query(5)
    o.query_many([1, 2, 3])
    o.query_range(2, 10)
    assert o.total == 2 + 3 + 8
    assert o.distinct_count() == 9
    assert o.queried_positions().tolist() == [1, 2, 3, 4, 5, 6, 7, 8, 9]
    o.reset()
    assert o.distinct_count() == 0


def test_views_forward_to_root_positions():
    root = QueryOracle(np.arange(40) % 3 == 0)
    sub = root.sub(10, 10)
    tiled = sub.tiled(3)
    assert tiled.length == 30
    assert tiled.query(25) == root.source.bit(15)
    joined = JoinedView([root.sub(0, 5), root.sub(30, 5)])
    assert joined.query_many([4, 5]).tolist() == [root.source.bit(4), root.source.bit(30)]
    assert root.queried_positions().tolist() == [4, 15, 30]
    with pytest.raises(IndexError):
        sub.query(10)
