"""Bit sources and query-counting oracle views.

A bit source is a read-only string that may be far too long to store
(Hadamard tables have 2^D entries), so lengths and indices are Python ints
and sources expose ``length`` rather than ``__len__``.  Bits take the values
0 and 1, plus ERASED (2) for erased positions.

A :class:`QueryOracle` wraps a source and logs every read; views (sub-ranges,
tilings, concatenations) translate indices and forward reads to the root, so
the root log always holds positions in the original string.
"""

from __future__ import annotations

from bisect import bisect_right
from typing import Sequence

import numpy as np

from .errors import CapabilityError, InputError

ERASED = 2
_MASK64 = (1 << 64) - 1
_DENSE_LIMIT = 1 << 62


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _splitmix64_vec(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64) + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _fold(i: int) -> int:
    out = 0
    while True:
        out ^= i & _MASK64
        i >>= 64
        if not i:
            return out
        out = splitmix64(out)


class BitSource:
    length: int

    def bit(self, i: int) -> int:
        raise NotImplementedError

    def bits(self, idx: np.ndarray) -> np.ndarray:
        return np.fromiter((self.bit(int(i)) for i in idx), dtype=np.uint8, count=len(idx))

    def slice(self, start: int, stop: int) -> np.ndarray:
        if stop - start > 1 << 28:
            raise CapabilityError("slice too long to materialise")
        return self.bits(np.arange(start, stop, dtype=np.int64))

    def to_array(self) -> np.ndarray:
        return self.slice(0, self.length)


class DenseBits(BitSource):
    def __init__(self, data):
        self.data = np.ascontiguousarray(data, dtype=np.uint8)
        if self.data.ndim != 1:
            raise InputError("dense bits must be one-dimensional")
        self.length = int(self.data.size)

    def bit(self, i: int) -> int:
        return int(self.data[i])

    def bits(self, idx: np.ndarray) -> np.ndarray:
        return self.data[idx]

    def slice(self, start: int, stop: int) -> np.ndarray:
        return self.data[start:stop]


class ConstBits(BitSource):
    def __init__(self, value: int, length: int):
        self.value = value
        self.length = length

    def bit(self, i: int) -> int:
        return self.value

    def bits(self, idx: np.ndarray) -> np.ndarray:
        return np.full(len(idx), self.value, dtype=np.uint8)


class HadamardBits(BitSource):
    """Entry a is the parity of (a AND u): all linear functions of u."""

    def __init__(self, u: int, dim: int):
        if u < 0 or u >> dim:
            raise InputError("witness does not fit the declared dimension")
        self.u = u
        self.dim = dim
        self.length = 1 << dim

    def bit(self, i: int) -> int:
        return (i & self.u).bit_count() & 1

    def bits(self, idx: np.ndarray) -> np.ndarray:
        if self.dim <= 62:
            return (np.bitwise_count(np.asarray(idx, dtype=np.int64) & np.int64(self.u)) & 1).astype(np.uint8)
        return super().bits(idx)


class ConcatBits(BitSource):
    def __init__(self, parts: Sequence[BitSource]):
        self.parts = list(parts)
        self.offsets = [0]
        for p in self.parts:
            self.offsets.append(self.offsets[-1] + p.length)
        self.length = self.offsets[-1]

    def locate(self, i: int) -> tuple[int, int]:
        if not 0 <= i < self.length:
            raise IndexError(i)
        j = bisect_right(self.offsets, i) - 1
        return j, i - self.offsets[j]

    def bit(self, i: int) -> int:
        j, off = self.locate(i)
        return self.parts[j].bit(off)

    def bits(self, idx: np.ndarray) -> np.ndarray:
        if self.length >= _DENSE_LIMIT:
            return super().bits(idx)
        idx = np.asarray(idx, dtype=np.int64)
        offs = np.array(self.offsets[:-1], dtype=np.int64)
        which = np.searchsorted(offs, idx, side="right") - 1
        out = np.empty(idx.size, dtype=np.uint8)
        for j in np.unique(which):
            sel = which == j
            out[sel] = self.parts[j].bits(idx[sel] - offs[j])
        return out

    def slice(self, start: int, stop: int) -> np.ndarray:
        chunks = []
        for j, p in enumerate(self.parts):
            a = max(start, self.offsets[j])
            b = min(stop, self.offsets[j + 1])
            if a < b:
                chunks.append(p.slice(a - self.offsets[j], b - self.offsets[j]))
        return np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.uint8)


class RepeatBits(BitSource):
    """``base`` repeated, truncated to ``length`` (default: ``copies`` full copies)."""

    def __init__(self, base: BitSource, copies: int, length: int | None = None):
        self.base = base
        self.copies = copies
        self.length = base.length * copies if length is None else length

    def bit(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return self.base.bit(i % self.base.length)

    def bits(self, idx: np.ndarray) -> np.ndarray:
        return self.base.bits(np.asarray(idx, dtype=np.int64) % self.base.length)

    def slice(self, start: int, stop: int) -> np.ndarray:
        if stop - start > 1 << 28:
            raise CapabilityError("slice too long to materialise")
        one = self.base.to_array()
        reps = -(-stop // self.base.length) - start // self.base.length
        first = start // self.base.length * self.base.length
        return np.tile(one, reps)[start - first : stop - first]


class CorruptedBits(BitSource):
    """``base`` with each position flipped independently with probability ``eta``.

    The flip pattern is a pure function of (seed, index), so huge strings
    can be corrupted lazily and reproducibly.  Erased positions stay erased.
    """

    def __init__(self, base: BitSource, eta: float, seed: int):
        self.base = base
        self.eta = eta
        self.seed = seed & _MASK64
        self.length = base.length
        self._threshold = min(int(eta * 2.0**64), _MASK64 + 1)

    def _flip(self, i: int) -> int:
        return int(splitmix64(self.seed ^ splitmix64(_fold(i))) < self._threshold)

    def bit(self, i: int) -> int:
        b = self.base.bit(i)
        if b == ERASED:
            return b
        return b ^ self._flip(i)

    def bits(self, idx: np.ndarray) -> np.ndarray:
        if self.length >= _DENSE_LIMIT:
            return super().bits(idx)
        idx = np.asarray(idx, dtype=np.int64)
        base = self.base.bits(idx)
        h = _splitmix64_vec(np.uint64(self.seed) ^ _splitmix64_vec(idx.astype(np.uint64)))
        if self._threshold > _MASK64:
            flips = np.ones(idx.size, dtype=np.uint8)
        else:
            flips = (h < np.uint64(self._threshold)).astype(np.uint8)
        return np.where(base == ERASED, base, base ^ flips).astype(np.uint8)


def random_bits(length: int, seed: int) -> BitSource:
    """Lazy uniformly random string."""
    return CorruptedBits(ConstBits(0, length), 0.5, seed)


# query accounting -------------------------------------------------------------


class OracleView:
    length: int

    def query(self, i: int) -> int:
        raise NotImplementedError

    def query_many(self, idx) -> np.ndarray:
        raise NotImplementedError

    def query_range(self, start: int, stop: int) -> np.ndarray:
        raise NotImplementedError

    def read_all(self) -> np.ndarray:
        return self.query_range(0, self.length)

    def sub(self, offset: int, length: int) -> "OracleView":
        return SubView(self, offset, length)

    def tiled(self, copies: int) -> "OracleView":
        return TiledView(self, copies)


class QueryOracle(OracleView):
    """Root oracle over a bit source; logs every position read."""

    def __init__(self, source: BitSource | np.ndarray):
        if not isinstance(source, BitSource):
            source = DenseBits(source)
        self.source = source
        self.length = source.length
        self.total = 0
        self._points: list[int] = []
        self._arrays: list[np.ndarray] = []
        self._ranges: list[tuple[int, int]] = []

    def _check(self, i: int) -> None:
        if not 0 <= i < self.length:
            raise IndexError(f"query {i} outside [0, {self.length})")

    def query(self, i: int) -> int:
        self._check(i)
        self.total += 1
        self._points.append(i)
        return self.source.bit(i)

    def query_many(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size == 0:
            return np.zeros(0, dtype=np.uint8)
        if idx.min() < 0 or idx.max() >= self.length:
            raise IndexError("query outside the oracle")
        self.total += int(idx.size)
        self._arrays.append(idx.copy())
        return self.source.bits(idx)

    def query_range(self, start: int, stop: int) -> np.ndarray:
        if start < 0 or stop > self.length or start > stop:
            raise IndexError("range outside the oracle")
        if stop == start:
            return np.zeros(0, dtype=np.uint8)
        self.total += stop - start
        self._ranges.append((start, stop))
        return self.source.slice(start, stop)

    def _intervals(self) -> list[tuple[int, int]]:
        merged: list[list[int]] = []
        for a, b in sorted(self._ranges):
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return [(a, b) for a, b in merged]

    def _scattered(self) -> set[int] | np.ndarray:
        if self.length < _DENSE_LIMIT:
            parts = self._arrays + [np.array(self._points, dtype=np.int64)]
            return np.unique(np.concatenate(parts)) if parts else np.zeros(0, dtype=np.int64)
        out = set(self._points)
        for arr in self._arrays:
            out.update(int(x) for x in arr)
        return out

    def distinct_count(self) -> int:
        """Number of distinct positions read."""
        intervals = self._intervals()
        covered = sum(b - a for a, b in intervals)
        pts = self._scattered()
        if isinstance(pts, np.ndarray):
            if intervals and pts.size:
                starts = np.array([a for a, _ in intervals], dtype=np.int64)
                stops = np.array([b for _, b in intervals], dtype=np.int64)
                j = np.searchsorted(starts, pts, side="right") - 1
                inside = (j >= 0) & (pts < stops[np.maximum(j, 0)])
                return covered + int(np.count_nonzero(~inside))
            return covered + int(pts.size)
        starts = [a for a, _ in intervals]
        extra = 0
        for p in pts:
            j = bisect_right(starts, p) - 1
            if j < 0 or p >= intervals[j][1]:
                extra += 1
        return covered + extra

    def queried_positions(self) -> np.ndarray:
        """Sorted distinct positions (only for oracles shorter than 2^62)."""
        if self.length >= _DENSE_LIMIT:
            raise CapabilityError("positions of huge oracles are not materialised")
        parts = [np.arange(a, b, dtype=np.int64) for a, b in self._intervals()]
        pts = self._scattered()
        parts.append(pts)
        return np.unique(np.concatenate(parts)) if parts else np.zeros(0, dtype=np.int64)

    def reset(self) -> None:
        self.total = 0
        self._points.clear()
        self._arrays.clear()
        self._ranges.clear()


class SubView(OracleView):
    def __init__(self, parent: OracleView, offset: int, length: int):
        if offset < 0 or offset + length > parent.length:
            raise InputError("sub-view exceeds its parent")
        self.parent = parent
        self.offset = offset
        self.length = length

    def query(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return self.parent.query(self.offset + i)

    def query_many(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.length):
            raise IndexError("query outside the view")
        if self.offset + self.length >= _DENSE_LIMIT:
            return np.array([self.parent.query(int(i) + self.offset) for i in idx], dtype=np.uint8)
        return self.parent.query_many(idx + self.offset)

    def query_range(self, start: int, stop: int) -> np.ndarray:
        if start < 0 or stop > self.length:
            raise IndexError("range outside the view")
        return self.parent.query_range(self.offset + start, self.offset + stop)


class TiledView(OracleView):
    """``copies`` concatenated copies of the parent; reads go to one copy."""

    def __init__(self, parent: OracleView, copies: int):
        self.parent = parent
        self.copies = copies
        self.length = parent.length * copies

    def query(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return self.parent.query(i % self.parent.length)

    def query_many(self, idx) -> np.ndarray:
        return self.parent.query_many(np.asarray(idx, dtype=np.int64) % self.parent.length)

    def query_range(self, start: int, stop: int) -> np.ndarray:
        if start == 0 and stop == self.length:
            return np.tile(self.parent.read_all(), self.copies)
        idx = np.arange(start, stop, dtype=np.int64)
        return self.query_many(idx)


class JoinedView(OracleView):
    def __init__(self, parts: Sequence[OracleView]):
        self.parts = [p for p in parts if p.length]
        self.offsets = [0]
        for p in self.parts:
            self.offsets.append(self.offsets[-1] + p.length)
        self.length = self.offsets[-1]

    def locate(self, i: int) -> tuple[int, int]:
        if not 0 <= i < self.length:
            raise IndexError(i)
        j = bisect_right(self.offsets, i) - 1
        return j, i - self.offsets[j]

    def query(self, i: int) -> int:
        j, off = self.locate(i)
        return self.parts[j].query(off)

    def query_many(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        offs = np.array(self.offsets[:-1], dtype=np.int64)
        which = np.searchsorted(offs, idx, side="right") - 1
        out = np.empty(idx.size, dtype=np.uint8)
        for j in np.unique(which):
            sel = which == j
            out[sel] = self.parts[j].query_many(idx[sel] - offs[j])
        return out

    def query_range(self, start: int, stop: int) -> np.ndarray:
        chunks = []
        for j, p in enumerate(self.parts):
            a = max(start, self.offsets[j])
            b = min(stop, self.offsets[j + 1])
            if a < b:
                chunks.append(p.query_range(a - self.offsets[j], b - self.offsets[j]))
        return np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.uint8)


def empty_oracle() -> QueryOracle:
    return QueryOracle(np.zeros(0, dtype=np.uint8))
