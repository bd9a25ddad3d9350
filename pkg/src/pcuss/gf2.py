"""Bit-packed GF(2) linear algebra.

Vectors are Python ints (bit j = coordinate j).  A matrix is a list of row
ints.  Span enumeration uses numpy int64 and is limited to 62-bit vectors.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import CapabilityError

ENUM_CHUNK_BITS = 20


def parity(x: int) -> int:
    return x.bit_count() & 1


def rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) via elimination on leading bits."""
    basis: dict[int, int] = {}
    r = 0
    for row in rows:
        while row:
            lead = row.bit_length() - 1
            if lead in basis:
                row ^= basis[lead]
            else:
                basis[lead] = row
                r += 1
                break
    return r


def rref(rows: Sequence[int], ncols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form; pivot columns are the lowest set bit."""
    work = [r for r in rows]
    pivots: list[int] = []
    out: list[int] = []
    for col in range(ncols):
        bit = 1 << col
        pivot = next((i for i, r in enumerate(work) if r & bit), None)
        if pivot is None:
            continue
        prow = work.pop(pivot)
        work = [r ^ prow if r & bit else r for r in work]
        out = [r ^ prow if r & bit else r for r in out]
        out.append(prow)
        pivots.append(col)
    return out, pivots


def nullspace(rows: Sequence[int], ncols: int) -> list[int]:
    """Basis of {x : <row, x> = 0 for every row}."""
    red, pivots = rref(rows, ncols)
    pivset = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivset:
            continue
        x = 1 << free
        for prow, pc in zip(red, pivots):
            if (prow >> free) & 1:
                x |= 1 << pc
        basis.append(x)
    return basis


def transpose(rows: Sequence[int], ncols: int) -> list[int]:
    out = [0] * ncols
    for i, row in enumerate(rows):
        while row:
            low = row & -row
            out[low.bit_length() - 1] |= 1 << i
            row ^= low
    return out


def solve(columns: Sequence[int], target: int) -> int | None:
    """Find u with XOR_{i: u_i=1} columns[i] == target, or None."""
    basis: dict[int, tuple[int, int]] = {}
    for i, col in enumerate(columns):
        comb = 1 << i
        while col:
            lead = col.bit_length() - 1
            if lead in basis:
                bcol, bcomb = basis[lead]
                col ^= bcol
                comb ^= bcomb
            else:
                basis[lead] = (col, comb)
                break
    u = 0
    while target:
        lead = target.bit_length() - 1
        if lead not in basis:
            return None
        bcol, bcomb = basis[lead]
        target ^= bcol
        u ^= bcomb
    return u


def span_table(generators: Sequence[int]) -> np.ndarray:
    """All 2^d combinations; entry u is XOR of generators[i] with bit i of u set."""
    codes = np.zeros(1, dtype=np.int64)
    for g in generators:
        if g >> 62:
            raise CapabilityError("span enumeration supports vectors of at most 62 bits")
        codes = np.concatenate([codes, codes ^ np.int64(g)])
    return codes


def min_weight(generators: Sequence[int], prefix_bits: int | None = None) -> int:
    """Minimum Hamming weight over non-zero combinations.

    With ``prefix_bits = p`` only combinations using at least one of the
    first p generators count.  Returns 0 if the generators are dependent
    (some non-trivial combination vanishes).
    """
    d = len(generators)
    if d == 0:
        raise ValueError("empty generator set")
    lo_n = min(d, ENUM_CHUNK_BITS)
    lo = span_table(generators[:lo_n])
    lo_w = np.bitwise_count(lo).astype(np.int64)
    lo_idx = np.arange(lo.size, dtype=np.int64)
    best = None
    hi_gens = generators[lo_n:]
    hi_table = span_table(hi_gens) if hi_gens else np.zeros(1, dtype=np.int64)
    pmask = (1 << prefix_bits) - 1 if prefix_bits is not None else None
    for h in range(hi_table.size):
        full_idx_hi = h << lo_n
        if h == 0:
            w = lo_w
        else:
            w = np.bitwise_count(lo ^ hi_table[h]).astype(np.int64)
        if pmask is None:
            valid = (lo_idx | full_idx_hi) != 0
        else:
            valid = ((lo_idx | full_idx_hi) & pmask) != 0
        if not valid.any():
            continue
        m = int(w[valid].min())
        if best is None or m < best:
            best = m
            if best == 0:
                break
    return int(best)
