"""Systematic binary linear code of rate exactly 1/100 with certified distance.

For k <= 12 the code is a seeded random ``[I | R]`` code whose minimum
distance is certified by enumerating all 2^k codewords.  For larger k the
redundancy is a Reed-Solomon code over GF(2^6) concatenated with a small
certified inner code, and the distance is certified by the product bound.
Both are zero-padded to exactly 100k bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .errors import CapabilityError, GenerationError, InputError, ParameterError
from .field import FieldParams

RATE_FACTOR = 100
ENUM_MAX_K = 12
DEFAULT_MIN_DISTANCE = Fraction(1, 20)
_RS_FIELD = FieldParams.family(1)


def all_messages(k: int) -> np.ndarray:
    """(2^k, k) array; row i holds the little-endian bits of i."""
    idx = np.arange(1 << k, dtype=np.int64)
    return ((idx[:, None] >> np.arange(k)) & 1).astype(np.uint8)


def bits_to_int(bits) -> int:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size == 0:
        return 0
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def int_to_bits(x: int, n: int) -> np.ndarray:
    if n == 0:
        return np.zeros(0, dtype=np.uint8)
    raw = np.frombuffer(x.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n].copy()


def _min_weight_dense(generator: np.ndarray) -> int:
    k = generator.shape[0]
    book = (all_messages(k).astype(np.int64) @ generator.astype(np.int64)) & 1
    return int(book[1:].sum(axis=1).min())


@dataclass(frozen=True, eq=False)
class GoodCodeSpec:
    """Encoding map ``w -> generator^T w`` (mod 2) with a systematic prefix.

    ``generator`` is a k x 100k 0/1 matrix whose first k columns are the
    identity.
    """

    k: int
    n: int
    generator: np.ndarray
    certified_distance: Fraction
    certification_method: str
    seed: int
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n != RATE_FACTOR * self.k:
            raise ParameterError(f"n must be {RATE_FACTOR}k")

    @cached_property
    def codebook(self) -> np.ndarray | None:
        """All codewords indexed by message integer, for k <= ENUM_MAX_K."""
        if self.k > ENUM_MAX_K:
            return None
        return ((all_messages(self.k) @ self.generator.astype(np.int64)) & 1).astype(np.uint8)

    @cached_property
    def column_masks(self) -> list[int]:
        """Column i of the generator as a k-bit int (bit j = row j)."""
        return [bits_to_int(self.generator[:, i]) for i in range(self.n)]

    def encode(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=np.uint8)
        if w.shape != (self.k,):
            raise InputError(f"message must have {self.k} bits, got shape {w.shape}")
        if self.codebook is not None:
            return self.codebook[bits_to_int(w)].copy()
        return ((w.astype(np.int64) @ self.generator) & 1).astype(np.uint8)

    def encode_values(self, values) -> np.ndarray:
        """Encode many messages given as ints; returns shape (len, n)."""
        values = np.asarray(values, dtype=np.int64)
        if self.codebook is not None:
            return self.codebook[values]
        msgs = ((values[:, None] >> np.arange(self.k)) & 1).astype(np.int64)
        return ((msgs @ self.generator) & 1).astype(np.uint8)

    def decode(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=np.uint8)
        if c.shape != (self.n,):
            raise InputError(f"codeword must have {self.n} bits")
        return c[: self.k].copy()

    def is_member(self, c) -> bool:
        c = np.asarray(c)
        if c.shape != (self.n,):
            raise InputError(f"codeword must have {self.n} bits")
        if np.any(c > 1):
            return False
        return bool(np.array_equal(self.encode(c[: self.k].astype(np.uint8)), c))

    def members(self, blocks: np.ndarray) -> np.ndarray:
        """Row-wise membership for an (r, n) array of candidate codewords."""
        blocks = np.asarray(blocks)
        if blocks.ndim != 2 or blocks.shape[1] != self.n:
            raise InputError("expected an (r, n) array")
        if self.k == 0:
            return np.ones(blocks.shape[0], dtype=bool)
        vals = (blocks[:, : self.k].astype(np.int64) << np.arange(self.k)).sum(axis=1)
        ok = np.all(blocks <= 1, axis=1)
        return ok & np.all(self.encode_values(np.where(ok, vals, 0)) == blocks, axis=1)


def _random_systematic(k: int, n: int, rng: np.random.Generator) -> np.ndarray:
    gen = np.zeros((k, n), dtype=np.uint8)
    gen[:, :k] = np.eye(k, dtype=np.uint8)
    gen[:, k:] = rng.integers(0, 2, size=(k, n - k), dtype=np.uint8)
    return gen


def _rs_generator_matrix(K: int, N: int) -> np.ndarray:
    """K x N systematic RS generator over GF(2^6) on points 0..N-1."""
    F = _RS_FIELD
    from .poly import LowDegreeFrame

    frame = LowDegreeFrame(F, np.arange(K), targets=np.arange(N))
    return frame.extension.T.copy()


def _concatenated(k: int, seed: int, min_distance: Fraction) -> GoodCodeSpec:
    t = _RS_FIELD.t
    K = -(-k // t)
    N = min(_RS_FIELD.size - 1, 4 * K)
    if N <= K:
        raise CapabilityError(f"k = {k} too large for the GF(2^6) outer code")
    n = RATE_FACTOR * k
    inner_n = (n - k) // N
    inner = _random_code_certified(t, inner_n, seed, Fraction(1, 5))
    rs = _rs_generator_matrix(K, N)
    gen = np.zeros((k, n), dtype=np.uint8)
    gen[:, :k] = np.eye(k, dtype=np.uint8)
    # message bit j sits in symbol j // t at bit j % t
    for j in range(k):
        sym, b = divmod(j, t)
        col = k
        for pos in range(N):
            val = _RS_FIELD.mul(int(rs[sym, pos]), 1 << b)
            word = ((val >> np.arange(t)) & 1).astype(np.int64)
            gen[j, col : col + inner_n] = (word @ inner.astype(np.int64)) & 1
            col += inner_n
    outer_rel = Fraction(N - K + 1, N)
    inner_w = _min_weight_dense(inner)
    bound = Fraction((N - K + 1) * inner_w, n)
    if bound < min_distance:
        raise GenerationError("concatenation bound below target", {"bound": str(bound)})
    return GoodCodeSpec(
        k=k,
        n=n,
        generator=gen,
        certified_distance=bound,
        certification_method="concatenation-bound",
        seed=seed,
        stats={"outer": [N, K], "outer_distance": str(outer_rel), "inner_n": inner_n, "inner_weight": inner_w},
    )


def _random_code_certified(k: int, n: int, seed: int, min_distance: Fraction, max_attempts: int = 100) -> np.ndarray:
    rng = np.random.default_rng([seed, k, n])
    for _ in range(max_attempts):
        gen = _random_systematic(k, n, rng)
        if Fraction(_min_weight_dense(gen), n) >= min_distance:
            return gen
    raise GenerationError(f"no [{n},{k}] code with distance >= {min_distance}", {"attempts": max_attempts})


@lru_cache(maxsize=64)
def goodcode(k: int, seed: int = 0, min_distance: Fraction = DEFAULT_MIN_DISTANCE) -> GoodCodeSpec:
    """The default code for k message bits, reproducible from (seed, k)."""
    if k < 0:
        raise ParameterError("k must be non-negative")
    n = RATE_FACTOR * k
    if k == 0:
        return GoodCodeSpec(0, 0, np.zeros((0, 0), dtype=np.uint8), Fraction(1), "enumeration", seed)
    if k > ENUM_MAX_K:
        return _concatenated(k, seed, min_distance)
    rng = np.random.default_rng([seed, k])
    for attempt in range(1, 101):
        gen = _random_systematic(k, n, rng)
        d = Fraction(_min_weight_dense(gen), n)
        if d >= min_distance:
            return GoodCodeSpec(k, n, gen, d, "enumeration", seed, {"attempts": attempt})
    raise GenerationError("random systematic code failed certification", {"attempts": 100})


def certify_goodcode(spec: GoodCodeSpec) -> Fraction:
    """Exact relative minimum distance by enumeration (k <= ENUM_MAX_K)."""
    if spec.k > ENUM_MAX_K:
        raise CapabilityError(f"enumeration limited to k <= {ENUM_MAX_K}")
    if spec.k == 0:
        return Fraction(1)
    return Fraction(_min_weight_dense(spec.generator), spec.n)


def spiel_encode(w, spec: GoodCodeSpec | None = None) -> np.ndarray:
    w = np.asarray(w, dtype=np.uint8)
    spec = spec or goodcode(w.size)
    return spec.encode(w)


def spiel_decode(c, spec: GoodCodeSpec) -> np.ndarray:
    return spec.decode(c)


def spiel_membership(c, spec: GoodCodeSpec) -> bool:
    return spec.is_member(c)


def spiel_of_function(table, field_params: FieldParams, spec: GoodCodeSpec | None = None) -> np.ndarray:
    """Concatenate Spiel(<f(beta)>) over beta in canonical order."""
    table = np.asarray(table, dtype=np.int64)
    if table.shape != (field_params.size,):
        raise InputError(f"expected a table of {field_params.size} values")
    spec = spec or goodcode(field_params.t)
    if spec.k != field_params.t:
        raise ParameterError("code message length must equal the field bit width")
    return spec.encode_values(table).reshape(-1)
