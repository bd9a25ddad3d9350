"""Arithmetic in GF(2^t) for t = 2 * 3^r, modulus x^t + x^(t/2) + 1.

Elements are plain ints: bit i is the coefficient of x^i, so the canonical
bit string of an element is its little-endian binary expansion and the
canonical ordering of the field is integer order.

Scalar ops go through :class:`FieldParams`; vectorised ops on numpy arrays
use exp/log tables, built lazily for t <= 18.  :class:`FieldElem` is a thin
operator-overloading wrapper for callers who want type checking between
fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import DomainError, ParameterError

TABLE_MAX_BITS = 18


def clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2)[x] polynomials packed as ints."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def gf2x_mod(a: int, m: int) -> int:
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def is_irreducible_bruteforce(m: int) -> bool:
    """Trial division by every polynomial of degree 1..deg(m)/2."""
    deg = m.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for f in range(1 << d, 1 << (d + 1)):
            if gf2x_mod(m, f) == 0:
                return False
    return True


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


@dataclass(frozen=True)
class FieldParams:
    """GF(2^t) with an explicit modulus.

    Use :meth:`family` for the t = 2 * 3^r trinomial fields.  A custom
    modulus is accepted for internal toy fields (e.g. GF(8) in tests); it is
    not checked for irreducibility unless asked.
    """

    t: int
    modulus: int
    r: int | None = None

    @classmethod
    def family(cls, r: int) -> "FieldParams":
        return _family(r)

    @classmethod
    def from_size(cls, size: int) -> "FieldParams":
        t = size.bit_length() - 1
        if size != 1 << t:
            raise ParameterError(f"field size {size} is not a power of two")
        r, rest = 0, t
        if rest % 2:
            raise ParameterError(f"GF(2^{t}) is not in the t = 2*3^r family")
        rest //= 2
        while rest % 3 == 0:
            rest //= 3
            r += 1
        if rest != 1:
            raise ParameterError(f"GF(2^{t}) is not in the t = 2*3^r family")
        return _family(r)

    @property
    def size(self) -> int:
        return 1 << self.t

    @property
    def order(self) -> int:
        """Size of the multiplicative group."""
        return (1 << self.t) - 1

    def __repr__(self) -> str:
        return f"GF(2^{self.t})"

    def check(self, a: int) -> int:
        if not 0 <= a < self.size:
            raise DomainError(f"{a} is not an element of {self!r}")
        return a

    # scalar arithmetic -------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul_schoolbook(self, a: int, b: int) -> int:
        return gf2x_mod(clmul(a, b), self.modulus)

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self.t <= TABLE_MAX_BITS:
            exp, log = self.tables
            return int(exp[int(log[a]) + int(log[b])])
        return self.mul_schoolbook(a, b)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        out = 1
        while e:
            if e & 1:
                out = self.mul(out, a)
            a = self.mul(a, a)
            e >>= 1
        return out

    def inv(self, a: int) -> int:
        if a == 0:
            raise DomainError("zero has no multiplicative inverse")
        if self.t <= TABLE_MAX_BITS:
            exp, log = self.tables
            return int(exp[(self.order - int(log[a])) % self.order])
        return self.inv_euclid(a)

    def inv_euclid(self, a: int) -> int:
        """Extended Euclid over GF(2)[x]."""
        if a == 0:
            raise DomainError("zero has no multiplicative inverse")
        u, v = a, self.modulus
        g1, g2 = 1, 0
        while u != 1:
            j = u.bit_length() - v.bit_length()
            if j < 0:
                u, v, g1, g2 = v, u, g2, g1
                j = -j
            u ^= v << j
            g1 ^= g2 << j
        return gf2x_mod(g1, self.modulus)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    # tables and vectorised ops -----------------------------------------

    @cached_property
    def generator(self) -> int:
        """Smallest primitive element."""
        factors = _prime_factors(self.order)
        for g in range(2, self.size):
            if all(self.pow_schoolbook(g, self.order // p) != 1 for p in factors):
                return g
        if self.size == 2:
            return 1
        raise ParameterError(f"modulus of {self!r} is not irreducible")

    def pow_schoolbook(self, a: int, e: int) -> int:
        out = 1
        while e:
            if e & 1:
                out = self.mul_schoolbook(out, a)
            a = self.mul_schoolbook(a, a)
            e >>= 1
        return out

    @cached_property
    def tables(self) -> tuple[np.ndarray, np.ndarray]:
        """(exp, log) with exp doubled in length so log a + log b never wraps."""
        if self.t > TABLE_MAX_BITS:
            raise ParameterError(f"no tables for {self!r}")
        g = self.generator
        n = self.order
        exp = np.zeros(2 * n + 1, dtype=np.int64)
        log = np.zeros(self.size, dtype=np.int64)
        x = 1
        for i in range(n):
            exp[i] = x
            log[x] = i
            x = self.mul_schoolbook(x, g)
        exp[n : 2 * n] = exp[:n]
        exp[2 * n] = exp[0]
        return exp, log

    def vmul(self, a, b) -> np.ndarray:
        """Elementwise product of broadcastable int arrays."""
        exp, log = self.tables
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = exp[log[a] + log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def vinv(self, a) -> np.ndarray:
        exp, log = self.tables
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise DomainError("zero has no multiplicative inverse")
        return exp[(self.order - log[a]) % self.order]

    def vpow(self, a, e: int) -> np.ndarray:
        exp, log = self.tables
        a = np.asarray(a, dtype=np.int64)
        out = exp[(log[a] * e) % self.order]
        if e == 0:
            return np.ones_like(a)
        return np.where(a == 0, 0, out)

    def matvec(self, m: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Field matrix times vector (last axis of ``v`` broadcast against rows)."""
        prod = self.vmul(m, v[..., None, :])
        return np.bitwise_xor.reduce(prod, axis=-1)

    def elements(self) -> range:
        """All elements in canonical order."""
        return range(self.size)

    def to_bits(self, a: int) -> np.ndarray:
        """Canonical t-bit representation, bit i = coefficient of x^i."""
        return ((a >> np.arange(self.t)) & 1).astype(np.uint8)

    def from_bits(self, bits) -> int:
        bits = np.asarray(bits)
        if bits.shape != (self.t,):
            raise ParameterError(f"expected {self.t} bits, got {bits.shape}")
        return int(np.dot(bits.astype(np.int64), 1 << np.arange(self.t)))

    def elem(self, value: int) -> "FieldElem":
        return FieldElem(self.check(value), self)


@lru_cache(maxsize=None)
def _family(r: int) -> FieldParams:
    if r < 0:
        raise ParameterError("r must be non-negative")
    t = 2 * 3**r
    modulus = (1 << t) | (1 << (t // 2)) | 1
    return FieldParams(t=t, modulus=modulus, r=r)


@dataclass(frozen=True)
class FieldElem:
    value: int
    field: FieldParams

    def _other(self, other: "FieldElem") -> int:
        if not isinstance(other, FieldElem):
            return NotImplemented
        if other.field != self.field:
            raise ParameterError(f"cannot combine {self.field!r} with {other.field!r}")
        return other.value

    def __add__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return FieldElem(self.value ^ b, self.field)

    __sub__ = __add__

    def __mul__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return FieldElem(self.field.mul(self.value, b), self.field)

    def __truediv__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return FieldElem(self.field.div(self.value, b), self.field)

    def __pow__(self, e: int):
        return FieldElem(self.field.pow(self.value, e), self.field)

    def inverse(self) -> "FieldElem":
        return FieldElem(self.field.inv(self.value), self.field)

    def bits(self) -> np.ndarray:
        return self.field.to_bits(self.value)

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.field!r}({self.value:#x})"


def fld_add(a: FieldElem, b: FieldElem) -> FieldElem:
    return a + b


def fld_mul(a: FieldElem, b: FieldElem) -> FieldElem:
    return a * b


def fld_inv(a: FieldElem) -> FieldElem:
    return a.inverse()
