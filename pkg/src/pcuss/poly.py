"""Univariate polynomials over GF(2^t).

A function table ``F -> F`` is an int64 array of length |F| indexed by the
canonical ordering of the field.  Membership in C_F means degree <= |F|/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import CapabilityError, InputError, ParameterError
from .field import FieldParams


def _trim(c: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return c[:0].copy()
    return c[: nz[-1] + 1].copy()


@dataclass(frozen=True, eq=False)
class Poly:
    coeffs: np.ndarray
    field: FieldParams

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.int64)
        object.__setattr__(self, "coeffs", _trim(c))

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return self.coeffs.size - 1

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Poly)
            and other.field == self.field
            and np.array_equal(other.coeffs, self.coeffs)
        )

    def __call__(self, x: int) -> int:
        return poly_eval(self, x)

    def evaluate_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        acc = np.zeros_like(xs)
        for c in self.coeffs[::-1]:
            acc = self.field.vmul(acc, xs) ^ c
        return acc

    def table(self) -> np.ndarray:
        """Evaluations on every field element, canonical order."""
        return self.evaluate_many(np.arange(self.field.size, dtype=np.int64))

    def in_cf(self) -> bool:
        return self.degree <= self.field.size // 2

    def __repr__(self) -> str:
        return f"Poly({self.coeffs.tolist()}, {self.field!r})"


def poly_eval(g: Poly, beta: int) -> int:
    """Horner evaluation."""
    F = g.field
    acc = 0
    for c in g.coeffs[::-1]:
        acc = F.mul(acc, beta) ^ int(c)
    return acc


# coefficient-array arithmetic -----------------------------------------------


def _mul(F: FieldParams, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.size == 0 or b.size == 0:
        return np.zeros(0, dtype=np.int64)
    if a.size < b.size:
        a, b = b, a
    out = np.zeros(a.size + b.size - 1, dtype=np.int64)
    for j, bj in enumerate(b):
        if bj:
            out[j : j + a.size] ^= F.vmul(a, bj)
    return out


def _divmod_monic(F: FieldParams, a: np.ndarray, m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Divide by a monic polynomial ``m``."""
    d = m.size - 1
    r = a.copy()
    if r.size <= d:
        return np.zeros(0, dtype=np.int64), r
    q = np.zeros(r.size - d, dtype=np.int64)
    for i in range(r.size - 1, d - 1, -1):
        c = r[i]
        if c:
            q[i - d] = c
            r[i - d : i + 1] ^= F.vmul(m, c)
    return q, r[:d]


def _derivative(a: np.ndarray) -> np.ndarray:
    # char 2: d/dX X^n = n X^(n-1), so only odd powers survive
    if a.size <= 1:
        return np.zeros(0, dtype=np.int64)
    out = a[1:].copy()
    out[1::2] = 0
    return out


def _subproduct_tree(F: FieldParams, xs: np.ndarray) -> list[list[np.ndarray]]:
    level = [np.array([x, 1], dtype=np.int64) for x in xs]
    tree = [level]
    while len(level) > 1:
        nxt = []
        for i in range(0, len(level) - 1, 2):
            nxt.append(_mul(F, level[i], level[i + 1]))
        if len(level) % 2:
            nxt.append(level[-1])
        tree.append(nxt)
        level = nxt
    return tree


def _remainder_tree_eval(F: FieldParams, f: np.ndarray, tree) -> np.ndarray:
    rems = [f]
    for depth in range(len(tree) - 1, 0, -1):
        children = tree[depth - 1]
        nxt = []
        for i, r in enumerate(rems):
            for child in children[2 * i : 2 * i + 2]:
                nxt.append(_divmod_monic(F, r, child)[1])
        rems = nxt
    return np.array([r[0] if r.size else 0 for r in rems], dtype=np.int64)


def poly_interpolate(points: Sequence[tuple[int, int]], field: FieldParams) -> Poly:
    """Unique polynomial of degree < len(points) through ``points``.

    Subproduct-tree interpolation: weights y_i / M'(x_i) from a remainder
    tree, then recombined bottom-up.
    """
    if not points:
        return Poly(np.zeros(0, dtype=np.int64), field)
    xs = np.array([p[0] for p in points], dtype=np.int64)
    ys = np.array([p[1] for p in points], dtype=np.int64)
    if np.unique(xs).size != xs.size:
        raise InputError("interpolation points must have distinct x-coordinates")
    if xs.size > field.size:
        raise InputError("more points than field elements")
    for arr in (xs, ys):
        if arr.min() < 0 or arr.max() >= field.size:
            raise InputError("coordinate outside the field")
    if xs.size == 1:
        return Poly(ys.copy(), field)
    tree = _subproduct_tree(field, xs)
    root = tree[-1][0]
    dm = _remainder_tree_eval(field, _derivative(root), tree)
    weights = field.vmul(ys, field.vinv(dm))
    level = [np.array([w], dtype=np.int64) for w in weights]
    for depth in range(len(tree) - 1):
        mods = tree[depth]
        nxt = []
        for i in range(0, len(level) - 1, 2):
            left = _mul(field, level[i], mods[i + 1])
            right = _mul(field, level[i + 1], mods[i])
            n = max(left.size, right.size)
            acc = np.zeros(n, dtype=np.int64)
            acc[: left.size] ^= left
            acc[: right.size] ^= right
            nxt.append(acc)
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return Poly(level[0], field)


# fixed-domain linear maps -----------------------------------------------------


def _field_inverse_matrix(F: FieldParams, m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    aug = np.concatenate([m.astype(np.int64), np.eye(n, dtype=np.int64)], axis=1)
    for col in range(n):
        piv = col + int(np.flatnonzero(aug[col:, col])[0])
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        aug[col] = F.vmul(aug[col], F.inv(int(aug[col, col])))
        factors = aug[:, col].copy()
        factors[col] = 0
        nz = np.flatnonzero(factors)
        if nz.size:
            aug[nz] ^= F.vmul(factors[nz, None], aug[col][None, :])
    return aug[:, n:]


def field_solve(F: FieldParams, a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Some solution x of a @ x = b over F, or None if inconsistent."""
    rows, cols = a.shape
    aug = np.concatenate([a.astype(np.int64), b.astype(np.int64)[:, None]], axis=1)
    pivots = []
    r = 0
    for col in range(cols):
        if r == rows:
            break
        cand = np.flatnonzero(aug[r:, col])
        if cand.size == 0:
            continue
        piv = r + int(cand[0])
        if piv != r:
            aug[[r, piv]] = aug[[piv, r]]
        aug[r] = F.vmul(aug[r], F.inv(int(aug[r, col])))
        factors = aug[:, col].copy()
        factors[r] = 0
        nz = np.flatnonzero(factors)
        if nz.size:
            aug[nz] ^= F.vmul(factors[nz, None], aug[r][None, :])
        pivots.append(col)
        r += 1
    if np.any(aug[r:, cols]):
        return None
    x = np.zeros(cols, dtype=np.int64)
    for i, col in enumerate(pivots):
        x[col] = aug[i, cols]
    return x


def vandermonde(F: FieldParams, xs, ncols: int) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.int64)
    out = np.empty((xs.size, ncols), dtype=np.int64)
    for j in range(ncols):
        out[:, j] = F.vpow(xs, j)
    return out


class LowDegreeFrame:
    """Precomputed maps for polynomials of degree < len(points) on fixed points.

    ``coeffs(values)`` interpolates; ``extend(values)`` evaluates the
    interpolant on ``targets``.  Both are field-linear and vectorised over
    leading axes of ``values``.
    """

    def __init__(self, field: FieldParams, points, targets=None):
        self.field = field
        self.points = np.asarray(points, dtype=np.int64)
        if np.unique(self.points).size != self.points.size:
            raise InputError("frame points must be distinct")
        n = self.points.size
        self.inv_vandermonde = _field_inverse_matrix(field, vandermonde(field, self.points, n))
        self.targets = (
            np.arange(field.size, dtype=np.int64) if targets is None else np.asarray(targets, dtype=np.int64)
        )
        self.extension = self._lagrange_matrix(self.targets)

    def _lagrange_matrix(self, targets) -> np.ndarray:
        """Row per target: interpolant value = row . values."""
        vt = vandermonde(self.field, targets, self.points.size)
        # (vt @ inv_vandermonde) over the field
        prod = self.field.vmul(vt[:, :, None], self.inv_vandermonde[None, :, :])
        return np.bitwise_xor.reduce(prod, axis=1)

    def coeffs(self, values) -> np.ndarray:
        return self.field.matvec(self.inv_vandermonde, np.asarray(values, dtype=np.int64))

    def extend(self, values) -> np.ndarray:
        return self.field.matvec(self.extension, np.asarray(values, dtype=np.int64))


def cf_degree_bound(field: FieldParams) -> int:
    return field.size // 2


def constrained_points(field: FieldParams, H: Sequence[int]) -> np.ndarray:
    """H followed by the first |F|/2 + 1 - |H| non-H elements in canonical order."""
    need = cf_degree_bound(field) + 1
    if len(H) > need:
        raise ParameterError(f"|H| = {len(H)} exceeds |F|/2 + 1 = {need}")
    if len(set(H)) != len(H):
        raise ParameterError("H must have distinct elements")
    hset = set(int(h) for h in H)
    extra = []
    for x in range(field.size):
        if len(extra) == need - len(H):
            break
        if x not in hset:
            extra.append(x)
    return np.array(list(H) + extra, dtype=np.int64)


@lru_cache(maxsize=32)
def cf_frame(field: FieldParams, H: tuple[int, ...]) -> LowDegreeFrame:
    """Frame for C_F sampling with the constraint set H, targets = all of F."""
    if field.size > 1 << 12:
        raise CapabilityError(f"dense interpolation frame for {field!r} is too large")
    return LowDegreeFrame(field, constrained_points(field, H))


@lru_cache(maxsize=8)
def full_frame(field: FieldParams) -> LowDegreeFrame:
    if field.size > 1 << 12:
        raise CapabilityError(f"dense interpolation frame for {field!r} is too large")
    return LowDegreeFrame(field, np.arange(field.size), targets=np.zeros(0, dtype=np.int64))


def sample_constrained_values(field: FieldParams, H: Sequence[int], w, rng: np.random.Generator) -> np.ndarray:
    """Values on ``constrained_points(field, H)``: w on H, uniform elsewhere."""
    w = np.asarray(w, dtype=np.int64)
    if w.size != len(H):
        raise InputError(f"|w| = {w.size} but |H| = {len(H)}")
    if w.size and (w.min() < 0 or w.max() > 1):
        raise InputError("w must be a bit string")
    need = cf_degree_bound(field) + 1
    free = rng.integers(0, field.size, size=need - len(H), dtype=np.int64)
    return np.concatenate([w, free])


def poly_sample_constrained(
    H: Sequence[int], w, rng: np.random.Generator, field: FieldParams
) -> Poly:
    """Uniform g in C_F with g(h_i) = w_i."""
    points = constrained_points(field, H)
    values = sample_constrained_values(field, H, w, rng)
    if field.size <= 1 << 12:
        return Poly(cf_frame(field, tuple(int(h) for h in H)).coeffs(values), field)
    return poly_interpolate(list(zip(points.tolist(), values.tolist())), field)


def _check_table(values, field: FieldParams) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    if values.shape != (field.size,):
        raise InputError(f"expected a full table of {field.size} values, got shape {values.shape}")
    return values


def table_degree(values, field: FieldParams) -> int:
    values = _check_table(values, field)
    if field.size <= 1 << 12:
        c = full_frame(field).coeffs(values)
        nz = np.flatnonzero(c)
        return int(nz[-1]) if nz.size else -1
    pts = list(enumerate(values.tolist()))
    return poly_interpolate(pts, field).degree


def poly_is_low_degree(values, field: FieldParams) -> bool:
    return table_degree(values, field) <= cf_degree_bound(field)


def fn_distance(f, g) -> Fraction:
    f = np.asarray(f)
    g = np.asarray(g)
    if f.shape != g.shape:
        raise InputError("tables have different domains")
    if f.size == 0:
        return Fraction(0)
    return Fraction(int(np.count_nonzero(f != g)), f.size)


def berlekamp_welch(xs, ys, max_degree: int, field: FieldParams) -> tuple[Poly, int] | None:
    """Unique decoding: the polynomial of degree <= max_degree within
    floor((n - max_degree - 1) / 2) disagreements of (xs, ys), with its
    disagreement count, or None if there is none.
    """
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    n = xs.size
    e = (n - max_degree - 1) // 2
    if e < 0:
        raise ParameterError("more coefficients than points")
    nq = e + max_degree + 1
    # unknowns: q_0..q_{nq-1}, e_0..e_{e-1}; E monic of degree e
    # Q(x_i) - y_i (E(x_i) - x_i^e) = y_i x_i^e
    vq = vandermonde(field, xs, nq)
    ve = vandermonde(field, xs, e + 1)
    a = np.concatenate([vq, field.vmul(ys[:, None], ve[:, :e])], axis=1)
    b = field.vmul(ys, ve[:, e])
    sol = field_solve(field, a, b)
    if sol is None:
        return None
    q = sol[:nq]
    emon = np.concatenate([sol[nq:], [1]]).astype(np.int64)
    quot, rem = _divmod_monic(field, q, emon)
    if np.any(rem):
        return None
    g = Poly(quot, field)
    if g.degree > max_degree:
        return None
    errs = int(np.count_nonzero(g.evaluate_many(xs) != ys))
    if errs > e:
        return None
    return g, errs
