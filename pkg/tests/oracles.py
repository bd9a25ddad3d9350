"""Independent reference computations used as test oracles.

Deliberately naive: no tables, no vectorisation, no shared code with the
package beyond plain ints.
"""

from __future__ import annotations

from itertools import product


def gf_mul(a: int, b: int, t: int, modulus: int) -> int:
    """Schoolbook multiply, then reduce bit by bit."""
    acc = 0
    for i in range(t):
        if (b >> i) & 1:
            acc ^= a << i
    for deg in range(2 * t - 2, t - 1, -1):
        if (acc >> deg) & 1:
            acc ^= modulus << (deg - t)
    return acc


def gf_inv_search(a: int, t: int, modulus: int) -> int:
    for x in range(1, 1 << t):
        if gf_mul(a, x, t, modulus) == 1:
            return x
    raise ZeroDivisionError(a)


def gf_pow(a: int, e: int, t: int, modulus: int) -> int:
    out = 1
    for _ in range(e):
        out = gf_mul(out, a, t, modulus)
    return out


def naive_eval(coeffs, x: int, t: int, modulus: int) -> int:
    """Sum of c_i x^i with explicit powers."""
    acc = 0
    for i, c in enumerate(coeffs):
        acc ^= gf_mul(int(c), gf_pow(x, i, t, modulus), t, modulus)
    return acc


def poly_mul(a, b, t, modulus):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] ^= gf_mul(int(x), int(y), t, modulus)
    return out


def lagrange(points, t: int, modulus: int) -> list[int]:
    """Coefficients of the interpolating polynomial by the Lagrange formula."""
    n = len(points)
    out = [0] * n
    for i, (xi, yi) in enumerate(points):
        basis = [1]
        denom = 1
        for j, (xj, _) in enumerate(points):
            if j != i:
                basis = poly_mul(basis, [xj, 1], t, modulus)
                denom = gf_mul(denom, xi ^ xj, t, modulus)
        scale = gf_mul(int(yi), gf_inv_search(denom, t, modulus), t, modulus)
        for d, c in enumerate(basis):
            out[d] ^= gf_mul(c, scale, t, modulus)
    while out and out[-1] == 0:
        out.pop()
    return out


def brute_min_weight(generator_rows) -> int:
    """Minimum weight of a nonzero combination of the given 0/1 rows."""
    rows = [list(map(int, r)) for r in generator_rows]
    best = None
    for coeffs in product((0, 1), repeat=len(rows)):
        if not any(coeffs):
            continue
        word = [0] * len(rows[0])
        for c, r in zip(coeffs, rows):
            if c:
                word = [x ^ y for x, y in zip(word, r)]
        w = sum(word)
        best = w if best is None else min(best, w)
    return best


def matvec_bits(A, u_bits) -> list[int]:
    return [sum(int(A[i][j]) * int(u_bits[j]) for j in range(len(u_bits))) % 2 for i in range(len(A))]
