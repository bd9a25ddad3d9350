"""Level-0 hard code ensemble.

``A`` is a 4k x 3k GF(2) matrix with columns v_1..v_3k.  The ensemble for a
secret w is {A u : u in {0,1}^3k, u_1..u_k = w}.  A is accepted when

* Span{v_1..v_3k} has relative distance >= 1/30,
* Span{v_(k+1)..v_3k} has relative dual distance >= 1/10,
* distinct secrets give ensembles at relative distance > 1/10,

all certified by enumeration.  The third condition is optional at
generation time (see :func:`hardcode_generate`) and always reported.  Vectors are packed into ints: a column is a
4k-bit int (bit i = row i), a witness u is a 3k-bit int (bit j = u_j).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations

import numpy as np

from . import gf2
from .errors import CapabilityError, GenerationError, InputError, ParameterError
from .goodcode import bits_to_int, int_to_bits

DISTANCE_TARGET = Fraction(1, 30)
DUAL_TARGET = Fraction(1, 10)
ENSEMBLE_TARGET = Fraction(1, 10)
ENUM_MAX_K = 12
MAX_ATTEMPTS = 1000


@dataclass(frozen=True)
class CertificationReport:
    k: int
    rank: int
    min_weight: int
    dual_min_weight: int
    ensemble_min_weight: int
    distance: Fraction
    dual_distance: Fraction
    ensemble_distance: Fraction
    vacuous: bool

    @property
    def passed(self) -> bool:
        """Rank, distance and dual-distance certificates."""
        return self.rank == 3 * self.k and self.distance >= DISTANCE_TARGET and self.dual_distance >= DUAL_TARGET

    @property
    def ensemble_separated(self) -> bool:
        return self.ensemble_distance > ENSEMBLE_TARGET

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "rank": self.rank,
            "distance": str(self.distance),
            "dual_distance": str(self.dual_distance),
            "ensemble_distance": str(self.ensemble_distance),
            "vacuous": self.vacuous,
            "passed": self.passed,
            "ensemble_separated": self.ensemble_separated,
        }


@dataclass(frozen=True, eq=False)
class HardCodeSpec:
    k: int
    A: np.ndarray
    dist_cert: Fraction
    dual_cert: Fraction
    ensemble_cert: Fraction
    seed: int
    stats: dict = field(default_factory=dict)

    @property
    def length(self) -> int:
        return 4 * self.k

    @cached_property
    def columns(self) -> list[int]:
        return [bits_to_int(self.A[:, j]) for j in range(3 * self.k)]

    @cached_property
    def rows(self) -> list[int]:
        """Row i of A as a 3k-bit int: v_i = parity(row_i & u)."""
        return [bits_to_int(self.A[i]) for i in range(4 * self.k)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, HardCodeSpec)
            and self.k == other.k
            and np.array_equal(self.A, other.A)
            and (self.dist_cert, self.dual_cert, self.ensemble_cert) == (other.dist_cert, other.dual_cert, other.ensemble_cert)
        )


@dataclass(frozen=True, eq=False)
class BaseEncoding:
    bits: np.ndarray
    witness: int


def _columns_of(A: np.ndarray) -> list[int]:
    return [bits_to_int(A[:, j]) for j in range(A.shape[1])]


def certify_matrix(A: np.ndarray, k: int) -> CertificationReport:
    """Exact certification by enumeration."""
    A = np.asarray(A, dtype=np.uint8)
    n = 4 * k
    if A.shape != (n, 3 * k):
        raise InputError(f"A must be {n} x {3 * k}")
    if k > ENUM_MAX_K:
        raise CapabilityError(f"enumeration limited to k <= {ENUM_MAX_K}")
    cols = _columns_of(A)
    r = gf2.rank(cols)
    if r < 3 * k:
        mw = 0
        ens = 0
    else:
        mw = gf2.min_weight(cols)
        ens = gf2.min_weight(cols, prefix_bits=k)
    dual = gf2.nullspace(cols[k:], n)
    dual_mw = gf2.min_weight(dual) if dual else n + 1
    return CertificationReport(
        k=k,
        rank=r,
        min_weight=mw,
        dual_min_weight=dual_mw,
        ensemble_min_weight=ens,
        distance=Fraction(mw, n),
        dual_distance=Fraction(dual_mw, n),
        ensemble_distance=Fraction(ens, n),
        vacuous=n < 30,
    )


def certify_hardcode(spec: HardCodeSpec) -> CertificationReport:
    return certify_matrix(spec.A, spec.k)


def hardcode_generate(
    k: int, seed: int = 0, max_attempts: int = MAX_ATTEMPTS, require_ensemble: bool = False
) -> HardCodeSpec:
    """Sample A until it certifies; regenerating from ``seed`` is bit-identical.

    With ``require_ensemble`` the ensembles of distinct secrets must also be
    more than 1/10 apart, which is rare for small k (about one matrix in a
    hundred at k = 6).
    """
    if k < 3:
        raise ParameterError("k must be at least 3")
    if k > ENUM_MAX_K:
        raise CapabilityError(f"enumeration limited to k <= {ENUM_MAX_K}")
    rng = np.random.default_rng([seed, k])
    failures = {"rank": 0, "distance": 0, "dual": 0, "ensemble": 0}
    for attempt in range(1, max_attempts + 1):
        A = rng.integers(0, 2, size=(4 * k, 3 * k), dtype=np.uint8)
        rep = certify_matrix(A, k)
        if rep.passed and (rep.ensemble_separated or not require_ensemble):
            return HardCodeSpec(
                k=k,
                A=A,
                dist_cert=rep.distance,
                dual_cert=rep.dual_distance,
                ensemble_cert=rep.ensemble_distance,
                seed=seed,
                stats={"attempts": attempt, "failures": failures, "vacuous": rep.vacuous},
            )
        if rep.rank < 3 * k:
            failures["rank"] += 1
        elif rep.distance < DISTANCE_TARGET:
            failures["distance"] += 1
        elif rep.dual_distance < DUAL_TARGET:
            failures["dual"] += 1
        else:
            failures["ensemble"] += 1
    raise GenerationError(
        f"no certified matrix for k = {k} in {max_attempts} attempts",
        {"attempts": max_attempts, "failures": failures},
    )


def _check_w(spec: HardCodeSpec, w) -> np.ndarray:
    w = np.asarray(w, dtype=np.uint8)
    if w.shape != (spec.k,):
        raise InputError(f"secret must have {spec.k} bits")
    return w


def encode_witness(spec: HardCodeSpec, u: int) -> np.ndarray:
    v = 0
    for j, col in enumerate(spec.columns):
        if (u >> j) & 1:
            v ^= col
    return int_to_bits(v, spec.length)


def base_encode(spec: HardCodeSpec, w, rng: np.random.Generator) -> BaseEncoding:
    w = _check_w(spec, w)
    tail = int(rng.integers(0, 1 << (2 * spec.k), dtype=np.int64))
    u = bits_to_int(w) | (tail << spec.k)
    return BaseEncoding(encode_witness(spec, u), u)


def base_encode_many(spec: HardCodeSpec, secrets: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Encode r secrets given as ints; returns (bits (r, 4k), witnesses (r,))."""
    secrets = np.asarray(secrets, dtype=np.int64)
    tails = rng.integers(0, 1 << (2 * spec.k), size=secrets.size, dtype=np.int64)
    u = secrets | (tails << spec.k)
    ubits = ((u[:, None] >> np.arange(3 * spec.k)) & 1).astype(np.int64)
    bits = ((ubits @ spec.A.T.astype(np.int64)) & 1).astype(np.uint8)
    return bits, u


def base_membership(spec: HardCodeSpec, w, v) -> bool:
    """Is there u with A u = v and u|_(1..k) = w?  Gaussian elimination."""
    w = _check_w(spec, w)
    v = np.asarray(v)
    if v.shape != (spec.length,):
        raise InputError(f"codeword must have {spec.length} bits")
    if np.any(v > 1):
        return False
    target = bits_to_int(v.astype(np.uint8))
    for j in range(spec.k):
        if w[j]:
            target ^= spec.columns[j]
    return gf2.solve(spec.columns[spec.k :], target) is not None


def find_witness(spec: HardCodeSpec, w, v) -> int | None:
    w = _check_w(spec, w)
    target = bits_to_int(np.asarray(v, dtype=np.uint8))
    for j in range(spec.k):
        if w[j]:
            target ^= spec.columns[j]
    tail = gf2.solve(spec.columns[spec.k :], target)
    if tail is None:
        return None
    return bits_to_int(w) | (tail << spec.k)


def restricted_rank(spec: HardCodeSpec, Q) -> int:
    """Rank of rows Q of the tail submatrix (columns k+1..3k)."""
    tail_rows = [r >> spec.k for r in spec.rows]
    return gf2.rank(tail_rows[q] for q in Q)


def base_restricted_uniformity(spec: HardCodeSpec, w, Q) -> bool:
    """v|_Q uniform on {0,1}^|Q| for v ~ H_k(w).  Independent of w."""
    Q = list(Q)
    if any(not 0 <= q < spec.length for q in Q):
        raise InputError("index outside [4k]")
    if len(set(Q)) != len(Q):
        raise InputError("Q has repeated indices")
    return restricted_rank(spec, Q) == len(Q)


def ensemble_members(spec: HardCodeSpec, w) -> np.ndarray:
    """All 2^(2k) members of H_k(w) as packed ints, indexed by the tail."""
    w = _check_w(spec, w)
    if spec.k > ENUM_MAX_K:
        raise CapabilityError("enumeration too large")
    base = 0
    for j in range(spec.k):
        if w[j]:
            base ^= spec.columns[j]
    return gf2.span_table(spec.columns[spec.k :]) ^ np.int64(base)


def distance_to_ensemble(spec: HardCodeSpec, v, w) -> int:
    members = ensemble_members(spec, w)
    x = np.int64(bits_to_int(np.asarray(v, dtype=np.uint8)))
    return int(np.bitwise_count(members ^ x).min())


def all_small_sets(n: int, max_size: int):
    for s in range(max_size + 1):
        yield from combinations(range(n), s)
