"""Yes/no input distributions, restricted-distribution tests and distance checks.

D_yes(w) is a uniform encoding of w.  D_no picks a uniformly random
lambda : F \\ H -> F and encodes each block beta independently as a uniform
member of E^(l-1)(<lambda(beta)>); at level 0 it is a uniform string.

Restricted-equality verdicts:

* level 0, exact: v|_Q under H_k(w) is uniform iff the tail rows Q of A have
  full rank, and D_no|_Q is always uniform.
* level 1, exact: blocks whose restricted tail rows have full rank are
  uniform whatever their value.  The remaining ("structured") blocks only
  see g at those points; if there are at most |F|/2 + 1 - k of them, g
  restricted there is uniform and independent (interpolation through H and
  those points leaves the rest free), exactly like lambda.
* otherwise, statistical: empirical TV between N samples of each side,
  indistinguishable iff TV <= 3 sqrt(2^|Q| / N).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import sqrt

import numpy as np

from . import gf2
from .basecode import base_restricted_uniformity, ensemble_members, restricted_rank
from .ensemble import (
    Encoding,
    EncodingWitness,
    LevelParams,
    _secret_bits,
    encode_blocks,
    pcuss_encode,
    sample_block_ensemble,
)
from .errors import CapabilityError, InputError, ParameterError
from .goodcode import bits_to_int
from .oracle import BitSource, ConstBits, CorruptedBits, random_bits
from .poly import berlekamp_welch, cf_frame, constrained_points

STAT_MAX_Q = 20


@dataclass
class RestrictionTestReport:
    Q: list[int]
    method: str
    tv_estimate: Fraction
    samples: int
    verdict: str
    threshold: float | None = None
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "Q": list(self.Q),
            "method": self.method,
            "tv_estimate": str(self.tv_estimate),
            "samples": self.samples,
            "verdict": self.verdict,
            "threshold": self.threshold,
            "details": dict(self.details),
        }


# samplers ---------------------------------------------------------------------------


def sample_dyes(params: LevelParams, w, rng: np.random.Generator) -> Encoding:
    return pcuss_encode(params, w, rng)


def sample_dno(params: LevelParams, rng: np.random.Generator) -> Encoding:
    """Level 0: uniform string.  Level > 0: blocks encode a random lambda."""
    if params.ell == 0:
        bits = rng.integers(0, 2, size=params.length, dtype=np.uint8)
        return Encoding(bits, 0, params, None)
    lev = params.top
    lam = rng.integers(0, lev.field.size, size=lev.n_blocks, dtype=np.int64)
    return sample_block_ensemble(params, lam, rng)


def nearest_member(params: LevelParams, dno: Encoding, w, rng: np.random.Generator) -> Encoding:
    """A member of E(w) close to a D_no sample, with its witness.

    g interpolates w on H and lambda on the first free points; blocks where g
    agrees with lambda keep their encoding, the others are re-encoded.
    """
    if params.ell == 0:
        raise ParameterError("level-0 samples carry no block structure")
    if dno.witness is None or dno.witness.table is None:
        raise InputError("D_no sample lacks its lambda witness")
    lev = params.top
    F = lev.field
    w = np.asarray(w, dtype=np.uint8)
    lam_table = dno.witness.table
    pts = constrained_points(F, lev.H)
    values = np.concatenate([w.astype(np.int64), lam_table[pts[lev.k :]]])
    table = cf_frame(F, lev.H).extend(values)
    g_out = table[lev.outside]
    lam_out = lam_table[lev.outside]
    keep = g_out == lam_out
    blocks = dno.bits.reshape(lev.n_blocks, -1).copy()
    children = list(dno.witness.children) if params.ell > 1 else np.array(dno.witness.children).copy()
    redo = np.flatnonzero(~keep)
    if redo.size:
        new_bits, new_wits = encode_blocks(params.child, g_out[redo], rng)
        blocks[redo] = new_bits
        for i, b in enumerate(redo):
            children[b] = new_wits[i]
    wit = EncodingWitness(w, values=values, table=table, children=children)
    return Encoding(blocks.reshape(-1), params.ell, params, wit)


# linear restricted samplers -------------------------------------------------------------


def _pack_rows(rows: list[int], nbits: int) -> np.ndarray:
    words = max(1, -(-nbits // 64))
    out = np.zeros((len(rows), words), dtype=np.uint64)
    for i, r in enumerate(rows):
        for j in range(words):
            out[i, j] = (r >> (64 * j)) & ((1 << 64) - 1)
    return out


def _sample_parities(rows: list[int], nbits: int, fixed_low: int, n_fixed: int, N: int, rng, chunk: int = 200_000) -> np.ndarray:
    """N samples of (parity(row & U))_row for U uniform with its low bits fixed."""
    packed = _pack_rows(rows, nbits)
    words = packed.shape[1]
    fixed_mask = _pack_rows([(1 << n_fixed) - 1], nbits)[0]
    fixed_val = _pack_rows([fixed_low], nbits)[0]
    out = np.empty((N, len(rows)), dtype=np.uint8)
    done = 0
    while done < N:
        n = min(chunk, N - done)
        U = rng.integers(0, np.iinfo(np.uint64).max, size=(n, words), dtype=np.uint64, endpoint=True)
        U = (U & ~fixed_mask) | fixed_val
        for q in range(len(rows)):
            cnt = np.bitwise_count(U & packed[q]).sum(axis=1, dtype=np.int64)
            out[done : done + n, q] = cnt & 1
        done += n
    return out


def restricted_linear_maps(params: LevelParams, w, Q) -> tuple[tuple, tuple]:
    """Affine descriptions of D_yes(w)|_Q and D_no|_Q.

    Each is (rows, nbits, fixed_low, n_fixed): sample U uniform on nbits with
    its low n_fixed bits equal to fixed_low; bit q is parity(rows[q] & U).
    """
    Q = np.asarray(Q, dtype=np.int64)
    base = params.base
    k0 = params.k0
    w = np.asarray(w, dtype=np.uint8)
    if params.ell == 0:
        rows = [base.rows[q] for q in Q]
        yes = (rows, 3 * k0, bits_to_int(w), k0)
        no = ([1 << int(q) for q in Q], params.length, 0, 0)
        return yes, no
    if params.ell != 1:
        raise CapabilityError("linear restricted samplers exist for levels 0 and 1")
    lev = params.top
    F = lev.field
    t = F.t
    mb = params.block_length
    blocks = np.unique(Q // mb)
    slot = {int(b): i for i, b in enumerate(blocks)}
    frame = cf_frame(F, lev.H)
    lag = frame.extension[lev.outside[blocks]]
    D = lev.witness_dim
    # bit e of g(beta) as a D-bit mask over (w, free values)
    contrib = np.empty((blocks.size, D), dtype=np.int64)
    contrib[:, : lev.k] = lag[:, : lev.k]
    for b in range(t):
        contrib[:, lev.k + b :: t] = F.vmul(lag[:, lev.k :], 1 << b)
    gmask = [[bits_to_int((contrib[i] >> e) & 1) for e in range(t)] for i in range(blocks.size)]
    tail_bits = 2 * k0
    yes_rows, no_rows = [], []
    for q in Q.tolist():
        b, off = divmod(q, mb)
        i = slot[b]
        arow = base.rows[off]
        yrow = 0
        nrow = 0
        for e in range(t):
            if (arow >> e) & 1:
                yrow ^= gmask[i][e]
                nrow ^= 1 << (i * t + e)
        tail = arow >> k0
        yrow |= tail << (D + i * tail_bits)
        nrow |= tail << (blocks.size * t + i * tail_bits)
        yes_rows.append(yrow)
        no_rows.append(nrow)
    n_tail = blocks.size * tail_bits
    yes = (yes_rows, D + n_tail, bits_to_int(w), lev.k)
    no = (no_rows, blocks.size * t + n_tail, 0, 0)
    return yes, no


def sample_restricted(params: LevelParams, w, Q, N: int, rng, which: str = "yes") -> np.ndarray:
    """N samples of D_yes(w)|_Q or D_no|_Q, shape (N, |Q|)."""
    Q = list(Q)
    if params.ell <= 1:
        yes, no = restricted_linear_maps(params, w, Q)
        rows, nbits, low, nfix = yes if which == "yes" else no
        return _sample_parities(rows, nbits, low, nfix, N, rng)
    out = np.empty((N, len(Q)), dtype=np.uint8)
    for i in range(N):
        enc = sample_dyes(params, w, rng) if which == "yes" else sample_dno(params, rng)
        out[i] = enc.bits[Q]
    return out


# restricted equality -----------------------------------------------------------------------


def stat_threshold(q: int, N: int) -> float:
    return 3 * sqrt(2**q / N)


def _empirical_tv(a: np.ndarray, b: np.ndarray) -> Fraction:
    q = a.shape[1]
    weights = 1 << np.arange(q, dtype=np.int64)
    ia = a.astype(np.int64) @ weights
    ib = b.astype(np.int64) @ weights
    ha = np.bincount(ia, minlength=1 << q)
    hb = np.bincount(ib, minlength=1 << q)
    return Fraction(int(np.abs(ha * b.shape[0] - hb * a.shape[0]).sum()), 2 * a.shape[0] * b.shape[0])


def _check_Q(params: LevelParams, Q) -> list[int]:
    Q = sorted(int(q) for q in Q)
    if len(set(Q)) != len(Q):
        raise InputError("Q has repeated indices")
    if Q and (Q[0] < 0 or Q[-1] >= params.length):
        raise InputError("Q outside [m]")
    return Q


def _exact_level0(params: LevelParams, Q: list[int]) -> RestrictionTestReport:
    r = restricted_rank(params.base, Q)
    tv = Fraction(0) if r == len(Q) else 1 - Fraction(1 << r, 1 << len(Q))
    return RestrictionTestReport(Q, "exact-rank", tv, 0, "indistinguishable" if tv == 0 else "distinguishable")


def _exact_enumeration_level0(params: LevelParams, w, Q: list[int]) -> RestrictionTestReport:
    members = ensemble_members(params.base, w)
    proj = np.zeros(members.size, dtype=np.int64)
    for j, q in enumerate(Q):
        proj |= ((members >> np.int64(q)) & 1) << j
    hist = np.bincount(proj, minlength=1 << len(Q))
    total = members.size
    tv = Fraction(int(np.abs(hist * (1 << len(Q)) - total).sum()), 2 * total * (1 << len(Q)))
    return RestrictionTestReport(Q, "exact-enumeration", tv, 0, "indistinguishable" if tv == 0 else "distinguishable")


def structured_blocks(params: LevelParams, Q: list[int]) -> list[int]:
    """Level-1 blocks whose restricted positions are not exactly uniform."""
    mb = params.block_length
    by_block: dict[int, list[int]] = {}
    for q in Q:
        by_block.setdefault(q // mb, []).append(q % mb)
    return [b for b, offs in sorted(by_block.items()) if restricted_rank(params.base, offs) < len(offs)]


def exact_level1_applies(params: LevelParams, Q: list[int]) -> bool:
    return len(structured_blocks(params, Q)) <= params.top.free_points


def restricted_equality(
    params: LevelParams,
    w,
    Q,
    method: str = "auto",
    budget: int = 10**6,
    rng: np.random.Generator | None = None,
) -> RestrictionTestReport:
    """Compare D_yes(w)|_Q with D_no|_Q."""
    Q = _check_Q(params, Q)
    w = np.asarray(w, dtype=np.uint8)
    if method == "auto":
        if params.ell == 0:
            method = "exact-rank"
        elif params.ell == 1 and exact_level1_applies(params, Q):
            method = "exact-rank"
        else:
            method = "statistical"
    if method == "exact-rank":
        if params.ell == 0:
            return _exact_level0(params, Q)
        if params.ell == 1:
            structured = structured_blocks(params, Q)
            if len(structured) > params.top.free_points:
                raise CapabilityError("too many structured blocks for the exact argument")
            return RestrictionTestReport(
                Q, "exact-rank", Fraction(0), 0, "indistinguishable", details={"structured_blocks": structured}
            )
        raise CapabilityError("exact tests exist for levels 0 and 1")
    if method == "exact-enumeration":
        if params.ell != 0:
            raise CapabilityError("enumeration is for level 0")
        return _exact_enumeration_level0(params, w, Q)
    if method != "statistical":
        raise ParameterError(f"unknown method {method!r}")
    if len(Q) > STAT_MAX_Q:
        raise CapabilityError(f"statistical test limited to |Q| <= {STAT_MAX_Q}")
    rng = rng if rng is not None else np.random.default_rng(0)
    a = sample_restricted(params, w, Q, budget, rng, "yes")
    b = sample_restricted(params, w, Q, budget, rng, "no")
    tv = _empirical_tv(a, b)
    thr = stat_threshold(len(Q), budget)
    verdict = "indistinguishable" if tv <= thr else "distinguishable"
    return RestrictionTestReport(Q, "statistical", tv, budget, verdict, thr)


# distance checks -------------------------------------------------------------------------


@dataclass
class DistanceReport:
    value: Fraction
    method: str
    samples: int
    prediction: float

    def as_dict(self) -> dict:
        return {"value": str(self.value), "method": self.method, "samples": self.samples, "prediction": self.prediction}


def min_distance_check(params: LevelParams, w, w2, pairs: int = 10**4, rng=None) -> DistanceReport:
    """Minimum distance between E(w) and E(w2).

    Level 0: exact, min weight over the coset A (w + w2, tail).  Higher
    levels: minimum over sampled encoding pairs, an upper bound on the true
    minimum.
    """
    w = np.asarray(w, dtype=np.uint8)
    w2 = np.asarray(w2, dtype=np.uint8)
    pred = 1 / 4 ** (params.ell + 1)
    if np.array_equal(w, w2):
        return DistanceReport(Fraction(0), "shared-codewords", 0, pred)
    if params.ell == 0:
        diff = w ^ w2
        members = ensemble_members(params.base, diff)
        return DistanceReport(Fraction(int(np.bitwise_count(members).min()), params.length), "exact", 0, pred)
    rng = rng if rng is not None else np.random.default_rng(0)
    best = params.length
    for _ in range(pairs):
        a = pcuss_encode(params, w, rng).bits
        b = pcuss_encode(params, w2, rng).bits
        best = min(best, int(np.count_nonzero(a != b)))
    return DistanceReport(Fraction(best, params.length), "sampled", pairs, pred)


def distance_to_code_level0(params: LevelParams, v) -> int:
    """Distance from v to the whole span of A (every secret at once)."""
    x = np.int64(bits_to_int(np.asarray(v, dtype=np.uint8)))
    table = gf2.span_table(params.base.columns)
    return int(np.bitwise_count(table ^ x).min())


def level1_distance_lower_bound(params: LevelParams, dno: Encoding) -> Fraction:
    """Lower bound on dist(v, E(w)) for every w, from the lambda witness.

    If no polynomial of degree <= |F|/2 is within the unique-decoding radius
    of lambda, every admissible g disagrees with lambda on more than that
    many blocks, and each disagreeing block costs at least the base ensemble
    distance.
    """
    lev = params.top
    lam = dno.witness.table[lev.outside]
    deg = lev.field.size // 2
    radius = (lev.n_blocks - deg - 1) // 2
    dec = berlekamp_welch(lev.outside, lam, deg, lev.field)
    if dec is not None:
        return Fraction(0)
    per_block = int(params.base.ensemble_cert * params.block_length)
    return Fraction((radius + 1) * per_block, params.length)


def far_from_all_check(params: LevelParams, trials: int, threshold: Fraction = Fraction(1, 40), rng=None) -> float:
    """Fraction of D_no samples at distance >= threshold from every E(w)."""
    rng = rng if rng is not None else np.random.default_rng(0)
    hits = 0
    for _ in range(trials):
        dno = sample_dno(params, rng)
        if params.ell == 0:
            d = Fraction(distance_to_code_level0(params, dno.bits), params.length)
        elif params.ell == 1:
            d = level1_distance_lower_bound(params, dno)
        else:
            raise CapabilityError("far-from-all check is for levels 0 and 1")
        hits += d >= threshold
    return hits / trials


def exact_linear_compare(params: LevelParams, w, Q) -> bool:
    """Exact equality of D_yes(w)|_Q and D_no|_Q from their affine descriptions.

    Each side is uniform on c + colspace(M); the two agree iff the column
    spaces coincide and the offsets differ by a member of that space.
    """
    Q = _check_Q(params, Q)
    yes, no = restricted_linear_maps(params, w, Q)

    def affine(desc):
        rows, nbits, low, nfix = desc
        const = 0
        free = []
        for j, r in enumerate(rows):
            const |= (bin(r & low & ((1 << nfix) - 1)).count("1") & 1) << j
            free.append(r >> nfix)
        return gf2.transpose(free, nbits - nfix), const

    cy, oy = affine(yes)
    cn, on = affine(no)
    ry, rn = gf2.rank(cy), gf2.rank(cn)
    return ry == rn == gf2.rank(cy + cn) and gf2.rank(cy + [oy ^ on]) == ry


# adversarial proofs -----------------------------------------------------------------------

CORRUPTION_RATES = (0.05, 0.2, 0.5)
STRATEGIES = ("zeros", "ones", "random", "honest-nearest") + tuple(f"corrupt-{eta}" for eta in CORRUPTION_RATES)


def adversarial_proof(system, strategy: str, honest: BitSource, seed: int) -> BitSource:
    """Proof oracle for one of the fixed cheating strategies.

    ``honest`` is the honest proof of a member close to the input.
    """
    n = honest.length
    if strategy == "zeros":
        return ConstBits(0, n)
    if strategy == "ones":
        return ConstBits(1, n)
    if strategy == "random":
        return random_bits(n, seed)
    if strategy == "honest-nearest":
        return honest
    if strategy.startswith("corrupt-"):
        return CorruptedBits(honest, float(strategy.split("-", 1)[1]), seed)
    raise ParameterError(f"unknown strategy {strategy!r}")
