"""Recursive code ensembles with a probabilistically checkable unveiling.

Level 0 is the hard code H_k.  A level-l encoding of w over F is

    v = concat over beta in F \\ H of  v_beta,   v_beta in E^(l-1)(<g(beta)>)

for a uniformly random g of degree <= |F|/2 with g|_H = w.  The next field
is GF(2^(2*3^r)) for the least r with (log|F|)^d <= 2^(2*3^r), and the next
secret length is log|F|.

The proof for v is the concatenation

    S_v | Proof^(l-1)(v_beta) for each beta | Proof_L(S_v)

where S_v holds Spiel(g(beta)) per block and Proof_L is the Spiel-PCU proof
that S_v encodes a low-degree g agreeing with w on H.  Section offsets come
from the parameters and backend alone.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .basecode import HardCodeSpec, base_encode_many, base_membership, hardcode_generate
from .errors import CapabilityError, GenerationError, InputError, ParameterError, PreconditionError
from .field import FieldParams
from .goodcode import GoodCodeSpec, bits_to_int, goodcode
from .oracle import BitSource, ConcatBits, ConstBits, DenseBits, OracleView
from .pcpp import (
    AMPLIFY_CONSTANT,
    Backend,
    CodeFamily,
    ExhaustiveBackend,
    HadamardBackend,
    SpielPCU,
    VerdictReport,
    make_spiel_pcu,
    quasilinear,
    run_verifier,
)
from .poly import cf_frame, poly_is_low_degree

DEFAULT_C = 4
DEFAULT_D = 2
DEFAULT_C_ELL = 16
LENGTH_MODELS = ("exhaustive", "hadamard", "dinur")
L_RADIUS_DIVISOR = 300
ITERATION_NUMERATOR = 6


# parameters --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Level:
    """One recursion step: field, secret length and the constraint set H."""

    field: FieldParams
    k: int
    relaxed: bool = False

    @property
    def H(self) -> tuple[int, ...]:
        return tuple(range(self.k))

    @property
    def n_blocks(self) -> int:
        return self.field.size - self.k

    @cached_property
    def outside(self) -> np.ndarray:
        return np.arange(self.k, self.field.size, dtype=np.int64)

    @property
    def free_points(self) -> int:
        return self.field.size // 2 + 1 - self.k

    @property
    def witness_dim(self) -> int:
        """Bits of (w, g at the free interpolation points)."""
        return self.k + self.free_points * self.field.t

    @property
    def s_length(self) -> int:
        return 100 * self.field.t * self.n_blocks


def _next_field(t: int, d: int) -> FieldParams:
    r = 0
    while t**d > 1 << (2 * 3**r):
        r += 1
    return FieldParams.family(r)


@lru_cache(maxsize=32)
def _base_code(k0: int, seed: int, require_ensemble: bool) -> HardCodeSpec:
    last = None
    for s in range(seed, seed + 20):
        try:
            return hardcode_generate(k0, s, require_ensemble=require_ensemble)
        except GenerationError as exc:
            last = exc
    raise last


@dataclass(frozen=True, eq=False)
class LevelParams:
    ell: int
    levels: tuple[Level, ...]
    k0: int
    m: tuple[int, ...]
    c: int = DEFAULT_C
    d: int = DEFAULT_D
    c_ell: int = DEFAULT_C_ELL
    base_seed: int = 0
    code_seed: int = 0
    require_ensemble: bool = True
    flags: tuple[str, ...] = ()

    @property
    def k(self) -> int:
        return self.levels[0].k if self.ell else self.k0

    @property
    def top(self) -> Level:
        if not self.ell:
            raise ParameterError("level 0 has no recursion step")
        return self.levels[0]

    @property
    def length(self) -> int:
        return self.m[-1]

    @property
    def block_length(self) -> int:
        return self.m[-2]

    @cached_property
    def base(self) -> HardCodeSpec:
        return _base_code(self.k0, self.base_seed, self.require_ensemble)

    @cached_property
    def value_code(self) -> GoodCodeSpec:
        return goodcode(self.k, self.code_seed)

    @cached_property
    def child(self) -> "LevelParams":
        if not self.ell:
            raise ParameterError("level 0 has no child")
        out = LevelParams(
            ell=self.ell - 1,
            levels=self.levels[1:],
            k0=self.k0,
            m=self.m[:-1],
            c=self.c,
            d=self.d,
            c_ell=self.c_ell,
            base_seed=self.base_seed,
            code_seed=self.code_seed,
            require_ensemble=self.require_ensemble,
            flags=self.flags,
        )
        if "base" in self.__dict__:
            out.__dict__["base"] = self.base
        return out

    def describe(self) -> dict:
        return {
            "ell": self.ell,
            "fields": [lev.field.t for lev in self.levels],
            "ks": [lev.k for lev in self.levels],
            "k0": self.k0,
            "m": list(self.m),
            "c": self.c,
            "d": self.d,
            "c_ell": self.c_ell,
            "base_seed": self.base_seed,
            "code_seed": self.code_seed,
            "require_ensemble": self.require_ensemble,
            "flags": list(self.flags),
        }

    def digest(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True).encode()
        h = hashlib.sha256(blob)
        if self.k0 <= 12:
            h.update(np.packbits(self.base.A).tobytes())
        return h.hexdigest()


def derive_params(
    ell: int,
    field: int | FieldParams = 64,
    k: int = 2,
    c: int = DEFAULT_C,
    d: int = DEFAULT_D,
    c_ell: int = DEFAULT_C_ELL,
    base_seed: int = 0,
    code_seed: int = 0,
    require_ensemble: bool = True,
) -> LevelParams:
    """Parameter chain for a level-``ell`` ensemble of ``k``-bit secrets over ``field``.

    ``field`` is a size (64), or a FieldParams.  At ell = 0 the field is
    unused and ``k`` is the hard-code secret length.
    """
    if ell < 0:
        raise ParameterError("ell must be non-negative")
    if k < 0:
        raise ParameterError("k must be non-negative")
    F = FieldParams.from_size(field) if isinstance(field, int) else field
    if F.r is None:
        raise ParameterError("recursion fields must be in the t = 2*3^r family")
    levels = []
    flags = []
    kk = k
    for depth in range(ell, 0, -1):
        if kk > F.size // 2 + 1:
            raise ParameterError(f"k = {kk} exceeds the |F|/2 + 1 = {F.size // 2 + 1} interpolation capacity")
        relaxed = F.size < max(c_ell, c * kk)
        if relaxed:
            flags.append(f"relaxed-regime@{depth}")
        levels.append(Level(F, kk, relaxed))
        kk = F.t
        F = _next_field(F.t, d)
    k0 = kk
    if k0 < 3:
        raise ParameterError("the base code needs at least 3 secret bits")
    if 4 * k0 < 30:
        flags.append("base-vacuous")
    m = [4 * k0]
    for lev in reversed(levels):
        m.append(lev.n_blocks * m[-1])
    return LevelParams(
        ell=ell,
        levels=tuple(levels),
        k0=k0,
        m=tuple(m),
        c=c,
        d=d,
        c_ell=c_ell,
        base_seed=base_seed,
        code_seed=code_seed,
        require_ensemble=require_ensemble,
        flags=tuple(flags),
    )


# length arithmetic ---------------------------------------------------------------


def base_pcu_shape(k0: int) -> dict:
    """Input arity and circuit size of the level-0 Spiel-PCU predicate."""
    m0, n_tau = 4 * k0, 100 * k0
    zeta, xi = (1, m0 // n_tau) if m0 >= n_tau else (n_tau // m0, 1)
    arity = m0 * zeta + n_tau * xi
    circuit = m0 * (3 * k0) ** 2
    return {"zeta": zeta, "xi": xi, "arity": arity, "circuit": circuit, "dim": 3 * k0}


def language_pcu_shape(level: Level) -> dict:
    m, n_tau = level.s_length, 100 * level.k
    xi = m // n_tau if level.k else 0
    arity = m + n_tau * xi
    circuit = m * max(1, math.ceil(math.log2(m)))
    return {"zeta": 1, "xi": xi, "arity": arity, "circuit": circuit, "dim": level.witness_dim}


def _pcu_length(shape: dict, model: str) -> int:
    if model == "exhaustive":
        return 0
    if model == "hadamard":
        return 1 << shape["dim"]
    if model == "dinur":
        return quasilinear(shape["arity"] + shape["circuit"])
    raise ParameterError(f"unknown length model {model!r}")


def proof_lengths(params: LevelParams, model: str) -> list[int]:
    """z^(0..ell) under a length model (exhaustive, hadamard, or dinur)."""
    z = [_pcu_length(base_pcu_shape(params.k0), model)]
    for lev in reversed(params.levels):
        z.append(lev.s_length + lev.n_blocks * z[-1] + _pcu_length(language_pcu_shape(lev), model))
    return z


@dataclass(frozen=True)
class ProofLayout:
    s_offset: int
    s_length: int
    sub_offset: int
    sub_length: int
    n_blocks: int
    l_offset: int
    l_length: int

    @property
    def total(self) -> int:
        return self.l_offset + self.l_length

    def as_table(self) -> list[tuple[str, int, int]]:
        rows = [("S", self.s_offset, self.s_length)]
        rows += [(f"sub{b}", self.sub_offset + b * self.sub_length, self.sub_length) for b in range(self.n_blocks)]
        rows.append(("L", self.l_offset, self.l_length))
        return rows


def proof_layout(params: LevelParams, model: str) -> ProofLayout:
    if not params.ell:
        raise ParameterError("level-0 proofs have a single section")
    lev = params.top
    z = proof_lengths(params, model)
    sub = z[-2]
    s_len = lev.s_length
    return ProofLayout(
        s_offset=0,
        s_length=s_len,
        sub_offset=s_len,
        sub_length=sub,
        n_blocks=lev.n_blocks,
        l_offset=s_len + lev.n_blocks * sub,
        l_length=_pcu_length(language_pcu_shape(lev), model),
    )


def iterated_log(x: float, times: int) -> float:
    for _ in range(times):
        x = math.log2(x)
    return x


# encodings ------------------------------------------------------------------------


@dataclass(eq=False)
class EncodingWitness:
    """Randomness behind an encoding: enough to rebuild the honest proof."""

    secret: np.ndarray
    u: int | None = None
    values: np.ndarray | None = None
    table: np.ndarray | None = None
    children: object = None


@dataclass(eq=False)
class Encoding:
    bits: np.ndarray
    level: int
    params: LevelParams
    witness: EncodingWitness | None = None

    @property
    def length(self) -> int:
        return int(self.bits.size)


def _check_secret(params: LevelParams, w) -> np.ndarray:
    w = np.asarray(w, dtype=np.uint8)
    if w.shape != (params.k,):
        raise InputError(f"secret must have {params.k} bits, got shape {w.shape}")
    if w.size and w.max() > 1:
        raise InputError("secret must be a bit string")
    return w


def _secret_bits(values: np.ndarray, t: int) -> np.ndarray:
    return ((np.asarray(values, dtype=np.int64)[:, None] >> np.arange(t)) & 1).astype(np.uint8)


def encode_blocks(child: LevelParams, secrets: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, object]:
    """Encode each int secret at level child.ell; returns (bits (n, m), witnesses)."""
    if child.ell == 0:
        return base_encode_many(child.base, secrets, rng)
    bits = np.empty((secrets.size, child.length), dtype=np.uint8)
    wits = []
    for i, s in enumerate(_secret_bits(secrets, child.k)):
        enc = pcuss_encode(child, s, rng)
        bits[i] = enc.bits
        wits.append(enc.witness)
    return bits, wits


def pcuss_encode(params: LevelParams, w, rng: np.random.Generator) -> Encoding:
    """Uniform member of E^(ell)(w), with the witness retained."""
    w = _check_secret(params, w)
    if params.ell == 0:
        bits, us = base_encode_many(params.base, np.array([bits_to_int(w)]), rng)
        return Encoding(bits[0], 0, params, EncodingWitness(w, u=int(us[0])))
    lev = params.top
    F = lev.field
    frame = cf_frame(F, lev.H)
    values = np.concatenate([w.astype(np.int64), rng.integers(0, F.size, size=lev.free_points, dtype=np.int64)])
    table = frame.extend(values)
    bits, children = encode_blocks(params.child, table[lev.outside], rng)
    wit = EncodingWitness(w, values=values, table=table, children=children)
    return Encoding(bits.reshape(-1), params.ell, params, wit)


def sample_block_ensemble(params: LevelParams, block_secrets: np.ndarray, rng) -> Encoding:
    """Concatenation of independent level-(ell-1) encodings of the given block values."""
    bits, children = encode_blocks(params.child, np.asarray(block_secrets, dtype=np.int64), rng)
    table = np.zeros(params.top.field.size, dtype=np.int64)
    table[params.top.outside] = block_secrets
    wit = EncodingWitness(np.zeros(params.k, dtype=np.uint8), table=table, children=children)
    return Encoding(bits.reshape(-1), params.ell, params, wit)


def pcuss_value(params: LevelParams, w) -> np.ndarray:
    """Spiel(w); empty when k = 0."""
    w = _check_secret(params, w)
    return params.value_code.encode(w)


def language_L_check(level: Level, S, w, code: GoodCodeSpec | None = None) -> bool:
    """S is concat Spiel(g(beta)) over beta outside H for a g in C_F with g|_H = w."""
    F = level.field
    code = code or goodcode(F.t)
    S = np.asarray(S)
    if S.shape != (level.s_length,):
        raise InputError(f"S must have {level.s_length} bits")
    w = np.asarray(w)
    if w.shape != (level.k,):
        raise InputError(f"w must have {level.k} bits")
    blocks = S.reshape(level.n_blocks, code.n)
    if not code.members(blocks).all():
        return False
    vals = (blocks[:, : F.t].astype(np.int64) << np.arange(F.t)).sum(axis=1)
    table = np.zeros(F.size, dtype=np.int64)
    table[: level.k] = w
    table[level.outside] = vals
    return poly_is_low_degree(table, F)


def language_rows(level: Level, code: GoodCodeSpec) -> list[int]:
    """Linear forms giving each bit of S in terms of (w, free values) bits."""
    F = level.field
    t, k, n = F.t, level.k, level.n_blocks
    frame = cf_frame(F, level.H)
    lag = frame.extension[level.outside]
    D = level.witness_dim
    contrib = np.empty((n, D), dtype=np.int64)
    contrib[:, :k] = lag[:, :k]
    for b in range(t):
        contrib[:, k + b :: t] = F.vmul(lag[:, k:], 1 << b)
    bit_planes = ((contrib[:, None, :] >> np.arange(t)[None, :, None]) & 1).astype(np.int64)
    rows = np.einsum("ei,ned->nid", code.generator.astype(np.int64), bit_planes) & 1
    packed = np.packbits(rows.reshape(n * code.n, D).astype(np.uint8), axis=1, bitorder="little")
    return [int.from_bytes(r.tobytes(), "little") for r in packed]


def language_witness(level: Level, values: np.ndarray) -> int:
    t, k = level.field.t, level.k
    u = 0
    for j in range(k):
        u |= int(values[j]) << j
    for j in range(level.free_points):
        u |= int(values[k + j]) << (k + j * t)
    return u


# proof system -----------------------------------------------------------------------


@dataclass(eq=False)
class ProofString:
    source: BitSource
    params: LevelParams
    backend_id: str
    layout: ProofLayout | None = None

    @property
    def length(self) -> int:
        return self.source.length

    def section(self, name: str) -> BitSource:
        if self.layout is None:
            raise ParameterError("level-0 proofs have no sections")
        for label, off, ln in self.layout.as_table():
            if label == name:
                return _SliceBits(self.source, off, ln)
        raise KeyError(name)


class _SliceBits(BitSource):
    def __init__(self, base: BitSource, offset: int, length: int):
        self.base, self.offset, self.length = base, offset, length

    def bit(self, i: int) -> int:
        return self.base.bit(self.offset + i)

    def bits(self, idx):
        return self.base.bits(np.asarray(idx, dtype=np.int64) + self.offset)

    def slice(self, start: int, stop: int):
        return self.base.slice(self.offset + start, self.offset + stop)


class PcussSystem:
    """Prover and recursive verifier for one parameter chain and backend."""

    def __init__(self, params: LevelParams, backend: Backend | str = "exhaustive"):
        if isinstance(backend, str):
            backend = {"exhaustive": ExhaustiveBackend, "hadamard": HadamardBackend}[backend]()
        self.params = params
        self.backend = backend
        self.model = backend.backend_id
        self._chain = [params]
        while self._chain[-1].ell:
            self._chain.append(self._chain[-1].child)

    def params_at(self, ell: int) -> LevelParams:
        return self._chain[self.params.ell - ell]

    @cached_property
    def base_pcu(self) -> SpielPCU:
        p = self.params
        k0 = p.k0
        fam = CodeFamily(
            k=k0,
            m=4 * k0,
            dim=3 * k0,
            rows=_LazyRows(lambda: p.base.rows),
            contains=lambda v, w: base_membership(p.base, w, v),
            circuit_size=base_pcu_shape(k0)["circuit"],
            name=f"H{k0}",
        )
        return make_spiel_pcu(fam, 4 * k0, k0, self.backend, goodcode(k0, self.params.code_seed), repeat_input=True)

    @lru_cache(maxsize=None)
    def language_pcu(self, ell: int) -> SpielPCU:
        p = self.params_at(ell)
        lev = p.top
        block_code = goodcode(lev.field.t, p.code_seed)
        fam = CodeFamily(
            k=lev.k,
            m=lev.s_length,
            dim=lev.witness_dim,
            rows=_LazyRows(lambda: language_rows(lev, block_code)),
            contains=lambda S, w: language_L_check(lev, S, w, block_code),
            circuit_size=language_pcu_shape(lev)["circuit"],
            name=f"L{ell}",
        )
        return make_spiel_pcu(fam, lev.s_length, lev.k, self.backend, p.value_code)

    def proof_lengths(self) -> list[int]:
        return proof_lengths(self.params, self.model)

    # proving

    def build_proof(self, enc: Encoding) -> ProofString:
        p = self.params_at(enc.level)
        if enc.witness is None:
            raise PreconditionError("proving needs the encoding witness")
        return ProofString(self._proof_source(p, enc.bits, enc.witness), p, self.model,
                           proof_layout(p, self.model) if p.ell else None)

    def _proof_source(self, p: LevelParams, bits: np.ndarray, wit: EncodingWitness) -> BitSource:
        if p.ell == 0:
            if wit.u is None:
                raise PreconditionError("missing base witness")
            return self.base_pcu.prove(bits, wit.secret, wit.u).source
        if wit.table is None or wit.children is None:
            raise PreconditionError("missing level witness")
        lev = p.top
        block_code = goodcode(lev.field.t, p.code_seed)
        block_vals = wit.table[lev.outside]
        S = block_code.encode_values(block_vals).reshape(-1)
        blocks = bits.reshape(lev.n_blocks, -1)
        subs: list[BitSource] = []
        child = p.child
        for b in range(lev.n_blocks):
            if child.ell == 0:
                cw = EncodingWitness(_secret_bits(block_vals[b : b + 1], child.k)[0], u=int(wit.children[b]))
            else:
                cw = wit.children[b]
            subs.append(self._proof_source(child, blocks[b], cw))
        if wit.values is None:
            raise PreconditionError("missing interpolation values")
        lpcu = self.language_pcu(p.ell)
        proof_l = lpcu.prove(S, wit.secret, language_witness(lev, wit.values)).source
        return ConcatBits([DenseBits(S)] + subs + [proof_l])

    # verifying

    def verify_raw(self, ell: int, v: OracleView, tau: OracleView, pi: OracleView, eps: float, delta: float, rng) -> bool:
        """The recursive procedure; requires delta <= 2^(-ell-1)."""
        p = self.params_at(ell)
        if v.length != p.length:
            raise InputError("input oracle has the wrong length")
        if ell == 0:
            return self.base_pcu.verify(v, tau, pi, eps, delta, rng)
        layout = proof_layout(p, self.model)
        if pi.length != layout.total:
            raise InputError("proof oracle has the wrong length")
        S = pi.sub(layout.s_offset, layout.s_length)
        if not self.language_pcu(ell).verify(S, tau, pi.sub(layout.l_offset, layout.l_length), eps / L_RADIUS_DIVISOR, delta, rng):
            return False
        lev = p.top
        mb = p.block_length
        nt = 100 * lev.field.t
        for _ in range(iterations(eps)):
            b = int(rng.integers(0, lev.n_blocks))
            ok = self.verify_raw(
                ell - 1,
                v.sub(b * mb, mb),
                S.sub(b * nt, nt),
                pi.sub(layout.sub_offset + b * layout.sub_length, layout.sub_length),
                eps / 3,
                2 * delta,
                rng,
            )
            if not ok:
                return False
        return True

    def repetitions(self, delta: float) -> tuple[int, float]:
        """(runs, per-run delta) for the requested soundness."""
        cap = 2.0 ** (-self.params.ell - 1)
        if delta <= cap:
            return 1, delta
        return math.ceil(AMPLIFY_CONSTANT * math.log(1 / (1 - delta)) / cap - 1e-12), cap

    def verify(self, v: OracleView, tau: OracleView, pi: OracleView, eps: float, delta: float, rng, amplify: bool = True) -> bool:
        runs, d = self.repetitions(delta)
        if runs > 1 and not amplify:
            raise CapabilityError(f"delta = {delta} exceeds 2^(-ell-1) without amplification")
        for _ in range(runs):
            if not self.verify_raw(self.params.ell, v, tau, pi, eps, d, rng):
                return False
        return True

    def query_budget(self, eps: float, delta: float) -> int:
        """Total queries (over v, tau and pi) of a run in which every stage accepts.

        Rejecting runs stop early and make fewer queries.
        """
        runs, d = self.repetitions(delta)
        return runs * _budget(self, self.params.ell, eps, d)


def _budget(system: PcussSystem, ell: int, eps: float, delta: float) -> int:
    if ell == 0:
        return system.base_pcu.queries_per_call(eps, delta)
    own = system.language_pcu(ell).queries_per_call(eps / L_RADIUS_DIVISOR, delta)
    return own + iterations(eps) * _budget(system, ell - 1, eps / 3, 2 * delta)


def iterations(eps: float) -> int:
    return math.ceil(ITERATION_NUMERATOR / eps - 1e-9)


class _LazyRows:
    """Sequence whose contents are computed on first access."""

    def __init__(self, build):
        self._build = build
        self._rows = None

    def _get(self):
        if self._rows is None:
            self._rows = self._build()
        return self._rows

    def __len__(self):
        return len(self._get())

    def __getitem__(self, i):
        return self._get()[i]

    def __iter__(self):
        return iter(self._get())


def pcuss_build_proof(params: LevelParams, enc: Encoding, backend: Backend | str = "exhaustive") -> ProofString:
    return PcussSystem(params, backend).build_proof(enc)


def pcuss_verify(
    system: PcussSystem, v, tau, pi, eps: float, delta: float, seed, amplify: bool = True
) -> VerdictReport:
    """Run the verifier on fresh query-counting oracles."""

    def run(vo, to, po, rng):
        return system.verify(vo, to, po, eps, delta, rng, amplify=amplify)

    if isinstance(pi, ProofString):
        pi = pi.source
    if isinstance(v, Encoding):
        v = v.bits
    report = run_verifier(run, v, tau, pi, seed)
    report.details.update({"eps": eps, "delta": delta, "ell": system.params.ell, "backend": system.model})
    return report
