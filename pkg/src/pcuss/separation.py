"""Copies-plus-proof property, its tester and the two hardness reductions.

An instance of length N = (L + 1) z consists of s = z L / n copies of an
n-bit candidate y followed by a z-bit proof region, where z is the proof
length of the level-ell PCUSS with empty secret (k = 0) and
L = ceil(log^(ell) n).  Members are y^s ++ pi with y an encoding and pi its
honest proof.  When n does not divide z L the copies region ends with a
partial copy that the tester never probes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .distributions import sample_dno
from .ensemble import LevelParams, PcussSystem, derive_params, iterated_log, pcuss_encode, proof_layout
from .errors import InputError, ParameterError, PreconditionError
from .oracle import (
    ERASED,
    BitSource,
    ConcatBits,
    ConstBits,
    DenseBits,
    OracleView,
    QueryOracle,
    RepeatBits,
    empty_oracle,
)
from .pcpp import VerdictReport, _random_ints

TESTER_DELTA = 2 / 3
COPY_PROBE_NUMERATOR = 4


def far_constant(ell: int) -> Fraction:
    """Configured distance constant 1 / (5 * 4^ell)."""
    return Fraction(1, 5 * 4**ell)


@dataclass(frozen=True)
class SeparationLayout:
    n: int
    z: int
    log_term: int
    copies_length: int
    s: int
    partial: int

    @property
    def N(self) -> int:
        return self.copies_length + self.z

    @property
    def proof_offset(self) -> int:
        return self.copies_length

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "z": self.z,
            "log_term": self.log_term,
            "s": self.s,
            "partial_copy_bits": self.partial,
            "N": self.N,
        }


def separation_layout(params: LevelParams, model: str) -> SeparationLayout:
    if params.k != 0:
        raise ParameterError("the separation property uses the empty-secret ensemble (k = 0)")
    z = proof_layout(params, model).total
    n = params.length
    log_term = math.ceil(iterated_log(n, params.ell)) if params.ell else 1
    copies_length = z * log_term
    s, partial = divmod(copies_length, n)
    return SeparationLayout(n, z, log_term, copies_length, s, partial)


def log_condition(params: LevelParams, eps: float) -> bool:
    """The tester's analysis needs log^(ell) n > 6 / eps."""
    return params.ell >= 1 and iterated_log(params.length, params.ell) > 6 / eps


@dataclass
class SeparationInstance:
    source: BitSource
    layout: SeparationLayout
    params: LevelParams
    kind: str
    y: np.ndarray | None = None
    erased: bool = False
    info: dict = field(default_factory=dict)

    @property
    def length(self) -> int:
        return self.source.length

    def oracle(self) -> QueryOracle:
        return QueryOracle(self.source)

    def to_array(self) -> np.ndarray:
        return self.source.to_array()

    def erased_fraction(self) -> Fraction:
        if not self.erased:
            return Fraction(0)
        return Fraction(self.layout.z, self.layout.N)


def _copies(y: np.ndarray, layout: SeparationLayout) -> BitSource:
    return RepeatBits(DenseBits(y), layout.s + (1 if layout.partial else 0), layout.copies_length)


def assemble_instance(
    y: np.ndarray, proof: BitSource, params: LevelParams, model: str, kind: str = "custom", first_copy=None
) -> SeparationInstance:
    layout = separation_layout(params, model)
    y = np.asarray(y, dtype=np.uint8)
    if y.size != layout.n or proof.length != layout.z:
        raise InputError("candidate or proof has the wrong length")
    copies = _copies(y, layout)
    if first_copy is not None:
        first_copy = np.asarray(first_copy, dtype=np.uint8)
        rest = copies.slice(layout.n, layout.copies_length)
        copies = ConcatBits([DenseBits(first_copy), DenseBits(rest)])
    return SeparationInstance(ConcatBits([copies, proof]), layout, params, kind, y)


@lru_cache(maxsize=32)
def _system(params: LevelParams, model: str) -> PcussSystem:
    return PcussSystem(params, model)


def build_member(params: LevelParams, rng: np.random.Generator, model: str = "exhaustive") -> SeparationInstance:
    system = _system(params, model)
    enc = pcuss_encode(params, np.zeros(0, dtype=np.uint8), rng)
    proof = system.build_proof(enc)
    return assemble_instance(enc.bits, proof.source, params, model, "member")


def build_far_instance(
    params: LevelParams, rng: np.random.Generator, model: str = "exhaustive", mode: str = "first-copy"
) -> SeparationInstance:
    """Instances derived from D_no draws.

    ``first-copy``: a member whose first copy is replaced by a D_no draw.
    ``all-copies``: every copy is a D_no draw; the proof region holds the
    honest proof of an unrelated member.
    """
    member = build_member(params, rng, model)
    dno = sample_dno(params, rng).bits
    if mode == "first-copy":
        proof = member.source.parts[1]
        inst = assemble_instance(member.y, proof, params, model, "far-first-copy", first_copy=dno)
    elif mode == "all-copies":
        inst = assemble_instance(dno, member.source.parts[1], params, model, "far-all-copies")
    else:
        raise ParameterError(f"unknown far mode {mode!r}")
    return inst


def _uniform_below(rng: np.random.Generator, bound: int) -> int:
    """Uniform integer in [0, bound), also for bounds beyond int64."""
    if bound < 1 << 62:
        return int(rng.integers(0, bound))
    bits = bound.bit_length()
    while True:
        x = _random_ints(rng, 1, bits)[0]
        if x < bound:
            return x


def q_tester(
    instance: OracleView, eps: float, params: LevelParams, rng: np.random.Generator, model: str = "exhaustive"
) -> bool:
    """Copy-consistency probes, then the PCUSS verifier on the first copy.

    Probes compare x_j with the same offset j in a uniformly random other
    full copy.  The verifier runs at (eps/3, 2/3) with the proof region as
    its proof and an empty value oracle.
    """
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)")
    layout = separation_layout(params, model)
    if instance.length != layout.N:
        raise InputError("instance has the wrong length")
    n = layout.n
    if layout.s >= 2:
        for _ in range(math.ceil(COPY_PROBE_NUMERATOR / eps - 1e-9)):
            i = 1 + _uniform_below(rng, layout.s - 1)
            j = int(rng.integers(0, n))
            a = instance.query(j)
            b = instance.query(i * n + j)
            if a != b or a == ERASED:
                return False
    system = _system(params, model)
    y = instance.sub(0, n)
    pi = instance.sub(layout.proof_offset, layout.z)
    return system.verify(y, empty_oracle(), pi, eps / 3, TESTER_DELTA, rng)


def run_q_tester(instance: SeparationInstance, eps: float, seed, model: str = "exhaustive") -> VerdictReport:
    oracle = instance.oracle()
    ok = q_tester(oracle, eps, instance.params, np.random.default_rng(seed), model)
    return VerdictReport(
        verdict="accept" if ok else "reject",
        input_queries=oracle.distinct_count(),
        proof_queries=0,
        value_queries=0,
        randomness_seed=seed,
        total_queries={"input": oracle.total},
        details={"kind": instance.kind, "eps": eps, "n": instance.layout.n},
    )


def tester_budget(params: LevelParams, eps: float, model: str) -> int:
    """Queries of an accepting tester run."""
    layout = separation_layout(params, model)
    probes = 2 * math.ceil(COPY_PROBE_NUMERATOR / eps - 1e-9) if layout.s >= 2 else 0
    return probes + _system(params, model).query_budget(eps / 3, TESTER_DELTA)


# reductions ----------------------------------------------------------------------------


class ForwardingOracle(OracleView):
    """Instance view whose copies region forwards to a candidate oracle.

    Every instance query makes at most one query to ``y``; ``forwards``
    records how many were made per instance query.
    """

    def __init__(self, y: OracleView, layout: SeparationLayout, fill: int):
        if y.length != layout.n:
            raise InputError("candidate has the wrong length")
        self.y = y
        self.layout = layout
        self.fill = fill
        self.length = layout.N
        self.forwards: list[int] = []

    def query(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        if i >= self.layout.proof_offset:
            self.forwards.append(0)
            return self.fill
        self.forwards.append(1)
        return self.y.query(i % self.layout.n)

    def query_many(self, idx) -> np.ndarray:
        return np.array([self.query(int(i)) for i in np.asarray(idx).reshape(-1)], dtype=np.uint8)

    def query_range(self, start: int, stop: int) -> np.ndarray:
        return self.query_many(np.arange(start, stop))


def _reduction(y, params: LevelParams, model: str, fill: int, kind: str) -> SeparationInstance:
    layout = separation_layout(params, model)
    y = np.asarray(y, dtype=np.uint8)
    if y.size != layout.n:
        raise InputError(f"candidate must have {layout.n} bits")
    inst = SeparationInstance(
        ConcatBits([_copies(y, layout), ConstBits(fill, layout.z)]), layout, params, kind, y, erased=fill == ERASED
    )
    return inst


def tolerant_reduction(y, params: LevelParams, model: str = "exhaustive") -> SeparationInstance:
    """y^s ++ 0^z."""
    return _reduction(y, params, model, 0, "tolerant")


def erasure_reduction(y, params: LevelParams, model: str = "exhaustive") -> SeparationInstance:
    """y^s ++ erased^z."""
    return _reduction(y, params, model, ERASED, "erasure")


def reduction_oracle(y: OracleView, params: LevelParams, model: str = "exhaustive", erased: bool = False) -> ForwardingOracle:
    return ForwardingOracle(y, separation_layout(params, model), ERASED if erased else 0)


def proof_region_distance(instance: SeparationInstance, member: SeparationInstance) -> Fraction:
    """Relative distance between two instances that share the copies region."""
    lay = instance.layout
    a = instance.source.slice(lay.proof_offset, lay.N)
    b = member.source.slice(lay.proof_offset, lay.N)
    return Fraction(int(np.count_nonzero(a != b)), lay.N)


def complete_erasures(instance: SeparationInstance, proof: BitSource) -> SeparationInstance:
    """Fill the erased proof region."""
    if not instance.erased:
        raise PreconditionError("instance has no erasures")
    return SeparationInstance(
        ConcatBits([instance.source.parts[0], proof]), instance.layout, instance.params, "completed", instance.y
    )


# experiment ------------------------------------------------------------------------------


@dataclass
class SeparationConfig:
    ell: int = 1
    field: int = 64
    eps: tuple[float, ...] = (0.6, 0.8)
    trials: int = 100
    far_trials: int = 100
    seed: int = 0
    backend: str = "exhaustive"
    budget_fields: tuple[int, ...] = (64, 2**18)


def check_config(config: SeparationConfig) -> LevelParams:
    params = derive_params(config.ell, config.field, 0)
    bad = [e for e in config.eps if not log_condition(params, e)]
    if bad:
        raise ParameterError(
            f"log^({config.ell}) n = {iterated_log(params.length, config.ell):.3f} does not exceed 6/eps for eps in {bad}"
        )
    return params


def run_separation_experiment(config: SeparationConfig) -> dict:
    params = check_config(config)
    model = config.backend
    layout = separation_layout(params, model)
    ss = np.random.SeedSequence([config.seed, 0x5E9])
    rows = []
    for eps in config.eps:
        for kind, count in (("member", config.trials), ("far-first-copy", config.far_trials), ("far-all-copies", config.far_trials)):
            accepted = 0
            queries = []
            for child in ss.spawn(count):
                rng = np.random.default_rng(child)
                if kind == "member":
                    inst = build_member(params, rng, model)
                else:
                    inst = build_far_instance(params, rng, model, kind.split("-", 1)[1])
                rep = run_q_tester(inst, eps, rng.integers(0, 2**63), model)
                accepted += rep.accepted
                queries.append(rep.total_queries["input"])
            rows.append(
                {
                    "eps": eps,
                    "kind": kind,
                    "trials": count,
                    "acceptance_rate": accepted / count,
                    "max_queries": max(queries),
                    "budget": tester_budget(params, eps, model),
                }
            )
    budget_rows = []
    for f in config.budget_fields:
        p = derive_params(config.ell, f, 0)
        for eps in config.eps:
            budget_rows.append({"field": f, "n": p.length, "eps": eps, "hadamard_budget": tester_budget(p, eps, "hadamard")})
    return {
        "experiment": "separation",
        "params_digest": params.digest(),
        "layout": layout.as_dict(),
        "erased_fraction": str(Fraction(layout.z, layout.N)),
        "rows": rows,
        "budget_rows": budget_rows,
    }
