"""PCPP backends, soundness amplification and the Spiel-PCU builder.

Two backends implement the prove/verify contract:

* :class:`ExhaustiveBackend` uses an empty proof and reads the whole input.
  Deterministic, q = n.
* :class:`HadamardBackend` handles predicates of the form
  ``{x : x = M u + c, quadratic constraints on u hold}``.  The proof is the
  Hadamard encoding of the witness u (plus that of u (x) u when quadratic
  constraints are present), stored lazily.  Each round runs a BLR linearity
  test and a self-corrected consistency check between a random input bit and
  the proof.  The number of rounds depends only on (eps, delta).

Verifiers read through :mod:`pcuss.oracle` views so that query counts come
from the oracle logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import gf2
from .errors import CapabilityError, InputError, ParameterError, PreconditionError
from .goodcode import GoodCodeSpec, bits_to_int, int_to_bits
from .oracle import (
    BitSource,
    ConcatBits,
    ConstBits,
    DenseBits,
    HadamardBits,
    JoinedView,
    OracleView,
    QueryOracle,
)

AMPLIFY_CONSTANT = 2


# predicates --------------------------------------------------------------------


def parity_list(masks: Sequence[int], u: int) -> np.ndarray:
    return np.fromiter(((m & u).bit_count() & 1 for m in masks), dtype=np.uint8, count=len(masks))


def tensor(a: int, b: int, dim: int) -> int:
    """Bit i*dim + j is a_i * b_j, so <tensor(a, b), u (x) u> = <a, u><b, u>."""
    out = 0
    while a:
        low = a & -a
        out |= b << ((low.bit_length() - 1) * dim)
        a ^= low
    return out


@dataclass(frozen=True)
class QuadraticConstraint:
    """<a, u> * <b, u> + <c, u> = rhs over GF(2)."""

    a: int
    b: int
    c: int
    rhs: int

    def holds(self, u: int) -> bool:
        la = (self.a & u).bit_count() & 1
        lb = (self.b & u).bit_count() & 1
        lc = (self.c & u).bit_count() & 1
        return (la & lb) ^ lc == self.rhs


@dataclass(eq=False)
class ConstraintSystem:
    """x_j = <rows[j], u> + const_j, subject to quadratic constraints on u."""

    dim: int
    rows: Sequence[int]
    const: np.ndarray | None = None
    quadratic: Sequence[QuadraticConstraint] = ()

    def __post_init__(self):
        if self.const is None:
            self.const = np.zeros(len(self.rows), dtype=np.uint8)
        self.const = np.asarray(self.const, dtype=np.uint8)
        if self.const.size != len(self.rows):
            raise InputError("const length must match the number of rows")

    @property
    def arity(self) -> int:
        return len(self.rows)

    def output(self, u: int) -> np.ndarray:
        return parity_list(self.rows, u) ^ self.const

    def satisfied(self, u: int) -> bool:
        return all(q.holds(u) for q in self.quadratic)

    def find_witness(self, x) -> int | None:
        """A u with output(u) = x and all constraints satisfied, or None."""
        x = np.asarray(x, dtype=np.uint8)
        if x.size != self.arity or np.any(x > 1):
            return None
        if self.quadratic:
            if self.dim > 20:
                raise CapabilityError("witness search with quadratic constraints needs dim <= 20")
            for u in range(1 << self.dim):
                if np.array_equal(self.output(u), x) and self.satisfied(u):
                    return u
            return None
        cols = gf2.transpose(self.rows, self.dim)
        u = gf2.solve(cols, bits_to_int(x ^ self.const))
        return u

    def accepts(self, x) -> bool:
        return self.find_witness(x) is not None


@dataclass(eq=False)
class PredicateSpec:
    arity: int
    evaluate: Callable[[np.ndarray], bool]
    declared_size: int
    constraints: ConstraintSystem | None = None
    name: str = ""

    def __call__(self, x) -> bool:
        x = np.asarray(x)
        if x.shape != (self.arity,):
            raise InputError(f"{self.name or 'predicate'} expects {self.arity} bits")
        if np.any(x > 1):
            return False
        return bool(self.evaluate(x))


def predicate_from_system(system: ConstraintSystem, name: str = "linear") -> PredicateSpec:
    return PredicateSpec(
        arity=system.arity,
        evaluate=system.accepts,
        declared_size=system.arity * max(system.dim, 1),
        constraints=system,
        name=name,
    )


@dataclass(eq=False)
class PcppProof:
    source: BitSource
    backend_id: str
    witness: int | None = None

    @property
    def length(self) -> int:
        return self.source.length


@dataclass
class VerdictReport:
    verdict: str
    input_queries: int
    proof_queries: int
    value_queries: int
    randomness_seed: object
    total_queries: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.verdict == "accept"

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "input_queries": self.input_queries,
            "proof_queries": self.proof_queries,
            "value_queries": self.value_queries,
            "randomness_seed": self.randomness_seed,
            "total_queries": dict(self.total_queries),
            "details": dict(self.details),
        }


def quasilinear(size: int) -> int:
    """size * ceil(log2 size)^2, the length model used for a Dinur-style PCPP."""
    if size <= 1:
        return size
    lg = math.ceil(math.log2(size))
    return size * lg * lg


def _check_eps_delta(eps: float, delta: float) -> None:
    if not 0 < eps < 1:
        raise CapabilityError(f"eps = {eps} outside (0, 1)")
    if not 0 < delta < 1:
        raise CapabilityError(f"delta = {delta} outside (0, 1)")


# backends ----------------------------------------------------------------------


class Backend:
    backend_id = "abstract"

    def proof_length(self, spec: PredicateSpec) -> int:
        raise NotImplementedError

    def prove(self, spec: PredicateSpec, x, witness: int | None = None) -> PcppProof:
        raise NotImplementedError

    def verify(self, spec: PredicateSpec, x: OracleView, pi: OracleView, eps: float, delta: float, rng) -> bool:
        raise NotImplementedError

    def queries_per_call(self, spec: PredicateSpec, eps: float, delta: float) -> dict:
        """Total (not distinct) queries one verify call makes on (input, proof)."""
        raise NotImplementedError


class ExhaustiveBackend(Backend):
    """Reads the entire input and evaluates the predicate; empty proof."""

    backend_id = "exhaustive"

    def proof_length(self, spec: PredicateSpec) -> int:
        return 0

    def prove(self, spec: PredicateSpec, x, witness: int | None = None) -> PcppProof:
        if not spec(np.asarray(x)):
            raise PreconditionError("input is not in the predicate's accept-set")
        return PcppProof(ConstBits(0, 0), self.backend_id)

    def verify(self, spec, x, pi, eps, delta, rng) -> bool:
        _check_eps_delta(eps, delta)
        return spec(x.read_all())

    def queries_per_call(self, spec, eps, delta) -> dict:
        return {"input": spec.arity, "proof": 0}


def _random_ints(rng: np.random.Generator, count: int, bits: int) -> list[int]:
    if bits == 0:
        return [0] * count
    if bits <= 62:
        return rng.integers(0, 1 << bits, size=count, dtype=np.int64).tolist()
    nb = (bits + 7) // 8
    buf = rng.bytes(count * nb)
    mask = (1 << bits) - 1
    return [int.from_bytes(buf[i * nb : (i + 1) * nb], "little") & mask for i in range(count)]


class HadamardBackend(Backend):
    """Linear-code PCPP over the Hadamard encoding of the witness.

    Per round: BLR on the linear table (3 queries) and one consistency check
    x_j = pi(row_j + r) + pi(r) + c_j (1 input and 2 proof queries).  If x is
    eps-far from the accept-set, a round rejects with probability at least
    eps/3; with quadratic constraints the tensor and constraint tests are
    added and the bound is min(eps, 1/8)/4.  These per-round bounds are this
    backend's own constants.
    """

    backend_id = "hadamard"

    def __init__(self, max_materialised_dim: int = 20):
        self.max_materialised_dim = max_materialised_dim

    @staticmethod
    def _system(spec: PredicateSpec) -> ConstraintSystem:
        if spec.constraints is None:
            raise CapabilityError("the Hadamard backend needs a constraint system")
        return spec.constraints

    def proof_length(self, spec: PredicateSpec) -> int:
        sysm = self._system(spec)
        n = 1 << sysm.dim
        if sysm.quadratic:
            n += 1 << (sysm.dim * sysm.dim)
        return n

    def round_rejection_bound(self, spec: PredicateSpec, eps: float) -> float:
        if self._system(spec).quadratic:
            return min(eps, 1 / 8) / 4
        return eps / 3

    def rounds(self, spec: PredicateSpec, eps: float, delta: float) -> int:
        """Smallest R with 1 - (1 - rho)^R > delta, via R = floor(ln(1/(1-delta))/rho) + 1."""
        rho = self.round_rejection_bound(spec, eps)
        return math.floor(math.log(1 / (1 - delta)) / rho) + 1

    def queries_per_call(self, spec, eps, delta) -> dict:
        r = self.rounds(spec, eps, delta)
        proof = 5 if not self._system(spec).quadratic else 16
        return {"input": r, "proof": proof * r}

    def prove(self, spec: PredicateSpec, x, witness: int | None = None) -> PcppProof:
        sysm = self._system(spec)
        x = np.asarray(x, dtype=np.uint8)
        if not spec(x):
            raise PreconditionError("input is not in the predicate's accept-set")
        if witness is None:
            witness = sysm.find_witness(x)
        if witness is None or not np.array_equal(sysm.output(witness), x) or not sysm.satisfied(witness):
            raise PreconditionError("witness does not explain the input")
        lin = HadamardBits(witness, sysm.dim)
        if not sysm.quadratic:
            return PcppProof(lin, self.backend_id, witness)
        quad = HadamardBits(tensor(witness, witness, sysm.dim), sysm.dim * sysm.dim)
        return PcppProof(ConcatBits([lin, quad]), self.backend_id, witness)

    def verify(self, spec, x, pi, eps, delta, rng) -> bool:
        _check_eps_delta(eps, delta)
        sysm = self._system(spec)
        if x.length != sysm.arity:
            raise InputError("input oracle length does not match the predicate")
        if pi.length != self.proof_length(spec):
            raise InputError("proof oracle length does not match the backend layout")
        D = sysm.dim
        R = self.rounds(spec, eps, delta)
        lin = pi.sub(0, 1 << D)
        a = _random_ints(rng, R, D)
        b = _random_ints(rng, R, D)
        r = _random_ints(rng, R, D)
        j = rng.integers(0, sysm.arity, size=R)
        rows = sysm.rows
        q_lin: list[int] = []
        for ai, bi, ri, ji in zip(a, b, r, j.tolist()):
            q_lin += [ai, bi, ai ^ bi, rows[ji] ^ ri, ri]
        ans = np.asarray(_query_list(lin, q_lin), dtype=np.uint8).reshape(R, 5)
        xs = x.query_many(j)
        blr_ok = (ans[:, 0] ^ ans[:, 1] ^ ans[:, 2]) == 0
        cons_ok = (ans[:, 3] ^ ans[:, 4] ^ sysm.const[j]) == xs
        if not (blr_ok.all() and cons_ok.all()):
            return False
        if sysm.quadratic:
            return self._verify_quadratic(sysm, lin, pi.sub(1 << D, 1 << (D * D)), R, rng)
        return True

    def _verify_quadratic(self, sysm: ConstraintSystem, lin: OracleView, quad: OracleView, R: int, rng) -> bool:
        D = sysm.dim
        DD = D * D
        nq = len(sysm.quadratic)
        q_quad: list[int] = []
        q_lin: list[int] = []
        expect_rhs = []
        for _ in range(R):
            a, b = _random_ints(rng, 2, D)
            s, t, r2, r3 = _random_ints(rng, 4, DD)
            r1, = _random_ints(rng, 1, D)
            sel = rng.integers(0, 2, size=nq)
            A = C = rhs = 0
            for on, qc in zip(sel.tolist(), sysm.quadratic):
                if on:
                    A ^= tensor(qc.a, qc.b, D)
                    C ^= qc.c
                    rhs ^= qc.rhs
            # BLR on the quadratic table, tensor consistency, constraint check
            q_quad += [s, t, s ^ t, r2 ^ tensor(a, b, D), r2, r3 ^ A, r3]
            q_lin += [a, b, r1 ^ C, r1]
            expect_rhs.append(rhs)
        qa = np.asarray(_query_list(quad, q_quad), dtype=np.uint8).reshape(R, 7)
        la = np.asarray(_query_list(lin, q_lin), dtype=np.uint8).reshape(R, 4)
        blr = (qa[:, 0] ^ qa[:, 1] ^ qa[:, 2]) == 0
        tens = (qa[:, 3] ^ qa[:, 4]) == (la[:, 0] & la[:, 1])
        cons = (qa[:, 5] ^ qa[:, 6] ^ la[:, 2] ^ la[:, 3]) == np.asarray(expect_rhs, dtype=np.uint8)
        return bool(blr.all() and tens.all() and cons.all())


def _query_list(view: OracleView, idx: list[int]) -> list[int]:
    if view.length < 1 << 62:
        return view.query_many(np.asarray(idx, dtype=np.int64)).tolist()
    return query_ints(view, idx)


def query_ints(view: OracleView, idx: list[int]) -> list[int]:
    """Batch of single queries with Python-int indices (huge oracles)."""
    from .oracle import SubView

    offset = 0
    while isinstance(view, SubView):
        offset += view.offset
        view = view.parent
    if not isinstance(view, QueryOracle):
        return [view.query(i + offset) for i in idx]
    full = [i + offset for i in idx]
    view.total += len(full)
    view._points.extend(full)
    src = view.source
    if isinstance(src, HadamardBits):
        u = src.u
        return [(i & u).bit_count() & 1 for i in full]
    return [src.bit(i) for i in full]


class AmplifiedBackend(Backend):
    """Runs the base verifier ``repetitions`` times; rejects if any run rejects."""

    def __init__(self, base: Backend, repetitions: int, base_delta: float):
        self.base = base
        self.repetitions = repetitions
        self.base_delta = base_delta
        self.backend_id = base.backend_id

    def proof_length(self, spec):
        return self.base.proof_length(spec)

    def prove(self, spec, x, witness=None):
        return self.base.prove(spec, x, witness)

    def verify(self, spec, x, pi, eps, delta, rng) -> bool:
        ok = True
        for _ in range(self.repetitions):
            ok &= self.base.verify(spec, x, pi, eps, self.base_delta, rng)
            if not ok:
                break
        return ok

    def queries_per_call(self, spec, eps, delta) -> dict:
        one = self.base.queries_per_call(spec, eps, self.base_delta)
        return {k: v * self.repetitions for k, v in one.items()}


def amplification_repetitions(delta: float, tau: float, constant: float = AMPLIFY_CONSTANT) -> int:
    """ceil(C * ln(1/tau) / delta)."""
    if not 0 < tau <= 1:
        raise ParameterError("tau must be in (0, 1]")
    if not 0 < delta <= 1:
        raise ParameterError("delta must be in (0, 1]")
    return math.ceil(constant * math.log(1 / tau) / delta - 1e-12)


def amplify(backend: Backend, delta: float, tau: float, constant: float = AMPLIFY_CONSTANT) -> Backend:
    """Wrap a backend with soundness ``delta`` so far inputs are rejected w.p. >= 1 - tau."""
    reps = amplification_repetitions(delta, tau, constant)
    if reps == 0:
        return backend
    return AmplifiedBackend(backend, reps, delta)


# Spiel-PCU ---------------------------------------------------------------------


@dataclass(eq=False)
class CodeFamily:
    """A secret-indexed linear code family C(w).

    Members of C(w) are ``v_j = <rows[j], u>`` over witnesses u whose low k
    bits equal w; ``contains(v, w)`` decides membership directly.
    """

    k: int
    m: int
    dim: int
    rows: Sequence[int]
    contains: Callable[[np.ndarray, np.ndarray], bool]
    circuit_size: int
    name: str = ""


@dataclass(eq=False)
class SpielPCU:
    """Verifier over (v, tau, pi) for v in C(w), tau = Spiel(w).

    The backend runs on C_eq = { v^zeta ++ Spiel(w)^xi } at radius eps/3,
    each query to C_eq being emulated by one query to v or tau.
    """

    family: CodeFamily
    backend: Backend
    value_code: GoodCodeSpec
    zeta: int
    xi: int

    @cached_property
    def predicate(self) -> PredicateSpec:
        fam, code = self.family, self.value_code
        mz = fam.m * self.zeta
        n_tau = code.n

        def evaluate(x: np.ndarray) -> bool:
            vpart = x[:mz].reshape(self.zeta, fam.m)
            if self.zeta > 1 and not np.all(vpart == vpart[0]):
                return False
            if fam.k:
                tpart = x[mz:].reshape(self.xi, n_tau)
                if not np.all(tpart == tpart[0]) or not code.is_member(tpart[0]):
                    return False
                w = code.decode(tpart[0])
            else:
                w = np.zeros(0, dtype=np.uint8)
            return bool(fam.contains(vpart[0], w))

        spiel_rows = code.column_masks
        rows = list(fam.rows) * self.zeta + list(spiel_rows) * self.xi
        system = ConstraintSystem(dim=fam.dim, rows=rows)
        arity = mz + n_tau * self.xi
        return PredicateSpec(
            arity=arity,
            evaluate=evaluate,
            declared_size=arity + fam.circuit_size,
            constraints=system,
            name=f"eq[{fam.name}]",
        )

    @property
    def proof_length(self) -> int:
        return self.backend.proof_length(self.predicate)

    def assemble(self, v, tau) -> np.ndarray:
        parts = [np.tile(np.asarray(v, dtype=np.uint8), self.zeta)]
        if self.xi:
            parts.append(np.tile(np.asarray(tau, dtype=np.uint8), self.xi))
        return np.concatenate(parts)

    def prove(self, v, w, witness: int | None = None) -> PcppProof:
        tau = self.value_code.encode(w)
        return self.backend.prove(self.predicate, self.assemble(v, tau), witness)

    def input_view(self, v: OracleView, tau: OracleView) -> OracleView:
        parts = [v.tiled(self.zeta)]
        if self.xi:
            parts.append(tau.tiled(self.xi))
        return JoinedView(parts)

    def verify(self, v: OracleView, tau: OracleView, pi: OracleView, eps: float, delta: float, rng) -> bool:
        if v.length != self.family.m or tau.length != self.value_code.n:
            raise InputError("oracle lengths do not match the family")
        return self.backend.verify(self.predicate, self.input_view(v, tau), pi, eps / 3, delta, rng)

    def queries_per_call(self, eps: float, delta: float) -> int:
        """Total queries to (v, tau, pi) of one accepting call."""
        if self.backend.backend_id == "exhaustive":
            # repeated copies are read once through the tiled views
            reps = getattr(self.backend, "repetitions", 1)
            return reps * (self.family.m + (self.value_code.n if self.xi else 0))
        q = self.backend.queries_per_call(self._shape_spec, eps / 3, delta)
        return q["input"] + q["proof"]

    @cached_property
    def _shape_spec(self) -> PredicateSpec:
        """Row-free stand-in for the predicate; query counts only need its shape."""
        if "predicate" in self.__dict__:
            return self.predicate
        arity = self.family.m * self.zeta + self.value_code.n * self.xi
        return PredicateSpec(arity, lambda x: False, arity + self.family.circuit_size,
                             ConstraintSystem(dim=self.family.dim, rows=()), f"shape[{self.family.name}]")


def make_spiel_pcu(
    family: CodeFamily,
    m: int,
    k: int,
    backend: Backend,
    value_code: GoodCodeSpec,
    repeat_input: bool = False,
) -> SpielPCU:
    """Build the Spiel-PCU for ``family``.

    Needs m >= 100k so that xi = floor(m / 100k) >= 1.  With
    ``repeat_input`` a shorter v is instead repeated zeta = floor(100k / m)
    times against a single copy of Spiel(w), which keeps the two parts
    balanced the same way.
    """
    if family.m != m or family.k != k or value_code.k != k:
        raise ParameterError("family, m, k and value code disagree")
    n_tau = value_code.n
    if k == 0:
        return SpielPCU(family, backend, value_code, zeta=1, xi=0)
    if m >= n_tau:
        return SpielPCU(family, backend, value_code, zeta=1, xi=m // n_tau)
    if not repeat_input:
        raise ParameterError(f"m = {m} < 100k = {n_tau}")
    return SpielPCU(family, backend, value_code, zeta=n_tau // m, xi=1)


def run_verifier(verify: Callable, v_src, tau_src, pi_src, seed) -> VerdictReport:
    """Run ``verify(v, tau, pi, rng)`` on fresh root oracles and tally queries."""
    v = v_src if isinstance(v_src, QueryOracle) else QueryOracle(v_src)
    tau = tau_src if isinstance(tau_src, QueryOracle) else QueryOracle(tau_src)
    pi = pi_src if isinstance(pi_src, QueryOracle) else QueryOracle(pi_src)
    rng = np.random.default_rng(seed)
    ok = verify(v, tau, pi, rng)
    return VerdictReport(
        verdict="accept" if ok else "reject",
        input_queries=v.distinct_count(),
        proof_queries=pi.distinct_count(),
        value_queries=tau.distinct_count(),
        randomness_seed=seed,
        total_queries={"input": v.total, "proof": pi.total, "value": tau.total},
    )


def backend_by_name(name: str) -> Backend:
    if name == "exhaustive":
        return ExhaustiveBackend()
    if name == "hadamard":
        return HadamardBackend()
    raise ParameterError(f"unknown backend {name!r}")


def backend_prove(backend: Backend, spec: PredicateSpec, x, witness: int | None = None) -> PcppProof:
    return backend.prove(spec, x, witness)


def backend_verify(backend: Backend, spec: PredicateSpec, x, pi, eps: float, delta: float, seed) -> VerdictReport:
    def run(xv, _tau, piv, rng):
        return backend.verify(spec, xv, piv, eps, delta, rng)

    pi_src = pi.source if isinstance(pi, PcppProof) else pi
    return run_verifier(run, x, np.zeros(0, dtype=np.uint8), pi_src, seed)
