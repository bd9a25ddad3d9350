"""Command-line interface: ``python -m pcuss <command>``.

Exit codes: 0 pass, 1 criterion failure or rejection, 2 usage error,
3 capability error.  The default seed comes from $PCUSS_SEED (else 0).
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, artifacts
from .basecode import certify_hardcode, hardcode_generate
from .ensemble import Encoding, PcussSystem, ProofString, derive_params, pcuss_encode, pcuss_value, pcuss_verify
from .errors import CapabilityError, PcussError
from .experiments import EXPERIMENTS, ExperimentConfig, report_json, run_experiment, table_csv, write_result

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAPABILITY = 0, 1, 2, 3
SEED_ENV = "PCUSS_SEED"


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise PcussError(f"${SEED_ENV} must be an integer, got {raw!r}") from None


def _bits(text: str) -> np.ndarray:
    if text and set(text) - {"0", "1"}:
        raise PcussError("secrets are written as 0/1 strings")
    return np.array([int(c) for c in text], dtype=np.uint8)


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, default=str) + "\n")


# commands -------------------------------------------------------------------------------


def cmd_certify(args) -> int:
    seeds = args.seeds if args.seeds else [args.seed]
    ok = True
    for seed in seeds:
        spec = hardcode_generate(args.k, seed, args.max_attempts)
        rep = certify_hardcode(spec)
        ok &= rep.passed
        _emit({"seed": seed, "attempts": spec.stats["attempts"], **rep.as_dict()})
        if args.out:
            out = Path(args.out)
            path = out / f"hardcode_k{args.k}_s{seed}.pcus" if len(seeds) > 1 or out.is_dir() or args.out.endswith("/") else out
            artifacts.write(spec, path)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_encode(args) -> int:
    params = derive_params(args.ell, args.field, args.k)
    w = _bits(args.secret) if args.secret is not None else np.zeros(params.k, dtype=np.uint8)
    enc = pcuss_encode(params, w, np.random.default_rng(args.seed))
    artifacts.write(enc, args.out)
    _emit({"out": args.out, "length": enc.length, "params_digest": params.digest()})
    return EXIT_OK


def cmd_prove(args) -> int:
    enc = artifacts.read(args.encoding)
    if not isinstance(enc, Encoding):
        raise PcussError("expected an encoding artifact")
    proof = PcussSystem(enc.params, args.backend).build_proof(enc)
    artifacts.write(proof, args.out)
    _emit({"out": args.out, "proof_length": proof.length, "backend": args.backend})
    return EXIT_OK


def cmd_verify(args) -> int:
    enc = artifacts.read(args.encoding)
    proof = artifacts.read(args.proof)
    if not isinstance(enc, Encoding) or not isinstance(proof, ProofString):
        raise PcussError("expected an encoding and a proof artifact")
    params = enc.params
    w = _bits(args.secret) if args.secret is not None else enc.witness.secret
    system = PcussSystem(params, proof.backend_id)
    rep = pcuss_verify(system, enc.bits, pcuss_value(params, w), proof, args.eps, args.delta, args.seed)
    _emit(rep.as_dict())
    return EXIT_OK if rep.accepted else EXIT_FAIL


def _load_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        data = json.loads(Path(args.config).read_text())
    for key in ("experiment", "ell", "field", "k", "trials", "backend", "eps", "delta"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if args.seeds:
        data["seeds"] = args.seeds
    elif "seeds" not in data:
        data["seeds"] = [args.seed]
    if args.option:
        opts = dict(data.get("options", {}))
        for item in args.option:
            key, _, raw = item.partition("=")
            opts[key] = json.loads(raw)
        data["options"] = opts
    if "experiment" not in data:
        raise PcussError("no experiment named (use --experiment or a config file)")
    return ExperimentConfig(**data)


def cmd_experiment(args) -> int:
    cfg = _load_config(args)
    start = time.time()
    res = run_experiment(cfg)
    meta = {
        "started": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(start)),
        "runtime_seconds": round(time.time() - start, 3),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "package_version": __version__,
    }
    if args.out_dir:
        for path in write_result(res, args.out_dir, meta):
            sys.stderr.write(f"wrote {path}\n")
    else:
        sys.stdout.write(report_json(res.report))
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_report(args) -> int:
    ok = True
    for path in args.reports:
        if str(path).endswith(".meta.json"):
            continue  # run metadata, not a report
        rep = json.loads(Path(path).read_text())
        ok &= bool(rep.get("passed"))
        line = f"{rep.get('experiment', '?'):22s} {'PASS' if rep.get('passed') else 'FAIL'}  {path}"
        sys.stdout.write(line + "\n")
        if args.csv:
            rows = rep.get("rows")
            if rows:
                out = Path(args.csv) / (Path(path).stem + ".rows.csv")
                out.parent.mkdir(parents=True, exist_ok=True)
                out.write_text(table_csv(rows))
    return EXIT_OK if ok else EXIT_FAIL


# parser -----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    seed = argparse.ArgumentParser(add_help=False)
    seed.add_argument("--seed", type=int, default=None, help=f"master seed (default ${SEED_ENV} or 0)")

    params = argparse.ArgumentParser(add_help=False)
    params.add_argument("--ell", type=int, default=1)
    params.add_argument("--field", type=int, default=64, help="top field size")
    params.add_argument("--k", type=int, default=2, help="secret length in bits")

    ap = argparse.ArgumentParser(prog="pcuss", description="Shared-secret code ensembles and their unveiling proofs.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", parents=[seed], help="generate and certify base hard codes")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--seeds", type=int, nargs="*")
    p.add_argument("--max-attempts", type=int, default=1000)
    p.add_argument("--out", help="artifact path, or directory for several seeds")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("encode", parents=[seed, params], help="sample an encoding of a secret")
    p.add_argument("--secret", help="secret as a 0/1 string")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("prove", help="build the honest proof for an encoding")
    p.add_argument("--encoding", required=True)
    p.add_argument("--backend", choices=["exhaustive", "hadamard"], default="exhaustive")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("verify", parents=[seed], help="run the verifier")
    p.add_argument("--encoding", required=True)
    p.add_argument("--proof", required=True)
    p.add_argument("--secret", help="claimed secret (default: the one stored with the encoding)")
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--delta", type=float, default=2 / 3)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", parents=[seed], help="run an experiment")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--ell", type=int)
    p.add_argument("--field", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--backend", choices=["exhaustive", "hadamard"])
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--seeds", type=int, nargs="*")
    p.add_argument("--option", action="append", help="extra option KEY=JSON")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="summarise report files")
    p.add_argument("reports", nargs="+")
    p.add_argument("--csv", help="directory for flattened row tables")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "seed", "absent") is None:
            args.seed = default_seed()
        return args.func(args)
    except CapabilityError as exc:
        sys.stderr.write(f"pcuss: capability error: {exc}\n")
        return EXIT_CAPABILITY
    except (PcussError, ValueError, OSError, KeyError) as exc:
        sys.stderr.write(f"pcuss: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
