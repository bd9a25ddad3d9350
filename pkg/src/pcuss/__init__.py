"""Shared-secret code ensembles with probabilistically checkable unveiling."""

from __future__ import annotations

__version__ = "0.1.0"

from .basecode import HardCodeSpec, certify_hardcode, hardcode_generate
from .distributions import restricted_equality, sample_dno, sample_dyes
from .ensemble import (
    Encoding,
    LevelParams,
    PcussSystem,
    ProofString,
    derive_params,
    pcuss_build_proof,
    pcuss_encode,
    pcuss_value,
    pcuss_verify,
)
from .errors import (
    CapabilityError,
    CorruptionError,
    DomainError,
    FormatError,
    GenerationError,
    InputError,
    ParameterError,
    PcussError,
    PreconditionError,
)
from .field import FieldParams
from .goodcode import GoodCodeSpec, goodcode

__all__ = [
    "CapabilityError",
    "CorruptionError",
    "DomainError",
    "Encoding",
    "FieldParams",
    "FormatError",
    "GenerationError",
    "GoodCodeSpec",
    "HardCodeSpec",
    "InputError",
    "LevelParams",
    "ParameterError",
    "PcussError",
    "PcussSystem",
    "PreconditionError",
    "ProofString",
    "certify_hardcode",
    "derive_params",
    "goodcode",
    "hardcode_generate",
    "pcuss_build_proof",
    "pcuss_encode",
    "pcuss_value",
    "pcuss_verify",
    "restricted_equality",
    "sample_dno",
    "sample_dyes",
]
