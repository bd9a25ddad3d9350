"""Versioned binary artifacts.

Layout: b"PCUS", version byte, type tag byte, u32 header length, UTF-8 JSON
header, then one or more bit sections.  A bit section is a u64 bit count, a
u32 CRC-32 of the packed bytes, and the bits packed MSB-first.  Erased
strings carry a second section marking the erased positions.
"""

from __future__ import annotations

import json
import struct
import zlib
from fractions import Fraction
from pathlib import Path

import numpy as np

from .basecode import HardCodeSpec
from .ensemble import Encoding, EncodingWitness, LevelParams, ProofString, derive_params, proof_layout
from .errors import CapabilityError, CorruptionError, FormatError
from .goodcode import GoodCodeSpec
from .oracle import ERASED, BitSource, DenseBits

MAGIC = b"PCUS"
VERSION = 1
TAGS = {"hardcode": 1, "goodcode": 2, "encoding": 3, "proof": 4, "erased": 5}
TAG_NAMES = {v: k for k, v in TAGS.items()}
MAX_DENSE_BITS = 1 << 32


# low-level framing -----------------------------------------------------------------


def _bits_section(bits: np.ndarray) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    packed = np.packbits(bits).tobytes()
    return struct.pack("<QI", bits.size, zlib.crc32(packed)) + packed


def _read_bits(buf: memoryview, pos: int) -> tuple[np.ndarray, int]:
    if pos + 12 > len(buf):
        raise CorruptionError("truncated bit section header")
    nbits, crc = struct.unpack_from("<QI", buf, pos)
    pos += 12
    nbytes = (nbits + 7) // 8
    if pos + nbytes > len(buf):
        raise CorruptionError("truncated bit payload")
    packed = bytes(buf[pos : pos + nbytes])
    if zlib.crc32(packed) != crc:
        raise CorruptionError("bit payload checksum mismatch")
    bits = np.unpackbits(np.frombuffer(packed, dtype=np.uint8), count=nbits)
    return bits, pos + nbytes


def pack(tag: str, header: dict, sections: list[np.ndarray]) -> bytes:
    hdr = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    out = [MAGIC, bytes([VERSION, TAGS[tag]]), struct.pack("<I", len(hdr)), hdr]
    out.extend(_bits_section(s) for s in sections)
    return b"".join(out)


def unpack(data: bytes) -> tuple[str, dict, list[np.ndarray]]:
    buf = memoryview(data)
    if len(buf) < 10:
        raise CorruptionError("artifact shorter than its fixed header")
    if bytes(buf[:4]) != MAGIC:
        raise FormatError("bad magic")
    if buf[4] != VERSION:
        raise FormatError(f"unsupported version {buf[4]}")
    tag = TAG_NAMES.get(buf[5])
    if tag is None:
        raise FormatError(f"unknown type tag {buf[5]}")
    (hlen,) = struct.unpack_from("<I", buf, 6)
    pos = 10
    if pos + hlen > len(buf):
        raise CorruptionError("truncated header")
    try:
        header = json.loads(bytes(buf[pos : pos + hlen]).decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptionError(f"unreadable header: {exc}") from exc
    pos += hlen
    sections = []
    for _ in range(header.get("sections", 0)):
        bits, pos = _read_bits(buf, pos)
        sections.append(bits)
    if pos != len(buf):
        raise CorruptionError("trailing bytes after the last section")
    return tag, header, sections


# params -----------------------------------------------------------------------------


def params_header(params: LevelParams) -> dict:
    d = params.describe()
    return {"describe": d, "digest": params.digest()}


def params_from_header(h: dict) -> LevelParams:
    d = h["describe"]
    field = 1 << d["fields"][0] if d["ell"] else 64
    k = d["ks"][0] if d["ell"] else d["k0"]
    p = derive_params(
        d["ell"], field, k, d["c"], d["d"], d["c_ell"], d["base_seed"], d["code_seed"], d["require_ensemble"]
    )
    if p.describe() != d or p.digest() != h["digest"]:
        raise FormatError("parameters do not regenerate to the stored digest")
    return p


# witnesses --------------------------------------------------------------------------


def _wit_to_json(w: EncodingWitness | None, ell: int):
    if w is None:
        return None
    out = {"secret": np.asarray(w.secret).astype(int).tolist()}
    if w.u is not None:
        out["u"] = str(w.u)
    if w.values is not None:
        out["values"] = np.asarray(w.values).tolist()
    if w.table is not None:
        out["table"] = np.asarray(w.table).tolist()
    if w.children is not None:
        if ell == 1:
            out["children"] = [str(int(c)) for c in w.children]
        else:
            out["children"] = [_wit_to_json(c, ell - 1) for c in w.children]
    return out


def _wit_from_json(d, ell: int) -> EncodingWitness | None:
    if d is None:
        return None
    children = None
    if "children" in d:
        if ell == 1:
            children = np.array([int(c) for c in d["children"]], dtype=np.int64)
        else:
            children = [_wit_from_json(c, ell - 1) for c in d["children"]]
    return EncodingWitness(
        secret=np.array(d["secret"], dtype=np.uint8),
        u=int(d["u"]) if "u" in d else None,
        values=np.array(d["values"], dtype=np.int64) if "values" in d else None,
        table=np.array(d["table"], dtype=np.int64) if "table" in d else None,
        children=children,
    )


# typed writers / readers --------------------------------------------------------------------


def dumps(obj) -> bytes:
    if isinstance(obj, HardCodeSpec):
        header = {
            "k": obj.k,
            "seed": obj.seed,
            "dist_cert": str(obj.dist_cert),
            "dual_cert": str(obj.dual_cert),
            "ensemble_cert": str(obj.ensemble_cert),
            "stats": obj.stats,
            "sections": 1,
        }
        return pack("hardcode", header, [obj.A])
    if isinstance(obj, GoodCodeSpec):
        header = {
            "k": obj.k,
            "n": obj.n,
            "certified_distance": str(obj.certified_distance),
            "certification_method": obj.certification_method,
            "seed": obj.seed,
            "stats": obj.stats,
            "sections": 1,
        }
        return pack("goodcode", header, [obj.generator])
    if isinstance(obj, Encoding):
        header = {
            "level": obj.level,
            "params": params_header(obj.params),
            "witness": _wit_to_json(obj.witness, obj.level),
            "sections": 1,
        }
        return pack("encoding", header, [obj.bits])
    if isinstance(obj, ProofString):
        if obj.length > MAX_DENSE_BITS:
            raise CapabilityError(f"proof of {obj.length} bits is too long to store densely")
        header = {"params": params_header(obj.params), "backend": obj.backend_id, "sections": 1}
        return pack("proof", header, [obj.source.to_array()])
    if isinstance(obj, BitSource) or isinstance(obj, np.ndarray):
        arr = obj.to_array() if isinstance(obj, BitSource) else np.asarray(obj, dtype=np.uint8)
        erased = arr == ERASED
        return pack("erased", {"sections": 2}, [np.where(erased, 0, arr), erased])
    raise FormatError(f"no artifact format for {type(obj).__name__}")


def loads(data: bytes):
    tag, h, sections = unpack(data)
    try:
        return _build(tag, h, sections)
    except (KeyError, ValueError, TypeError) as exc:
        raise CorruptionError(f"inconsistent {tag} artifact: {exc}") from exc


def _build(tag: str, h: dict, sections: list[np.ndarray]):
    if tag == "hardcode":
        k = h["k"]
        A = sections[0].reshape(4 * k, 3 * k)
        return HardCodeSpec(
            k, A, Fraction(h["dist_cert"]), Fraction(h["dual_cert"]), Fraction(h["ensemble_cert"]), h["seed"], h["stats"]
        )
    if tag == "goodcode":
        gen = sections[0].reshape(h["k"], h["n"])
        return GoodCodeSpec(
            h["k"], h["n"], gen, Fraction(h["certified_distance"]), h["certification_method"], h["seed"], h["stats"]
        )
    if tag == "encoding":
        p = params_from_header(h["params"])
        bits = sections[0]
        if bits.size != p.length:
            raise CorruptionError("encoding length disagrees with its parameters")
        return Encoding(bits, h["level"], p, _wit_from_json(h["witness"], h["level"]))
    if tag == "proof":
        p = params_from_header(h["params"])
        layout = proof_layout(p, h["backend"]) if p.ell else None
        if layout is not None and layout.total != sections[0].size:
            raise CorruptionError("proof length disagrees with its layout")
        return ProofString(DenseBits(sections[0]), p, h["backend"], layout)
    if tag == "erased":
        bits, mask = sections
        if bits.size != mask.size:
            raise CorruptionError("erasure map length mismatch")
        out = bits.copy()
        out[mask.astype(bool)] = ERASED
        return out
    raise FormatError(tag)


def write(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps(obj))
    return path


def read(path):
    return loads(Path(path).read_bytes())
