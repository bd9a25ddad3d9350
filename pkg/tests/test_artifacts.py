from __future__ import annotations

import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcuss import artifacts
from pcuss.basecode import hardcode_generate
from pcuss.ensemble import Encoding, PcussSystem, ProofString, derive_params, pcuss_encode
from pcuss.errors import CapabilityError, CorruptionError, FormatError
from pcuss.goodcode import goodcode
from pcuss.oracle import ERASED, ConstBits, HadamardBits


def test_hardcode_round_trip(tmp_path):
    spec = hardcode_generate(4, 0)
    path = artifacts.write(spec, tmp_path / "h.pcus")
    assert artifacts.read(path) == spec


def test_goodcode_round_trip():
    spec = goodcode(6)
    back = artifacts.loads(artifacts.dumps(spec))
    assert np.array_equal(back.generator, spec.generator)
    assert back.certified_distance == spec.certified_distance


@pytest.mark.parametrize("ell", [0, 1, 2])
def test_encoding_round_trip(ell):
    p = derive_params(ell, 64, 4 if ell == 0 else 2)
    enc = pcuss_encode(p, np.ones(p.k, dtype=np.uint8), np.random.default_rng(ell))
    back = artifacts.loads(artifacts.dumps(enc))
    assert isinstance(back, Encoding)
    assert np.array_equal(back.bits, enc.bits)
    assert back.params.digest() == p.digest()
    # the stored witness is enough to rebuild the same proof
    s = PcussSystem(p)
    assert np.array_equal(s.build_proof(back).source.to_array(), s.build_proof(enc).source.to_array())


def test_proof_round_trip(params1):
    enc = pcuss_encode(params1, np.array([0, 1], dtype=np.uint8), np.random.default_rng(0))
    proof = PcussSystem(params1).build_proof(enc)
    back = artifacts.loads(artifacts.dumps(proof))
    assert isinstance(back, ProofString)
    assert np.array_equal(back.source.to_array(), proof.source.to_array())
    assert back.layout == proof.layout


def test_huge_proof_not_stored(params1):
    big = ProofString(HadamardBits(1, 40), params1, "hadamard")
    with pytest.raises(CapabilityError):
        artifacts.dumps(big)


@given(st.lists(st.sampled_from([0, 1, ERASED]), max_size=200))
def test_erased_round_trip(values):
    arr = np.array(values, dtype=np.uint8)
    assert np.array_equal(artifacts.loads(artifacts.dumps(arr)), arr)


def test_erased_from_bit_source():
    back = artifacts.loads(artifacts.dumps(ConstBits(ERASED, 9)))
    assert back.tolist() == [ERASED] * 9


def test_header_is_deterministic():
    spec = hardcode_generate(4, 0)
    assert artifacts.dumps(spec) == artifacts.dumps(hardcode_generate(4, 0))


def test_format_errors():
    data = artifacts.dumps(hardcode_generate(3, 0))
    with pytest.raises(FormatError):
        artifacts.loads(b"XXXX" + data[4:])
    with pytest.raises(FormatError):
        artifacts.loads(data[:4] + bytes([9]) + data[5:])
    with pytest.raises(FormatError):
        artifacts.loads(data[:5] + bytes([77]) + data[6:])
    with pytest.raises(FormatError):
        artifacts.dumps(object())


def test_corruption_errors():
    data = artifacts.dumps(hardcode_generate(3, 0))
    with pytest.raises(CorruptionError):
        artifacts.loads(data[:-1])
    with pytest.raises(CorruptionError):
        artifacts.loads(data + b"\x00")
    flipped = bytearray(data)
    flipped[-1] ^= 1
    with pytest.raises(CorruptionError):
        artifacts.loads(bytes(flipped))
    with pytest.raises(CorruptionError):
        artifacts.loads(data[:6] + struct.pack("<I", 10**6) + data[10:])
    with pytest.raises(CorruptionError):
        artifacts.loads(b"PCUS")


def test_params_digest_mismatch(params1):
    enc = pcuss_encode(params1, np.zeros(2, dtype=np.uint8), np.random.default_rng(0))
    tag, header, sections = artifacts.unpack(artifacts.dumps(enc))
    header["params"]["digest"] = "0" * 64
    with pytest.raises(FormatError):
        artifacts.loads(artifacts.pack(tag, header, sections))
