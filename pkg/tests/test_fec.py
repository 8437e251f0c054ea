"""Reed-Solomon codec and the bit/symbol mapping."""

import numpy as np
import pytest

from ddviterbi import channels as ch, fec
from ddviterbi.errors import InvalidParameterError, InvalidScenarioError


def _corrupt(codeword, weight, rng):
    bad = codeword.copy()
    for pos in rng.choice(fec.N, weight, replace=False):
        bad[pos] ^= int(rng.integers(1, 256))
    return bad


def test_parameters():
    assert (fec.N, fec.K, fec.T_CORRECT) == (255, 223, 16)
    assert fec.INFO_BITS == 1784
    assert fec.CODE_BITS == 2040


def test_zero_message_zero_codeword():
    assert np.all(fec.rs_encode_bytes(np.zeros(fec.K, dtype=np.int64)) == 0)


def test_encode_systematic():
    rng = np.random.default_rng(0)
    msg = rng.integers(0, 256, fec.K)
    cw = fec.rs_encode_bytes(msg)
    assert np.array_equal(cw[: fec.K], msg)
    assert cw.size == fec.N


def test_encoder_linearity():
    rng = np.random.default_rng(1)
    a = rng.integers(0, 256, fec.K)
    b = rng.integers(0, 256, fec.K)
    assert np.array_equal(
        fec.rs_encode_bytes(a ^ b), fec.rs_encode_bytes(a) ^ fec.rs_encode_bytes(b)
    )


def test_clean_codeword_decodes_with_zero_errors():
    rng = np.random.default_rng(2)
    bits = rng.integers(0, 2, fec.INFO_BITS)
    decoded, eps, ok = fec.rs_decode(fec.rs_encode(bits))
    assert ok and eps == 0
    assert np.array_equal(decoded, bits)


def test_corrects_up_to_sixteen_symbol_errors():
    rng = np.random.default_rng(3)
    bits = rng.integers(0, 2, fec.INFO_BITS)
    cw = fec.rs_encode(bits)
    for weight in (1, 4, 8, 16):
        decoded, eps, ok = fec.rs_decode(_corrupt(cw, weight, rng))
        assert ok
        assert np.array_equal(decoded, bits)


def test_reported_eps_is_bit_hamming_distance():
    rng = np.random.default_rng(4)
    bits = rng.integers(0, 2, fec.INFO_BITS)
    cw = fec.rs_encode(bits)
    for _ in range(20):
        bad = _corrupt(cw, int(rng.integers(1, 17)), rng)
        decoded, eps, ok = fec.rs_decode(bad)
        assert ok
        true_eps = int(np.sum(fec.bytes_to_bits(bad[: fec.K]) != decoded))
        assert eps == true_eps


def test_beyond_capacity_is_detected():
    rng = np.random.default_rng(5)
    bits = rng.integers(0, 2, fec.INFO_BITS)
    cw = fec.rs_encode(bits)
    detected = sum(not fec.rs_decode(_corrupt(cw, 24, rng))[2] for _ in range(50))
    assert detected >= 49


def test_bit_byte_roundtrip():
    rng = np.random.default_rng(6)
    bits = rng.integers(0, 2, 2040)
    assert np.array_equal(fec.bytes_to_bits(fec.bits_to_bytes(bits)), bits)
    with pytest.raises(InvalidParameterError):
        fec.bits_to_bytes(np.zeros(7))


def test_modulation_roundtrip():
    rng = np.random.default_rng(7)
    bits = rng.integers(0, 2, 2040)
    for cons in (ch.bpsk(4), ch.ook(4)):
        symbols = fec.modulate(bits, cons)
        assert np.array_equal(fec.demodulate(symbols, cons), bits)
    assert np.array_equal(fec.modulate([0, 1], ch.bpsk(4)), [-1.0, 1.0])
    assert np.array_equal(fec.modulate([0, 1], ch.ook(4)), [0.0, 1.0])


def test_modulation_rejects_non_binary_constellation():
    cons = ch.Constellation((-1.0, 0.0, 1.0), 2)
    with pytest.raises(InvalidScenarioError):
        fec.modulate([0, 1], cons)


def test_encode_block_shape_and_roundtrip():
    rng = np.random.default_rng(8)
    bits = rng.integers(0, 2, fec.INFO_BITS)
    block = fec.encode_block(bits, ch.bpsk(4))
    assert block.channel_symbols.size == fec.CODE_BITS
    decoded, eps, ok = fec.decode_block(block.channel_symbols, ch.bpsk(4))
    assert ok and eps == 0
    assert np.array_equal(decoded, bits)


def test_length_validation():
    with pytest.raises(InvalidParameterError):
        fec.rs_encode(np.zeros(100))
    with pytest.raises(InvalidParameterError):
        fec.rs_decode_bytes(np.zeros(100))
    with pytest.raises(InvalidParameterError):
        fec.decode_block(np.ones(100), ch.bpsk(4))
