"""Reed-Solomon [255, 223] codec over GF(256) plus the bit/symbol mapping.

Field: GF(2^8) with primitive polynomial x^8 + x^4 + x^3 + x^2 + 1 (0x11d).
Generator: narrow-sense, roots alpha^1 .. alpha^32. Decoding follows the
standard syndrome -> Berlekamp-Massey -> Chien search -> Forney pipeline,
with a syndrome recheck flagging miscorrections.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, InvalidScenarioError

N = 255
K = 223
N_PARITY = N - K  # 32
T_CORRECT = N_PARITY // 2  # 16
INFO_BITS = K * 8  # 1784
CODE_BITS = N * 8  # 2040

_PRIM_POLY = 0x11D
_FCR = 1  # first consecutive root exponent


def _build_tables():
    exp = np.zeros(512, dtype=np.int64)
    log = np.zeros(256, dtype=np.int64)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= _PRIM_POLY
    exp[255:510] = exp[:255]
    return exp, log


_EXP, _LOG = _build_tables()


def _gf_mul(a, b):
    if a == 0 or b == 0:
        return 0
    return int(_EXP[_LOG[a] + _LOG[b]])


def _gf_inv(a):
    if a == 0:
        raise ZeroDivisionError("inverse of 0 in GF(256)")
    return int(_EXP[255 - _LOG[a]])


def _poly_mul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] ^= _gf_mul(a, b)
    return out


def _poly_eval(p, x):
    """Evaluate polynomial (highest-degree coefficient first) at x."""
    acc = 0
    for coeff in p:
        acc = _gf_mul(acc, x) ^ coeff
    return acc


def _generator_poly():
    g = [1]
    for i in range(N_PARITY):
        g = _poly_mul(g, [1, _EXP[_FCR + i]])
    return g


_GEN = _generator_poly()


def rs_encode_bytes(message):
    """Systematic encoding: 223 message bytes -> 255 codeword bytes."""
    message = np.asarray(message, dtype=np.int64)
    if message.shape != (K,) or message.min() < 0 or message.max() > 255:
        raise InvalidParameterError(f"message must be {K} bytes")
    rem = [0] * N_PARITY
    for byte in message:
        factor = int(byte) ^ rem[0]
        rem = rem[1:] + [0]
        if factor != 0:
            for j in range(N_PARITY):
                rem[j] ^= _gf_mul(_GEN[j + 1], factor)
    return np.concatenate([message, np.asarray(rem, dtype=np.int64)])


def _syndromes(received):
    """All 32 syndromes at once via the log/exp tables."""
    received = np.asarray(received, dtype=np.int64)
    nz = np.nonzero(received)[0]
    if nz.size == 0:
        return [0] * N_PARITY
    logs = _LOG[received[nz]]
    degrees = N - 1 - nz
    roots = np.arange(_FCR, _FCR + N_PARITY, dtype=np.int64)
    exps = (logs[None, :] + roots[:, None] * degrees[None, :]) % 255
    return [int(s) for s in np.bitwise_xor.reduce(_EXP[exps], axis=1)]


def _berlekamp_massey(synd):
    """Error locator polynomial (lowest-degree coefficient first)."""
    locator = [1]
    prev = [1]
    length = 0
    shift = 1
    b = 1
    for n, s in enumerate(synd):
        delta = s
        for i in range(1, length + 1):
            delta ^= _gf_mul(locator[i], synd[n - i])
        if delta == 0:
            shift += 1
        elif 2 * length <= n:
            tmp = locator[:]
            scale = _gf_mul(delta, _gf_inv(b))
            shifted = [0] * shift + [_gf_mul(scale, c) for c in prev]
            locator = [
                (locator[i] if i < len(locator) else 0) ^ (shifted[i] if i < len(shifted) else 0)
                for i in range(max(len(locator), len(shifted)))
            ]
            length = n + 1 - length
            prev = tmp
            b = delta
            shift = 1
        else:
            scale = _gf_mul(delta, _gf_inv(b))
            shifted = [0] * shift + [_gf_mul(scale, c) for c in prev]
            locator = [
                (locator[i] if i < len(locator) else 0) ^ (shifted[i] if i < len(shifted) else 0)
                for i in range(max(len(locator), len(shifted)))
            ]
            shift += 1
    return locator


def rs_decode_bytes(received):
    """Bounded-distance decoding of one codeword.

    Returns (message_bytes, corrected_codeword, ok). ``ok`` is False when the
    decoder fails or the corrected word does not recheck as a codeword.
    """
    received = np.asarray(received, dtype=np.int64)
    if received.shape != (N,) or received.min() < 0 or received.max() > 255:
        raise InvalidParameterError(f"received word must be {N} bytes")
    work = received.tolist()
    synd = _syndromes(work)
    if not any(synd):
        return received[:K].copy(), received.copy(), True

    locator = _berlekamp_massey(synd)
    n_errors = len(locator) - 1
    if n_errors > T_CORRECT:
        return received[:K].copy(), received.copy(), False

    # Chien search: evaluate the locator at alpha^{-pos} for every position
    loc = np.asarray(locator, dtype=np.int64)
    powers = np.nonzero(loc)[0]
    log_coeffs = _LOG[loc[powers]]
    log_x_inv = (255 - np.arange(N, dtype=np.int64)) % 255
    exps = (log_coeffs[None, :] + log_x_inv[:, None] * powers[None, :]) % 255
    acc = np.bitwise_xor.reduce(_EXP[exps], axis=1)
    positions = np.nonzero(acc == 0)[0].tolist()
    if len(positions) != n_errors:
        return received[:K].copy(), received.copy(), False

    # Forney: error evaluator omega = synd * locator mod x^(2t)
    synd_poly = synd  # lowest-degree first
    omega = [0] * N_PARITY
    for i, a in enumerate(locator):
        if a == 0:
            continue
        for j, b in enumerate(synd_poly):
            if i + j < N_PARITY and b != 0:
                omega[i + j] ^= _gf_mul(a, b)

    # formal derivative of locator
    deriv = [locator[i] if i % 2 == 1 else 0 for i in range(1, len(locator))]

    corrected = work[:]
    for pos in positions:
        x_inv = int(_EXP[(255 - pos) % 255])
        num = 0
        for power, coeff in enumerate(omega):
            num ^= _gf_mul(coeff, _pow_gf(x_inv, power))
        den = 0
        for power, coeff in enumerate(deriv):
            den ^= _gf_mul(coeff, _pow_gf(x_inv, power))
        if den == 0:
            return received[:K].copy(), received.copy(), False
        magnitude = _gf_mul(num, _gf_inv(den))
        # narrow-sense fcr=1 Forney factor: X_j^{1-fcr} = 1
        corrected[N - 1 - pos] ^= magnitude

    if any(_syndromes(corrected)):
        return received[:K].copy(), received.copy(), False
    corrected = np.asarray(corrected, dtype=np.int64)
    return corrected[:K].copy(), corrected, True


def _pow_gf(x, power):
    if power == 0:
        return 1
    if x == 0:
        return 0
    return int(_EXP[(_LOG[x] * power) % 255])


def bits_to_bytes(bits):
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 8:
        raise InvalidParameterError("bit count must be a multiple of 8")
    return np.packbits(bits).astype(np.int64)


def bytes_to_bits(values):
    return np.unpackbits(np.asarray(values, dtype=np.uint8)).astype(np.int64)


def rs_encode(info_bits):
    """1784 information bits -> 255 codeword bytes (systematic)."""
    info_bits = np.asarray(info_bits)
    if info_bits.size != INFO_BITS:
        raise InvalidParameterError(f"expected {INFO_BITS} information bits")
    return rs_encode_bytes(bits_to_bytes(info_bits))


def rs_decode(received):
    """255 received bytes -> (info_bits, corrected bit-error count, ok).

    The error count is the bit-level Hamming distance between the received
    systematic bytes and the decoded message; it is meaningful only when
    ``ok`` is True.
    """
    received = np.asarray(received, dtype=np.int64)
    message, _, ok = rs_decode_bytes(received)
    info_bits = bytes_to_bits(message)
    received_bits = bytes_to_bits(received[:K])
    eps = int(np.sum(info_bits != received_bits))
    return info_bits, eps, ok


@dataclass(frozen=True)
class CodedBlock:
    """One coded transmission: info bits, codeword bytes, channel symbols."""

    info_bits: np.ndarray
    code_symbols: np.ndarray
    channel_symbols: np.ndarray


def modulate(bits, constellation):
    """Map bits to the two-point constellation: 0 -> points[0], 1 -> points[1]."""
    if constellation.size != 2:
        raise InvalidScenarioError("bit modulation requires a binary constellation")
    bits = np.asarray(bits, dtype=np.int64)
    if not np.isin(bits, (0, 1)).all():
        raise InvalidParameterError("bits must be 0/1")
    points = np.asarray(constellation.points)
    return points[bits]


def demodulate(symbols, constellation):
    """Nearest-point hard decision back to bits."""
    if constellation.size != 2:
        raise InvalidScenarioError("bit demodulation requires a binary constellation")
    symbols = np.asarray(symbols, dtype=float)
    points = np.asarray(constellation.points)
    return (np.abs(symbols - points[1]) < np.abs(symbols - points[0])).astype(np.int64)


def encode_block(info_bits, constellation):
    """Info bits -> CodedBlock ready for transmission (2040 channel symbols)."""
    code = rs_encode(info_bits)
    symbols = modulate(bytes_to_bits(code), constellation)
    return CodedBlock(
        info_bits=np.asarray(info_bits, dtype=np.int64),
        code_symbols=code,
        channel_symbols=symbols,
    )


def decode_block(detected_symbols, constellation):
    """Detected channel symbols -> (info_bits, bit-error count, ok)."""
    bits = demodulate(detected_symbols, constellation)
    if bits.size != CODE_BITS:
        raise InvalidParameterError(f"expected {CODE_BITS} detected symbols")
    return rs_decode(bits_to_bytes(bits))
