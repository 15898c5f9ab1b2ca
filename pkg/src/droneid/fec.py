"""LTE-style forward error correction for the 96-byte drone-ID block.

Chain, transmit side::

    96 bytes -> 768 bits (MSB first) -> turbo_encode -> 3 x 772 bits
             -> rate_match -> 7200 channel bits

and the receive side inverts it with ``rate_dematch`` and an iterative
max-log-MAP ``turbo_decode`` that stops as soon as the CRC-24 verifies.

The constituent encoders, the QPP interleaver, trellis termination, the
sub-block interleaver and the circular-buffer bit selection all follow the
LTE transport-channel conventions; the block size is fixed at K = 768.
"""

from functools import lru_cache

import numpy as np

from . import kernels
from .errors import IntegrityError

BLOCK_BYTES = 96
K = BLOCK_BYTES * 8
CODED_STREAM_LEN = K + 4
CODED_LEN = 3 * CODED_STREAM_LEN
CHANNEL_BITS = 7200

CRC24A_POLY = 0x864CFB
QPP_PARAMS = {768: (217, 48)}

MAX_ITERATIONS = 8
HARD_LLR = 8.0
EXTRINSIC_SCALE = 0.75

_SUBBLOCK_COLUMNS = 32
_COLUMN_PERMUTATION = np.array(
    [0, 16, 8, 24, 4, 20, 12, 28, 2, 18, 10, 26, 6, 22, 14, 30,
     1, 17, 9, 25, 5, 21, 13, 29, 3, 19, 11, 27, 7, 23, 15, 31]
)


# -- CRC-24 ------------------------------------------------------------------


def _crc_table():
    table = []
    for byte in range(256):
        reg = byte << 16
        for _ in range(8):
            reg <<= 1
            if reg & 0x1000000:
                reg ^= 0x1000000 | CRC24A_POLY
        table.append(reg & 0xFFFFFF)
    return tuple(table)


_CRC_TABLE = _crc_table()


def crc24(data: bytes) -> bytes:
    """CRC-24A (poly 0x864CFB, zero init, MSB first, no final XOR) as 3 big-endian bytes."""
    reg = 0
    for b in bytes(data):
        reg = ((reg << 8) & 0xFFFFFF) ^ _CRC_TABLE[((reg >> 16) ^ b) & 0xFF]
    return reg.to_bytes(3, "big")


def crc24_int(data: bytes) -> int:
    return int.from_bytes(crc24(data), "big")


def attach_crc(payload: bytes) -> bytes:
    """Append the CRC so that ``crc24`` over the whole result is zero."""
    return bytes(payload) + crc24(payload)


def check_crc(block: bytes) -> bool:
    return crc24_int(block) == 0


def bytes_to_bits(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))


def bits_to_bytes(bits) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


# -- constituent code and interleaver ------------------------------------------


@lru_cache(maxsize=None)
def trellis():
    """Tables for the 8-state RSC with feedback 1+D^2+D^3 and parity 1+D+D^3.

    State bits are (r1, r2, r3) = contents of the three delay cells, packed as
    ``r1 << 2 | r2 << 1 | r3``.
    """
    next_state = np.zeros((8, 2), dtype=np.int64)
    parity = np.zeros((8, 2), dtype=np.int64)
    tail_input = np.zeros(8, dtype=np.int64)
    for s in range(8):
        r1, r2, r3 = (s >> 2) & 1, (s >> 1) & 1, s & 1
        tail_input[s] = r2 ^ r3
        for u in range(2):
            fb = u ^ r2 ^ r3
            parity[s, u] = fb ^ r1 ^ r3
            next_state[s, u] = (fb << 2) | (r1 << 1) | r2
    for arr in (next_state, parity, tail_input):
        arr.setflags(write=False)
    return next_state, parity, tail_input


@lru_cache(maxsize=None)
def qpp_interleaver(k: int = K) -> np.ndarray:
    if k not in QPP_PARAMS:
        raise ValueError(f"unsupported turbo block size {k}")
    f1, f2 = QPP_PARAMS[k]
    i = np.arange(k, dtype=np.int64)
    perm = (f1 * i + f2 * i * i) % k
    perm.setflags(write=False)
    return perm


def turbo_encode(info_bits) -> np.ndarray:
    """Rate-1/3 turbo encoding of 768 bits into streams d0, d1, d2 (772 bits each).

    The result is the concatenation ``[d0, d1, d2]``; ``d0[:768]`` is the
    systematic stream, so the first 768 output bits equal the input.
    """
    bits = np.asarray(info_bits, dtype=np.uint8)
    if bits.ndim != 1 or bits.size != K:
        raise ValueError(f"turbo_encode expects {K} bits, got {bits.size}")
    if np.any(bits > 1):
        raise ValueError("info bits must be 0 or 1")
    next_state, parity, tail_input = trellis()
    perm = qpp_interleaver(K)
    z, x_tail = kernels.rsc_encode(bits, next_state, parity, tail_input)
    z2, x2_tail = kernels.rsc_encode(np.ascontiguousarray(bits[perm]), next_state, parity, tail_input)

    d = np.empty((3, CODED_STREAM_LEN), dtype=np.uint8)
    d[0, :K] = bits
    d[1, :K] = z[:K]
    d[2, :K] = z2[:K]
    # trellis termination, LTE ordering of the twelve tail bits
    d[0, K:] = (x_tail[0], z[K + 1], x2_tail[0], z2[K + 1])
    d[1, K:] = (z[K], x_tail[2], z2[K], x2_tail[2])
    d[2, K:] = (x_tail[1], z[K + 2], x2_tail[1], z2[K + 2])
    return d.reshape(-1)


# -- rate matching -------------------------------------------------------------


@lru_cache(maxsize=None)
def _selection(e: int = CHANNEL_BITS) -> np.ndarray:
    """For each of the ``e`` channel bits, the index into the 2316 coded bits."""
    d_len = CODED_STREAM_LEN
    rows = -(-d_len // _SUBBLOCK_COLUMNS)
    k_pi = rows * _SUBBLOCK_COLUMNS
    n_dummy = k_pi - d_len

    # y[k] holds the index into the d-stream, or -1 for a dummy bit
    y = np.full(k_pi, -1, dtype=np.int64)
    y[n_dummy:] = np.arange(d_len)

    # streams 0 and 1: row-wise write, column permutation, column-wise read
    v01 = y.reshape(rows, _SUBBLOCK_COLUMNS)[:, _COLUMN_PERMUTATION].T.reshape(-1)
    k = np.arange(k_pi)
    pi2 = (_COLUMN_PERMUTATION[k // rows] + _SUBBLOCK_COLUMNS * (k % rows) + 1) % k_pi
    v2 = y[pi2]

    def offset(v, stream):
        return np.where(v < 0, -1, v + stream * d_len)

    w = np.empty(3 * k_pi, dtype=np.int64)
    w[:k_pi] = offset(v01, 0)
    w[k_pi::2] = offset(v01, 1)
    w[k_pi + 1::2] = offset(v2, 2)

    k0 = 2 * rows  # redundancy version 0
    ring = np.roll(w, -k0)
    ring = ring[ring >= 0]
    reps = -(-e // ring.size)
    sel = np.tile(ring, reps)[:e]
    sel.setflags(write=False)
    return sel


def rate_match(coded) -> np.ndarray:
    coded = np.asarray(coded, dtype=np.uint8)
    if coded.shape != (CODED_LEN,):
        raise ValueError(f"rate_match expects {CODED_LEN} coded bits, got {coded.size}")
    return coded[_selection()]


def rate_dematch(channel_llr) -> np.ndarray:
    """Fold repeated copies of each coded bit back into one soft value (sum of LLRs)."""
    channel_llr = np.asarray(channel_llr, dtype=np.float64)
    if channel_llr.shape != (CHANNEL_BITS,):
        raise ValueError(f"rate_dematch expects {CHANNEL_BITS} values, got {channel_llr.size}")
    return np.bincount(_selection(), weights=channel_llr, minlength=CODED_LEN)


def hard_to_llr(bits) -> np.ndarray:
    bits = np.asarray(bits)
    return np.where(bits.astype(bool), -HARD_LLR, HARD_LLR)


def encode_block(block: bytes) -> np.ndarray:
    """96-byte block -> 7200 channel bits."""
    if len(block) != BLOCK_BYTES:
        raise ValueError(f"block must be {BLOCK_BYTES} bytes, got {len(block)}")
    return rate_match(turbo_encode(bytes_to_bits(block)))


# -- decoding ------------------------------------------------------------------


def _split_streams(soft):
    d = soft.reshape(3, CODED_STREAM_LEN)
    sys = d[0, :K]
    t = d[:, K:]
    sys1 = np.concatenate([sys, [t[0, 0], t[2, 0], t[1, 1]]])
    par1 = np.concatenate([d[1, :K], [t[1, 0], t[0, 1], t[2, 1]]])
    sys2_tail = np.array([t[0, 2], t[2, 2], t[1, 3]])
    par2 = np.concatenate([d[2, :K], [t[1, 2], t[0, 3], t[2, 3]]])
    return sys1, par1, sys2_tail, par2


def turbo_decode_soft(soft, max_iterations: int = MAX_ITERATIONS):
    """Iterative decoding of dematched soft values.

    Returns ``(block, residual, iterations)``; ``residual`` is the CRC-24 over
    the final hard decisions (zero on success).
    """
    soft = np.asarray(soft, dtype=np.float64)
    next_state, parity, tail_input = trellis()
    perm = qpp_interleaver(K)
    sys1, par1, sys2_tail, par2 = _split_streams(soft)
    sys2 = np.ascontiguousarray(np.concatenate([sys1[:K][perm], sys2_tail]))
    sys1 = np.ascontiguousarray(sys1)
    par1 = np.ascontiguousarray(par1)
    par2 = np.ascontiguousarray(par2)
    ls = sys1[:K]

    apriori1 = np.zeros(K)
    block = b""
    residual = -1
    for it in range(1, max_iterations + 1):
        app1 = kernels.bcjr(sys1, par1, apriori1, next_state, parity, tail_input)
        ext1 = EXTRINSIC_SCALE * (app1 - apriori1 - ls)
        apriori2 = np.ascontiguousarray(ext1[perm])
        app2 = kernels.bcjr(sys2, par2, apriori2, next_state, parity, tail_input)
        ext2 = EXTRINSIC_SCALE * (app2 - apriori2 - ls[perm])
        apriori1 = np.empty(K)
        apriori1[perm] = ext2
        posterior = np.empty(K)
        posterior[perm] = app2
        block = bits_to_bytes(posterior < 0)
        residual = crc24_int(block)
        if residual == 0:
            return block, 0, it
    return block, residual, max_iterations


def turbo_decode(channel_bits, max_iterations: int = MAX_ITERATIONS) -> bytes:
    """7200 hard channel bits -> verified 96-byte block.

    Raises
    ------
    IntegrityError
        when no iteration produced a block whose CRC-24 residual is zero.
    """
    channel_bits = np.asarray(channel_bits)
    if channel_bits.shape != (CHANNEL_BITS,):
        raise ValueError(f"turbo_decode expects {CHANNEL_BITS} bits, got {channel_bits.size}")
    soft = rate_dematch(hard_to_llr(channel_bits))
    block, residual, iterations = turbo_decode_soft(soft, max_iterations)
    if residual != 0:
        raise IntegrityError(residual, iterations)
    return block
