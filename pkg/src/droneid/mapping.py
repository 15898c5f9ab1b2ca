"""QPSK hard decisions and gold-sequence (de)scrambling.

Constellation (Gray coded, bit pair b0 b1)::

    00 -> ( 1,  1)/sqrt2     01 -> ( 1, -1)/sqrt2
    10 -> (-1,  1)/sqrt2     11 -> (-1, -1)/sqrt2
"""

import numpy as np

from .ofdm import N_SYMBOLS
from .refsig import GOLD_LENGTH, N_CARRIERS, gold_sequence

BITS_PER_SYMBOL = 2 * N_CARRIERS  # 1200
DATA_ROWS = (1, 2, 4, 6, 7, 8)


def qpsk_demod(carriers) -> np.ndarray:
    """Quadrant decision.

    A carrier lying exactly on an axis belongs to no quadrant and decides as
    00, matching the fall-through branch of the reference receiver.
    """
    carriers = np.asarray(carriers)
    on_axis = (carriers.real == 0) | (carriers.imag == 0)
    bits = np.empty(carriers.shape[:-1] + (2 * carriers.shape[-1],), dtype=np.uint8)
    bits[..., 0::2] = (carriers.real < 0) & ~on_axis
    bits[..., 1::2] = (carriers.imag < 0) & ~on_axis
    return bits


def qpsk_mod(bits) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.shape[-1] % 2:
        raise ValueError("qpsk_mod needs an even number of bits")
    b = bits.astype(np.float64)
    return ((1 - 2 * b[..., 0::2]) + 1j * (1 - 2 * b[..., 1::2])) / np.sqrt(2)


def descramble(demod_bits) -> np.ndarray:
    """(9, 1200) demodulated plane -> 7200 payload bits (rows 1,2,4,6,7,8 XOR gold)."""
    demod_bits = np.asarray(demod_bits)
    if demod_bits.shape != (N_SYMBOLS, BITS_PER_SYMBOL):
        raise ValueError(f"expected shape {(N_SYMBOLS, BITS_PER_SYMBOL)}, got {demod_bits.shape}")
    return demod_bits[list(DATA_ROWS)].reshape(-1).astype(np.uint8) ^ gold_sequence()


def scramble(payload_bits) -> np.ndarray:
    """7200 payload bits -> (9, 1200) plane.

    Pilot rows 3 and 5 are left zero (the synthesiser overwrites them with ZC
    carriers); row 0 repeats row 1 because the receiver ignores it.
    """
    payload_bits = np.asarray(payload_bits, dtype=np.uint8)
    if payload_bits.shape != (GOLD_LENGTH,):
        raise ValueError(f"expected {GOLD_LENGTH} bits, got {payload_bits.size}")
    plane = np.zeros((N_SYMBOLS, BITS_PER_SYMBOL), dtype=np.uint8)
    plane[list(DATA_ROWS)] = (payload_bits ^ gold_sequence()).reshape(len(DATA_ROWS), BITS_PER_SYMBOL)
    plane[0] = plane[1]
    return plane
