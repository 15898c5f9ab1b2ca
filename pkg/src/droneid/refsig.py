"""Reference sequences shared by transmitter and receiver.

* Zadoff-Chu pilots for symbols 4 and 6 (roots 600 and 147), both as 600
  carrier values and as 1024-sample time-domain symbols.
* The 7200-bit gold scrambling sequence seeded with 0x12345678.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

FFT_SIZE = 1024
ZC_LENGTH = 601
N_CARRIERS = 600
ZC_ROOTS = (600, 147)

# Data carriers in the centre-shifted spectrum: [212, 813) without DC (512).
DATA_CARRIERS = np.setdiff1d(np.arange(212, 813), [FFT_SIZE // 2])
DATA_CARRIERS.setflags(write=False)

GOLD_LENGTH = 7200
GOLD_NC = 1600
GOLD_SEED = 0x12345678


@dataclass(frozen=True)
class ZcSequence:
    root: int
    values: np.ndarray


@lru_cache(maxsize=None)
def _zc_values(root: int) -> np.ndarray:
    n = np.arange(ZC_LENGTH, dtype=np.int64)
    # reduce the phase exactly before exp(): root*n*(n+1) reaches ~2e8, where a
    # float phase would carry ~1e-10 rad of rounding error
    m = (root * n * (n + 1)) % (2 * ZC_LENGTH)
    seq = np.exp(-1j * np.pi * m / ZC_LENGTH)
    seq = np.delete(seq, ZC_LENGTH // 2)
    seq.setflags(write=False)
    return seq


def zadoff_chu(root: int) -> ZcSequence:
    """600 unit-modulus ZC values: length-601 sequence with the middle sample removed."""
    return ZcSequence(root=int(root), values=_zc_values(int(root)))


def carrier_buffer(values) -> np.ndarray:
    """Place 600 values on the data carriers of a zeroed, centre-shifted 1024-bin buffer."""
    buf = np.zeros(FFT_SIZE, dtype=np.complex128)
    buf[DATA_CARRIERS] = values
    return buf


@lru_cache(maxsize=None)
def _zc_time(root: int) -> np.ndarray:
    from .ofdm import dft_1024, fftshift

    out = dft_1024(fftshift(carrier_buffer(_zc_values(root))), inverse=True)
    out.setflags(write=False)
    return out


def zc_time_domain(root: int) -> np.ndarray:
    return _zc_time(int(root))


@lru_cache(maxsize=None)
def _registers():
    total = GOLD_NC + GOLD_LENGTH
    x1 = np.zeros(total + 31, dtype=np.uint8)
    x2 = np.zeros(total + 31, dtype=np.uint8)
    x1[0] = 1
    x2[:31] = [(GOLD_SEED >> i) & 1 for i in range(31)]
    # each recurrence reaches back at most 31 taps, so 28 new bits can be
    # produced per vector step
    step = 28
    for i in range(0, total, step):
        j = min(i + step, total)
        x1[i + 31:j + 31] = x1[i + 3:j + 3] ^ x1[i:j]
        x2[i + 31:j + 31] = x2[i + 3:j + 3] ^ x2[i + 2:j + 2] ^ x2[i + 1:j + 1] ^ x2[i:j]
    x1.setflags(write=False)
    x2.setflags(write=False)
    return x1, x2


def gold_registers():
    """Full x1 and x2 m-sequences (``n_c + 7200 + 31`` bits each)."""
    return _registers()


@lru_cache(maxsize=None)
def _gold() -> np.ndarray:
    x1, x2 = _registers()
    seq = x1[GOLD_NC:GOLD_NC + GOLD_LENGTH] ^ x2[GOLD_NC:GOLD_NC + GOLD_LENGTH]
    seq.setflags(write=False)
    return seq


def gold_sequence() -> np.ndarray:
    """The 7200 scrambling bits (uint8, values 0/1)."""
    return _gold()
