"""Transmit chain: 96-byte block -> IQ burst, plus channel impairments.

This is the inverse of the receive pipeline and serves as its loopback oracle.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import fec
from .iq import SAMPLE_RATE, IqBuffer
from .mapping import qpsk_mod, scramble
from .ofdm import BURST_LENGTH, PILOT_ROOTS, modulate_grid
from .refsig import FFT_SIZE, N_CARRIERS, zadoff_chu


@dataclass(frozen=True)
class Impairments:
    """Channel model applied on top of the ideal burst.

    ``snr_db`` is the per-carrier SNR: signal power over the noise power that
    falls inside the 600 occupied carriers.  ``None`` means noiseless.  The CFO
    rotation runs over the whole padded capture, so the carrier phase at the
    burst start depends on ``pad_samples``.
    """

    cfo_hz: float = 0.0
    snr_db: Optional[float] = None
    amplitude: float = 1.0
    pad_samples: int = 0
    phase_rad: float = 0.0

    def __post_init__(self):
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")
        if self.pad_samples < 0:
            raise ValueError("pad_samples must be non-negative")


def ideal_burst(block: bytes, fix_crc: bool = False) -> np.ndarray:
    """Noiseless, unit-power 9880-sample burst for one 96-byte block."""
    block = bytes(block)
    if len(block) != fec.BLOCK_BYTES:
        raise ValueError(f"frame must be {fec.BLOCK_BYTES} bytes, got {len(block)}")
    if fix_crc:
        block = fec.attach_crc(block[:-3])
    elif not fec.check_crc(block):
        raise ValueError("frame CRC-24 does not verify (pass fix_crc=True to recompute)")
    plane = scramble(fec.encode_block(block))
    carriers = qpsk_mod(plane)
    for row, root in PILOT_ROOTS.items():
        carriers[row] = zadoff_chu(root).values
    return modulate_grid(carriers)


def _noise_sigma(snr_db: float, amplitude: float) -> float:
    # unit-power burst occupies 600 of 1024 bins; SNR is measured in-band
    signal_power = amplitude ** 2
    total_noise = signal_power / 10 ** (snr_db / 10) * FFT_SIZE / N_CARRIERS
    return float(np.sqrt(total_noise / 2))


def apply_impairments(x: np.ndarray, imp: Impairments, rng=None, sample_rate: float = SAMPLE_RATE):
    rng = np.random.default_rng(rng)
    y = np.asarray(x, dtype=np.complex128) * imp.amplitude
    if imp.cfo_hz or imp.phase_rad:
        k = np.arange(y.size)
        y = y * np.exp(1j * (2 * np.pi * imp.cfo_hz * k / sample_rate + imp.phase_rad))
    if imp.snr_db is not None:
        sigma = _noise_sigma(imp.snr_db, imp.amplitude)
        y = y + sigma * (rng.standard_normal(y.size) + 1j * rng.standard_normal(y.size))
    return y


def build_burst(block: bytes, imp: Impairments = Impairments(), rng=None,
                fix_crc: bool = False) -> IqBuffer:
    """Single burst surrounded by ``pad_samples`` on each side."""
    x = ideal_burst(block, fix_crc=fix_crc)
    padded = np.zeros(BURST_LENGTH + 2 * imp.pad_samples, dtype=np.complex128)
    padded[imp.pad_samples:imp.pad_samples + BURST_LENGTH] = x
    return IqBuffer(apply_impairments(padded, imp, rng))


def build_capture(bursts: Sequence[Tuple[bytes, int]], imp: Impairments = Impairments(),
                  length: Optional[int] = None, rng=None, fix_crc: bool = False) -> IqBuffer:
    """Place bursts at the given start offsets over a common noise floor.

    ``length`` defaults to the end of the last burst plus ``pad_samples``.
    """
    placed = sorted(((int(off), bytes(blk)) for blk, off in bursts), key=lambda p: p[0])
    for (a, _), (b, _) in zip(placed, placed[1:]):
        if b - a < BURST_LENGTH:
            raise ValueError(f"bursts at {a} and {b} overlap (need >= {BURST_LENGTH} apart)")
    if placed and placed[0][0] < 0:
        raise ValueError("burst offsets must be non-negative")
    end = placed[-1][0] + BURST_LENGTH if placed else 0
    if length is None:
        length = end + imp.pad_samples
    if length < end:
        raise ValueError(f"capture length {length} too short for bursts ending at {end}")
    x = np.zeros(length, dtype=np.complex128)
    for off, blk in placed:
        x[off:off + BURST_LENGTH] = ideal_burst(blk, fix_crc=fix_crc)
    return IqBuffer(apply_impairments(x, imp, rng))
