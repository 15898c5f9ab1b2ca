"""OFDM layer: 1024-point transform contract, symbol extraction, pilot-based
channel estimation and equalisation.

Burst layout (9880 samples)::

    CP  80 | body 1024      symbol 0 (discardable)
    CP  72 | body 1024      symbols 1..7; 3 and 5 carry the ZC pilots
    ...
    CP  80 | body 1024      symbol 8

Spectra are stored centre-shifted, so the 600 data carriers sit at bins
[212, 813) minus DC (512).
"""

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError
from .refsig import DATA_CARRIERS, FFT_SIZE, N_CARRIERS, carrier_buffer, zadoff_chu

CP_LENGTHS = (80, 72, 72, 72, 72, 72, 72, 72, 80)
N_SYMBOLS = len(CP_LENGTHS)
BURST_LENGTH = sum(CP_LENGTHS) + N_SYMBOLS * FFT_SIZE  # 9880
PILOT_ROWS = (3, 5)
PILOT_ROOTS = {3: 600, 5: 147}
ANCHOR_ROW = 4

# sample index where each symbol body starts
SYMBOL_STARTS = tuple(int(x) for x in np.cumsum(CP_LENGTHS) + FFT_SIZE * np.arange(N_SYMBOLS))


def dft_1024(x, inverse: bool = False) -> np.ndarray:
    """Forward transform is the plain sum; the inverse divides by 1024."""
    x = np.asarray(x)
    if x.shape[-1] != FFT_SIZE:
        raise ValueError(f"transform length must be {FFT_SIZE}, got {x.shape[-1]}")
    return np.fft.ifft(x, axis=-1) if inverse else np.fft.fft(x, axis=-1)


def fftshift(x) -> np.ndarray:
    """Swap the two halves (same in both directions for an even length)."""
    return np.fft.fftshift(x, axes=-1)


@dataclass
class SymbolGrid:
    time_domain: np.ndarray  # (9, 1024)
    freq_domain: np.ndarray  # (9, 1024), centre-shifted


@dataclass
class ChannelEstimate:
    """Per-carrier equaliser weights referenced to symbol ``ANCHOR_ROW`` and the
    per-symbol phase correction ("walking phase") between the pilots.

    ``quality`` is the fraction of carriers that had a usable (non-zero) pilot.
    """

    est: np.ndarray
    phase_offset: float
    quality: float = 1.0


def extract_symbols(burst) -> SymbolGrid:
    burst = np.asarray(burst)
    if burst.shape[0] < BURST_LENGTH:
        raise InsufficientDataError(f"burst has {burst.shape[0]} samples, need {BURST_LENGTH}")
    idx = np.asarray(SYMBOL_STARTS)[:, None] + np.arange(FFT_SIZE)[None, :]
    time_domain = burst[idx].astype(np.complex128)
    freq_domain = fftshift(dft_1024(time_domain))
    return SymbolGrid(time_domain=time_domain, freq_domain=freq_domain)


def pilot_spectrum(root: int) -> np.ndarray:
    """Centre-shifted spectrum of the ZC pilot symbol (the carrier buffer itself)."""
    return carrier_buffer(zadoff_chu(root).values)


def _ratio(reference, received):
    out = np.zeros_like(reference)
    ok = received != 0
    out[ok] = reference[ok] / received[ok]
    return out, ok


def estimate_channel(grid: SymbolGrid) -> ChannelEstimate:
    """Estimate the equaliser from the two ZC pilot symbols.

    ``channel1 = ref4 / rx[3]`` and ``channel2 = ref6 / rx[5]`` on the data
    carriers.  The phase rotation between the two pilots, halved, is the
    per-symbol correction; both pilots are then rotated to the anchor symbol
    between them and averaged.  Carriers whose received pilot is exactly zero
    get weight 0.
    """
    rx = grid.freq_domain[:, DATA_CARRIERS]
    ch1, ok1 = _ratio(pilot_spectrum(PILOT_ROOTS[3])[DATA_CARRIERS], rx[3])
    ch2, ok2 = _ratio(pilot_spectrum(PILOT_ROOTS[5])[DATA_CARRIERS], rx[5])
    # wrap-safe average of angle(ch2) - angle(ch1)
    phase_offset = float(np.angle(np.sum(ch2 * np.conj(ch1)))) / 2.0
    w = np.exp(1j * phase_offset)
    both = ok1 & ok2
    est = np.where(both, 0.5 * (ch1 * w + ch2 / w), np.where(ok1, ch1 * w, ch2 / w))
    quality = float(np.mean(ok1 | ok2))
    return ChannelEstimate(est=est, phase_offset=phase_offset, quality=quality)


def equalize(grid: SymbolGrid, ch: ChannelEstimate, symbol_index: int) -> np.ndarray:
    if not 0 <= symbol_index < N_SYMBOLS:
        raise ValueError(f"symbol_index must be in 0..{N_SYMBOLS - 1}")
    carriers = grid.freq_domain[symbol_index, DATA_CARRIERS] * ch.est
    return carriers * np.exp(1j * ch.phase_offset * (symbol_index - ANCHOR_ROW))


def equalize_all(grid: SymbolGrid, ch: ChannelEstimate) -> np.ndarray:
    rows = np.arange(N_SYMBOLS)
    rot = np.exp(1j * ch.phase_offset * (rows - ANCHOR_ROW))
    return grid.freq_domain[:, DATA_CARRIERS] * ch.est[None, :] * rot[:, None]


def modulate_grid(carriers) -> np.ndarray:
    """(9, 600) carrier values -> 9880 time samples with cyclic prefixes.

    Scaled so that a grid of unit-modulus carriers has unit mean power.
    """
    carriers = np.asarray(carriers)
    if carriers.shape != (N_SYMBOLS, N_CARRIERS):
        raise ValueError(f"carrier grid must be {(N_SYMBOLS, N_CARRIERS)}, got {carriers.shape}")
    buf = np.zeros((N_SYMBOLS, FFT_SIZE), dtype=np.complex128)
    buf[:, DATA_CARRIERS] = carriers
    bodies = dft_1024(fftshift(buf), inverse=True) * (FFT_SIZE / np.sqrt(N_CARRIERS))
    out = np.empty(BURST_LENGTH, dtype=np.complex128)
    pos = 0
    for cp, body in zip(CP_LENGTHS, bodies):
        out[pos:pos + cp] = body[-cp:]
        out[pos + cp:pos + cp + FFT_SIZE] = body
        pos += cp + FFT_SIZE
    return out
