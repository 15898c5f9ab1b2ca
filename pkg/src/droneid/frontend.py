"""Burst conditioning: 51-tap low-pass filter and coarse CFO removal.

Also hosts the HackRF crystal PPM helper used to retune captures.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import signal

from .errors import InsufficientDataError
from .iq import SAMPLE_RATE
from .refsig import FFT_SIZE

FILTER_TAPS = 51
FILTER_BANDWIDTH = 10e6

# symbol 1's cyclic prefix and the tail of its body it was copied from
CP_WINDOW = (1104, 1176)
COPY_WINDOW = (CP_WINDOW[0] + FFT_SIZE, CP_WINDOW[1] + FFT_SIZE)


@dataclass(frozen=True)
class FirFilter:
    taps: np.ndarray

    def response_db(self, freq_hz, sample_rate: float = SAMPLE_RATE) -> np.ndarray:
        """Magnitude response relative to DC, in dB."""
        _, h = signal.freqz(self.taps, worN=np.atleast_1d(freq_hz), fs=sample_rate)
        return 20 * np.log10(np.abs(h) / abs(np.sum(self.taps)))


@dataclass(frozen=True)
class CfoEstimate:
    radians_per_sample: float
    degenerate: bool = False

    @property
    def hz(self) -> float:
        return self.radians_per_sample * SAMPLE_RATE / (2 * np.pi)


@lru_cache(maxsize=None)
def _lowpass(n: int, bw: float, fs: float) -> FirFilter:
    taps = signal.firwin(n, bw / fs, window="hamming")
    # firwin is symmetric only to rounding; force exact linear phase
    taps = 0.5 * (taps + taps[::-1])
    taps.setflags(write=False)
    return FirFilter(taps)


def design_lowpass(n: int = FILTER_TAPS, bandwidth: float = FILTER_BANDWIDTH,
                   sample_rate: float = SAMPLE_RATE) -> FirFilter:
    """Hamming windowed-sinc low-pass, cutoff ``bandwidth / sample_rate`` of Nyquist (+-5 MHz)."""
    return _lowpass(int(n), float(bandwidth), float(sample_rate))


def apply_filter(f: FirFilter, burst) -> np.ndarray:
    """Delay-compensated convolution: output has the input's length and
    alignment, samples beyond either end count as zero."""
    burst = np.asarray(burst)
    if burst.shape[0] < f.taps.size:
        raise InsufficientDataError(f"need at least {f.taps.size} samples to filter")
    return np.convolve(burst, f.taps, mode="same")


def estimate_cfo(burst) -> CfoEstimate:
    burst = np.asarray(burst)
    if burst.shape[0] < COPY_WINDOW[1]:
        raise InsufficientDataError(f"need at least {COPY_WINDOW[1]} samples for CFO estimation")
    cp = burst[CP_WINDOW[0]:CP_WINDOW[1]]
    copy = burst[COPY_WINDOW[0]:COPY_WINDOW[1]]
    acc = np.sum(np.conj(cp) * copy)
    if acc == 0:
        return CfoEstimate(0.0, degenerate=True)
    return CfoEstimate(float(np.angle(acc)) / FFT_SIZE)


def correct_cfo(burst, est: CfoEstimate) -> np.ndarray:
    burst = np.asarray(burst)
    if est.radians_per_sample == 0:
        return burst.copy()
    k = np.arange(1, burst.shape[0] + 1)
    return burst * np.exp(-1j * est.radians_per_sample * k)


def ppm_from_correction(crystal_correction: float) -> float:
    """Crystal error in ppm for ``hackrf_transfer -C`` from a CellSearch correction factor."""
    if not 0.9 < crystal_correction < 1.1:
        raise ValueError(f"crystal correction {crystal_correction} outside (0.9, 1.1)")
    return 1e6 * (1 - crystal_correction)
