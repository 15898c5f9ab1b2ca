"""Receive pipeline: capture -> bursts -> conditioned symbols -> bits -> 96-byte blocks."""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from . import fec
from .detect import DEFAULT_THRESHOLD, Burst, detect_bursts
from .errors import IntegrityError
from .frontend import apply_filter, correct_cfo, design_lowpass, estimate_cfo
from .iq import IqBuffer
from .mapping import descramble, qpsk_demod
from .ofdm import BURST_LENGTH, equalize_all, estimate_channel, extract_symbols

log = logging.getLogger(__name__)

# extra samples filtered on each side so the FIR edge transient stays outside the burst
FILTER_MARGIN = 64


@dataclass
class Reception:
    burst: Burst
    block: Optional[bytes]
    cfo_hz: float
    residual: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.block is not None


def condition(capture: np.ndarray, start: int) -> np.ndarray:
    """Filter a margin-padded slice around ``start`` and return the 9880-sample burst."""
    lo = start - FILTER_MARGIN
    hi = start + BURST_LENGTH + FILTER_MARGIN
    seg = np.zeros(hi - lo, dtype=np.complex128)
    src_lo, src_hi = max(lo, 0), min(hi, capture.size)
    seg[src_lo - lo:src_hi - lo] = capture[src_lo:src_hi]
    filtered = apply_filter(design_lowpass(), seg)
    return filtered[FILTER_MARGIN:FILTER_MARGIN + BURST_LENGTH]


def demodulate(burst: np.ndarray):
    """Conditioned burst -> (7200 descrambled bits, CFO estimate)."""
    cfo = estimate_cfo(burst)
    grid = extract_symbols(correct_cfo(burst, cfo))
    carriers = equalize_all(grid, estimate_channel(grid))
    return descramble(qpsk_demod(carriers)), cfo


def decode_at(capture, start: int) -> bytes:
    """Decode the burst starting at ``start``; raises IntegrityError on CRC failure."""
    x = capture.samples if isinstance(capture, IqBuffer) else np.asarray(capture)
    bits, _ = demodulate(condition(x, start))
    return fec.turbo_decode(bits)


def receive(iq, threshold: float = DEFAULT_THRESHOLD) -> List[Reception]:
    x = iq.samples if isinstance(iq, IqBuffer) else np.asarray(iq)
    out = []
    for burst in detect_bursts(x, threshold):
        bits, cfo = demodulate(condition(x, burst.start_index))
        try:
            block = fec.turbo_decode(bits)
            out.append(Reception(burst, block, cfo.hz))
        except IntegrityError as exc:
            log.info("burst at %d failed CRC (residual 0x%06x)", burst.start_index, exc.residual)
            out.append(Reception(burst, None, cfo.hz, residual=exc.residual))
    return out
