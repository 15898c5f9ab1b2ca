"""Capture-file formats.

``.cs8``  interleaved signed 8-bit I, Q (HackRF ``hackrf_transfer`` output)
``.fc32`` interleaved little-endian float32 I, Q

cs8 samples are kept at their raw integer amplitude; nothing is rescaled.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import MalformedFileError

SAMPLE_RATE = 15.36e6
FORMATS = ("cs8", "fc32")


@dataclass
class IqBuffer:
    samples: np.ndarray
    sample_rate: float = SAMPLE_RATE
    center_freq: Optional[float] = None
    source_format: Optional[str] = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        if not np.iscomplexobj(self.samples):
            self.samples = self.samples.astype(np.complex128)
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValueError("samples contain NaN or Inf")

    def __len__(self):
        return self.samples.size


def read_cs8(data: bytes, **meta) -> IqBuffer:
    if len(data) % 2:
        raise MalformedFileError(f"cs8 data has odd byte count {len(data)}")
    raw = np.frombuffer(data, dtype=np.int8).astype(np.float32)
    samples = raw[0::2] + 1j * raw[1::2]
    return IqBuffer(samples.astype(np.complex64), source_format="cs8", **meta)


def write_cs8(iq: IqBuffer) -> bytes:
    """Round to nearest integer and saturate to the int8 range."""
    x = np.asarray(iq.samples if isinstance(iq, IqBuffer) else iq)
    out = np.empty(2 * x.size, dtype=np.int8)
    out[0::2] = np.clip(np.rint(x.real), -128, 127)
    out[1::2] = np.clip(np.rint(x.imag), -128, 127)
    return out.tobytes()


def read_fc32(data: bytes, **meta) -> IqBuffer:
    if len(data) % 8:
        raise MalformedFileError(f"fc32 data length {len(data)} is not a multiple of 8")
    samples = np.frombuffer(data, dtype="<f4").view("<c8").astype(np.complex64)
    if not np.all(np.isfinite(samples)):
        raise MalformedFileError("fc32 data contains NaN or Inf samples")
    return IqBuffer(samples, source_format="fc32", **meta)


def write_fc32(iq: IqBuffer) -> bytes:
    x = np.asarray(iq.samples if isinstance(iq, IqBuffer) else iq)
    return x.astype("<c8").tobytes()


_READERS = {"cs8": read_cs8, "fc32": read_fc32}
_WRITERS = {"cs8": write_cs8, "fc32": write_fc32}


def format_from_path(path) -> str:
    suffix = Path(path).suffix.lstrip(".").lower()
    if suffix not in FORMATS:
        raise ValueError(f"cannot infer IQ format from {path!r}; use one of {FORMATS}")
    return suffix


def load(path, fmt: Optional[str] = None, **meta) -> IqBuffer:
    fmt = fmt or format_from_path(path)
    if fmt not in _READERS:
        raise ValueError(f"unknown IQ format {fmt!r}")
    return _READERS[fmt](Path(path).read_bytes(), **meta)


def save(path, iq: IqBuffer, fmt: Optional[str] = None) -> None:
    fmt = fmt or format_from_path(path)
    if fmt not in _WRITERS:
        raise ValueError(f"unknown IQ format {fmt!r}")
    Path(path).write_bytes(_WRITERS[fmt](iq))
