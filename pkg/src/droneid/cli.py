"""``droneid`` command line.

Settings resolve as: command-line flag, then a ``DRONEID_*`` environment
variable, then the built-in default.  Recognised variables::

    DRONEID_FORMAT       capture format for detect (cs8 | fc32)
    DRONEID_THRESHOLD    detection threshold
    DRONEID_CENTER_FREQ  capture centre frequency, Hz
    DRONEID_SAMPLE_RATE  capture sample rate, Hz (resampled to 15.36 Msps)
    DRONEID_LOG          JSONL file detections are appended to
    DRONEID_LOG_LEVEL    Python logging level for diagnostics on stderr

Exit status: 0 success / something found, 1 nothing found, 2 bad input.
"""

import argparse
import json
import logging
import os
import re
import sys
import threading
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Optional

import numpy as np

from . import __version__, fec, frames, iq, tables, wifi
from .detect import DEFAULT_THRESHOLD
from .errors import DroneIdError
from .frontend import ppm_from_correction
from .receiver import receive
from .synth import Impairments, build_capture

log = logging.getLogger("droneid")

EXIT_OK, EXIT_NONE, EXIT_INPUT = 0, 1, 2

# spacing between consecutive synthesized bursts when no offsets are given
SYNTH_GAP = 20_000
CS8_AMPLITUDE = 32.0


class InputError(Exception):
    """Bad user input; reported on stderr with exit status 2."""


def _env(name: str, cast=str, default=None):
    raw = os.environ.get("DRONEID_" + name)
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError:
        raise InputError(f"DRONEID_{name}={raw!r} is not a valid {cast.__name__}") from None


def _setting(flag, name: str, cast=str, default=None):
    return flag if flag is not None else _env(name, cast, default)


class JsonlWriter:
    """Append-only JSONL sink.  One lock guards each line so records written
    from several threads never interleave."""

    def __init__(self, path=None, stream=None):
        self._lock = threading.Lock()
        self._file = open(path, "a", encoding="utf-8") if path else None
        self._stream = stream

    def write(self, record: dict) -> None:
        line = json.dumps(record, ensure_ascii=False) + "\n"
        with self._lock:
            if self._stream is not None:
                self._stream.write(line)
                self._stream.flush()
            if self._file is not None:
                self._file.write(line)
                self._file.flush()

    def close(self) -> None:
        if self._file is not None:
            self._file.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _resample(buf: iq.IqBuffer, rate: float) -> np.ndarray:
    if abs(rate - iq.SAMPLE_RATE) < 1e-3:
        return buf.samples
    from scipy.signal import resample_poly

    ratio = Fraction(iq.SAMPLE_RATE / rate).limit_denominator(1000)
    log.info("resampling %.0f Hz -> %.0f Hz (%d/%d)", rate, iq.SAMPLE_RATE, ratio.numerator, ratio.denominator)
    return resample_poly(buf.samples, ratio.numerator, ratio.denominator)


def detect_file(path, fmt: str, threshold: float = DEFAULT_THRESHOLD,
                sample_rate: float = iq.SAMPLE_RATE, center_freq=None) -> List[frames.DetectionRecord]:
    """Run the full OcuSync receive chain on a capture file."""
    try:
        buf = iq.load(path, fmt, sample_rate=sample_rate, center_freq=center_freq)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except (DroneIdError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None
    records = []
    for rx in receive(_resample(buf, sample_rate), threshold):
        if not rx.ok:
            continue
        try:
            frame = frames.parse_frame(rx.block)
        except DroneIdError as exc:
            log.warning("burst at %d: %s", rx.burst.start_index, exc)
            continue
        rec = frames.to_detection_record(frame, frames.SOURCE_OCUSYNC)
        if rec.implausible:
            log.warning("burst at %d: implausible %s", rx.burst.start_index, ", ".join(rec.implausible))
        log.info("burst at %d, score %.3f, cfo %.0f Hz", rx.burst.start_index, rx.burst.score, rx.cfo_hz)
        records.append(rec)
    return records


def cmd_detect(args) -> int:
    fmt = _setting(args.format, "FORMAT")
    if fmt is None:
        try:
            fmt = iq.format_from_path(args.input)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    threshold = _setting(args.threshold, "THRESHOLD", float, DEFAULT_THRESHOLD)
    if not 0 < threshold < 1:
        raise InputError(f"threshold must be in (0, 1), got {threshold}")
    rate = _setting(args.sample_rate, "SAMPLE_RATE", float, iq.SAMPLE_RATE)
    center = _setting(args.center_freq, "CENTER_FREQ", float)
    records = detect_file(args.input, fmt, threshold, rate, center)
    with JsonlWriter(_setting(args.log, "LOG"), sys.stdout) as out:
        for rec in records:
            out.write(rec.to_dict())
    return EXIT_OK if records else EXIT_NONE


def _load_frames(path) -> list:
    """(block, offset or None) pairs from a JSON record, list of records, or
    ``{"frames": [...]}``; each record may carry an ``offset``."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    if isinstance(doc, dict) and "frames" in doc:
        doc = doc["frames"]
    if isinstance(doc, dict):
        doc = [doc]
    if not isinstance(doc, list) or not doc:
        raise InputError(f"{path}: expected a frame object or a non-empty list of them")
    out = []
    for i, obj in enumerate(doc):
        if not isinstance(obj, dict):
            raise InputError(f"{path}: frame {i} is not an object")
        try:
            if "hex" in obj:
                block = _hex_block(str(obj["hex"]))
            else:
                block = frames.serialize_frame(frames.frame_from_record(obj))
        except (ValueError, TypeError, DroneIdError) as exc:
            raise InputError(f"{path}: frame {i}: {exc}") from None
        offset = obj.get("offset")
        out.append((block, None if offset is None else int(offset)))
    return out


def _hex_block(text: str) -> bytes:
    """93 payload bytes or a 96-byte block; the CRC is always recomputed."""
    data = parse_hex(text)
    if len(data) not in (fec.BLOCK_BYTES - 3, fec.BLOCK_BYTES):
        raise ValueError(f"hex frame must be 93 or 96 bytes, got {len(data)}")
    return fec.attach_crc(data[:fec.BLOCK_BYTES - 3])


def cmd_synth(args) -> int:
    items = _load_frames(args.frame)
    try:
        fmt = args.format or iq.format_from_path(args.out)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    amplitude = args.amplitude if args.amplitude is not None else (CS8_AMPLITUDE if fmt == "cs8" else 1.0)
    try:
        imp = Impairments(cfo_hz=args.cfo, snr_db=args.snr, amplitude=amplitude, pad_samples=args.pad)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    placed, cursor = [], args.pad
    for block, offset in items:
        start = cursor if offset is None else offset
        placed.append((block, start))
        cursor = start + SYNTH_GAP
    rng = np.random.default_rng(args.seed)
    try:
        capture = build_capture(placed, imp, rng=rng)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if fmt == "cs8" and np.max(np.abs(np.r_[capture.samples.real, capture.samples.imag])) > 127.5:
        log.warning("cs8 output clips; lower --amplitude")
    iq.save(args.out, capture, fmt)
    print(json.dumps({"out": str(args.out), "format": fmt, "samples": len(capture),
                      "bursts": [off for _, off in placed]}))
    return EXIT_OK


_HEXDUMP_OFFSET = re.compile(r"^\s*(?:0x)?[0-9a-fA-F]{4,8}:?\s+(?=[0-9a-fA-F]{2}(\s|$))")


def parse_hex(text: str) -> bytes:
    """Hex bytes from plain hex or hexdump-style lines ("0020 62 02 ...")."""
    chunks = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        line = _HEXDUMP_OFFSET.sub("", line)
        chunks.append(re.sub(r"[\s:,]", "", line))
    joined = "".join(chunks)
    if joined.lower().startswith("0x"):
        joined = joined[2:]
    try:
        return bytes.fromhex(joined)
    except ValueError:
        raise ValueError("input is not valid hex") from None


def cmd_parse(args) -> int:
    try:
        text = sys.stdin.read() if args.hex == "-" else Path(args.hex).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {args.hex}: {exc.strerror or exc}") from None
    try:
        data = parse_hex(text)
        if len(data) == fec.BLOCK_BYTES and not fec.check_crc(data):
            log.warning("CRC-24 does not verify; parsing anyway")
        frame = frames.parse_frame(data)
    except (ValueError, DroneIdError) as exc:
        raise InputError(str(exc)) from None
    rec = frames.to_detection_record(frame, args.source)
    print(json.dumps(rec.to_dict(), ensure_ascii=False, indent=None if args.compact else 4))
    return EXIT_OK


def cmd_lookup(args) -> int:
    try:
        hits = tables.model_candidates(args.serial) if len(args.serial) >= 3 else None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if hits is None:
        raise InputError("serial number must have at least 3 characters")
    if not hits:
        print(json.dumps({"serial": args.serial, "model": None}))
        return EXIT_NONE
    out = {"serial": args.serial, "prefix": args.serial[:3].upper(), "model": hits[0].model,
           "aeroscope_id": hits[0].aeroscope_id}
    if len(hits) > 1:
        out["candidates"] = [h.model for h in hits]
    print(json.dumps(out))
    return EXIT_OK


def cmd_hopplan(args) -> int:
    try:
        plan = tables.hop_plan(args.band)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    print(json.dumps({"band": args.band, "center_frequencies": list(plan)}))
    return EXIT_OK


def cmd_ppm(args) -> int:
    try:
        print(json.dumps({"correction": args.correction, "ppm": ppm_from_correction(args.correction)}))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return EXIT_OK


def wifi_records(path) -> Iterable[frames.DetectionRecord]:
    for beacon, payload in wifi.scan_pcap(path):
        if payload is None:
            continue
        try:
            frame = frames.parse_frame(payload)
        except DroneIdError as exc:
            log.warning("beacon from %s: %s", beacon.sender.hex(":"), exc)
            continue
        yield frames.to_detection_record(frame, frames.SOURCE_WIFI)


def cmd_wifi(args) -> int:
    found = 0
    try:
        with JsonlWriter(_setting(args.log, "LOG"), sys.stdout) as out:
            for rec in wifi_records(args.pcap):
                out.write(rec.to_dict())
                found += 1
    except OSError as exc:
        raise InputError(f"cannot read {args.pcap}: {exc.strerror or exc}") from None
    except DroneIdError as exc:
        raise InputError(f"{args.pcap}: {exc}") from None
    return EXIT_OK if found else EXIT_NONE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="droneid", description="DJI drone-ID decoder")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more diagnostics on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="decode OcuSync drone-ID bursts from an IQ capture")
    d.add_argument("--input", required=True, help="capture file")
    d.add_argument("--format", choices=iq.FORMATS, help="sample format (default: from file suffix)")
    d.add_argument("--center-freq", type=float, help="capture centre frequency in Hz (metadata)")
    d.add_argument("--sample-rate", type=float, help="capture sample rate in Hz (default 15.36e6)")
    d.add_argument("--threshold", type=float, help=f"correlation threshold (default {DEFAULT_THRESHOLD})")
    d.add_argument("--log", help="append records to this JSONL file")
    d.set_defaults(func=cmd_detect)

    s = sub.add_parser("synth", help="write a capture containing synthesized bursts")
    s.add_argument("--frame", required=True, help="frame JSON (record-shaped object or list)")
    s.add_argument("--out", required=True, help="output .cs8 or .fc32 file")
    s.add_argument("--format", choices=iq.FORMATS)
    s.add_argument("--cfo", type=float, default=0.0, help="carrier offset in Hz")
    s.add_argument("--snr", type=float, default=None, help="in-band SNR in dB (default noiseless)")
    s.add_argument("--amplitude", type=float, default=None,
                   help=f"RMS amplitude (default {CS8_AMPLITUDE:g} for cs8, 1 for fc32)")
    s.add_argument("--pad", type=int, default=10_000, help="leading/trailing samples")
    s.add_argument("--seed", type=int, default=None, help="noise RNG seed")
    s.set_defaults(func=cmd_synth)

    h = sub.add_parser("parse", help="decode a hex frame")
    h.add_argument("--hex", required=True, help="file holding hex text, or - for stdin")
    h.add_argument("--source", default=frames.SOURCE_OCUSYNC, help="source_type to report")
    h.add_argument("--compact", action="store_true", help="single-line JSON")
    h.set_defaults(func=cmd_parse)

    k = sub.add_parser("lookup", help="model for a serial number")
    k.add_argument("serial")
    k.set_defaults(func=cmd_lookup)

    b = sub.add_parser("hopplan", help="centre frequencies for a band")
    b.add_argument("band", help="2.4 or 5.8")
    b.set_defaults(func=cmd_hopplan)

    c = sub.add_parser("ppm", help="crystal ppm from a CellSearch correction factor")
    c.add_argument("correction", type=float)
    c.set_defaults(func=cmd_ppm)

    w = sub.add_parser("wifi", help="decode Enhanced Wi-Fi drone IDs from a pcap file")
    w.add_argument("--pcap", required=True)
    w.add_argument("--log", help="append records to this JSONL file")
    w.set_defaults(func=cmd_wifi)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    level = _env("LOG_LEVEL", str, None) if not args.verbose else None
    logging.basicConfig(
        level=level.upper() if level else (logging.INFO if args.verbose else logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr,
    )
    try:
        return args.func(args)
    except InputError as exc:
        print(f"droneid {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
