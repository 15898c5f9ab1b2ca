"""Decode DJI drone-ID broadcasts from OcuSync IQ captures and Wi-Fi beacons."""

from .errors import (DroneIdError, InsufficientDataError, IntegrityError, MalformedFileError,
                     MalformedFrameError, NotABeaconError, UnsupportedPacketError)
from .frames import parse_frame, serialize_frame, to_detection_record
from .iq import IqBuffer
from .receiver import receive
from .synth import Impairments, build_burst, build_capture

__version__ = "0.1.0"

__all__ = [
    "DroneIdError", "InsufficientDataError", "IntegrityError", "MalformedFileError",
    "MalformedFrameError", "NotABeaconError", "UnsupportedPacketError",
    "IqBuffer", "Impairments", "build_burst", "build_capture", "receive",
    "parse_frame", "serialize_frame", "to_detection_record",
]
