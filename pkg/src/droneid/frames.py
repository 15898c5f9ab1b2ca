"""Drone-ID frame codecs: license, flight-info v1 and flight-info v2.

Byte layouts live in ``LAYOUTS`` below and are mirrored, field for field, in
FRAME_FORMAT.md at the repository root.  All multi-byte integers are little
endian.  A decoded OcuSync block is 96 bytes: the frame, zero padding, and a
CRC-24 in bytes 93..95 (checked by :mod:`droneid.fec`, ignored here).

Field scalings::

    coordinate  degrees = raw * 180 / (pi * 1e7)    (int32, 1e-7 rad units)
    speed       m/s     = raw / 100                 (int16)
    height      m       = raw / 10                  (int16)
    pitch/roll  degrees = raw / 100                 (int16)
    yaw         degrees = (raw / 100 + 180) mod 360 (int16)
    gps clock   ms since the Unix epoch             (uint64)
"""

import json
import logging
import math
import struct
from dataclasses import asdict, dataclass, field
from typing import ClassVar, Dict, List, Optional, Tuple, Union

from . import fec
from .errors import MalformedFrameError, UnsupportedPacketError
from .tables import MODELS, aeroscope_model, model_lookup

log = logging.getLogger(__name__)

BLOCK_BYTES = fec.BLOCK_BYTES
PAYLOAD_BYTES = BLOCK_BYTES - 3

TAG_LICENSE = 0x11
TAG_FLIGHT_V1 = 0x1001
TAG_FLIGHT_V2 = 0x1002

SOURCE_OCUSYNC = "OcuSync (SDR)"
SOURCE_WIFI = "Enhanced Wi-Fi"

_COORD_SCALE = 180.0 / (math.pi * 1e7)

# (name, struct code) in wire order; offsets follow from the codes
LAYOUTS: Dict[int, Tuple[Tuple[str, str], ...]] = {
    TAG_LICENSE: (
        ("tag", "B"),
        ("serial", "16s"),
        ("license_text", "32s"),
        # flight_plan: NUL-padded remainder up to the CRC (bytes 49..92)
    ),
    TAG_FLIGHT_V1: (
        ("tag", "H"),
        ("sequence_num", "H"),
        ("state_info", "H"),
        ("serial", "16s"),
        ("drone_lon", "i"),
        ("drone_lat", "i"),
        ("altitude", "h"),
        ("height", "h"),
        ("x_speed", "h"),
        ("y_speed", "h"),
        ("z_speed", "h"),
        ("pitch", "h"),
        ("roll", "h"),
        ("yaw", "h"),
        ("home_lon", "i"),
        ("home_lat", "i"),
        ("model_id", "B"),
        ("uuid", "20s"),
    ),
    TAG_FLIGHT_V2: (
        ("tag", "H"),
        ("sequence_num", "H"),
        ("state_info", "H"),
        ("serial", "16s"),
        ("drone_lon", "i"),
        ("drone_lat", "i"),
        ("altitude", "h"),
        ("height", "h"),
        ("x_speed", "h"),
        ("y_speed", "h"),
        ("z_speed", "h"),
        ("yaw", "h"),
        ("pilot_gps_clock", "Q"),
        ("pilot_lat", "i"),
        ("pilot_lon", "i"),
        ("home_lon", "i"),
        ("home_lat", "i"),
        ("model_id", "B"),
        ("uuid_len", "B"),
        ("uuid", "20s"),
    ),
}

_STRUCTS = {tag: struct.Struct("<" + "".join(code for _, code in fields)) for tag, fields in LAYOUTS.items()}


def field_offsets(tag: int) -> Dict[str, int]:
    """Byte offset of every field in a layout."""
    out, pos = {}, 0
    for name, code in LAYOUTS[tag]:
        out[name] = pos
        pos += struct.calcsize("<" + code)
    return out


# -- field codecs ----------------------------------------------------------------


def decode_coordinate(raw: int) -> float:
    return raw * _COORD_SCALE


def encode_coordinate(degrees: float) -> int:
    return int(round(degrees / _COORD_SCALE))


def decode_speed(raw: int) -> float:
    return raw / 100


def encode_speed(mps: float) -> int:
    return int(round(mps * 100))


def decode_height(raw: int) -> float:
    return raw / 10


def encode_height(meters: float) -> int:
    return int(round(meters * 10))


def decode_angle(raw: int) -> float:
    return raw / 100


def encode_angle(degrees: float) -> int:
    return int(round(degrees * 100))


def decode_yaw(raw: int) -> float:
    """Heading for display, in [0, 360).  Only raw values in [-18000, 18000) invert exactly."""
    return round((raw / 100 + 180) % 360, 2)


def encode_yaw(degrees: float) -> int:
    raw = int(round((degrees - 180) * 100))
    return (raw + 18000) % 36000 - 18000


def angle_to_quantity(angle: float) -> float:
    """Published pitch/roll/yaw -> quantity mapping, branch for branch."""
    if angle == 0:
        return 0
    elif angle < 0:
        return angle + 180
    elif 0 < angle < 180:
        return angle % 180
    else:
        return angle + 180


def decode_gps_clock(raw: int) -> int:
    return int(raw)


def encode_gps_clock(ms: int) -> int:
    return int(ms)


def _decode_str(raw: bytes) -> str:
    return raw.rstrip(b"\x00").decode("utf-8", errors="replace")


def _encode_str(text: str, width: int, name: str) -> bytes:
    data = text.encode("utf-8")
    if len(data) > width:
        raise ValueError(f"{name} is {len(data)} bytes, field holds {width}")
    return data


# -- frame types -----------------------------------------------------------------


@dataclass
class License:
    serial: str
    license_text: str = ""
    flight_plan: str = ""
    wire_length: int = field(default=BLOCK_BYTES, compare=False, repr=False)

    TAG: ClassVar[int] = TAG_LICENSE
    PACKET_TYPE: ClassVar[str] = "License"


@dataclass
class FlightInfoV1:
    sequence_num: int
    state_info: int
    serial: str
    drone_lon: float
    drone_lat: float
    altitude: int
    height: float
    x_speed: float
    y_speed: float
    z_speed: float
    pitch: float
    roll: float
    yaw: float
    home_lon: float
    home_lat: float
    model_id: int
    uuid: str = ""
    wire_length: int = field(default=BLOCK_BYTES, compare=False, repr=False)

    TAG: ClassVar[int] = TAG_FLIGHT_V1
    PACKET_TYPE: ClassVar[str] = "DroneID v1"

    @property
    def uuid_len(self) -> int:
        return len(self.uuid.encode("utf-8"))


@dataclass
class FlightInfoV2:
    sequence_num: int
    state_info: int
    serial: str
    drone_lon: float
    drone_lat: float
    altitude: int
    height: float
    x_speed: float
    y_speed: float
    z_speed: float
    yaw: float
    pilot_gps_clock: int
    pilot_lat: float
    pilot_lon: float
    home_lon: float
    home_lat: float
    model_id: int
    uuid: str = ""
    wire_length: int = field(default=BLOCK_BYTES, compare=False, repr=False)

    TAG: ClassVar[int] = TAG_FLIGHT_V2
    PACKET_TYPE: ClassVar[str] = "DroneID v2"

    @property
    def uuid_len(self) -> int:
        return len(self.uuid.encode("utf-8"))


DroneIdFrame = Union[License, FlightInfoV1, FlightInfoV2]
_FRAME_TYPES = {cls.TAG: cls for cls in (License, FlightInfoV1, FlightInfoV2)}

_COORD_FIELDS = ("drone_lon", "drone_lat", "home_lon", "home_lat", "pilot_lon", "pilot_lat")
_SPEED_FIELDS = ("x_speed", "y_speed", "z_speed")


def implausible_fields(frame: DroneIdFrame) -> List[str]:
    """Coordinates that decode outside the valid latitude/longitude range."""
    bad = []
    for name in _COORD_FIELDS:
        if not hasattr(frame, name):
            continue
        limit = 90.0 if name.endswith("lat") else 180.0
        if abs(getattr(frame, name)) > limit:
            bad.append(name)
    return bad


def frame_tag(data: bytes) -> int:
    if len(data) < 1:
        raise MalformedFrameError("empty frame")
    if data[0] == TAG_LICENSE:
        return TAG_LICENSE
    if len(data) < 2:
        raise MalformedFrameError("frame too short for a type tag")
    return int.from_bytes(data[:2], "little")


def parse_frame(data: bytes) -> DroneIdFrame:
    """Decode a frame.  ``data`` may be a full 96-byte block or a shorter payload
    (e.g. from a Wi-Fi beacon) as long as it covers the layout."""
    data = bytes(data)
    tag = frame_tag(data)
    if tag not in LAYOUTS:
        raise UnsupportedPacketError(tag, data)
    st = _STRUCTS[tag]
    if len(data) < st.size:
        raise MalformedFrameError(f"{_FRAME_TYPES[tag].PACKET_TYPE} frame needs {st.size} bytes, got {len(data)}")
    names = [name for name, _ in LAYOUTS[tag]]
    raw = dict(zip(names, st.unpack_from(data)))

    if tag == TAG_LICENSE:
        plan = data[st.size:min(len(data), PAYLOAD_BYTES)]
        return License(serial=_decode_str(raw["serial"]), license_text=_decode_str(raw["license_text"]),
                       flight_plan=_decode_str(plan), wire_length=len(data))

    values = {
        "sequence_num": raw["sequence_num"],
        "state_info": raw["state_info"],
        "serial": _decode_str(raw["serial"]),
        "altitude": raw["altitude"],
        "height": decode_height(raw["height"]),
        "yaw": decode_yaw(raw["yaw"]),
        "model_id": raw["model_id"],
        "wire_length": len(data),
    }
    for name in _COORD_FIELDS:
        if name in raw:
            values[name] = decode_coordinate(raw[name])
    for name in _SPEED_FIELDS:
        values[name] = decode_speed(raw[name])
    if tag == TAG_FLIGHT_V1:
        values["pitch"] = decode_angle(raw["pitch"])
        values["roll"] = decode_angle(raw["roll"])
        values["uuid"] = _decode_str(raw["uuid"])
        return FlightInfoV1(**values)

    n = raw["uuid_len"]
    if n > 20:
        raise MalformedFrameError(f"uuid_len {n} exceeds the 20-byte UUID field")
    values["uuid"] = raw["uuid"][:n].decode("utf-8", errors="replace")
    values["pilot_gps_clock"] = decode_gps_clock(raw["pilot_gps_clock"])
    return FlightInfoV2(**values)


def serialize_frame(frame: DroneIdFrame, with_crc: bool = True) -> bytes:
    """Encode to a 96-byte block (93 bytes + CRC-24), or 93 bytes without the CRC."""
    tag = frame.TAG
    st = _STRUCTS[tag]
    if tag == TAG_LICENSE:
        body = st.pack(tag, _encode_str(frame.serial, 16, "serial"),
                       _encode_str(frame.license_text, 32, "license_text"))
        body += _encode_str(frame.flight_plan, PAYLOAD_BYTES - st.size, "flight_plan")
    else:
        raw = {
            "tag": tag,
            "sequence_num": frame.sequence_num,
            "state_info": frame.state_info,
            "serial": _encode_str(frame.serial, 16, "serial"),
            "altitude": frame.altitude,
            "height": encode_height(frame.height),
            "yaw": encode_yaw(frame.yaw),
            "model_id": frame.model_id,
            "uuid": _encode_str(frame.uuid, 20, "uuid"),
        }
        for name in _COORD_FIELDS:
            if hasattr(frame, name):
                raw[name] = encode_coordinate(getattr(frame, name))
        for name in _SPEED_FIELDS:
            raw[name] = encode_speed(getattr(frame, name))
        if tag == TAG_FLIGHT_V1:
            raw["pitch"] = encode_angle(frame.pitch)
            raw["roll"] = encode_angle(frame.roll)
        else:
            raw["pilot_gps_clock"] = encode_gps_clock(frame.pilot_gps_clock)
            raw["uuid_len"] = frame.uuid_len
        try:
            body = st.pack(*(raw[name] for name, _ in LAYOUTS[tag]))
        except struct.error as exc:
            raise ValueError(f"field out of range for {frame.PACKET_TYPE}: {exc}") from None
    body = body.ljust(PAYLOAD_BYTES, b"\x00")
    return fec.attach_crc(body) if with_crc else body


# -- JSON projection -------------------------------------------------------------

RECORD_KEYS = (
    "model", "source_type", "packet_length", "packet_type", "sequence_num", "state_info",
    "serial_num", "drone_longitude", "drone_latitude", "altitude", "height", "x_speed",
    "y_speed", "z_speed", "total_speed", "yaw", "pilot_gps_clock", "pilot_longitude",
    "pilot_latitude", "home_longitude", "home_latitude", "uuid_len", "uuid",
)


@dataclass
class DetectionRecord:
    model: str
    source_type: str
    packet_length: int
    packet_type: str
    sequence_num: Optional[int]
    state_info: Optional[str]
    serial_num: str
    drone_longitude: Optional[float]
    drone_latitude: Optional[float]
    altitude: Optional[int]
    height: Optional[float]
    x_speed: Optional[float]
    y_speed: Optional[float]
    z_speed: Optional[float]
    total_speed: Optional[float]
    yaw: Optional[float]
    pilot_gps_clock: Optional[float]
    pilot_longitude: Optional[float]
    pilot_latitude: Optional[float]
    home_longitude: Optional[float]
    home_latitude: Optional[float]
    uuid_len: Optional[int]
    uuid: Optional[str]
    implausible: List[str] = field(default_factory=list, compare=False, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in RECORD_KEYS}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _model_name(frame: DroneIdFrame) -> str:
    name = aeroscope_model(frame.model_id) if hasattr(frame, "model_id") else None
    if name is None and len(frame.serial) >= 3:
        hit = model_lookup(frame.serial)
        name = hit[0] if hit else None
    return name or "Unknown"


def to_detection_record(frame: DroneIdFrame, source_type: str = SOURCE_OCUSYNC) -> DetectionRecord:
    tag_len = 1 if frame.TAG == TAG_LICENSE else 2
    common = dict(
        model=_model_name(frame),
        source_type=source_type,
        packet_length=frame.wire_length - tag_len,
        packet_type=frame.PACKET_TYPE,
        serial_num=frame.serial,
        implausible=implausible_fields(frame),
    )
    if isinstance(frame, License):
        empty = {k: None for k in RECORD_KEYS if k not in common}
        return DetectionRecord(**{**empty, **common})

    v2 = isinstance(frame, FlightInfoV2)
    return DetectionRecord(
        **common,
        sequence_num=frame.sequence_num,
        state_info=f"0x{frame.state_info:04x}",
        drone_longitude=frame.drone_lon,
        drone_latitude=frame.drone_lat,
        altitude=frame.altitude,
        height=frame.height,
        x_speed=frame.x_speed,
        y_speed=frame.y_speed,
        z_speed=frame.z_speed,
        total_speed=math.sqrt(frame.x_speed ** 2 + frame.y_speed ** 2 + frame.z_speed ** 2),
        yaw=frame.yaw,
        pilot_gps_clock=frame.pilot_gps_clock / 1000 if v2 else None,
        pilot_longitude=frame.pilot_lon if v2 else None,
        pilot_latitude=frame.pilot_lat if v2 else None,
        home_longitude=frame.home_lon,
        home_latitude=frame.home_lat,
        uuid_len=frame.uuid_len,
        uuid=frame.uuid,
    )


_MODEL_IDS = {e.model.lower(): e.aeroscope_id for e in MODELS}
_PACKET_TYPES = {
    "license": TAG_LICENSE, "droneid v1": TAG_FLIGHT_V1, "droneid v2": TAG_FLIGHT_V2,
    "v1": TAG_FLIGHT_V1, "v2": TAG_FLIGHT_V2,
}


def frame_from_record(obj: dict) -> DroneIdFrame:
    """Build a frame from a record-shaped dict (the inverse of ``to_detection_record``).

    Keys follow the detection-record names; ``pitch``, ``roll``,
    ``license_text``, ``flight_plan`` and ``model_id`` are accepted in
    addition.  ``model`` may be given as a name instead of ``model_id``.
    Missing numeric fields default to zero.
    """
    ptype = str(obj.get("packet_type", "DroneID v2")).strip().lower()
    if ptype not in _PACKET_TYPES:
        raise ValueError(f"unknown packet_type {obj.get('packet_type')!r}")
    tag = _PACKET_TYPES[ptype]
    serial = str(obj.get("serial_num", obj.get("serial", "")) or "")
    if tag == TAG_LICENSE:
        return License(serial=serial, license_text=str(obj.get("license_text", "")),
                       flight_plan=str(obj.get("flight_plan", "")))

    def num(key, default=0.0):
        v = obj.get(key)
        return default if v is None else v

    state = obj.get("state_info", 0) or 0
    if isinstance(state, str):
        state = int(state, 16) if state.lower().startswith("0x") else int(state)
    if obj.get("model_id") is not None:
        model_id = int(obj["model_id"])
    elif obj.get("model") and str(obj["model"]).lower() != "unknown":
        key = str(obj["model"]).lower()
        if key not in _MODEL_IDS:
            raise ValueError(f"unknown model name {obj['model']!r}")
        model_id = _MODEL_IDS[key]
    else:
        model_id = 0

    common = dict(
        sequence_num=int(num("sequence_num", 0)),
        state_info=int(state),
        serial=serial,
        drone_lon=float(num("drone_longitude")),
        drone_lat=float(num("drone_latitude")),
        altitude=int(num("altitude", 0)),
        height=float(num("height")),
        x_speed=float(num("x_speed")),
        y_speed=float(num("y_speed")),
        z_speed=float(num("z_speed")),
        yaw=float(num("yaw", 180.0)),
        home_lon=float(num("home_longitude")),
        home_lat=float(num("home_latitude")),
        model_id=model_id,
        uuid=str(obj.get("uuid") or ""),
    )
    if tag == TAG_FLIGHT_V1:
        return FlightInfoV1(pitch=float(num("pitch")), roll=float(num("roll")), **common)
    return FlightInfoV2(
        pilot_gps_clock=int(round(float(num("pilot_gps_clock")) * 1000)),
        pilot_lat=float(num("pilot_latitude")),
        pilot_lon=float(num("pilot_longitude")),
        **common,
    )


def record_schema() -> dict:
    """JSON schema every detection record validates against."""
    from importlib import resources

    return json.loads(resources.files("droneid").joinpath("data/detection_record.schema.json").read_text())
