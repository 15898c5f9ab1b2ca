"""Enhanced Wi-Fi drone ID: 802.11 beacon parsing and the DJI vendor IE.

The drone appends a vendor-specific information element to its beacons::

    DD  len  26 37 12 58 62 13  <flight info, len - 6 bytes>

i.e. the 16-bit words 0x3726, 0x5812, 0x1362 stored little endian.
"""

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Optional, Tuple

from .errors import MalformedFileError, MalformedFrameError, NotABeaconError
from .tables import VENDOR_OUIS

VENDOR_IE_TAG = 0xDD
DJI_MAGIC = bytes.fromhex("263712586213")
MAX_PAYLOAD = 255 - len(DJI_MAGIC)

MAC_HEADER_LEN = 24
FIXED_FIELDS_LEN = 12  # timestamp, beacon interval, capability
BEACON_MIN_LEN = MAC_HEADER_LEN + FIXED_FIELDS_LEN

LINKTYPE_IEEE802_11 = 105
LINKTYPE_IEEE802_11_RADIOTAP = 127

BROADCAST = b"\xff" * 6


@dataclass
class InformationElement:
    tag: int
    value: bytes

    @property
    def length(self) -> int:
        return len(self.value)


@dataclass
class BeaconFrame:
    frame_type: int
    subtype: int
    flags: int
    destination: bytes
    sender: bytes
    bssid: bytes
    timestamp: int
    beacon_interval: int
    capability: int
    elements: List[InformationElement] = field(default_factory=list)

    @property
    def ssid(self) -> Optional[str]:
        for ie in self.elements:
            if ie.tag == 0:
                return ie.value.decode("utf-8", errors="replace")
        return None


def parse_beacon(raw: bytes, has_fcs: bool = False) -> BeaconFrame:
    raw = bytes(raw)
    if has_fcs:
        raw = raw[:-4]
    if len(raw) < BEACON_MIN_LEN:
        raise MalformedFrameError(f"frame of {len(raw)} bytes is shorter than a beacon header")
    fc, flags = raw[0], raw[1]
    ftype, subtype = (fc >> 2) & 0x3, fc >> 4
    if ftype != 0 or subtype != 8:
        raise NotABeaconError(f"frame type {ftype} subtype {subtype} is not a beacon")
    timestamp, interval, capability = struct.unpack_from("<QHH", raw, MAC_HEADER_LEN)

    elements = []
    pos = BEACON_MIN_LEN
    while pos < len(raw):
        if pos + 2 > len(raw):
            raise MalformedFrameError(f"truncated information element header at byte {pos}")
        tag, length = raw[pos], raw[pos + 1]
        if pos + 2 + length > len(raw):
            raise MalformedFrameError(f"IE 0x{tag:02x} claims {length} bytes, only {len(raw) - pos - 2} remain")
        elements.append(InformationElement(tag, raw[pos + 2:pos + 2 + length]))
        pos += 2 + length

    return BeaconFrame(
        frame_type=ftype, subtype=subtype, flags=flags,
        destination=raw[4:10], sender=raw[10:16], bssid=raw[16:22],
        timestamp=timestamp, beacon_interval=interval, capability=capability,
        elements=elements,
    )


def extract_droneid(frame: BeaconFrame) -> Optional[bytes]:
    """Flight-info payload from the first DJI vendor IE, or None."""
    for ie in frame.elements:
        if ie.tag == VENDOR_IE_TAG and ie.length > len(DJI_MAGIC) and ie.value.startswith(DJI_MAGIC):
            return ie.value[len(DJI_MAGIC):]
    return None


def classify_vendor(frame_or_mac) -> Optional[str]:
    """'DJI', 'Parrot' or None, from the sender address OUI."""
    mac = frame_or_mac.sender if isinstance(frame_or_mac, BeaconFrame) else bytes(frame_or_mac)
    oui = mac[:3]
    for vendor, ouis in VENDOR_OUIS.items():
        if oui in ouis:
            return vendor
    return None


def parse_mac(text: str) -> bytes:
    parts = text.replace("-", ":").split(":")
    if len(parts) != 6:
        raise ValueError(f"bad MAC address {text!r}")
    return bytes(int(p, 16) for p in parts)


def build_beacon(payload: Optional[bytes] = None, sender: bytes = b"\x60\x60\x1f\x00\x00\x01",
                 ssid: str = "drone", channel: int = 6, magic: bytes = DJI_MAGIC,
                 timestamp: int = 0) -> bytes:
    """Byte-exact beacon with SSID, rates and DS-parameter IEs, plus the DJI
    vendor IE when ``payload`` is given."""
    if isinstance(sender, str):
        sender = parse_mac(sender)
    hdr = bytes([0x80, 0x00]) + b"\x00\x00" + BROADCAST + sender + sender + b"\x00\x00"
    body = struct.pack("<QHH", timestamp, 100, 0x0431)
    ssid_b = ssid.encode("utf-8")
    body += bytes([0, len(ssid_b)]) + ssid_b
    body += bytes([1, 8, 0x82, 0x84, 0x8B, 0x96, 0x0C, 0x12, 0x18, 0x24])
    body += bytes([3, 1, channel])
    if payload is not None:
        payload = bytes(payload)
        if len(payload) > MAX_PAYLOAD:
            raise ValueError(f"payload of {len(payload)} bytes exceeds the {MAX_PAYLOAD}-byte IE limit")
        body += bytes([VENDOR_IE_TAG, len(payload) + len(magic)]) + magic + payload
    return hdr + body


# -- classic pcap ----------------------------------------------------------------

_PCAP_MAGICS = {
    b"\xd4\xc3\xb2\xa1": "<",
    b"\xa1\xb2\xc3\xd4": ">",
    b"\x4d\x3c\xb2\xa1": "<",  # nanosecond timestamps
    b"\xa1\xb2\x3c\x4d": ">",
}


def _radiotap_strip(pkt: bytes) -> Tuple[bytes, bool]:
    """Remove a radiotap header; report whether the frame carries an FCS."""
    if len(pkt) < 8:
        raise MalformedFrameError("truncated radiotap header")
    rt_len = struct.unpack_from("<H", pkt, 2)[0]
    if rt_len > len(pkt):
        raise MalformedFrameError("radiotap length exceeds packet")
    present = struct.unpack_from("<I", pkt, 4)[0]
    pos = 8
    word = present
    while word & 0x80000000:
        if pos + 4 > rt_len:
            raise MalformedFrameError("truncated radiotap present bitmap")
        word = struct.unpack_from("<I", pkt, pos)[0]
        pos += 4
    has_fcs = False
    if present & 0x1:  # TSFT, 8 bytes aligned to 8
        pos = (pos + 7) & ~7
        pos += 8
    if present & 0x2 and pos < rt_len:  # flags
        has_fcs = bool(pkt[pos] & 0x10)
    return pkt[rt_len:], has_fcs


def read_pcap(data: bytes) -> Iterator[Tuple[bytes, bool]]:
    """Yield ``(802.11 frame, has_fcs)`` for every record of a classic pcap file."""
    data = bytes(data)
    if len(data) < 24 or data[:4] not in _PCAP_MAGICS:
        raise MalformedFileError("not a classic pcap file")
    e = _PCAP_MAGICS[data[:4]]
    linktype = struct.unpack_from(e + "I", data, 20)[0]
    if linktype not in (LINKTYPE_IEEE802_11, LINKTYPE_IEEE802_11_RADIOTAP):
        raise MalformedFileError(f"unsupported pcap link type {linktype}")
    pos = 24
    while pos < len(data):
        if pos + 16 > len(data):
            raise MalformedFileError("truncated pcap record header")
        incl = struct.unpack_from(e + "I", data, pos + 8)[0]
        pkt = data[pos + 16:pos + 16 + incl]
        if len(pkt) < incl:
            raise MalformedFileError("truncated pcap record")
        pos += 16 + incl
        if linktype == LINKTYPE_IEEE802_11_RADIOTAP:
            yield _radiotap_strip(pkt)
        else:
            yield pkt, False


def write_pcap(frames, radiotap: bool = False) -> bytes:
    """Classic little-endian pcap; with ``radiotap`` each frame gets a minimal
    8-byte radiotap header (no fields)."""
    linktype = LINKTYPE_IEEE802_11_RADIOTAP if radiotap else LINKTYPE_IEEE802_11
    out = [struct.pack("<IHHiIII", 0xA1B2C3D4, 2, 4, 0, 0, 65535, linktype)]
    for i, frame in enumerate(frames):
        pkt = (b"\x00\x00\x08\x00\x00\x00\x00\x00" + frame) if radiotap else bytes(frame)
        out.append(struct.pack("<IIII", i, 0, len(pkt), len(pkt)) + pkt)
    return b"".join(out)


def scan_pcap(path) -> Iterator[Tuple[BeaconFrame, Optional[bytes]]]:
    """Beacons in a capture file with their DJI payload (None when absent).
    Non-beacon and malformed frames are skipped."""
    for pkt, has_fcs in read_pcap(Path(path).read_bytes()):
        try:
            beacon = parse_beacon(pkt, has_fcs=has_fcs)
        except (NotABeaconError, MalformedFrameError):
            continue
        yield beacon, extract_droneid(beacon)
