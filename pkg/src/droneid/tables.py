"""Static lookup data: DJI model table, hop frequencies, vendor OUIs."""

from typing import Dict, List, NamedTuple, Optional, Tuple


class ModelEntry(NamedTuple):
    model: str
    prefixes: Tuple[str, ...]
    aeroscope_id: int


# Model, serial prefixes, AeroScope ID (value of the flight-info model byte).
MODELS: Tuple[ModelEntry, ...] = tuple(ModelEntry(m, p, i) for m, p, i in [
    ("Inspire 1", ("041", "W21"), 1),
    ("Phantom 3 Series", ("0JX",), 2),
    ("Phantom 3 Series Pro", ("P76",), 3),
    ("Phantom 3 Std", ("03Z", "P5A"), 4),
    ("M100", ("M02",), 5),
    ("ACEONE", (), 6),
    ("WKM", (), 7),
    ("NAZA", ("061",), 8),
    ("A2", ("061",), 9),
    ("A3", ("067",), 10),
    ("Phantom 4", ("07D", "07J", "0AX", "0HA", "189"), 11),
    ("MG1", ("05Y",), 12),
    ("M600", ("M64",), 14),
    ("Phantom 3 4k", ("P7A",), 15),
    ("Mavic Pro", ("08Q", "08R"), 16),
    ("Inspire 2", ("095", "09Y", "0A0"), 17),
    ("Phantom 4 Pro", ("0AX",), 18),
    ("N2", (), 20),
    ("Spark", ("0AS", "0BM"), 21),
    ("M600 Pro", ("M80",), 23),
    ("Mavic Air", ("0K1", "0K4"), 24),
    ("M200", ("0FZ",), 25),
    ("Phantom 4 Series", ("CE1",), 26),
    ("Phantom 4 Adv", ("0HA",), 27),
    ("M210", ("0N4",), 28),
    ("M210RTK", ("17U", "1DA"), 30),
    ("A3_AG", (), 31),
    ("MG2", (), 32),
    ("MG1A", (), 34),
    ("Phantom 4 RTK", ("0UY", "0V2"), 35),
    ("Phantom 4 Pro V2.0", ("11U", "11V"), 36),
    ("MG1P", ("0YS",), 38),
    ("MG1P-RTK", ("0YL",), 40),
    ("Mavic 2", ("0M6", "163"), 41),
    ("M200 V2 Series", ("17S",), 44),
    ("Mavic 2 Enterprise", ("276", "29Z"), 51),
    ("Mavic Mini", ("1SC", "1SD", "1SZ", "1WG"), 53),
    ("Mavic Air 2", ("1WN", "3N3"), 58),
    ("P4M", ("1UD",), 59),
    ("M300 RTK", ("1ZN",), 60),
    ("DJI FPV", ("37Q",), 61),
    ("Mini 2", ("3NZ", "3Q4", "5DX", "5FS"), 63),
    ("AGRAS T10", ("IEZ",), 64),
    ("AGRAS T30", ("35P",), 65),
    ("Air 2S", ("3YT",), 66),
    ("M30", (), 67),
    ("Mavic 3", ("F4Q", "F45"), 68),
    ("Mavic 2 Enterprise Adv", ("298",), 69),
    ("Mini SE", ("4AE", "4DT", "4GM"), 70),
    ("Mini 3 Pro", (), 73),
    ("YUNEEC H480", ("YU1",), 240),
])

_BY_ID: Dict[int, ModelEntry] = {e.aeroscope_id: e for e in MODELS}

# A few prefixes appear on two rows (061: NAZA/A2, 0AX: Phantom 4/Phantom 4 Pro,
# 0HA: Phantom 4/Phantom 4 Adv).  The first row listed wins the direct lookup;
# model_candidates() reports every row.
_BY_PREFIX: Dict[str, List[ModelEntry]] = {}
for _entry in MODELS:
    for _p in _entry.prefixes:
        _BY_PREFIX.setdefault(_p, []).append(_entry)


def model_lookup(serial: str) -> Optional[Tuple[str, str]]:
    """(model name, matched prefix) for a serial number, or None."""
    if len(serial) < 3:
        raise ValueError("serial number must have at least 3 characters")
    prefix = serial[:3].upper()
    hits = _BY_PREFIX.get(prefix)
    return (hits[0].model, prefix) if hits else None


def model_candidates(serial: str) -> List[ModelEntry]:
    return list(_BY_PREFIX.get(serial[:3].upper(), ()))


def aeroscope_model(model_id: int) -> Optional[str]:
    entry = _BY_ID.get(int(model_id))
    return entry.model if entry else None


# -- hop plans (centre frequencies, Hz) ----------------------------------------

_MHZ = 1_000_000

# The published 2.4 GHz column lists 2459.5 MHz twice; the band runs
# 2399.5-2474.5 MHz in 15 MHz steps, so the sixth entry is 2474.5 MHz.
HOP_PLANS: Dict[str, Tuple[int, ...]] = {
    "2.4": tuple(int((2399.5 + 15 * i) * _MHZ) for i in range(6)),
    "5.8": tuple(int((5741.5 + 15 * i) * _MHZ) for i in range(7)),
}


def hop_plan(band: str) -> Tuple[int, ...]:
    key = str(band).strip().lower().removesuffix("ghz").strip()
    if key not in HOP_PLANS:
        raise ValueError(f"unknown band {band!r}; expected one of {sorted(HOP_PLANS)}")
    return HOP_PLANS[key]


# -- 802.11 vendor OUIs ----------------------------------------------------------

VENDOR_OUIS: Dict[str, Tuple[bytes, ...]] = {
    "DJI": (b"\x60\x60\x1f", b"\x34\xd2\x62", b"\x48\x1c\xb9"),
    "Parrot": (b"\x00\x12\x1c", b"\x90\x03\xb7", b"\xa0\x14\x3d", b"\x00\x26\x7e"),
}
