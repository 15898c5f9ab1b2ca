"""Shared helpers for the test-suite: random frames and blocks."""

import string

import numpy as np

from droneid import fec
from droneid.frames import FlightInfoV1, FlightInfoV2, License, decode_coordinate, serialize_frame

ALNUM = string.ascii_uppercase + string.digits


def random_block(rng) -> bytes:
    """96 random bytes whose CRC-24 verifies."""
    return fec.attach_crc(rng.bytes(fec.BLOCK_BYTES - 3))


def _text(rng, n):
    return "".join(rng.choice(list(ALNUM), size=n))


def random_frame(rng, kind=None):
    """A random, exactly representable frame of the given (or a random) type."""
    kind = kind or rng.choice(["license", "v1", "v2"])
    if kind == "license":
        return License(serial=_text(rng, 16), license_text=_text(rng, int(rng.integers(0, 33))),
                       flight_plan=_text(rng, int(rng.integers(0, 45))))

    def coord(limit):
        raw = int(rng.integers(-limit, limit))
        return decode_coordinate(raw)

    lon_lim, lat_lim = 31_415_926, 15_707_963  # pi and pi/2 rad in 1e-7 rad units
    common = dict(
        sequence_num=int(rng.integers(0, 1 << 16)),
        state_info=int(rng.integers(0, 1 << 16)),
        serial=_text(rng, 16),
        drone_lon=coord(lon_lim), drone_lat=coord(lat_lim),
        altitude=int(rng.integers(-32768, 32768)),
        height=int(rng.integers(-32768, 32768)) / 10,
        x_speed=int(rng.integers(-32768, 32768)) / 100,
        y_speed=int(rng.integers(-32768, 32768)) / 100,
        z_speed=int(rng.integers(-32768, 32768)) / 100,
        yaw=round((int(rng.integers(-18000, 18000)) / 100 + 180) % 360, 2),
        home_lon=coord(lon_lim), home_lat=coord(lat_lim),
        model_id=int(rng.integers(0, 256)),
        uuid=_text(rng, int(rng.integers(0, 21))),
    )
    if kind == "v1":
        return FlightInfoV1(pitch=int(rng.integers(-32768, 32768)) / 100,
                            roll=int(rng.integers(-32768, 32768)) / 100, **common)
    return FlightInfoV2(pilot_gps_clock=int(rng.integers(0, 1 << 63)),
                        pilot_lat=coord(lat_lim), pilot_lon=coord(lon_lim), **common)


def random_frame_block(rng, kind=None):
    frame = random_frame(rng, kind)
    return frame, serialize_frame(frame)


def flip_bits(bits, fraction, rng):
    bits = np.array(bits, dtype=np.uint8)
    idx = rng.choice(bits.size, size=int(round(fraction * bits.size)), replace=False)
    bits[idx] ^= 1
    return bits
