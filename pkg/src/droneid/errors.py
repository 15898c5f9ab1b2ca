"""Exception hierarchy shared by every layer of the toolkit."""


class DroneIdError(Exception):
    """Base class for all toolkit errors."""


class MalformedFileError(DroneIdError, ValueError):
    """Capture file length or layout does not match its declared format."""


class InsufficientDataError(DroneIdError, ValueError):
    """Input is shorter than the operation needs."""


class MalformedFrameError(DroneIdError, ValueError):
    """A frame (802.11 or drone-ID) is truncated or internally inconsistent."""


class NotABeaconError(DroneIdError, ValueError):
    """An 802.11 frame parsed fine but is not a beacon (type 0, subtype 8)."""


class UnsupportedPacketError(DroneIdError, ValueError):
    """Drone-ID frame carries a type tag this decoder does not know."""

    def __init__(self, tag: int, raw: bytes):
        super().__init__(f"unsupported drone-ID packet type 0x{tag:x}")
        self.tag = tag
        self.raw = bytes(raw)


class IntegrityError(DroneIdError):
    """Turbo decoding finished without a passing CRC-24.

    ``residual`` is the CRC-24 computed over the whole decoded block; zero would
    have meant success.
    """

    def __init__(self, residual: int, iterations: int):
        super().__init__(f"CRC-24 check failed (residual 0x{residual:06x} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations
