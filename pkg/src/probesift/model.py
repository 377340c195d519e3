"""Domain types shared by the filter engine, simulator, store, and service.

All types are immutable values. Every time interval in the package is
half-open, [start, end): use `in_half_open` rather than re-deriving
boundary rules locally.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

from .errors import MacParseError, ValidationError

_MAC_RE = re.compile(r"^([0-9a-fA-F]{2})([:-])([0-9a-fA-F]{2})\2([0-9a-fA-F]{2})\2"
                     r"([0-9a-fA-F]{2})\2([0-9a-fA-F]{2})\2([0-9a-fA-F]{2})$")

SIDE_BEFORE = "before"
SIDE_AFTER = "after"


@dataclass(frozen=True, order=True)
class MacAddress:
    """A 48-bit interface identifier; ordering and equality are byte-wise."""

    octets: bytes

    def __post_init__(self):
        if len(self.octets) != 6:
            raise MacParseError(f"MAC needs 6 octets, got {len(self.octets)}")

    def __str__(self) -> str:
        return ":".join(f"{b:02x}" for b in self.octets)

    def __repr__(self) -> str:
        return f"MacAddress({str(self)!r})"


def parse_mac(text: str) -> MacAddress:
    """Parse six hex pairs separated by ':' or '-' (any case) into canonical form."""
    m = _MAC_RE.match(text.strip())
    if not m:
        raise MacParseError(f"not a MAC address: {text!r}")
    parts = m.group(1, 3, 4, 5, 6, 7)
    return MacAddress(bytes(int(p, 16) for p in parts))


def is_mac_rendering(text: str) -> bool:
    """True when `text` equals the canonical rendering of some MAC address."""
    try:
        return str(parse_mac(text)) == text
    except MacParseError:
        return False


def in_half_open(t: float, start: float, end: float) -> bool:
    """Membership under the package-wide half-open convention: start <= t < end."""
    return start <= t < end


@dataclass(frozen=True)
class ProbeEvent:
    """One captured probe request."""

    timestamp: float
    ap_id: str
    mac: MacAddress
    rssi: float
    ssid: Optional[str] = None

    def __post_init__(self):
        if not self.ap_id:
            raise ValidationError("probe event needs a non-empty ap_id")
        if not math.isfinite(self.timestamp):
            raise ValidationError(f"probe event timestamp must be finite, got {self.timestamp}")
        if self.rssi > 0:
            raise ValidationError(f"rssi must be <= 0 dBm, got {self.rssi}")


@dataclass(frozen=True)
class SightingEvent:
    """One camera detection of a persona near an AP (stand-in for a stored photo)."""

    timestamp: float
    ap_id: str
    persona_id: str
    image_ref: str

    def __post_init__(self):
        if is_mac_rendering(self.persona_id):
            raise ValidationError(
                f"persona_id {self.persona_id!r} collides with the MAC address namespace")


@dataclass(frozen=True)
class StayingInterval:
    """Operator-marked [enter, exit) of the culprit at one AP."""

    ap_id: str
    enter: float
    exit: float

    def __post_init__(self):
        if not self.enter < self.exit:
            raise ValidationError(
                f"staying interval needs enter < exit, got [{self.enter}, {self.exit})")

    def contains(self, t: float) -> bool:
        return in_half_open(t, self.enter, self.exit)


@dataclass(frozen=True)
class TimeSlot:
    """One non-staying slot; index_n counts outward from the staying boundary."""

    start: float
    end: float
    side: str
    index_n: int

    def __post_init__(self):
        if self.side not in (SIDE_BEFORE, SIDE_AFTER):
            raise ValidationError(f"slot side must be 'before' or 'after', got {self.side!r}")
        if self.index_n < 0:
            raise ValidationError(f"slot index must be >= 0, got {self.index_n}")

    def contains(self, t: float) -> bool:
        return in_half_open(t, self.start, self.end)
