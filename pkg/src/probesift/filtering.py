"""Candidate enumeration from probe-request logs.

The pipeline, per AP with a marked staying interval:

  1. partition the non-staying time around [enter, exit) into fixed slots,
  2. accumulate a suspicious rate for every MAC seen during the staying
     interval: each slot the MAC is absent from adds the slot's weight,
     growing linearly with the slot's distance from the staying boundary,
  3. keep MACs whose staying-time peak RSSI and rate clear the thresholds,

then fuse APs: only MACs that are candidates at every target AP make the
ranked output table.
"""
from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .errors import ValidationError
from .model import (
    SIDE_AFTER,
    SIDE_BEFORE,
    MacAddress,
    ProbeEvent,
    StayingInterval,
    TimeSlot,
    parse_mac,
)

SIDES_BOTH = "both"
SIDES_BEFORE_ONLY = "before_only"
SIDES_AFTER_ONLY = "after_only"
_VALID_SIDES = (SIDES_BOTH, SIDES_BEFORE_ONLY, SIDES_AFTER_ONLY)

TABLE_SCHEMA_VERSION = 1


def linear_weighting(n: int) -> float:
    """Weight of the slot `n` steps away from the staying boundary: 2*(n+1)/31."""
    if n < 0:
        raise ValidationError(f"slot index must be >= 0, got {n}")
    return 2 * (n + 1) / 31


@dataclass(frozen=True)
class FilterConfig:
    """Knobs for one filter run.

    `rate_threshold=None` means half of the maximum rate attainable under
    the configured slots, resolved by `effective_rate_threshold`.
    """

    slot_len: float = 30.0
    slots_per_side: int = 30
    rssi_threshold: float = -75.0
    rate_threshold: Optional[float] = None
    sides: str = SIDES_BOTH

    def __post_init__(self):
        if not self.slot_len > 0:
            raise ValidationError(f"slot_len must be > 0, got {self.slot_len}")
        if self.slots_per_side < 0:
            raise ValidationError(f"slots_per_side must be >= 0, got {self.slots_per_side}")
        if self.rate_threshold is not None and self.rate_threshold < 0:
            raise ValidationError(f"rate_threshold must be >= 0, got {self.rate_threshold}")
        if self.sides not in _VALID_SIDES:
            raise ValidationError(f"sides must be one of {_VALID_SIDES}, got {self.sides!r}")

    def to_doc(self) -> dict:
        return {
            "slot_len": self.slot_len,
            "slots_per_side": self.slots_per_side,
            "rssi_threshold": self.rssi_threshold,
            "rate_threshold": self.rate_threshold,
            "sides": self.sides,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "FilterConfig":
        if not isinstance(doc, dict):
            raise ValidationError("filter config must be an object")
        known = {"slot_len", "slots_per_side", "rssi_threshold", "rate_threshold", "sides"}
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown filter config fields: {sorted(unknown)}")
        return cls(**{k: doc[k] for k in known if k in doc})


def max_attainable_rate(cfg: FilterConfig) -> float:
    """Rate of a MAC absent from every configured slot, accumulated in slot order."""
    total = 0.0
    for slot in slot_partition(StayingInterval("_", 0.0, cfg.slot_len), cfg):
        total += linear_weighting(slot.index_n)
    return total


def effective_rate_threshold(cfg: FilterConfig) -> float:
    if cfg.rate_threshold is not None:
        return cfg.rate_threshold
    return 0.5 * max_attainable_rate(cfg)


def slot_partition(staying: StayingInterval, cfg: FilterConfig) -> List[TimeSlot]:
    """Tile slots outward from both staying boundaries, in chronological order.

    Slot n on the before side is [enter-(n+1)*L, enter-n*L); on the after
    side [exit+n*L, exit+(n+1)*L). Slot 0 abuts the staying interval.
    """
    L = cfg.slot_len
    slots: List[TimeSlot] = []
    if cfg.sides in (SIDES_BOTH, SIDES_BEFORE_ONLY):
        for n in range(cfg.slots_per_side - 1, -1, -1):
            slots.append(TimeSlot(staying.enter - (n + 1) * L, staying.enter - n * L,
                                  SIDE_BEFORE, n))
    if cfg.sides in (SIDES_BOTH, SIDES_AFTER_ONLY):
        for n in range(cfg.slots_per_side):
            slots.append(TimeSlot(staying.exit + n * L, staying.exit + (n + 1) * L,
                                  SIDE_AFTER, n))
    return slots


@dataclass(frozen=True)
class PerApRates:
    """Per-MAC suspicious rates and staying-time peak RSSI for one AP."""

    ap_id: str
    rates: Dict[MacAddress, float] = field(default_factory=dict)
    max_rssi_in_staying: Dict[MacAddress, float] = field(default_factory=dict)


def per_ap_suspicious_rates(events: Sequence[ProbeEvent], staying: StayingInterval,
                            cfg: FilterConfig) -> PerApRates:
    """Accumulate suspicious rates for the MACs observed during `staying`.

    A MAC not observed in a slot is charged that slot's weight; a MAC never
    observed during the staying interval is omitted. Slots beyond the log's
    time range still count as absence.
    """
    for ev in events:
        if ev.ap_id != staying.ap_id:
            raise ValidationError(
                f"event for AP {ev.ap_id!r} passed to rate computation for {staying.ap_id!r}")

    ordered = sorted(events, key=lambda e: e.timestamp)
    timestamps = [e.timestamp for e in ordered]

    def macs_between(start: float, end: float) -> Set[MacAddress]:
        lo = bisect_left(timestamps, start)
        hi = bisect_left(timestamps, end)
        return {e.mac for e in ordered[lo:hi]}

    staying_macs = macs_between(staying.enter, staying.exit)
    max_rssi: Dict[MacAddress, float] = {}
    lo = bisect_left(timestamps, staying.enter)
    hi = bisect_left(timestamps, staying.exit)
    for ev in ordered[lo:hi]:
        cur = max_rssi.get(ev.mac)
        if cur is None or ev.rssi > cur:
            max_rssi[ev.mac] = ev.rssi

    rates: Dict[MacAddress, float] = {mac: 0.0 for mac in staying_macs}
    for slot in slot_partition(staying, cfg):
        observed = macs_between(slot.start, slot.end)
        weight = linear_weighting(slot.index_n)
        for mac in staying_macs:
            if mac not in observed:
                rates[mac] += weight
    return PerApRates(ap_id=staying.ap_id, rates=rates, max_rssi_in_staying=max_rssi)


def extract_candidates(rates: PerApRates, cfg: FilterConfig) -> Set[MacAddress]:
    """MACs clearing both gates: staying-time peak RSSI and suspicious rate."""
    rate_floor = effective_rate_threshold(cfg)
    return {
        mac
        for mac, rate in rates.rates.items()
        if rates.max_rssi_in_staying[mac] >= cfg.rssi_threshold and rate >= rate_floor
    }


@dataclass(frozen=True)
class TableRow:
    """One ranked candidate: per-AP rates plus their sum."""

    mac: MacAddress
    rates: Dict[str, float]
    total: float


@dataclass(frozen=True)
class SuspiciousRateTable:
    """Filtering output: candidates common to all target APs, ranked by rate sum."""

    target_aps: Tuple[str, ...]
    rows: Tuple[TableRow, ...]
    truncated_aps: Tuple[str, ...] = ()

    def to_doc(self) -> dict:
        return {
            "schema_version": TABLE_SCHEMA_VERSION,
            "target_aps": list(self.target_aps),
            "rows": [
                {
                    "mac": str(row.mac),
                    "rates": {ap: row.rates[ap] for ap in self.target_aps},
                    "sum": row.total,
                }
                for row in self.rows
            ],
            "truncated_aps": list(self.truncated_aps),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "SuspiciousRateTable":
        rows = tuple(
            TableRow(
                mac=parse_mac(r["mac"]),
                rates={ap: float(v) for ap, v in r["rates"].items()},
                total=float(r["sum"]),
            )
            for r in doc["rows"]
        )
        return cls(target_aps=tuple(doc["target_aps"]), rows=rows,
                   truncated_aps=tuple(doc.get("truncated_aps", ())))

    def canonical_json(self) -> bytes:
        """Stable byte serialization; CLI and service emit exactly these bytes."""
        return json.dumps(self.to_doc(), sort_keys=True, separators=(",", ":")).encode()

    def render_text(self) -> str:
        """Human-readable table, one line per candidate."""
        header = ["mac"] + [f"rate@{ap}" for ap in self.target_aps] + ["sum"]
        lines = [
            [str(row.mac)] + [f"{row.rates[ap]:.4f}" for ap in self.target_aps]
            + [f"{row.total:.4f}"]
            for row in self.rows
        ]
        widths = [max(len(col) for col in cols) for cols in zip(header, *lines)] \
            if lines else [len(h) for h in header]
        fmt = "  ".join(f"{{:<{w}}}" for w in widths)
        out = [fmt.format(*header)]
        out.extend(fmt.format(*line) for line in lines)
        if not self.rows:
            out.append("(no candidates)")
        if self.truncated_aps:
            out.append(f"note: log did not span all slots at: {', '.join(self.truncated_aps)}")
        return "\n".join(out)


def fuse_across_aps(per_ap: Sequence[Tuple[PerApRates, Set[MacAddress]]],
                    target_aps: Set[str],
                    truncated_aps: Sequence[str] = ()) -> SuspiciousRateTable:
    """Keep MACs that are candidates at every target AP; rank by rate sum."""
    if not target_aps:
        raise ValidationError("fusion needs at least one target AP")
    by_ap = {}
    for rates, cands in per_ap:
        if rates.ap_id in by_ap:
            raise ValidationError(f"duplicate per-AP entry for {rates.ap_id!r}")
        by_ap[rates.ap_id] = (rates, cands)
    if set(by_ap) != set(target_aps):
        raise ValidationError(
            f"fusion needs one entry per target AP; targets {sorted(target_aps)}, "
            f"entries {sorted(by_ap)}")

    common: Optional[Set[MacAddress]] = None
    for ap in target_aps:
        cands = by_ap[ap][1]
        common = set(cands) if common is None else common & cands
    assert common is not None

    columns = tuple(sorted(target_aps))
    rows = []
    for mac in common:
        rates = {ap: by_ap[ap][0].rates[mac] for ap in columns}
        rows.append(TableRow(mac=mac, rates=rates, total=math.fsum(rates[ap] for ap in columns)))
    rows.sort(key=lambda r: (-r.total, r.mac))
    return SuspiciousRateTable(target_aps=columns, rows=tuple(rows),
                               truncated_aps=tuple(sorted(truncated_aps)))


def run_filter(events: Sequence[ProbeEvent], staying_intervals: Sequence[StayingInterval],
               cfg: FilterConfig = FilterConfig()) -> SuspiciousRateTable:
    """Full pipeline over a multi-AP log: per-AP rates, gates, then fusion."""
    if not staying_intervals:
        raise ValidationError("at least one staying interval is required")
    seen_aps = set()
    for interval in staying_intervals:
        if interval.ap_id in seen_aps:
            raise ValidationError(f"duplicate staying interval for AP {interval.ap_id!r}")
        seen_aps.add(interval.ap_id)

    by_ap: Dict[str, List[ProbeEvent]] = {iv.ap_id: [] for iv in staying_intervals}
    log_min = math.inf
    log_max = -math.inf
    for ev in events:
        log_min = min(log_min, ev.timestamp)
        log_max = max(log_max, ev.timestamp)
        if ev.ap_id in by_ap:
            by_ap[ev.ap_id].append(ev)

    per_ap = []
    truncated = []
    for interval in staying_intervals:
        ap_events = by_ap[interval.ap_id]
        rates = per_ap_suspicious_rates(ap_events, interval, cfg)
        per_ap.append((rates, extract_candidates(rates, cfg)))
        slots = slot_partition(interval, cfg)
        if slots and (not ap_events
                      or slots[0].start < log_min or slots[-1].end > log_max):
            truncated.append(interval.ap_id)

    return fuse_across_aps(per_ap, seen_aps, truncated_aps=truncated)
