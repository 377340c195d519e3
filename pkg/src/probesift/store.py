"""File-backed, append-only persistence with time/AP-indexed queries.

On-disk layout (one directory per store):

    <root>/
      scenarios/<scenario_id>.json
      logs/<log_id>/            one LogDir per materialized simulation
        meta.json
        events.tsv              probe events, line-delimited (format below)
        sightings.tsv           camera sightings, line-delimited
        truth.json              ground truth; test harness only
      investigations/<investigation_id>.json

Event line format, byte-exact: five fields separated by single tabs,
terminated by "\\n" --

    <timestamp>\\t<ap_id>\\t<mac>\\t<rssi>\\t<ssid>

timestamp and rssi are Python float repr (shortest round-trip form), mac is
canonical lowercase colon form, ssid is empty when absent. Sighting lines:

    <timestamp>\\t<ap_id>\\t<persona_id>\\t<image_ref>

A batch is appended with a single write and fsync; on open, a trailing
partial line (no newline) is discarded, so a batch is visible in full or,
after a crash mid-write, not at all.
"""
from __future__ import annotations

import json
import os
import threading
import time
from bisect import bisect_left
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import ConflictError, NotFoundError, ValidationError
from .filtering import FilterConfig, SuspiciousRateTable
from .model import ProbeEvent, SightingEvent, StayingInterval, parse_mac

META_SCHEMA_VERSION = 1
INVESTIGATION_SCHEMA_VERSION = 1

STATUS_DRAFT = "draft"
STATUS_COMPLETE = "complete"


def _check_field(value: str, what: str) -> str:
    if "\t" in value or "\n" in value:
        raise ValidationError(f"{what} may not contain tabs or newlines: {value!r}")
    return value


def format_event_line(ev: ProbeEvent) -> str:
    ssid = "" if ev.ssid is None else _check_field(ev.ssid, "ssid")
    return (f"{float(ev.timestamp)!r}\t{_check_field(ev.ap_id, 'ap_id')}\t{ev.mac}"
            f"\t{float(ev.rssi)!r}\t{ssid}\n")


def parse_event_line(line: str) -> ProbeEvent:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 5:
        raise ValidationError(f"malformed event line: {line!r}")
    ts, ap_id, mac, rssi, ssid = parts
    return ProbeEvent(timestamp=float(ts), ap_id=ap_id, mac=parse_mac(mac),
                      rssi=float(rssi), ssid=ssid or None)


def format_sighting_line(s: SightingEvent) -> str:
    return (f"{float(s.timestamp)!r}\t{_check_field(s.ap_id, 'ap_id')}"
            f"\t{_check_field(s.persona_id, 'persona_id')}"
            f"\t{_check_field(s.image_ref, 'image_ref')}\n")


def parse_sighting_line(line: str) -> SightingEvent:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 4:
        raise ValidationError(f"malformed sighting line: {line!r}")
    ts, ap_id, persona, image_ref = parts
    return SightingEvent(timestamp=float(ts), ap_id=ap_id, persona_id=persona,
                         image_ref=image_ref)


def _read_lines(path: Path) -> List[str]:
    if not path.exists():
        return []
    data = path.read_text(encoding="utf-8")
    lines = data.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    elif lines:
        lines.pop()  # torn trailing write, drop it
    return lines


def _append_batch(path: Path, payload: str) -> None:
    with open(path, "a", encoding="utf-8") as f:
        f.write(payload)
        f.flush()
        os.fsync(f.fileno())


class LogDir:
    """One event/sighting log on disk, with an in-memory time index per AP."""

    def __init__(self, path: Path):
        self.path = Path(path)
        if not (self.path / "meta.json").exists():
            raise NotFoundError(f"no log at {self.path}")
        self.meta = json.loads((self.path / "meta.json").read_text())
        self._lock = threading.Lock()
        self._events_by_ap: Dict[str, List[ProbeEvent]] = {}
        self._sightings_by_ap: Dict[str, List[SightingEvent]] = {}
        self._load()

    @classmethod
    def create(cls, path: Path, meta: Optional[dict] = None) -> "LogDir":
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        doc = {"schema_version": META_SCHEMA_VERSION, "created_at": time.time()}
        doc.update(meta or {})
        (path / "meta.json").write_text(json.dumps(doc, indent=2, sort_keys=True))
        (path / "events.tsv").touch()
        (path / "sightings.tsv").touch()
        return cls(path)

    def _load(self) -> None:
        self._events_by_ap.clear()
        for line in _read_lines(self.path / "events.tsv"):
            ev = parse_event_line(line)
            self._events_by_ap.setdefault(ev.ap_id, []).append(ev)
        for evs in self._events_by_ap.values():
            evs.sort(key=lambda e: e.timestamp)
        self._sightings_by_ap.clear()
        for line in _read_lines(self.path / "sightings.tsv"):
            s = parse_sighting_line(line)
            self._sightings_by_ap.setdefault(s.ap_id, []).append(s)
        for sl in self._sightings_by_ap.values():
            sl.sort(key=lambda s: s.timestamp)

    @staticmethod
    def _check_batch_order(timestamps: Sequence[float]) -> None:
        if any(b < a for a, b in zip(timestamps, timestamps[1:])):
            raise ValidationError("batch must be time-ordered")

    def append_events(self, events: Sequence[ProbeEvent]) -> int:
        self._check_batch_order([e.timestamp for e in events])
        if not events:
            return 0
        payload = "".join(format_event_line(e) for e in events)
        with self._lock:
            _append_batch(self.path / "events.tsv", payload)
            for ev in events:
                self._events_by_ap.setdefault(ev.ap_id, []).append(ev)
            for evs in self._events_by_ap.values():
                evs.sort(key=lambda e: e.timestamp)
        return len(events)

    def append_sightings(self, sightings: Sequence[SightingEvent]) -> int:
        self._check_batch_order([s.timestamp for s in sightings])
        if not sightings:
            return 0
        payload = "".join(format_sighting_line(s) for s in sightings)
        with self._lock:
            _append_batch(self.path / "sightings.tsv", payload)
            for s in sightings:
                self._sightings_by_ap.setdefault(s.ap_id, []).append(s)
            for sl in self._sightings_by_ap.values():
                sl.sort(key=lambda s: s.timestamp)
        return len(sightings)

    def query_events(self, ap_id: str, t_from: float, t_to: float) -> List[ProbeEvent]:
        if not t_from < t_to:
            raise ValidationError(f"need from < to, got [{t_from}, {t_to})")
        evs = self._events_by_ap.get(ap_id, [])
        ts = [e.timestamp for e in evs]
        return evs[bisect_left(ts, t_from):bisect_left(ts, t_to)]

    def query_sightings(self, ap_id: str, t_from: float, t_to: float) -> List[SightingEvent]:
        if not t_from < t_to:
            raise ValidationError(f"need from < to, got [{t_from}, {t_to})")
        sl = self._sightings_by_ap.get(ap_id, [])
        ts = [s.timestamp for s in sl]
        return sl[bisect_left(ts, t_from):bisect_left(ts, t_to)]

    def all_events(self) -> List[ProbeEvent]:
        out: List[ProbeEvent] = []
        for evs in self._events_by_ap.values():
            out.extend(evs)
        out.sort(key=lambda e: (e.timestamp, e.ap_id, e.mac))
        return out

    def all_sightings(self) -> List[SightingEvent]:
        out: List[SightingEvent] = []
        for sl in self._sightings_by_ap.values():
            out.extend(sl)
        out.sort(key=lambda s: (s.timestamp, s.ap_id, s.persona_id))
        return out

    def aps(self) -> List[str]:
        listed = self.meta.get("ap_ids")
        if listed:
            return sorted(listed)
        return sorted(set(self._events_by_ap) | set(self._sightings_by_ap))

    def time_span(self) -> Tuple[float, float]:
        evs = self.all_events()
        sl = self.all_sightings()
        stamps = [e.timestamp for e in evs] + [s.timestamp for s in sl]
        if not stamps:
            return (0.0, 0.0)
        return (min(stamps), max(stamps))

    def save_truth(self, doc: dict) -> None:
        (self.path / "truth.json").write_text(json.dumps(doc, indent=2, sort_keys=True))

    def load_truth(self) -> dict:
        path = self.path / "truth.json"
        if not path.exists():
            raise NotFoundError(f"no ground truth stored at {path}")
        return json.loads(path.read_text())


@dataclass(frozen=True)
class Investigation:
    """One operator workflow: marked intervals, config, and (once run) the result."""

    id: str
    log_id: str
    staying_intervals: Tuple[StayingInterval, ...] = ()
    config: FilterConfig = FilterConfig()
    result: Optional[SuspiciousRateTable] = None
    created_at: float = 0.0
    status: str = STATUS_DRAFT
    version: int = 1

    def __post_init__(self):
        if self.status not in (STATUS_DRAFT, STATUS_COMPLETE):
            raise ValidationError(f"unknown investigation status {self.status!r}")
        if (self.result is not None) != (self.status == STATUS_COMPLETE):
            raise ValidationError("result must be present exactly when status is complete")

    def to_doc(self) -> dict:
        return {
            "schema_version": INVESTIGATION_SCHEMA_VERSION,
            "id": self.id,
            "log_id": self.log_id,
            "staying_intervals": [
                {"ap_id": iv.ap_id, "enter": iv.enter, "exit": iv.exit}
                for iv in self.staying_intervals
            ],
            "config": self.config.to_doc(),
            "result": self.result.to_doc() if self.result is not None else None,
            "created_at": self.created_at,
            "status": self.status,
            "version": self.version,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "Investigation":
        result = doc.get("result")
        return cls(
            id=doc["id"],
            log_id=doc["log_id"],
            staying_intervals=tuple(
                StayingInterval(ap_id=iv["ap_id"], enter=float(iv["enter"]),
                                exit=float(iv["exit"]))
                for iv in doc["staying_intervals"]
            ),
            config=FilterConfig.from_doc(doc["config"]),
            result=SuspiciousRateTable.from_doc(result) if result is not None else None,
            created_at=float(doc.get("created_at", 0.0)),
            status=doc["status"],
            version=int(doc.get("version", 1)),
        )


class Store:
    """Root directory holding scenarios, logs, and investigations."""

    def __init__(self, root: Path):
        self.root = Path(root)
        for sub in ("scenarios", "logs", "investigations"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._log_cache: Dict[str, LogDir] = {}

    def _next_id(self, directory: Path, prefix: str) -> str:
        taken = []
        for entry in directory.iterdir():
            name = entry.name.removesuffix(".json")
            if name.startswith(prefix + "-"):
                try:
                    taken.append(int(name.split("-")[-1]))
                except ValueError:
                    pass
        return f"{prefix}-{(max(taken) + 1 if taken else 1):06d}"

    # -- scenarios --

    def save_scenario(self, doc: dict) -> str:
        from .simulate import scenario_from_doc
        scenario_from_doc(doc)  # validate before persisting
        with self._lock:
            scenario_id = self._next_id(self.root / "scenarios", "scn")
            (self.root / "scenarios" / f"{scenario_id}.json").write_text(
                json.dumps(doc, indent=2, sort_keys=True))
        return scenario_id

    def load_scenario(self, scenario_id: str) -> dict:
        path = self.root / "scenarios" / f"{scenario_id}.json"
        if not path.exists():
            raise NotFoundError(f"unknown scenario {scenario_id!r}")
        return json.loads(path.read_text())

    # -- logs --

    def create_log(self, meta: Optional[dict] = None) -> str:
        with self._lock:
            log_id = self._next_id(self.root / "logs", "log")
            log = LogDir.create(self.root / "logs" / log_id, meta)
            self._log_cache[log_id] = log
        return log_id

    def log(self, log_id: str) -> LogDir:
        cached = self._log_cache.get(log_id)
        if cached is not None:
            return cached
        path = self.root / "logs" / log_id
        if not (path / "meta.json").exists():
            raise NotFoundError(f"unknown log {log_id!r}")
        log = LogDir(path)
        self._log_cache[log_id] = log
        return log

    def list_logs(self) -> List[str]:
        return sorted(p.name for p in (self.root / "logs").iterdir() if p.is_dir())

    def append_events(self, log_id: str, events: Sequence[ProbeEvent]) -> int:
        return self.log(log_id).append_events(events)

    def query_events(self, log_id: str, ap_id: str, t_from: float, t_to: float
                     ) -> List[ProbeEvent]:
        return self.log(log_id).query_events(ap_id, t_from, t_to)

    # -- investigations --

    def create_investigation(self, log_id: str, config: Optional[FilterConfig] = None
                             ) -> Investigation:
        self.log(log_id)  # raises NotFoundError for unknown logs
        with self._lock:
            inv_id = self._next_id(self.root / "investigations", "inv")
            inv = Investigation(id=inv_id, log_id=log_id,
                                config=config or FilterConfig(),
                                created_at=time.time())
            self._write_investigation(inv)
        return inv

    def _write_investigation(self, inv: Investigation) -> None:
        path = self.root / "investigations" / f"{inv.id}.json"
        path.write_text(json.dumps(inv.to_doc(), indent=2, sort_keys=True))

    def save_investigation(self, inv: Investigation) -> None:
        path = self.root / "investigations" / f"{inv.id}.json"
        if not path.exists():
            raise NotFoundError(f"unknown investigation {inv.id!r}")
        self._write_investigation(inv)

    def update_investigation(self, inv_id: str, expected_version: int, **changes
                             ) -> Investigation:
        """Optimistic concurrency: apply `changes` only at the expected version."""
        with self._lock:
            inv = self.load_investigation(inv_id)
            if inv.version != expected_version:
                raise ConflictError(
                    f"investigation {inv_id!r} is at version {inv.version}, "
                    f"update expected {expected_version}")
            inv = replace(inv, version=inv.version + 1, **changes)
            self._write_investigation(inv)
        return inv

    def load_investigation(self, inv_id: str) -> Investigation:
        path = self.root / "investigations" / f"{inv_id}.json"
        if not path.exists():
            raise NotFoundError(f"unknown investigation {inv_id!r}")
        return Investigation.from_doc(json.loads(path.read_text()))

    def list_investigations(self) -> List[str]:
        return sorted(p.stem for p in (self.root / "investigations").glob("*.json"))
