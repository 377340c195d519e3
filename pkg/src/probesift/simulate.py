"""Deterministic crowd/RF simulator producing probe-event and sighting logs.

Replaces a physical AP testbed: personas walk piecewise-linear trajectories,
their devices emit probe requests at random intervals, and every AP receives
each broadcast independently through a log-distance path-loss model with
Gaussian shadowing. Cameras are modelled as 1 Hz presence sampling within a
radius around each AP. Identical seeds give bit-identical output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ValidationError
from .model import MacAddress, ProbeEvent, SightingEvent, is_mac_rendering, parse_mac

SCENARIO_SCHEMA_VERSION = 1

ROLE_CULPRIT = "culprit"
ROLE_STABLE = "stable"
ROLE_LONG_DISTANCE = "long_distance"
ROLE_PARTIALLY_SHORT = "partially_short"
ROLE_FULLY_SHORT = "fully_short"
_ROLES = (ROLE_CULPRIT, ROLE_STABLE, ROLE_LONG_DISTANCE, ROLE_PARTIALLY_SHORT, ROLE_FULLY_SHORT)

MAC_STATIC = "static"
MAC_RANDOMIZE_PER_PROBE = "randomize_per_probe"
MAC_RANDOMIZE_EVERY = "randomize_every"

Waypoint = Tuple[float, float, float]  # (t, x, y)


@dataclass(frozen=True)
class RfParams:
    """Log-distance path loss: rssi_at_1m - 10*exponent*log10(d) + shadowing."""

    rssi_at_1m: float = -40.0
    path_loss_exponent: float = 2.0
    noise_sigma: float = 4.0
    sensitivity_floor: float = -90.0

    def __post_init__(self):
        if not self.sensitivity_floor < self.rssi_at_1m:
            raise ValidationError("sensitivity_floor must lie below rssi_at_1m")
        if self.noise_sigma < 0:
            raise ValidationError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


@dataclass(frozen=True)
class ApPlacement:
    ap_id: str
    x: float
    y: float
    camera_radius: float = 5.0

    def __post_init__(self):
        if not self.ap_id:
            raise ValidationError("ap_id must be non-empty")
        if self.camera_radius < 0:
            raise ValidationError(f"camera_radius must be >= 0, got {self.camera_radius}")


@dataclass(frozen=True)
class EmissionModel:
    """Probe bursts separated by gaps drawn uniformly from [min_interval, max_interval]."""

    min_interval: float
    max_interval: float

    def __post_init__(self):
        if self.min_interval < 0:
            raise ValidationError(f"min_interval must be >= 0, got {self.min_interval}")
        if self.min_interval > self.max_interval:
            raise ValidationError(
                f"min_interval {self.min_interval} exceeds max_interval {self.max_interval}")
        if self.max_interval <= 0:
            raise ValidationError("max_interval must be > 0")


@dataclass(frozen=True)
class MacPolicy:
    """How the device picks sender MACs: keep the factory one or randomize."""

    kind: str = MAC_STATIC
    period: Optional[float] = None

    def __post_init__(self):
        if self.kind not in (MAC_STATIC, MAC_RANDOMIZE_PER_PROBE, MAC_RANDOMIZE_EVERY):
            raise ValidationError(f"unknown mac policy {self.kind!r}")
        if self.kind == MAC_RANDOMIZE_EVERY:
            if self.period is None or not self.period > 0:
                raise ValidationError("randomize_every needs a period > 0")
        elif self.period is not None:
            raise ValidationError(f"mac policy {self.kind!r} takes no period")


@dataclass(frozen=True)
class DeviceProfile:
    """One persona and the device they carry."""

    persona_id: str
    true_mac: MacAddress
    role: str
    trajectory: Tuple[Waypoint, ...]
    emission: Optional[EmissionModel] = None  # None = Wi-Fi silent
    mac_policy: MacPolicy = MacPolicy()
    ssid: Optional[str] = None

    def __post_init__(self):
        if not self.persona_id:
            raise ValidationError("persona_id must be non-empty")
        if is_mac_rendering(self.persona_id):
            raise ValidationError(
                f"persona_id {self.persona_id!r} collides with the MAC address namespace")
        if self.role not in _ROLES:
            raise ValidationError(f"unknown device role {self.role!r}")
        if not self.trajectory:
            raise ValidationError(f"device {self.persona_id!r} needs at least one waypoint")
        times = [w[0] for w in self.trajectory]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValidationError(
                f"device {self.persona_id!r} waypoints must be strictly increasing in time")


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one simulated incident, including the seed."""

    ap_placements: Tuple[ApPlacement, ...]
    devices: Tuple[DeviceProfile, ...]
    rf: RfParams
    duration: float
    seed: int

    def __post_init__(self):
        if not self.duration > 0:
            raise ValidationError(f"duration must be > 0, got {self.duration}")
        ap_ids = [ap.ap_id for ap in self.ap_placements]
        if len(set(ap_ids)) != len(ap_ids):
            raise ValidationError("ap_ids must be unique")
        personas = [d.persona_id for d in self.devices]
        if len(set(personas)) != len(personas):
            raise ValidationError("persona_ids must be unique")
        culprits = [d for d in self.devices if d.role == ROLE_CULPRIT]
        if len(culprits) != 1:
            raise ValidationError(f"scenario needs exactly one culprit, got {len(culprits)}")

    @property
    def culprit(self) -> DeviceProfile:
        return next(d for d in self.devices if d.role == ROLE_CULPRIT)


@dataclass(frozen=True)
class GroundTruth:
    """What the investigation is later graded against; never exposed to operators."""

    culprit_persona: str
    mac_history: Tuple[Tuple[float, MacAddress], ...]
    staying: Dict[str, Tuple[Tuple[float, float], ...]]

    def macs(self) -> set:
        return {mac for _, mac in self.mac_history}

    def to_doc(self) -> dict:
        return {
            "schema_version": SCENARIO_SCHEMA_VERSION,
            "culprit_persona": self.culprit_persona,
            "mac_history": [[t, str(mac)] for t, mac in self.mac_history],
            "staying": {ap: [[a, b] for a, b in spans] for ap, spans in self.staying.items()},
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "GroundTruth":
        return cls(
            culprit_persona=doc["culprit_persona"],
            mac_history=tuple((float(t), parse_mac(m)) for t, m in doc["mac_history"]),
            staying={ap: tuple((float(a), float(b)) for a, b in spans)
                     for ap, spans in doc["staying"].items()},
        )


def position_at(trajectory: Sequence[Waypoint], t: float) -> Tuple[float, float]:
    """Linear interpolation between waypoints, clamped to the endpoints."""
    if not trajectory:
        raise ValidationError("empty trajectory")
    times = [w[0] for w in trajectory]
    xs = [w[1] for w in trajectory]
    ys = [w[2] for w in trajectory]
    return float(np.interp(t, times, xs)), float(np.interp(t, times, ys))


def rssi_at(distance_m: float, rf: RfParams, noise_draw: float = 0.0) -> float:
    """Received power in dBm at `distance_m`; distances under 1 m clamp to 1 m."""
    if distance_m < 0:
        raise ValidationError(f"distance must be >= 0, got {distance_m}")
    return (rf.rssi_at_1m
            - 10.0 * rf.path_loss_exponent * math.log10(max(distance_m, 1.0))
            + rf.noise_sigma * noise_draw)


def emission_times(profile: DeviceProfile, duration: float, rng) -> List[float]:
    """Emission instants in [0, duration): a uniform start offset, then uniform gaps."""
    if profile.emission is None:
        return []
    em = profile.emission
    t = float(rng.uniform(0.0, em.min_interval))
    out: List[float] = []
    while t < duration:
        out.append(t)
        t += float(rng.uniform(em.min_interval, em.max_interval))
    return out


def random_local_mac(rng: np.random.Generator) -> MacAddress:
    """Fresh locally-administered unicast MAC (46 random bits)."""
    raw = rng.integers(0, 256, size=6, dtype=np.uint8).tobytes()
    first = (raw[0] & 0xFC) | 0x02
    return MacAddress(bytes([first]) + raw[1:])


def _macs_for_emissions(profile: DeviceProfile, times: Sequence[float], duration: float,
                        rng: np.random.Generator):
    """Per-emission sender MACs plus the (valid_from, mac) history partitioning [0, duration)."""
    policy = profile.mac_policy
    if policy.kind == MAC_STATIC or not times:
        history = [(0.0, profile.true_mac)]
        return [profile.true_mac] * len(times), history
    if policy.kind == MAC_RANDOMIZE_PER_PROBE:
        macs = [random_local_mac(rng) for _ in times]
        history = [(0.0, macs[0])]
        history.extend((t, mac) for t, mac in zip(times[1:], macs[1:]))
        return macs, history
    period = float(policy.period)
    n_epochs = max(1, math.ceil(duration / period))
    epoch_macs = [random_local_mac(rng) for _ in range(n_epochs)]
    macs = [epoch_macs[min(int(t // period), n_epochs - 1)] for t in times]
    history = [(i * period, m) for i, m in enumerate(epoch_macs) if i * period < duration]
    return macs, history


def _radius_crossings(trajectory: Sequence[Waypoint], duration: float,
                      center: Tuple[float, float], radius: float) -> List[Tuple[float, float]]:
    """Exact time spans where the (clamped) trajectory sits within `radius` of `center`.

    Squared distance is quadratic along each linear segment, so the spans come
    from per-segment root finding rather than sampling.
    """
    cx, cy = center
    pts: List[Waypoint] = list(trajectory)
    if pts[0][0] > 0.0:
        pts.insert(0, (0.0, pts[0][1], pts[0][2]))
    if pts[-1][0] < duration:
        pts.append((duration, pts[-1][1], pts[-1][2]))

    spans: List[Tuple[float, float]] = []
    for (t1, x1, y1), (t2, x2, y2) in zip(pts, pts[1:]):
        if t1 >= duration:
            break
        seg_end = min(t2, duration)
        ax, ay = x1 - cx, y1 - cy
        bx, by = x2 - x1, y2 - y1
        a = bx * bx + by * by
        b = 2.0 * (ax * bx + ay * by)
        c = ax * ax + ay * ay - radius * radius
        if a == 0.0:
            inside = (0.0, 1.0) if c <= 0.0 else None
        else:
            disc = b * b - 4.0 * a * c
            if disc < 0.0:
                inside = None
            else:
                sq = math.sqrt(disc)
                s1 = (-b - sq) / (2.0 * a)
                s2 = (-b + sq) / (2.0 * a)
                lo, hi = max(s1, 0.0), min(s2, 1.0)
                inside = (lo, hi) if lo < hi else None
        if inside is None:
            continue
        lo, hi = inside
        span = (t1 + lo * (t2 - t1), min(t1 + hi * (t2 - t1), seg_end))
        if span[1] > span[0]:
            spans.append(span)

    merged: List[Tuple[float, float]] = []
    for a_, b_ in sorted(spans):
        if merged and a_ <= merged[-1][1] + 1e-9:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b_))
        else:
            merged.append((a_, b_))
    return [(max(a_, 0.0), min(b_, duration)) for a_, b_ in merged if b_ > a_]


def run_scenario(scenario: Scenario) -> Tuple[List[ProbeEvent], List[SightingEvent], GroundTruth]:
    """Materialize a scenario into probe events, sightings, and ground truth.

    A pure function of the scenario value: reception per AP is independent,
    probes below the sensitivity floor are dropped, and all randomness comes
    from per-device streams derived from the scenario seed.
    """
    rf = scenario.rf
    ap_x = np.array([ap.x for ap in scenario.ap_placements])
    ap_y = np.array([ap.y for ap in scenario.ap_placements])

    seed_seq = np.random.SeedSequence(scenario.seed)
    device_seeds = seed_seq.spawn(len(scenario.devices))

    events: List[ProbeEvent] = []
    sightings: List[SightingEvent] = []
    truth_history: Tuple[Tuple[float, MacAddress], ...] = ()
    randomized_macs: List[MacAddress] = []

    sample_grid = np.arange(0.0, scenario.duration, 1.0)

    for profile, dev_seed in zip(scenario.devices, device_seeds):
        rng = np.random.Generator(np.random.PCG64(dev_seed))
        times = emission_times(profile, scenario.duration, rng)
        macs, history = _macs_for_emissions(profile, times, scenario.duration, rng)
        if profile.mac_policy.kind != MAC_STATIC:
            randomized_macs.extend(m for _, m in history)
        if profile.role == ROLE_CULPRIT:
            truth_history = tuple(history)

        traj_t = np.array([w[0] for w in profile.trajectory])
        traj_x = np.array([w[1] for w in profile.trajectory])
        traj_y = np.array([w[2] for w in profile.trajectory])

        if times:
            t_arr = np.asarray(times)
            px = np.interp(t_arr, traj_t, traj_x)
            py = np.interp(t_arr, traj_t, traj_y)
            for ap_idx, ap in enumerate(scenario.ap_placements):
                dist = np.hypot(px - ap_x[ap_idx], py - ap_y[ap_idx])
                mean = rf.rssi_at_1m - 10.0 * rf.path_loss_exponent * np.log10(
                    np.maximum(dist, 1.0))
                rssi = mean + rf.noise_sigma * rng.standard_normal(len(times))
                for i in np.flatnonzero(rssi >= rf.sensitivity_floor):
                    events.append(ProbeEvent(timestamp=float(t_arr[i]), ap_id=ap.ap_id,
                                             mac=macs[i], rssi=float(rssi[i]),
                                             ssid=profile.ssid))

        gx = np.interp(sample_grid, traj_t, traj_x)
        gy = np.interp(sample_grid, traj_t, traj_y)
        for ap_idx, ap in enumerate(scenario.ap_placements):
            dist = np.hypot(gx - ap_x[ap_idx], gy - ap_y[ap_idx])
            for i in np.flatnonzero(dist <= ap.camera_radius):
                t = float(sample_grid[i])
                sightings.append(SightingEvent(
                    timestamp=t, ap_id=ap.ap_id, persona_id=profile.persona_id,
                    image_ref=f"img-{ap.ap_id}-{profile.persona_id}-{int(t):06d}"))

    # 46 random bits make a collision a virtual impossibility at desk scale.
    assert len(set(randomized_macs)) == len(randomized_macs), \
        "randomized MAC collision; scenario too large for the MAC space"

    culprit = scenario.culprit
    staying = {
        ap.ap_id: tuple(_radius_crossings(culprit.trajectory, scenario.duration,
                                          (ap.x, ap.y), ap.camera_radius))
        for ap in scenario.ap_placements
    }
    truth = GroundTruth(culprit_persona=culprit.persona_id,
                        mac_history=truth_history or ((0.0, culprit.true_mac),),
                        staying=staying)

    events.sort(key=lambda e: (e.timestamp, e.ap_id, e.mac))
    sightings.sort(key=lambda s: (s.timestamp, s.ap_id, s.persona_id))
    return events, sightings, truth


# -- scenario (de)serialization ------------------------------------------------

def _emission_to_doc(em: Optional[EmissionModel]):
    if em is None:
        return "silent"
    return {"min_interval": em.min_interval, "max_interval": em.max_interval}


def _emission_from_doc(doc) -> Optional[EmissionModel]:
    if doc == "silent" or doc is None:
        return None
    if not isinstance(doc, dict):
        raise ValidationError(f"emission must be 'silent' or an object, got {doc!r}")
    return EmissionModel(min_interval=float(doc["min_interval"]),
                         max_interval=float(doc["max_interval"]))


def _policy_to_doc(policy: MacPolicy):
    if policy.kind == MAC_RANDOMIZE_EVERY:
        return {"randomize_every": policy.period}
    return policy.kind


def _policy_from_doc(doc) -> MacPolicy:
    if doc is None:
        return MacPolicy()
    if isinstance(doc, str):
        return MacPolicy(kind=doc)
    if isinstance(doc, dict) and "randomize_every" in doc:
        return MacPolicy(kind=MAC_RANDOMIZE_EVERY, period=float(doc["randomize_every"]))
    raise ValidationError(f"unrecognized mac_policy: {doc!r}")


def scenario_to_doc(scenario: Scenario) -> dict:
    return {
        "schema_version": SCENARIO_SCHEMA_VERSION,
        "seed": scenario.seed,
        "duration": scenario.duration,
        "rf": {
            "rssi_at_1m": scenario.rf.rssi_at_1m,
            "path_loss_exponent": scenario.rf.path_loss_exponent,
            "noise_sigma": scenario.rf.noise_sigma,
            "sensitivity_floor": scenario.rf.sensitivity_floor,
        },
        "aps": [
            {"ap_id": ap.ap_id, "x": ap.x, "y": ap.y, "camera_radius": ap.camera_radius}
            for ap in scenario.ap_placements
        ],
        "devices": [
            {
                "persona_id": d.persona_id,
                "true_mac": str(d.true_mac),
                "role": d.role,
                "trajectory": [[t, x, y] for t, x, y in d.trajectory],
                "emission": _emission_to_doc(d.emission),
                "mac_policy": _policy_to_doc(d.mac_policy),
                **({"ssid": d.ssid} if d.ssid is not None else {}),
            }
            for d in scenario.devices
        ],
    }


def scenario_from_doc(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ValidationError("scenario must be an object")
    version = doc.get("schema_version")
    if version != SCENARIO_SCHEMA_VERSION:
        raise ValidationError(f"unsupported scenario schema_version: {version!r}")
    try:
        rf_doc = doc.get("rf", {})
        rf = RfParams(
            rssi_at_1m=float(rf_doc.get("rssi_at_1m", -40.0)),
            path_loss_exponent=float(rf_doc.get("path_loss_exponent", 2.0)),
            noise_sigma=float(rf_doc.get("noise_sigma", 4.0)),
            sensitivity_floor=float(rf_doc.get("sensitivity_floor", -90.0)),
        )
        aps = tuple(
            ApPlacement(ap_id=str(a["ap_id"]), x=float(a["x"]), y=float(a["y"]),
                        camera_radius=float(a.get("camera_radius", 5.0)))
            for a in doc["aps"]
        )
        devices = tuple(
            DeviceProfile(
                persona_id=str(d["persona_id"]),
                true_mac=parse_mac(d["true_mac"]),
                role=str(d["role"]),
                trajectory=tuple((float(t), float(x), float(y)) for t, x, y in d["trajectory"]),
                emission=_emission_from_doc(d.get("emission", "silent")),
                mac_policy=_policy_from_doc(d.get("mac_policy")),
                ssid=d.get("ssid"),
            )
            for d in doc["devices"]
        )
        return Scenario(ap_placements=aps, devices=devices, rf=rf,
                        duration=float(doc["duration"]), seed=int(doc["seed"]))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed scenario document: {exc!r}") from exc
