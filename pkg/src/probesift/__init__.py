"""probesift: candidate-device enumeration from Wi-Fi probe-request logs.

The filter engine scores every MAC seen during an operator-marked staying
interval by how consistently it vanishes outside that interval, gates on
staying-time RSSI, and keeps only MACs that qualify at every target AP.
A deterministic crowd/RF simulator, a file-backed event store, an HTTP
service, and a batch CLI wrap the engine into an end-to-end workflow.
"""
from .errors import (
    ConflictError,
    MacParseError,
    NotFoundError,
    ProbesiftError,
    ValidationError,
)
from .filtering import (
    FilterConfig,
    PerApRates,
    SuspiciousRateTable,
    TableRow,
    extract_candidates,
    fuse_across_aps,
    linear_weighting,
    max_attainable_rate,
    per_ap_suspicious_rates,
    run_filter,
    slot_partition,
)
from .model import (
    MacAddress,
    ProbeEvent,
    SightingEvent,
    StayingInterval,
    TimeSlot,
    in_half_open,
    parse_mac,
)
from .simulate import (
    ApPlacement,
    DeviceProfile,
    EmissionModel,
    GroundTruth,
    MacPolicy,
    RfParams,
    Scenario,
    emission_times,
    position_at,
    rssi_at,
    run_scenario,
    scenario_from_doc,
    scenario_to_doc,
)

__version__ = "0.1.0"

__all__ = [
    "ApPlacement",
    "ConflictError",
    "DeviceProfile",
    "EmissionModel",
    "FilterConfig",
    "GroundTruth",
    "MacAddress",
    "MacParseError",
    "MacPolicy",
    "NotFoundError",
    "PerApRates",
    "ProbeEvent",
    "ProbesiftError",
    "RfParams",
    "Scenario",
    "SightingEvent",
    "StayingInterval",
    "SuspiciousRateTable",
    "TableRow",
    "TimeSlot",
    "ValidationError",
    "emission_times",
    "extract_candidates",
    "fuse_across_aps",
    "in_half_open",
    "linear_weighting",
    "max_attainable_rate",
    "parse_mac",
    "per_ap_suspicious_rates",
    "position_at",
    "rssi_at",
    "run_filter",
    "run_scenario",
    "scenario_from_doc",
    "scenario_to_doc",
    "slot_partition",
]
