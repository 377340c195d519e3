"""Shared fixtures and small builders for the test suite."""
from __future__ import annotations

import pytest

from probesift.model import MacAddress, ProbeEvent, StayingInterval


def mac(i: int) -> MacAddress:
    """Deterministic test MAC from a small integer."""
    return MacAddress(bytes([0x02, 0x00, 0x00, 0x00, i >> 8 & 0xFF, i & 0xFF]))


def ev(t: float, ap: str = "ap1", m: MacAddress = None, rssi: float = -50.0,
       ssid=None) -> ProbeEvent:
    return ProbeEvent(timestamp=t, ap_id=ap, mac=m if m is not None else mac(1),
                      rssi=rssi, ssid=ssid)


@pytest.fixture
def staying():
    return StayingInterval(ap_id="ap1", enter=1000.0, exit=1120.0)


@pytest.fixture
def tiny_scenario_doc():
    """Two APs, three devices, short duration; fast to simulate in service/CLI tests.

    Noise-free, steep path loss (hearing radius ~27 m): the walker dwells at
    ap1 over [~100, 200) and at ap2 over [~300, 400) and is out of range
    otherwise, so those intervals make the walker a candidate at both APs.
    """
    return {
        "schema_version": 1,
        "seed": 424242,
        "duration": 600.0,
        "rf": {"rssi_at_1m": -40.0, "path_loss_exponent": 3.5,
               "noise_sigma": 0.0, "sensitivity_floor": -90.0},
        "aps": [
            {"ap_id": "ap1", "x": 0.0, "y": 0.0, "camera_radius": 5.0},
            {"ap_id": "ap2", "x": 200.0, "y": 0.0, "camera_radius": 5.0},
        ],
        "devices": [
            {
                "persona_id": "p-walker",
                "true_mac": "aa:bb:cc:00:00:01",
                "role": "culprit",
                "trajectory": [[0.0, -350.0, 0.0], [100.0, 0.0, 0.0], [200.0, 0.0, 0.0],
                               [300.0, 200.0, 0.0], [400.0, 200.0, 0.0],
                               [520.0, 550.0, 0.0]],
                "emission": {"min_interval": 2.0, "max_interval": 6.0},
                "mac_policy": "static",
            },
            {
                "persona_id": "p-parked",
                "true_mac": "aa:bb:cc:00:00:02",
                "role": "stable",
                "trajectory": [[0.0, 3.0, 4.0]],
                "emission": {"min_interval": 5.0, "max_interval": 15.0},
                "mac_policy": "static",
                "ssid": "kiosk-net",
            },
            {
                "persona_id": "p-remote",
                "true_mac": "aa:bb:cc:00:00:03",
                "role": "long_distance",
                "trajectory": [[0.0, 12.0, 16.0]],
                "emission": {"min_interval": 5.0, "max_interval": 15.0},
                "mac_policy": "static",
            },
        ],
    }
