#!/usr/bin/env python3
"""
The investigation workflow over HTTP
====================================

Drives the service end to end in-process: upload a scenario, materialize a
log, browse sightings, mark staying intervals, run the filter, and fetch
the ranked table. This is exactly what the browser console does.

To run the same thing against a real server: `probesift serve` and point
the frontend (see frontend/README.md) at it.
"""
import json
import tempfile

from fastapi.testclient import TestClient

from probesift.experiment import make_demo_scenario
from probesift.service import ServiceSettings, create_app
from probesift.simulate import scenario_to_doc

with tempfile.TemporaryDirectory() as data_dir:
    app = create_app(ServiceSettings(data_dir=data_dir, test_mode=True))
    with TestClient(app) as client:
        doc = scenario_to_doc(make_demo_scenario())
        sid = client.post("/scenarios", json=doc).json()["scenario_id"]
        sim = client.post(f"/scenarios/{sid}/simulate").json()
        print(f"scenario {sid} -> log {sim['log_id']}: "
              f"{sim['event_count']} events, {sim['sighting_count']} sightings")

        aps = client.get(f"/logs/{sim['log_id']}/aps").json()["aps"]
        print("APs:", ", ".join(aps))

        # Browse one AP's sighting timeline the way the console would.
        sightings = client.get(f"/logs/{sim['log_id']}/sightings",
                               params={"ap": aps[0]}).json()["sightings"]
        print(f"{aps[0]} timeline: {len(sightings)} sightings, first at "
              f"t={sightings[0]['timestamp']:.0f} ({sightings[0]['persona_id']})")

        # The test-mode truth endpoint stands in for an operator reading photos.
        truth = client.get(f"/scenarios/{sid}/truth").json()
        intervals = [{"ap_id": ap,
                      "enter": truth["staying"][ap][0][0],
                      "exit": truth["staying"][ap][0][1]} for ap in aps]

        inv = client.post("/investigations", json={"log_id": sim["log_id"]}).json()
        version = client.put(f"/investigations/{inv['id']}/intervals",
                             json={"version": inv["version"],
                                   "intervals": intervals}).json()["version"]
        run = client.post(f"/investigations/{inv['id']}/run",
                          json={"version": version}).json()
        print(f"\ninvestigation {inv['id']} complete; ranked rows:")
        for row in run["result"]["rows"]:
            print(f"  {row['mac']}  sum={row['sum']:.2f}")

        result = client.get(f"/investigations/{inv['id']}/result")
        print("\ncanonical result bytes (first 120):")
        print(result.content[:120].decode() + "...")
