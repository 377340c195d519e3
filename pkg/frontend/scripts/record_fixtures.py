#!/usr/bin/env python3
"""Record service responses and CLI outputs as console test fixtures.

Run from the frontend directory after changing the engine or demo scenario:

    python3 scripts/record_fixtures.py

Asserts service/CLI byte parity while recording, so the fixtures can never
drift from what the batch tool prints.
"""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from probesift.experiment import make_demo_scenario
from probesift.service import ServiceSettings, create_app
from probesift.simulate import scenario_to_doc

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main() -> int:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    doc = scenario_to_doc(make_demo_scenario())

    with tempfile.TemporaryDirectory() as tmp_str:
        tmp = Path(tmp_str)
        app = create_app(ServiceSettings(data_dir=str(tmp / "data"), test_mode=True))
        with TestClient(app) as client:
            sid = client.post("/scenarios", json=doc).json()["scenario_id"]
            log_id = client.post(f"/scenarios/{sid}/simulate").json()["log_id"]

            aps_resp = client.get(f"/logs/{log_id}/aps")
            (FIXTURES / "aps.json").write_bytes(aps_resp.content)
            aps = aps_resp.json()["aps"]
            for ap in aps:
                resp = client.get(f"/logs/{log_id}/sightings", params={"ap": ap})
                (FIXTURES / f"sightings_{ap}.json").write_bytes(resp.content)

            truth = client.get(f"/scenarios/{sid}/truth").json()
            intervals = []
            for ap in aps:
                enter, exit_ = max(truth["staying"][ap], key=lambda s: s[1] - s[0])
                # the console snaps marks to whole seconds; record likewise
                intervals.append({"ap_id": ap, "enter": float(round(enter)),
                                  "exit": float(round(exit_))})
            (FIXTURES / "intervals.json").write_text(json.dumps(
                {"schema_version": 1, "intervals": intervals}, indent=2))

            inv = client.post("/investigations", json={"log_id": log_id})
            (FIXTURES / "investigation_created.json").write_bytes(inv.content)
            inv_doc = inv.json()

            put = client.put(f"/investigations/{inv_doc['id']}/intervals",
                             json={"version": inv_doc["version"],
                                   "intervals": intervals})
            (FIXTURES / "investigation_after_intervals.json").write_bytes(put.content)

            run = client.post(f"/investigations/{inv_doc['id']}/run",
                              json={"version": put.json()["version"]})
            (FIXTURES / "run_response.json").write_bytes(run.content)

            result = client.get(f"/investigations/{inv_doc['id']}/result")
            (FIXTURES / "result.json").write_bytes(result.content)

            strict = {"slot_len": 30.0, "slots_per_side": 30, "rssi_threshold": -5.0,
                      "rate_threshold": None, "sides": "both"}
            put2 = client.put(f"/investigations/{inv_doc['id']}/intervals",
                              json={"version": run.json()["version"],
                                    "intervals": intervals, "config": strict})
            client.post(f"/investigations/{inv_doc['id']}/run",
                        json={"version": put2.json()["version"]})
            result_empty = client.get(f"/investigations/{inv_doc['id']}/result")
            (FIXTURES / "result_empty.json").write_bytes(result_empty.content)
            assert json.loads(result_empty.content)["rows"] == []

        scn_file = tmp / "scenario.json"
        scn_file.write_text(json.dumps(doc))
        subprocess.run(["probesift", "simulate", "--scenario", str(scn_file),
                        "--out", str(tmp / "log")], check=True, capture_output=True)
        iv_file = tmp / "intervals.json"
        iv_file.write_text((FIXTURES / "intervals.json").read_text())
        cli_result = tmp / "cli_result.json"
        table_txt = subprocess.run(
            ["probesift", "filter", "--log", str(tmp / "log"),
             "--intervals", str(iv_file), "--out", str(cli_result)],
            check=True, capture_output=True, text=True).stdout
        if cli_result.read_bytes() != (FIXTURES / "result.json").read_bytes():
            print("service/CLI parity broke while recording", file=sys.stderr)
            return 1
        (FIXTURES / "cli_table.txt").write_text(table_txt)

    print(f"recorded {len(list(FIXTURES.iterdir()))} fixtures into {FIXTURES}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
