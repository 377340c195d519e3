"""Batch driver: simulate scenarios, run filters, reproduce the evaluation.

    probesift simulate   --scenario FILE --out DIR [--seed N]
    probesift filter     --log DIR --intervals FILE [--config FILE]
                         [--format table|machine] [--out FILE]
    probesift experiment [--trials N] [--seed N] [--mac-policy POLICY]
                         [--format table|machine] [--out FILE]
    probesift serve      [--config FILE]

Exit codes: 0 success, 1 validation problem, 2 internal error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from .errors import ProbesiftError, ValidationError
from .filtering import FilterConfig, run_filter
from .model import StayingInterval
from .simulate import (
    MAC_RANDOMIZE_PER_PROBE,
    MAC_STATIC,
    MacPolicy,
    run_scenario,
    scenario_from_doc,
)
from .store import LogDir

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INTERNAL = 2

INTERVALS_SCHEMA_VERSION = 1


def _load_json(path: str, what: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"{what} file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what} file {path} is not valid JSON: {exc}") from exc


def load_intervals_file(path: str) -> List[StayingInterval]:
    doc = _load_json(path, "intervals")
    if doc.get("schema_version") != INTERVALS_SCHEMA_VERSION:
        raise ValidationError(
            f"unsupported intervals schema_version: {doc.get('schema_version')!r}")
    try:
        return [
            StayingInterval(ap_id=str(iv["ap_id"]), enter=float(iv["enter"]),
                            exit=float(iv["exit"]))
            for iv in doc["intervals"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed intervals file {path}: {exc}") from exc


def cmd_simulate(args) -> int:
    doc = _load_json(args.scenario, "scenario")
    if args.seed is not None:
        doc = dict(doc, seed=args.seed)
    scenario = scenario_from_doc(doc)
    events, sightings, truth = run_scenario(scenario)
    log = LogDir.create(Path(args.out), meta={
        "seed": scenario.seed,
        "duration": scenario.duration,
        "ap_ids": [ap.ap_id for ap in scenario.ap_placements],
    })
    log.append_events(events)
    log.append_sightings(sightings)
    log.save_truth(truth.to_doc())
    print(f"wrote {len(events)} events, {len(sightings)} sightings to {args.out}")
    return EXIT_OK


def cmd_filter(args) -> int:
    log = LogDir(Path(args.log))
    intervals = load_intervals_file(args.intervals)
    cfg = FilterConfig.from_doc(_load_json(args.config, "config")) if args.config \
        else FilterConfig()
    known_aps = set(log.aps())
    missing = [iv.ap_id for iv in intervals if iv.ap_id not in known_aps]
    if missing:
        raise ValidationError(
            f"intervals reference APs absent from the log: {sorted(missing)}")
    table = run_filter(log.all_events(), intervals, cfg)
    if args.format == "machine":
        sys.stdout.write(table.canonical_json().decode() + "\n")
    else:
        print(table.render_text())
    out_path = Path(args.out) if args.out else Path("filter_result.json")
    out_path.write_bytes(table.canonical_json())
    return EXIT_OK


def cmd_experiment(args) -> int:
    from .experiment import ExperimentKnobs, run_experiment

    policy = MacPolicy(MAC_RANDOMIZE_PER_PROBE) if args.mac_policy == "randomize_per_probe" \
        else MacPolicy(MAC_STATIC)
    knobs = ExperimentKnobs(master_seed=args.seed, culprit_mac_policy=policy)
    summary = run_experiment(trials=args.trials, knobs=knobs)
    if args.format == "machine":
        sys.stdout.write(json.dumps(summary.to_doc(), sort_keys=True,
                                    separators=(",", ":")) + "\n")
    else:
        print(summary.render_text())
    if args.out:
        Path(args.out).write_text(json.dumps(summary.to_doc(), sort_keys=True, indent=2))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, load_settings

    settings = load_settings(args.config)
    app = create_app(settings)
    uvicorn.run(app, host=settings.host, port=settings.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="probesift",
        description="Enumerate candidate culprit MACs from probe-request logs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="materialize a scenario file into a log directory")
    p_sim.add_argument("--scenario", required=True, help="scenario JSON file")
    p_sim.add_argument("--out", required=True, help="log directory to create")
    p_sim.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_sim.set_defaults(func=cmd_simulate)

    p_fil = sub.add_parser("filter", help="run the candidate filter over a log directory")
    p_fil.add_argument("--log", required=True, help="log directory (from simulate)")
    p_fil.add_argument("--intervals", required=True,
                       help="JSON file with operator-marked staying intervals")
    p_fil.add_argument("--config", default=None, help="filter config JSON file")
    p_fil.add_argument("--format", choices=("table", "machine"), default="table",
                       help="stdout format")
    p_fil.add_argument("--out", default=None,
                       help="machine-readable result path (default ./filter_result.json)")
    p_fil.set_defaults(func=cmd_filter)

    p_exp = sub.add_parser("experiment",
                           help="run the seeded multi-trial evaluation end to end")
    p_exp.add_argument("--trials", type=int, default=10, help="number of trials (1..10)")
    p_exp.add_argument("--seed", type=int, default=None, help="master seed")
    p_exp.add_argument("--mac-policy", choices=("static", "randomize_per_probe"),
                       default="static", help="culprit device MAC policy")
    p_exp.add_argument("--format", choices=("table", "machine"), default="table",
                       help="stdout format")
    p_exp.add_argument("--out", default=None, help="also write the summary JSON here")
    p_exp.set_defaults(func=cmd_experiment)

    p_srv = sub.add_parser("serve", help="start the HTTP service")
    p_srv.add_argument("--config", default=None, help="service config JSON file")
    p_srv.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is None and args.command == "experiment":
        from .experiment import DEFAULT_EXPERIMENT_SEED
        args.seed = DEFAULT_EXPERIMENT_SEED
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ProbesiftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
