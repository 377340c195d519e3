"""HTTP interface for the investigation workflow.

Endpoints (all payloads JSON):

    POST /scenarios                      store a scenario document -> 201 {scenario_id}
    POST /scenarios/{sid}/simulate       materialize a log -> 201 {log_id, counts}
    GET  /scenarios/{sid}/truth          ground truth; answers only in test mode
    GET  /logs/{lid}/aps                 AP identifiers of a log
    GET  /logs/{lid}/sightings           ?ap=&from=&to= time-ordered sightings
    POST /investigations                 {log_id, config?} -> 201 investigation
    GET  /investigations/{iid}           current investigation document
    PUT  /investigations/{iid}/intervals {version, intervals, config?}
    POST /investigations/{iid}/run       {version?} -> runs the filter, stores result
    GET  /investigations/{iid}/result    canonical result table (409 while draft)

Errors carry {"code", "message", "detail"} with code one of validation /
not_found / conflict / internal mapping to 400/404/409/500. Investigation
mutation uses optimistic versioning: a stale `version` yields 409.

The service performs no authentication; deploy it on the same closed LAN
as the sensors (see README deployment notes).
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from fastapi import Body, FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from .errors import ConflictError, NotFoundError, ProbesiftError, ValidationError
from .filtering import FilterConfig, run_filter
from .model import StayingInterval
from .simulate import run_scenario, scenario_from_doc
from .store import STATUS_COMPLETE, STATUS_DRAFT, Store

_ERROR_STATUS = {
    "validation": 400,
    "not_found": 404,
    "conflict": 409,
    "internal": 500,
}


@dataclass(frozen=True)
class ApiError:
    code: str
    message: str
    detail: dict

    @property
    def status(self) -> int:
        return _ERROR_STATUS[self.code]

    def to_response(self) -> JSONResponse:
        return JSONResponse(
            status_code=self.status,
            content={"code": self.code, "message": self.message, "detail": self.detail})


def _error_for(exc: Exception) -> ApiError:
    if isinstance(exc, ValidationError):
        return ApiError("validation", str(exc), {})
    if isinstance(exc, NotFoundError):
        return ApiError("not_found", str(exc), {})
    if isinstance(exc, ConflictError):
        return ApiError("conflict", str(exc), {})
    return ApiError("internal", "internal error", {"type": type(exc).__name__})


@dataclass(frozen=True)
class ServiceSettings:
    host: str = "127.0.0.1"
    port: int = 8750
    data_dir: str = "./probesift-data"
    test_mode: bool = False


def load_settings(config_file: Optional[str] = None, env=os.environ) -> ServiceSettings:
    """Settings from an optional JSON config file, overridden by PROBESIFT_* env vars."""
    settings = ServiceSettings()
    if config_file:
        doc = json.loads(Path(config_file).read_text())
        known = {"host", "port", "data_dir", "test_mode"}
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown service config fields: {sorted(unknown)}")
        settings = replace(settings, **doc)
    if "PROBESIFT_HOST" in env:
        settings = replace(settings, host=env["PROBESIFT_HOST"])
    if "PROBESIFT_PORT" in env:
        settings = replace(settings, port=int(env["PROBESIFT_PORT"]))
    if "PROBESIFT_DATA_DIR" in env:
        settings = replace(settings, data_dir=env["PROBESIFT_DATA_DIR"])
    if "PROBESIFT_TEST_MODE" in env:
        settings = replace(settings, test_mode=env["PROBESIFT_TEST_MODE"] == "1")
    return settings


def simulate_into_store(store: Store, scenario_id: str,
                        seed_override: Optional[int] = None) -> dict:
    """Run a stored scenario and persist events, sightings, and ground truth."""
    doc = store.load_scenario(scenario_id)
    if seed_override is not None:
        doc = dict(doc, seed=int(seed_override))
    scenario = scenario_from_doc(doc)
    events, sightings, truth = run_scenario(scenario)
    log_id = store.create_log(meta={
        "scenario_id": scenario_id,
        "seed": scenario.seed,
        "duration": scenario.duration,
        "ap_ids": [ap.ap_id for ap in scenario.ap_placements],
    })
    log = store.log(log_id)
    log.append_events(events)
    log.append_sightings(sightings)
    log.save_truth(truth.to_doc())
    return {"log_id": log_id, "event_count": len(events), "sighting_count": len(sightings)}


def _parse_intervals(raw) -> tuple:
    if not isinstance(raw, list):
        raise ValidationError("intervals must be a list")
    out = []
    for item in raw:
        try:
            out.append(StayingInterval(ap_id=str(item["ap_id"]), enter=float(item["enter"]),
                                       exit=float(item["exit"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed interval {item!r}: {exc}") from exc
    return tuple(out)


def create_app(settings: ServiceSettings = ServiceSettings()) -> FastAPI:
    app = FastAPI(title="probesift", version="0.1.0")
    store = Store(Path(settings.data_dir))
    app.state.settings = settings
    app.state.store = store
    # The console may be served from another origin on the same closed LAN.
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.exception_handler(ProbesiftError)
    async def _probesift_error(_request: Request, exc: ProbesiftError):
        return _error_for(exc).to_response()

    @app.exception_handler(Exception)
    async def _unhandled_error(_request: Request, exc: Exception):
        return _error_for(exc).to_response()

    @app.post("/scenarios", status_code=201)
    def post_scenario(doc: dict = Body(...)):
        scenario_id = store.save_scenario(doc)
        return {"scenario_id": scenario_id}

    @app.post("/scenarios/{scenario_id}/simulate", status_code=201)
    def post_simulate(scenario_id: str, body: Optional[dict] = Body(None)):
        seed_override = None
        if body and body.get("seed_override") is not None:
            seed_override = int(body["seed_override"])
        return simulate_into_store(store, scenario_id, seed_override)

    @app.get("/scenarios/{scenario_id}/truth")
    def get_truth(scenario_id: str, log_id: Optional[str] = None):
        if not settings.test_mode:
            raise NotFoundError("not found")
        if log_id is None:
            candidates = [lid for lid in store.list_logs()
                          if store.log(lid).meta.get("scenario_id") == scenario_id]
            if not candidates:
                raise NotFoundError(f"no simulated log for scenario {scenario_id!r}")
            log_id = candidates[-1]
        return store.log(log_id).load_truth()

    @app.get("/logs/{log_id}/aps")
    def get_aps(log_id: str):
        return {"aps": store.log(log_id).aps()}

    @app.get("/logs/{log_id}/sightings")
    def get_sightings(log_id: str, ap: Optional[str] = None,
                      t_from: Optional[float] = Query(None, alias="from"),
                      t_to: Optional[float] = Query(None, alias="to")):
        log = store.log(log_id)
        lo, hi = log.time_span()
        start = lo if t_from is None else t_from
        end = hi + 1.0 if t_to is None else t_to
        if not start < end:
            raise ValidationError(f"need from < to, got [{start}, {end})")
        ap_ids = [ap] if ap is not None else log.aps()
        sightings = []
        for ap_id in ap_ids:
            sightings.extend(log.query_sightings(ap_id, start, end))
        sightings.sort(key=lambda s: (s.timestamp, s.ap_id, s.persona_id))
        return {"sightings": [
            {"timestamp": s.timestamp, "ap_id": s.ap_id, "persona_id": s.persona_id,
             "image_ref": s.image_ref}
            for s in sightings
        ]}

    @app.post("/investigations", status_code=201)
    def post_investigation(body: dict = Body(...)):
        log_id = body.get("log_id")
        if not log_id:
            raise ValidationError("log_id is required")
        config = FilterConfig.from_doc(body["config"]) if body.get("config") else None
        inv = store.create_investigation(str(log_id), config)
        return inv.to_doc()

    @app.get("/investigations/{inv_id}")
    def get_investigation(inv_id: str):
        return store.load_investigation(inv_id).to_doc()

    @app.put("/investigations/{inv_id}/intervals")
    def put_intervals(inv_id: str, body: dict = Body(...)):
        if "version" not in body:
            raise ValidationError("version is required for optimistic concurrency")
        changes = {
            "staying_intervals": _parse_intervals(body.get("intervals", [])),
            "status": STATUS_DRAFT,
            "result": None,
        }
        if body.get("config") is not None:
            changes["config"] = FilterConfig.from_doc(body["config"])
        inv = store.update_investigation(inv_id, int(body["version"]), **changes)
        return inv.to_doc()

    @app.post("/investigations/{inv_id}/run")
    def post_run(inv_id: str, body: Optional[dict] = Body(None)):
        inv = store.load_investigation(inv_id)
        expected = int(body["version"]) if body and body.get("version") is not None \
            else inv.version
        if not inv.staying_intervals:
            raise ValidationError("cannot run with zero staying intervals")
        events = store.log(inv.log_id).all_events()
        table = run_filter(events, inv.staying_intervals, inv.config)
        inv = store.update_investigation(inv_id, expected,
                                         result=table, status=STATUS_COMPLETE)
        return {"version": inv.version, "result": table.to_doc()}

    @app.get("/investigations/{inv_id}/result")
    def get_result(inv_id: str):
        inv = store.load_investigation(inv_id)
        if inv.status != STATUS_COMPLETE or inv.result is None:
            raise ConflictError(f"investigation {inv_id!r} has no result yet")
        return Response(content=inv.result.canonical_json(),
                        media_type="application/json")

    return app
