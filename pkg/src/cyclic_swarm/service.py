"""HTTP and WebSocket service around the simulation core.

REST endpoints wrap batch operations (run, predict, verify); the /session
WebSocket exposes one live steerable session per process.  The CLI calls the
same plain functions in-process, so service and CLI cannot drift apart.

WebSocket protocol, line-delimited JSON, version field "v": 1 in every
server message.  Client to server: {"cmd": "set_uc", "ux": .., "uy": ..},
{"cmd": "set_leaders", "flags": [..]}, {"cmd": "pause" | "resume"},
{"cmd": "reset", "seed": ..}, {"cmd": "set_speed", "x": ..}.  Server to
client: {"v": 1, "snapshot": {..}} at a fixed wall cadence (default 50 ms,
so sim time per snapshot scales with speed), {"v": 1, "ack": {"t": ..}} or
{"v": 1, "reject": {"reason": .., "t": ..}} per command.  A single loop
owns the session: commands land between step batches, never inside one.
"""

from __future__ import annotations

import asyncio
import json
import os
import time
from typing import Any

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .bugs import (
    CaptureEvent,
    gather_bound,
    simulate_bugs,
    termination_bound,
)
from .linear import TrajectoryRecord, simulate_linear
from .model import ConfigError, ScenarioConfig, sample_initial_state
from .session import SteeringSession
from .spectral import predict_formation
from .traces import _jsonl_line, _rec_from_dict
from .verify import check_bugs_properties, check_linear_asymptotics, reports_as_json

PROTOCOL_VERSION = 1
SNAPSHOT_WALL_SECONDS = 0.05
POLL_SECONDS = 0.005
MAX_STEPS_PER_TICK = 20_000


# ---- service layer (shared by REST handlers and the CLI) ----


def record_as_dict(rec: TrajectoryRecord) -> dict:
    return json.loads(_jsonl_line(rec))


def event_as_dict(ev: CaptureEvent) -> dict:
    return {"t": ev.t, "chaser": int(ev.chaser), "prey": int(ev.prey),
            "kind": ev.kind, "d": ev.d}


def run_scenario(config: ScenarioConfig):
    """Run either model; returns (records, events, gathered_at, summary)."""
    if config.model == "linear":
        records = simulate_linear(config)
        events: list[CaptureEvent] = []
        gathered_at = None
    else:
        records, events, gathered_at = simulate_bugs(config)
    summary = summarize_run(config, records, gathered_at)
    return records, events, gathered_at, summary


def summarize_run(config: ScenarioConfig, records, gathered_at) -> dict:
    last = records[-1]
    final_iv = config.schedule.intervals[-1]
    n_l = final_iv.leaders.n_detecting
    summary: dict[str, Any] = {
        "model": config.model,
        "n": config.n,
        "t_end": config.t_end,
        "records": len(records),
        "final_mean_velocity": [
            sum(v.x for v in last.velocities) / config.n,
            sum(v.y for v in last.velocities) / config.n,
        ],
        "predicted_terminal_velocity": [
            n_l / config.n * final_iv.u_c.x,
            n_l / config.n * final_iv.u_c.y,
        ],
    }
    if config.model == "bugs":
        state0 = sample_initial_state(config)
        first_iv = config.schedule.intervals[0]
        summary["gathered_at"] = gathered_at
        summary["gather_bound"] = gather_bound(config.n)
        summary["termination_bound"] = termination_bound(state0, first_iv.u_c)
    return summary


def predict_scenario(config: ScenarioConfig) -> dict:
    state0 = sample_initial_state(config)
    iv = config.schedule.intervals[0]
    if config.model == "linear":
        pred = predict_formation(state0.positions, iv.leaders, iv.u_c)
        vel = pred.velocity
        return {
            "model": "linear",
            "alpha": [pred.alpha.x, pred.alpha.y],
            "velocity": [vel.x, vel.y],
            "xi": [[g * iv.u_c.x, g * iv.u_c.y] for g in pred.gamma],
        }
    u_norm = iv.u_c.norm()
    bound = termination_bound(state0, iv.u_c)
    return {
        "model": "bugs",
        "gather_bound": gather_bound(config.n),
        "u_c_norm": u_norm,
        "applicable": bound is not None,
        "termination_bound": bound,
    }


def parse_config(doc: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.from_json_dict(doc)
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def verify_records(config: ScenarioConfig, records, events) -> dict:
    if config.model == "linear":
        reports = check_linear_asymptotics(records, config.schedule)
    else:
        reports = check_bugs_properties(records, events, config)
    return reports_as_json(reports)


# ---- REST models ----


class RunRequest(BaseModel):
    config: dict


class RunResponse(BaseModel):
    records: list[dict]
    events: list[dict]
    gathered_at: float | None
    summary: dict


class PredictRequest(BaseModel):
    config: dict


class VerifyRequest(BaseModel):
    config: dict
    records: list[dict]
    events: list[dict] = []


class VerifyResponse(BaseModel):
    reports: list[dict]
    failed: list[str]


# ---- app ----


def build_app(
    session: SteeringSession | None = None, static_dir: str | None = None
) -> FastAPI:
    app = FastAPI(title="cyclic-swarm service")
    app.state.session = session

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "v": PROTOCOL_VERSION}

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest) -> RunResponse:
        cfg = _config_or_422(req.config)
        records, events, gathered_at, summary = run_scenario(cfg)
        return RunResponse(
            records=[record_as_dict(r) for r in records],
            events=[event_as_dict(e) for e in events],
            gathered_at=gathered_at,
            summary=summary,
        )

    @app.post("/predict")
    def predict(req: PredictRequest) -> dict:
        cfg = _config_or_422(req.config)
        return predict_scenario(cfg)

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest) -> VerifyResponse:
        cfg = _config_or_422(req.config)
        try:
            records = [_rec_from_dict(d) for d in req.records]
            events = [
                CaptureEvent(
                    t=float(d["t"]), chaser=int(d["chaser"]), prey=int(d["prey"]),
                    kind=str(d["kind"]), d=float(d["d"]),
                )
                for d in req.events
            ]
            doc = verify_records(cfg, records, events)
        except (ValueError, KeyError, TypeError) as exc:
            raise HTTPException(status_code=422, detail=f"bad trace: {exc}")
        return VerifyResponse(reports=doc["reports"], failed=doc["failed"])

    @app.websocket("/session")
    async def session_ws(ws: WebSocket) -> None:
        live: SteeringSession | None = ws.app.state.session
        await ws.accept()
        if live is None:
            await _send(ws, {"reject": {"reason": "no live session configured", "t": 0.0}})
            await ws.close()
            return
        await _session_loop(ws, live)

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="console")

    return app


def _config_or_422(doc: dict) -> ScenarioConfig:
    try:
        return parse_config(doc)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


async def _send(ws: WebSocket, payload: dict) -> None:
    payload = {"v": PROTOCOL_VERSION, **payload}
    await ws.send_text(json.dumps(payload))


async def _session_loop(ws: WebSocket, session: SteeringSession) -> None:
    last_wall = time.monotonic()
    last_snap = -1e9  # send the first snapshot immediately
    owed_steps = 0.0
    try:
        while True:
            try:
                raw = await asyncio.wait_for(ws.receive_text(), timeout=POLL_SECONDS)
            except (asyncio.TimeoutError, TimeoutError):
                raw = None
            if raw is not None:
                reply = _handle_message(session, raw)
                await _send(ws, reply)
            now = time.monotonic()
            if session.paused:
                owed_steps = 0.0
            else:
                owed_steps += (now - last_wall) * session.speed / session.dt
                steps = min(int(owed_steps), MAX_STEPS_PER_TICK)
                if steps > 0:
                    session.advance_steps(steps)
                    owed_steps -= steps
            last_wall = now
            if now - last_snap >= SNAPSHOT_WALL_SECONDS:
                await _send(ws, {"snapshot": session.snapshot().as_json_dict()})
                last_snap = now
    except WebSocketDisconnect:
        return


def _handle_message(session: SteeringSession, raw: str) -> dict:
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError as exc:
        return {"reject": {"reason": f"bad json: {exc}", "t": session.t}}
    if not isinstance(msg, dict):
        return {"reject": {"reason": "message must be a json object", "t": session.t}}
    if "v" in msg and msg["v"] != PROTOCOL_VERSION:
        return {
            "reject": {
                "reason": f"unsupported protocol version {msg['v']!r}",
                "t": session.t,
            }
        }
    ok, reason, t = session.apply(msg)
    if ok:
        return {"ack": {"t": t}}
    return {"reject": {"reason": reason, "t": t}}
