"""Command-line front end.

Thin wrapper over the same service-layer functions the HTTP service uses.
Exit codes: 0 success, 2 validation problem, 3 IO problem, 4 verification
found failing properties.  Set CYCLIC_SWARM_LOG=debug|info|warning|error to
control logging.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import sys

import click

from .model import ConfigError, ScenarioConfig
from .service import (
    build_app,
    parse_config,
    predict_scenario,
    run_scenario,
    verify_records,
)
from .session import SteeringSession
from .traces import read_trace, write_csv, write_events_jsonl, write_jsonl

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_VERIFY_FAILED = 4

log = logging.getLogger("cyclic_swarm")


def _setup_logging() -> None:
    level_name = os.environ.get("CYCLIC_SWARM_LOG", "warning").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _load_config(path: str, seed_override: int | None = None) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fp:
            doc = json.load(fp)
    except OSError as exc:
        click.echo(f"cannot read config: {exc}", err=True)
        sys.exit(EXIT_IO)
    except json.JSONDecodeError as exc:
        click.echo(f"config is not valid json: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    try:
        cfg = parse_config(doc)
    except ConfigError as exc:
        click.echo(f"invalid config: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    if seed_override is not None:
        cfg = dataclasses.replace(cfg, seed=seed_override)
    return cfg


def _events_path(out_path: str) -> str:
    for suffix in (".jsonl", ".csv"):
        if out_path.endswith(suffix):
            return out_path[: -len(suffix)] + ".events.jsonl"
    return out_path + ".events.jsonl"


@click.group()
def main() -> None:
    """Cyclic-pursuit swarm simulator."""
    _setup_logging()


@main.command()
@click.option("--config", "config_path", required=True, help="scenario json file")
@click.option("--out", "out_path", default=None, help="trajectory output path")
@click.option("--format", "fmt", type=click.Choice(["jsonl", "csv"]), default="jsonl")
@click.option("--seed-override", type=int, default=None)
def run(config_path: str, out_path: str | None, fmt: str, seed_override: int | None) -> None:
    """Run a scenario and write its trajectory (plus capture events)."""
    cfg = _load_config(config_path, seed_override)
    records, events, gathered_at, summary = run_scenario(cfg)
    if out_path is None:
        stem = os.path.splitext(os.path.basename(config_path))[0]
        out_path = f"{stem}.trace.{fmt}"
    try:
        with open(out_path, "w", encoding="utf-8") as fp:
            (write_jsonl if fmt == "jsonl" else write_csv)(records, fp)
        if cfg.model == "bugs":
            with open(_events_path(out_path), "w", encoding="utf-8") as fp:
                write_events_jsonl(events, fp)
    except OSError as exc:
        click.echo(f"cannot write output: {exc}", err=True)
        sys.exit(EXIT_IO)
    log.info("wrote %d records to %s", len(records), out_path)
    mv = summary["final_mean_velocity"]
    pv = summary["predicted_terminal_velocity"]
    click.echo(f"model={summary['model']} n={summary['n']} records={summary['records']}")
    click.echo(f"final mean velocity: ({mv[0]:.6g}, {mv[1]:.6g})")
    click.echo(f"predicted terminal velocity: ({pv[0]:.6g}, {pv[1]:.6g})")
    if cfg.model == "bugs":
        click.echo(f"gathered_at: {gathered_at}")
        click.echo(f"gather_bound: {summary['gather_bound']:.6g}")
        tb = summary["termination_bound"]
        click.echo(f"termination_bound: {tb if tb is None else format(tb, '.6g')}")
    click.echo(f"trace: {out_path}")


@main.command()
@click.option("--config", "config_path", required=True)
@click.option("--seed-override", type=int, default=None)
def predict(config_path: str, seed_override: int | None) -> None:
    """Print closed-form predictions for a scenario, as json."""
    cfg = _load_config(config_path, seed_override)
    click.echo(json.dumps(predict_scenario(cfg), indent=2))


@main.command()
@click.argument("trace_path")
@click.option("--config", "config_path", required=True)
def verify(trace_path: str, config_path: str) -> None:
    """Check a trajectory trace against the model's guarantees."""
    cfg = _load_config(config_path)
    try:
        records = read_trace(trace_path)
    except OSError as exc:
        click.echo(f"cannot read trace: {exc}", err=True)
        sys.exit(EXIT_IO)
    except ValueError as exc:
        click.echo(f"malformed trace: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    events = []
    ev_path = _events_path(trace_path)
    if cfg.model == "bugs" and os.path.exists(ev_path):
        from .bugs import CaptureEvent

        try:
            with open(ev_path, "r", encoding="utf-8") as fp:
                for line in fp:
                    if line.strip():
                        d = json.loads(line)
                        events.append(CaptureEvent(
                            t=float(d["t"]), chaser=int(d["chaser"]),
                            prey=int(d["prey"]), kind=str(d["kind"]), d=float(d["d"]),
                        ))
        except (OSError, ValueError, KeyError) as exc:
            click.echo(f"malformed events sidecar: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
    try:
        doc = verify_records(cfg, records, events)
    except ValueError as exc:
        click.echo(f"trace does not fit config: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    click.echo(json.dumps(doc, indent=2))
    if doc["failed"]:
        sys.exit(EXIT_VERIFY_FAILED)


@main.command()
@click.option("--config", "config_path", required=True)
@click.option("--port", type=int, default=8000)
def serve(config_path: str, port: int) -> None:
    """Serve the live steering session (and REST endpoints) on a port."""
    cfg = _load_config(config_path)
    session = SteeringSession(cfg)
    static_dir = None
    for candidate in (
        os.path.join(os.getcwd(), "frontend", "dist"),
        os.path.join(os.path.dirname(__file__), "..", "..", "frontend", "dist"),
    ):
        if os.path.isdir(candidate):
            static_dir = candidate
            break
    app = build_app(session=session, static_dir=static_dir)
    import uvicorn

    try:
        uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
    except SystemExit:
        raise
    except OSError as exc:
        click.echo(f"cannot bind port {port}: {exc}", err=True)
        sys.exit(EXIT_IO)


if __name__ == "__main__":
    main()
