"""Trajectory and capture-event files.

Two formats, selected by the CLI: JSON-lines (one record object per line) and
CSV.  Numbers are serialized with 17 significant digits, which round-trips
IEEE doubles exactly, and records are written in fixed key/column order, so a
rerun of the same scenario produces byte-identical files.

CSV columns: t, x_0..x_{n-1}, y_*, vx_*, vy_*, ux, uy, n_l and, for bugs
traces, d_* (empty for inactive agents), active_*, detect_*.  JSON-lines
records carry the same data under keys t, x, y, vx, vy, ux, uy, n_l and, for
bugs, d (null for inactive), active, detect.

Capture events go to a JSON-lines sidecar, one object per merge:
{"t":..., "chaser":..., "prey":..., "kind":"proximity"|"overtake", "d":...}.
"""

from __future__ import annotations

import json
from typing import IO, Iterable, Sequence

from .linear import TrajectoryRecord
from .model import Vec2


def fmt(x: float) -> str:
    """17-significant-digit decimal form of a float; pinned output format."""
    return format(float(x), ".17g")


def _record_is_bugs(rec: TrajectoryRecord) -> bool:
    return rec.distances is not None


def _jsonl_line(rec: TrajectoryRecord) -> str:
    parts = [
        '"t":' + fmt(rec.t),
        '"x":[' + ",".join(fmt(p.x) for p in rec.positions) + "]",
        '"y":[' + ",".join(fmt(p.y) for p in rec.positions) + "]",
        '"vx":[' + ",".join(fmt(v.x) for v in rec.velocities) + "]",
        '"vy":[' + ",".join(fmt(v.y) for v in rec.velocities) + "]",
        '"ux":' + fmt(rec.u_c.x),
        '"uy":' + fmt(rec.u_c.y),
        '"n_l":' + str(rec.n_l),
    ]
    if _record_is_bugs(rec):
        parts.append(
            '"d":[' + ",".join("null" if d is None else fmt(d) for d in rec.distances) + "]"
        )
        parts.append('"active":[' + ",".join(str(int(a)) for a in rec.active) + "]")
        parts.append('"detect":[' + ",".join(str(int(b)) for b in rec.detect) + "]")
    return "{" + ",".join(parts) + "}"


def write_jsonl(records: Sequence[TrajectoryRecord], fp: IO[str]) -> None:
    for rec in records:
        fp.write(_jsonl_line(rec))
        fp.write("\n")


def _csv_header(n: int, bugs: bool) -> str:
    cols = ["t"]
    cols += [f"x_{i}" for i in range(n)]
    cols += [f"y_{i}" for i in range(n)]
    cols += [f"vx_{i}" for i in range(n)]
    cols += [f"vy_{i}" for i in range(n)]
    cols += ["ux", "uy", "n_l"]
    if bugs:
        cols += [f"d_{i}" for i in range(n)]
        cols += [f"active_{i}" for i in range(n)]
        cols += [f"detect_{i}" for i in range(n)]
    return ",".join(cols)


def write_csv(records: Sequence[TrajectoryRecord], fp: IO[str]) -> None:
    if not records:
        return
    bugs = _record_is_bugs(records[0])
    fp.write(_csv_header(records[0].n, bugs))
    fp.write("\n")
    for rec in records:
        cells = [fmt(rec.t)]
        cells += [fmt(p.x) for p in rec.positions]
        cells += [fmt(p.y) for p in rec.positions]
        cells += [fmt(v.x) for v in rec.velocities]
        cells += [fmt(v.y) for v in rec.velocities]
        cells += [fmt(rec.u_c.x), fmt(rec.u_c.y), str(rec.n_l)]
        if bugs:
            cells += ["" if d is None else fmt(d) for d in rec.distances]
            cells += [str(int(a)) for a in rec.active]
            cells += [str(int(b)) for b in rec.detect]
        fp.write(",".join(cells))
        fp.write("\n")


def write_events_jsonl(events: Iterable, fp: IO[str]) -> None:
    for ev in events:
        fp.write(
            "{" + ",".join([
                '"t":' + fmt(ev.t),
                '"chaser":' + str(ev.chaser),
                '"prey":' + str(ev.prey),
                '"kind":"' + ev.kind + '"',
                '"d":' + fmt(ev.d),
            ]) + "}\n"
        )


# ---- Readers ----

def _rec_from_dict(d: dict) -> TrajectoryRecord:
    n = len(d["x"])
    positions = tuple(Vec2(float(d["x"][i]), float(d["y"][i])) for i in range(n))
    velocities = tuple(Vec2(float(d["vx"][i]), float(d["vy"][i])) for i in range(n))
    distances = active = detect = None
    if "d" in d:
        distances = tuple(None if v is None else float(v) for v in d["d"])
        active = tuple(bool(a) for a in d["active"])
        detect = tuple(bool(b) for b in d["detect"])
    return TrajectoryRecord(
        t=float(d["t"]),
        positions=positions,
        velocities=velocities,
        u_c=Vec2(float(d["ux"]), float(d["uy"])),
        n_l=int(d["n_l"]),
        distances=distances,
        active=active,
        detect=detect,
    )


def read_jsonl(fp: IO[str]) -> list[TrajectoryRecord]:
    return [_rec_from_dict(json.loads(line)) for line in fp if line.strip()]


def read_csv(fp: IO[str]) -> list[TrajectoryRecord]:
    lines = [ln.rstrip("\n") for ln in fp if ln.strip()]
    if not lines:
        return []
    header = lines[0].split(",")
    n = sum(1 for c in header if c.startswith("x_"))
    bugs = any(c.startswith("d_") for c in header)
    out = []
    for ln in lines[1:]:
        cells = ln.split(",")
        pos = 0

        def take(k: int) -> list[str]:
            nonlocal pos
            vals = cells[pos:pos + k]
            pos += k
            return vals

        t = float(take(1)[0])
        xs = [float(v) for v in take(n)]
        ys = [float(v) for v in take(n)]
        vxs = [float(v) for v in take(n)]
        vys = [float(v) for v in take(n)]
        ux, uy = (float(v) for v in take(2))
        n_l = int(take(1)[0])
        distances = active = detect = None
        if bugs:
            distances = tuple(None if v == "" else float(v) for v in take(n))
            active = tuple(v == "1" for v in take(n))
            detect = tuple(v == "1" for v in take(n))
        out.append(
            TrajectoryRecord(
                t=t,
                positions=tuple(Vec2(x, y) for x, y in zip(xs, ys)),
                velocities=tuple(Vec2(x, y) for x, y in zip(vxs, vys)),
                u_c=Vec2(ux, uy),
                n_l=n_l,
                distances=distances,
                active=active,
                detect=detect,
            )
        )
    return out


def read_trace(path: str) -> list[TrajectoryRecord]:
    """Load a trajectory file, dispatching on the .csv / .jsonl suffix."""
    if path.endswith(".csv"):
        reader = read_csv
    elif path.endswith(".jsonl"):
        reader = read_jsonl
    else:
        raise ValueError(f"unrecognized trace suffix (want .csv or .jsonl): {path}")
    with open(path, "r", encoding="utf-8") as fp:
        return reader(fp)
