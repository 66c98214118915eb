"""Acceptance gate: every advertised guarantee, one pass/fail line each.

Each test covers one guarantee at its stated tolerance and emits a single
[ACCEPTANCE] line.  The lines are printed inline (visible under -s) and
replayed in the terminal summary so a plain `pytest -v` shows them too.
"""

import json
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from cyclic_swarm.bugs import (
    distance_rate,
    gather_bound,
    simulate_bugs,
    step_bugs,
    termination_bound,
)
from cyclic_swarm.cli import main as cli_main
from cyclic_swarm.linear import simulate_linear
from cyclic_swarm.model import (
    LeaderSet,
    ScenarioConfig,
    SwarmState,
    Vec2,
    sample_initial_state,
)
from cyclic_swarm.service import build_app
from cyclic_swarm.session import SteeringSession
from cyclic_swarm.spectral import build_basis, deviation_vector, exact_axis_state

RESULT_LINES = []


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException as exc:
        line = f"[ACCEPTANCE] {name}: FAIL ({type(exc).__name__}: {exc})"
        RESULT_LINES.append(line)
        print(line, flush=True)
        raise
    line = f"[ACCEPTANCE] {name}: PASS"
    RESULT_LINES.append(line)
    print(line, flush=True)


def linear_cfg(n, bits, u, t_end, seed=0, stride=10**9, dt=1e-3, box=5.0):
    return ScenarioConfig.from_json_dict({
        "model": "linear", "n": n, "dt": dt, "t_end": t_end, "seed": seed,
        "output_stride": stride,
        "init": {"kind": "box", "low": [-box, -box], "high": [box, box]},
        "schedule": [{"t_start": 0.0, "u_c": list(u), "leaders": list(bits)}],
    })


def bugs_cfg(n, bits, u, t_end, seed=0, stride=10**9, dt=1e-3, eps=1e-3, box=1.0):
    return ScenarioConfig.from_json_dict({
        "model": "bugs", "n": n, "dt": dt, "t_end": t_end, "seed": seed,
        "epsilon": eps, "output_stride": stride,
        "init": {"kind": "box", "low": [-box, -box], "high": [box, box]},
        "schedule": [{"t_start": 0.0, "u_c": list(u), "leaders": list(bits)}],
    })


def dense_pursuit_matrix(n):
    m = -np.eye(n)
    for i in range(n):
        m[i, (i + 1) % n] = 1.0
    return m


def sum_active_distances(rec):
    return sum(d for d in rec.distances if d is not None)


def test_spectral_identities():
    with criterion("spectral identities, n in {2,3,4,6,17,64}"):
        t_start = time.perf_counter()
        for n in (2, 3, 4, 6, 17, 64):
            basis = build_basis(n)
            lam, v = basis.eigenvalues, basis.vectors
            assert lam[0] == 0.0
            assert np.all(lam[1:].real < 0.0)
            assert float(np.max(np.abs(np.abs(lam + 1.0) - 1.0))) < 1e-12
            gram = v.conj().T @ v
            assert float(np.max(np.abs(gram - np.eye(n)))) < 1e-12
            m = dense_pursuit_matrix(n)
            assert float(np.max(np.abs(m @ v - v * lam[None, :]))) < 1e-10
        assert time.perf_counter() - t_start < 1.0


def test_exact_vs_integrated():
    with criterion("integrator matches closed form, 20 random scenarios"):
        t_start = time.perf_counter()
        rng = np.random.default_rng(20260819)
        for trial in range(20):
            n = int(rng.integers(2, 65))
            bits = (rng.random(n) < 0.4).astype(int).tolist()
            u = rng.uniform(-3.0, 3.0, size=2)
            cfg = linear_cfg(n, bits, u, t_end=50.0, seed=trial)
            state = sample_initial_state(cfg)
            recs = simulate_linear(cfg, initial=state)
            assert recs[-1].t == 50.0
            basis = build_basis(n)
            flags = LeaderSet.from_bits(bits)
            x0 = np.array([p.x for p in state.positions])
            y0 = np.array([p.y for p in state.positions])
            ex = exact_axis_state(basis, x0, flags, float(u[0]), 50.0)
            ey = exact_axis_state(basis, y0, flags, float(u[1]), 50.0)
            sx = np.array([p.x for p in recs[-1].positions])
            sy = np.array([p.y for p in recs[-1].positions])
            gap = max(float(np.max(np.abs(sx - ex))), float(np.max(np.abs(sy - ey))))
            assert gap < 1e-6, f"trial {trial}: gap {gap:.3e}"
        assert time.perf_counter() - t_start < 30.0


def test_forced_agreement_examples():
    with criterion("forced agreement velocity and collinear formation"):
        for bits, u, want in (
            ([0, 1, 0, 0, 0, 0], (5.0, 1.0), (5.0 / 6.0, 1.0 / 6.0)),
            ([1, 1, 1, 1, 1, 0], (6.0, 3.0), (5.0, 2.5)),
        ):
            cfg = linear_cfg(6, bits, u, t_end=50.0, seed=7)
            recs = simulate_linear(cfg)
            for v in recs[-1].velocities:
                assert abs(v.x - want[0]) < 2e-3
                assert abs(v.y - want[1]) < 2e-3
            xs = np.array([p.x for p in recs[-1].positions])
            ys = np.array([p.y for p in recs[-1].positions])
            assert float(np.ptp(xs)) > 1e-3  # a real line, not a point
            slope = float(np.polyfit(xs, ys, 1)[0])
            assert abs(slope - u[1] / u[0]) < 1e-4


def test_all_detected_deviations_vanish():
    with criterion("all-detected runs collapse, deviations exactly zero"):
        for n, t_end in ((3, 20.0), (6, 45.0), (17, 280.0)):
            cfg = linear_cfg(n, [1] * n, (5.0, 1.0), t_end=t_end, seed=n)
            recs = simulate_linear(cfg)
            pts = recs[-1].positions
            spread = max(
                pts[i].minus(pts[j]).norm()
                for i in range(n) for j in range(i + 1, n)
            )
            assert spread < 1e-6, f"n={n}: spread {spread:.3e}"
            dev = deviation_vector(build_basis(n), LeaderSet.from_bits([1] * n), 5.0)
            assert float(np.max(np.abs(dev))) < 1e-12


def test_deviation_convergence():
    with criterion("measured deviations match closed form, 10 random flag sets"):
        rng = np.random.default_rng(5)
        n = 6
        basis = build_basis(n)
        for trial in range(10):
            bits = rng.integers(0, 2, size=n).tolist()
            u = rng.uniform(-3.0, 3.0, size=2)
            cfg = linear_cfg(n, bits, u, t_end=50.0, seed=100 + trial)
            state = sample_initial_state(cfg)
            recs = simulate_linear(cfg, initial=state)
            flags = LeaderSet.from_bits(bits)
            frac = flags.n_detecting / n
            for axis, u_axis in (("x", float(u[0])), ("y", float(u[1]))):
                q0 = np.array([getattr(p, axis) for p in state.positions])
                qt = np.array([getattr(p, axis) for p in recs[-1].positions])
                homog = exact_axis_state(basis, q0, flags, 0.0, 50.0)
                measured = qt - homog - frac * u_axis * 50.0
                predicted = deviation_vector(basis, flags, u_axis)
                worst = float(np.max(np.abs(measured - predicted)))
                assert worst < 1e-6, f"trial {trial} axis {axis}: {worst:.3e}"


def test_bugs_monotone_gathering():
    with criterion("homogeneous pursuit: separations monotone, gathering bounded"):
        t_start = time.perf_counter()
        rng = np.random.default_rng(99)
        for trial in range(50):
            n = int(rng.integers(3, 9))
            cfg = bugs_cfg(n, [0] * n, (0.0, 0.0), t_end=1.0, seed=trial)
            state = sample_initial_state(cfg)
            sum_d0 = sum(
                distance_rate(state, i, Vec2(0.0, 0.0)).d for i in range(n)
            )
            deadline = 2.0 * n * sum_d0
            cert = simulate_bugs(
                bugs_cfg(n, [0] * n, (0.0, 0.0), t_end=deadline + 2e-3, seed=trial)
            )
            assert cert.gathered_at is not None, f"trial {trial}: never gathered"
            assert cert.gathered_at < deadline, f"trial {trial}: gathered late"
            fine_end = math.ceil(cert.gathered_at / 1e-3) * 1e-3 + 1e-3
            fine = simulate_bugs(
                bugs_cfg(n, [0] * n, (0.0, 0.0), t_end=fine_end, seed=trial, stride=1)
            )
            for r1, r2 in zip(fine.records, fine.records[1:]):
                if r1.active != r2.active:
                    continue  # a merge retargets the chaser; its d may jump
                for d1, d2 in zip(r1.distances, r2.distances):
                    if d1 is not None and d2 is not None:
                        assert d2 <= d1 + 1e-9, f"trial {trial} at t={r2.t}"
        assert time.perf_counter() - t_start < 120.0


def test_bugs_weak_command_descent_and_bound():
    with criterion("weak-command pursuit: aggregate descent, certified deadline"):
        rng = np.random.default_rng(1234)
        for trial in range(50):
            n = int(rng.integers(3, 9))
            mag = float(rng.uniform(0.0, 0.9)) * gather_bound(n)
            ang = float(rng.uniform(0.0, 2.0 * math.pi))
            u = (mag * math.cos(ang), mag * math.sin(ang))
            while True:
                bits = rng.integers(0, 2, size=n).tolist()
                if 0 < sum(bits) < n:
                    break
            cfg0 = bugs_cfg(n, bits, u, t_end=1.0, seed=trial)
            state = sample_initial_state(cfg0)
            bound_t = termination_bound(state, Vec2(*u))
            assert bound_t is not None
            result = None
            for t_end in (60.0, bound_t + 2e-3):
                if result is not None and result.gathered_at is not None:
                    break
                result = simulate_bugs(
                    bugs_cfg(n, bits, u, t_end=t_end, seed=trial, stride=100)
                )
            assert result.gathered_at is not None, f"trial {trial}: never gathered"
            assert result.gathered_at <= bound_t + 1e-3, f"trial {trial}: past bound"
            rate_cap = -1.0 / (2.0 * n) + n * math.hypot(*u) + 1e-3
            recs = result.records
            for r1, r2 in zip(recs, recs[1:]):
                if sum(r1.active) < 2 or sum(r2.active) < 2:
                    continue
                drop = sum_active_distances(r2) - sum_active_distances(r1)
                assert drop <= rate_cap * (r2.t - r1.t), f"trial {trial} at t={r2.t}"
            tail = [r for r in recs if sum(r.active) == 1]
            assert tail, f"trial {trial}: no post-gathering record"
            for rec in tail:
                leader = rec.active.index(True)
                v = rec.velocities[leader]
                if any(rec.detect):
                    assert (v.x, v.y) == (u[0], u[1])
                else:
                    assert (v.x, v.y) == (0.0, 0.0)


def test_all_detected_capture_invariance():
    with criterion("all-detected capture times ignore the command"):
        n = 5
        sequences = []
        for u in ((0.0, 0.0), (5.0, 3.0), (-3.0, 2.0)):
            cfg = bugs_cfg(n, [1] * n, u, t_end=80.0, seed=11, box=1.5)
            result = simulate_bugs(cfg)
            assert len(result.events) == n - 1
            sequences.append([ev.t for ev in result.events])
        for seq in sequences[1:]:
            for t_ref, t_alt in zip(sequences[0], seq):
                assert abs(t_ref - t_alt) <= 1e-3 + 1e-12


def test_distance_rate_case_formulas():
    with criterion("separation-rate case formulas, 1000 random samples"):
        rng = np.random.default_rng(321)
        dt = 1e-3
        for trial in range(1000):
            n = int(rng.integers(3, 9))
            while True:
                pts = rng.uniform(-3.0, 3.0, size=(n, 2))
                gaps = [
                    math.hypot(*(pts[i] - pts[j]))
                    for i in range(n) for j in range(i + 1, n)
                ]
                if min(gaps) > 1.0:
                    break
            bits = rng.integers(0, 2, size=n).tolist()
            if trial % 10 == 0:
                u = Vec2(0.0, 0.0)
            else:
                mag = float(rng.uniform(0.0, 0.8))
                ang = float(rng.uniform(0.0, 2.0 * math.pi))
                u = Vec2(mag * math.cos(ang), mag * math.sin(ang))
            state = SwarmState.fresh(
                0.0,
                [Vec2(float(x), float(y)) for x, y in pts],
                LeaderSet.from_bits(bits),
            )
            i = int(rng.integers(0, n))
            br = distance_rate(state, i, u)
            assert abs(br.rate - br.inner_product) < 1e-9
            nxt, events = step_bugs(state, u, dt, 1e-6)
            assert not events
            moved = nxt.positions[br.prey].minus(nxt.positions[br.chaser]).norm()
            fd = (moved - br.d) / dt
            assert abs(fd - br.rate) < 10.0 * dt, f"trial {trial}: {fd - br.rate:.2e}"


def test_cmd_run_determinism(tmp_path):
    with criterion("repeated runs are byte-identical"):
        runner = CliRunner()
        for doc in (
            {"model": "linear", "n": 6, "dt": 1e-3, "t_end": 5.0, "seed": 3,
             "output_stride": 200,
             "schedule": [{"t_start": 0.0, "u_c": [5, 1], "leaders": [0, 1, 0, 0, 0, 0]}]},
            {"model": "bugs", "n": 4, "dt": 1e-3, "t_end": 20.0, "seed": 3,
             "epsilon": 1e-3, "output_stride": 200,
             "init": {"kind": "box", "low": [-2, -2], "high": [2, 2]},
             "schedule": [{"t_start": 0.0, "u_c": [0, 0], "leaders": [0, 0, 0, 0]}]},
        ):
            cfg_path = tmp_path / f"{doc['model']}.json"
            cfg_path.write_text(json.dumps(doc))
            outs = []
            for tag in ("a", "b"):
                out = tmp_path / f"{doc['model']}-{tag}.jsonl"
                res = runner.invoke(
                    cli_main, ["run", "--config", str(cfg_path), "--out", str(out)]
                )
                assert res.exit_code == 0, res.output
                blob = out.read_bytes()
                ev = out.with_name(out.name.replace(".jsonl", ".events.jsonl"))
                if ev.exists():
                    blob += ev.read_bytes()
                outs.append(blob)
            assert outs[0] == outs[1]


def test_secondary_steering_round_trip():
    with criterion("[SECONDARY] live steering round-trip over the socket"):
        cfg = linear_cfg(6, [1, 1, 1, 1, 1, 0], (0.0, 0.0), t_end=10_000.0, seed=3)
        client = TestClient(build_app(session=SteeringSession(cfg)))
        with client.websocket_connect("/session") as ws:
            msg = ws.receive_json()
            assert msg["v"] == 1 and "snapshot" in msg
            ws.send_text(json.dumps({"v": 1, "cmd": "set_speed", "x": 100.0}))
            ws.send_text(json.dumps({"v": 1, "cmd": "set_uc", "ux": 6.0, "uy": 3.0}))
            t_cmd = None
            snaps = []
            while True:
                msg = ws.receive_json()
                if "ack" in msg:
                    t_cmd = msg["ack"]["t"] if t_cmd is None else t_cmd
                elif "reject" in msg:
                    raise AssertionError(f"rejected: {msg['reject']}")
                elif "snapshot" in msg:
                    snap = msg["snapshot"]
                    if t_cmd is not None and snap["t"] > t_cmd:
                        snaps.append(snap)
                    if snaps and snaps[-1]["t"] - snaps[0]["t"] >= 5.0:
                        break
            first, last = snaps[0], snaps[-1]
            assert last["t"] <= t_cmd + 30.0, "measurement window missed the deadline"
            gap = last["t"] - first["t"]
            mean_v = [
                sum(p2[axis] - p1[axis] for p1, p2 in zip(first["positions"], last["positions"]))
                / (6 * gap)
                for axis in (0, 1)
            ]
            assert abs(mean_v[0] - 5.0) < 5e-2 and abs(mean_v[1] - 2.5) < 5e-2
            ws.send_text(json.dumps(
                {"v": 1, "cmd": "set_leaders", "flags": [1, 1, 1, 1, 1, 1]}
            ))
            got_ack = False
            while True:
                msg = ws.receive_json()
                if "ack" in msg:
                    got_ack = True
                elif "snapshot" in msg and got_ack:
                    assert msg["snapshot"]["n_l"] == 6
                    break
        bugs = bugs_cfg(4, [1, 0, 0, 0], (0.0, 0.0), t_end=10_000.0, seed=2, box=2.0)
        client = TestClient(build_app(session=SteeringSession(bugs)))
        with client.websocket_connect("/session") as ws:
            ws.receive_json()
            ws.send_text(json.dumps({"v": 1, "cmd": "set_uc", "ux": 6.0, "uy": 3.0}))
            while True:
                msg = ws.receive_json()
                if "reject" in msg:
                    assert "partial" in msg["reject"]["reason"]
                    break
                assert "ack" not in msg, "over-bound command was accepted"
