"""Command-line interface: exit codes, outputs, and rerun determinism."""

import json
import os

import pytest
from click.testing import CliRunner

from cyclic_swarm.cli import main


def linear_doc(n=6, bits=None, u=(5.0, 1.0), t_end=50.0, seed=1, stride=1000):
    bits = bits if bits is not None else [0, 1, 0, 0, 0, 0][:n]
    return {
        "model": "linear", "n": n, "dt": 1e-3, "t_end": t_end, "seed": seed,
        "output_stride": stride,
        "init": {"kind": "box", "low": [-5, -5], "high": [5, 5]},
        "schedule": [{"t_start": 0.0, "u_c": [u[0], u[1]], "leaders": bits}],
    }


def bugs_doc(n=4, u=(0.0, 0.0), bits=None, t_end=40.0, seed=2):
    bits = bits if bits is not None else [0] * n
    return {
        "model": "bugs", "n": n, "dt": 1e-3, "t_end": t_end, "seed": seed,
        "epsilon": 1e-3, "output_stride": 500,
        "init": {"kind": "box", "low": [-2, -2], "high": [2, 2]},
        "schedule": [{"t_start": 0.0, "u_c": [u[0], u[1]], "leaders": bits}],
    }


@pytest.fixture()
def runner():
    return CliRunner()


def write_config(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestRun:
    def test_linear_run_writes_trace_and_summary(self, runner, tmp_path):
        cfg = write_config(tmp_path, linear_doc())
        out = str(tmp_path / "trace.jsonl")
        result = runner.invoke(main, ["run", "--config", cfg, "--out", out])
        assert result.exit_code == 0, result.output
        assert "final mean velocity: (0.833" in result.output
        assert "predicted terminal velocity: (0.833333, 0.166667)" in result.output
        lines = [l for l in open(out).read().splitlines() if l]
        assert len(lines) == 51
        assert json.loads(lines[0])["t"] == 0.0

    def test_bugs_run_writes_events_sidecar(self, runner, tmp_path):
        cfg = write_config(tmp_path, bugs_doc())
        out = str(tmp_path / "swarm.jsonl")
        result = runner.invoke(main, ["run", "--config", cfg, "--out", out])
        assert result.exit_code == 0, result.output
        assert "gathered_at:" in result.output
        assert "gather_bound:" in result.output
        ev_path = str(tmp_path / "swarm.events.jsonl")
        events = [json.loads(l) for l in open(ev_path).read().splitlines() if l]
        assert len(events) == 3
        assert all(set(e) == {"t", "chaser", "prey", "kind", "d"} for e in events)

    def test_csv_format(self, runner, tmp_path):
        cfg = write_config(tmp_path, linear_doc(t_end=2.0, stride=500))
        out = str(tmp_path / "trace.csv")
        result = runner.invoke(main, ["run", "--config", cfg, "--out", out, "--format", "csv"])
        assert result.exit_code == 0, result.output
        lines = open(out).read().splitlines()
        assert lines[0].startswith("t,")
        assert len(lines) == 1 + 5

    def test_default_out_path_derives_from_config_name(self, runner, tmp_path):
        cfg = write_config(tmp_path, linear_doc(t_end=1.0), name="demo.json")
        cwd = os.getcwd()
        os.chdir(tmp_path)
        try:
            result = runner.invoke(main, ["run", "--config", cfg])
        finally:
            os.chdir(cwd)
        assert result.exit_code == 0, result.output
        assert (tmp_path / "demo.trace.jsonl").exists()

    def test_missing_config_is_io_error(self, runner, tmp_path):
        result = runner.invoke(main, ["run", "--config", str(tmp_path / "nope.json")])
        assert result.exit_code == 3

    def test_unparseable_config_is_validation_error(self, runner, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{ not json")
        result = runner.invoke(main, ["run", "--config", str(path)])
        assert result.exit_code == 2

    def test_invalid_config_is_validation_error(self, runner, tmp_path):
        cfg = write_config(tmp_path, bugs_doc(u=(2.0, 0.0), bits=[1, 0, 0, 0]))
        result = runner.invoke(main, ["run", "--config", cfg])
        assert result.exit_code == 2

    def test_rerun_is_byte_identical(self, runner, tmp_path):
        cfg = write_config(tmp_path, bugs_doc(t_end=10.0))
        out_a = str(tmp_path / "a.jsonl")
        out_b = str(tmp_path / "b.jsonl")
        assert runner.invoke(main, ["run", "--config", cfg, "--out", out_a]).exit_code == 0
        assert runner.invoke(main, ["run", "--config", cfg, "--out", out_b]).exit_code == 0
        assert open(out_a, "rb").read() == open(out_b, "rb").read()
        ev_a = open(str(tmp_path / "a.events.jsonl"), "rb").read()
        ev_b = open(str(tmp_path / "b.events.jsonl"), "rb").read()
        assert ev_a == ev_b

    def test_seed_override_changes_trajectory(self, runner, tmp_path):
        cfg = write_config(tmp_path, linear_doc(t_end=1.0))
        out_a = str(tmp_path / "a.jsonl")
        out_b = str(tmp_path / "b.jsonl")
        runner.invoke(main, ["run", "--config", cfg, "--out", out_a])
        runner.invoke(main, ["run", "--config", cfg, "--out", out_b, "--seed-override", "77"])
        assert open(out_a).read() != open(out_b).read()


class TestPredict:
    def test_linear_predictions(self, runner, tmp_path):
        cfg = write_config(tmp_path, linear_doc())
        result = runner.invoke(main, ["predict", "--config", cfg])
        assert result.exit_code == 0, result.output
        doc = json.loads(result.output)
        assert doc["velocity"] == pytest.approx([5 / 6, 1 / 6])
        assert len(doc["xi"]) == 6

    def test_bugs_bounds(self, runner, tmp_path):
        cfg = write_config(tmp_path, bugs_doc(u=(0.01, 0.0)))
        result = runner.invoke(main, ["predict", "--config", cfg])
        doc = json.loads(result.output)
        assert doc["gather_bound"] == pytest.approx(1 / 32)
        assert doc["applicable"] is True


class TestVerify:
    def _run_then_verify(self, runner, tmp_path, doc, corrupt=None):
        cfg = write_config(tmp_path, doc)
        out = str(tmp_path / "trace.jsonl")
        assert runner.invoke(main, ["run", "--config", cfg, "--out", out]).exit_code == 0
        if corrupt is not None:
            lines = open(out).read().splitlines()
            rec = json.loads(lines[3])
            corrupt(rec)
            lines[3] = json.dumps(rec)
            with open(out, "w") as fp:
                fp.write("\n".join(lines) + "\n")
        return runner.invoke(main, ["verify", out, "--config", cfg])

    def test_clean_linear_trace_passes(self, runner, tmp_path):
        result = self._run_then_verify(runner, tmp_path, linear_doc())
        assert result.exit_code == 0, result.output
        doc = json.loads(result.output)
        assert doc["failed"] == []
        assert len(doc["reports"]) == 5

    def test_clean_bugs_trace_passes(self, runner, tmp_path):
        result = self._run_then_verify(runner, tmp_path, bugs_doc())
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["failed"] == []

    def test_corrupted_trace_exits_4(self, runner, tmp_path):
        def corrupt(rec):
            rec["vx"][2] += 1.0

        result = self._run_then_verify(runner, tmp_path, linear_doc(), corrupt)
        assert result.exit_code == 4
        assert "velocity_consistency" in json.loads(result.output)["failed"]

    def test_missing_trace_is_io_error(self, runner, tmp_path):
        cfg = write_config(tmp_path, linear_doc())
        result = runner.invoke(main, ["verify", str(tmp_path / "nope.jsonl"), "--config", cfg])
        assert result.exit_code == 3

    def test_mismatched_trace_is_validation_error(self, runner, tmp_path):
        cfg4 = write_config(tmp_path, linear_doc(n=4, bits=[0, 1, 0, 0]), name="four.json")
        out = str(tmp_path / "four.jsonl")
        assert runner.invoke(main, ["run", "--config", cfg4, "--out", out]).exit_code == 0
        cfg6 = write_config(tmp_path, linear_doc(), name="six.json")
        result = runner.invoke(main, ["verify", out, "--config", cfg6])
        assert result.exit_code == 2
