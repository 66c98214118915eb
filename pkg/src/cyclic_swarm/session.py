"""Live steerable simulation session.

One session owns one simulator state and a growing piecewise-constant
control schedule.  Steering commands take effect at the step boundary on
which they are applied, appending (or replacing, when no step has run in
between) a schedule interval, exactly as a pre-programmed multi-interval
scenario would.  A command arriving at time t therefore leaves the same
history as a config whose schedule listed that interval from the start.

Stepping reproduces the batch drivers' float arithmetic: grid times are
seg_start + m dt recomputed from the segment start, and the step size is
the float gap between consecutive grid labels.  Exporting the accumulated
schedule and replaying it through the batch simulator lands on the live
state bit for bit (the determinism bridge).

Speed and pausing affect only how much simulated time the service advances
per wall tick; they leave no trace in the schedule.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bugs import _Core, _guarded_dt_step
from .linear import _rhs, _rk4_step
from .model import (
    ControlInterval,
    ControlSchedule,
    LeaderSet,
    ScenarioConfig,
    Vec2,
    sample_initial_state,
)

SNAPSHOT_SIM_SECONDS = 0.05  # default cadence: one snapshot per 50 sim ms at speed 1


@dataclass(frozen=True)
class SessionSnapshot:
    t: float
    positions: tuple[Vec2, ...]
    active: tuple[bool, ...]
    detect: tuple[bool, ...]
    u_c: Vec2
    n_l: int
    predicted_velocity: Vec2
    distances: tuple[float | None, ...] | None
    gathered: bool
    paused: bool

    def as_json_dict(self) -> dict:
        return {
            "t": self.t,
            "positions": [[p.x, p.y] for p in self.positions],
            "active": list(self.active),
            "detect": list(self.detect),
            "u_c": [self.u_c.x, self.u_c.y],
            "n_l": self.n_l,
            "predicted_velocity": [self.predicted_velocity.x, self.predicted_velocity.y],
            "distances": None if self.distances is None else list(self.distances),
            "gathered": self.gathered,
            "paused": self.paused,
        }


class CommandRejected(ValueError):
    pass


class SteeringSession:
    """Single live scenario advanced step by step under operator control."""

    def __init__(self, config: ScenarioConfig):
        self._base_config = config
        self.dt = config.dt
        self.n = config.n
        self.model = config.model
        self.speed = 1.0
        self.paused = False
        self._reset_to(config.seed)

    # ---- state management ----

    def _reset_to(self, seed: int) -> None:
        self.seed = seed
        cfg = dataclasses.replace(self._base_config, seed=seed)
        state = sample_initial_state(cfg)
        self.intervals: list[ControlInterval] = list(cfg.schedule.intervals)
        self._seg = 0  # index of the interval currently integrating
        self._seg_start = cfg.schedule.t0
        self._m = 0  # steps completed inside the current segment
        self.t = cfg.schedule.t0
        self.step_count = 0
        self.gathered_at: float | None = None
        if self.model == "linear":
            self._z = np.array(
                [complex(p.x, p.y) for p in state.positions], dtype=complex
            )
            self._idx = np.arange(1, self.n + 1) % self.n
            self._core = None
        else:
            self._core = _Core.from_state(state)
            self._z = None

    # ---- control plumbing ----

    @property
    def current_interval(self) -> ControlInterval:
        return self.intervals[self._seg]

    def _enter_due_segments(self) -> None:
        while (
            self._seg + 1 < len(self.intervals)
            and self.t >= self.intervals[self._seg + 1].t_start
        ):
            self._seg += 1
            self._seg_start = self.intervals[self._seg].t_start
            self._m = 0
            if self._core is not None:
                self._core.set_raw_flags(self.intervals[self._seg].leaders)

    def _target_control(self) -> ControlInterval:
        """Control in force for the next step (pending segment switches seen)."""
        k = self._seg
        while k + 1 < len(self.intervals) and self.t >= self.intervals[k + 1].t_start:
            k += 1
        return self.intervals[k]

    def _validate_control(self, u_c: Vec2, leaders: LeaderSet) -> None:
        if self.model == "bugs" and not leaders.all_detect:
            if u_c.norm() > 1.0 + 1e-12:
                raise CommandRejected(
                    "bugs model with partial detection requires ||u_c|| <= 1"
                )

    def _place_interval(self, u_c: Vec2, leaders: LeaderSet) -> None:
        self._enter_due_segments()
        # steering takes over: future pre-programmed intervals are dropped
        del self.intervals[self._seg + 1 :]
        iv = ControlInterval(t_start=self.t, u_c=u_c, leaders=leaders)
        if self._m == 0:
            # zero steps have run under the current interval: replace it in
            # place, keeping interval starts strictly increasing
            self.intervals[self._seg] = iv
        else:
            self.intervals.append(iv)
            self._seg += 1
            self._seg_start = self.t
            self._m = 0
        if self._core is not None:
            self._core.set_raw_flags(leaders)

    # ---- commands ----

    def set_uc(self, ux: float, uy: float) -> float:
        if not (math.isfinite(ux) and math.isfinite(uy)):
            raise CommandRejected("u_c components must be finite")
        target = self._target_control()
        u_c = Vec2(float(ux), float(uy))
        self._validate_control(u_c, target.leaders)
        self._place_interval(u_c, target.leaders)
        return self.t

    def set_leaders(self, flags: Sequence[bool | int]) -> float:
        if len(flags) != self.n:
            raise CommandRejected(f"need {self.n} flags, got {len(flags)}")
        leaders = LeaderSet.from_bits(flags)
        target = self._target_control()
        self._validate_control(target.u_c, leaders)
        self._place_interval(target.u_c, leaders)
        return self.t

    def pause(self) -> float:
        self.paused = True
        return self.t

    def resume(self) -> float:
        self.paused = False
        return self.t

    def reset(self, seed: int | None = None) -> float:
        self._reset_to(self._base_config.seed if seed is None else int(seed))
        return self.t

    def set_speed(self, x: float) -> float:
        if not (math.isfinite(x) and x > 0.0):
            raise CommandRejected("speed must be finite and positive")
        self.speed = float(x)
        return self.t

    def apply(self, message: dict) -> tuple[bool, str | None, float]:
        """Dispatch one wire command; returns (ok, reason, effective t)."""
        cmd = message.get("cmd")
        try:
            if cmd == "set_uc":
                t = self.set_uc(float(message["ux"]), float(message["uy"]))
            elif cmd == "set_leaders":
                t = self.set_leaders(list(message["flags"]))
            elif cmd == "pause":
                t = self.pause()
            elif cmd == "resume":
                t = self.resume()
            elif cmd == "reset":
                seed = message.get("seed")
                t = self.reset(None if seed is None else int(seed))
            elif cmd == "set_speed":
                t = self.set_speed(float(message["x"]))
            else:
                return False, f"unknown command: {cmd!r}", self.t
        except CommandRejected as exc:
            return False, str(exc), self.t
        except (KeyError, TypeError, ValueError) as exc:
            return False, f"malformed command: {exc}", self.t
        return True, None, t

    # ---- stepping ----

    def advance_steps(self, k: int) -> int:
        """Advance up to k steps; returns how many actually ran."""
        if self.paused:
            return 0
        done = 0
        while done < k:
            self._enter_due_segments()
            seg_end = (
                self.intervals[self._seg + 1].t_start
                if self._seg + 1 < len(self.intervals)
                else math.inf
            )
            t = self._seg_start + self._m * self.dt
            t_next = self._seg_start + (self._m + 1) * self.dt
            if t_next > seg_end:
                t_next = seg_end
            h = t_next - t
            iv = self.intervals[self._seg]
            if self.model == "linear":
                b = np.array([1.0 if f else 0.0 for f in iv.leaders.flags])
                bu = b * complex(iv.u_c.x, iv.u_c.y)
                self._z = _rk4_step(self._z, h, self._idx, bu)
            else:
                uc = complex(iv.u_c.x, iv.u_c.y)
                _, gathered = _guarded_dt_step(self._core, uc, self._base_config.epsilon, t, h)
                if gathered is not None and self.gathered_at is None:
                    self.gathered_at = gathered
            self._m += 1
            self.step_count += 1
            self.t = t_next
            done += 1
        return done

    def advance_sim_time(self, sim_seconds: float) -> int:
        return self.advance_steps(int(round(sim_seconds / self.dt)))

    # ---- observation ----

    def positions(self) -> tuple[Vec2, ...]:
        if self.model == "linear":
            return tuple(Vec2(float(c.real), float(c.imag)) for c in self._z)
        return tuple(Vec2(float(c.real), float(c.imag)) for c in self._core.z)

    def snapshot(self) -> SessionSnapshot:
        self._enter_due_segments()
        iv = self.intervals[self._seg]
        n_l = iv.leaders.n_detecting
        pred = Vec2(n_l / self.n * iv.u_c.x, n_l / self.n * iv.u_c.y)
        if self.model == "linear":
            return SessionSnapshot(
                t=self.t,
                positions=self.positions(),
                active=(True,) * self.n,
                detect=tuple(iv.leaders.flags),
                u_c=iv.u_c,
                n_l=n_l,
                predicted_velocity=pred,
                distances=None,
                gathered=False,
                paused=self.paused,
            )
        core = self._core
        dist: list[float | None] = [None] * self.n
        if core.n_clusters >= 2:
            for a, dd in zip(core.act, core.separations()):
                dist[int(a)] = float(dd)
        return SessionSnapshot(
            t=self.t,
            positions=self.positions(),
            active=tuple(bool(a) for a in core.active),
            detect=tuple(bool(b) for b in core.eff),
            u_c=iv.u_c,
            n_l=n_l,
            predicted_velocity=pred,
            distances=tuple(dist),
            gathered=core.n_clusters == 1,
            paused=self.paused,
        )

    # ---- determinism bridge ----

    def export_scenario(self) -> ScenarioConfig | None:
        """The accumulated schedule as a batch config ending now.

        Replaying it reproduces this session's state bit for bit.  Returns
        None when no time has passed (nothing to replay).
        """
        if self.t <= self._base_config.schedule.t0:
            return None
        intervals = [iv for iv in self.intervals if iv.t_start < self.t]
        schedule = ControlSchedule(intervals=tuple(intervals), t_end=self.t)
        return dataclasses.replace(self._base_config, schedule=schedule, seed=self.seed)
