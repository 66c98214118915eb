"""Linear ring-pursuit simulator.

Dynamics per agent: p_i' = p_{i+1} - p_i + b_i u_c, indices cyclic.  The two
axes never couple, so positions ride in one complex array (x + 1j y) and every
operation below is real-linear in it.

Integration is classical fixed-step 4-stage Runge-Kutta.  Within a schedule
interval the system is linear time-invariant, and steps are shortened so that
interval starts and t_end are hit exactly; a step therefore never straddles a
control change.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    ControlSchedule,
    LeaderSet,
    ScenarioConfig,
    SwarmState,
    Vec2,
    sample_initial_state,
)


@dataclass(frozen=True)
class TrajectoryRecord:
    """One sampled instant: state, instantaneous velocities, control in force.

    The bugs simulator reuses this record with its extra blocks filled in;
    the linear simulator leaves them None.
    """

    t: float
    positions: tuple[Vec2, ...]
    velocities: tuple[Vec2, ...]
    u_c: Vec2
    n_l: int
    distances: tuple[float | None, ...] | None = None
    active: tuple[bool, ...] | None = None
    detect: tuple[bool, ...] | None = None

    @property
    def n(self) -> int:
        return len(self.positions)


def linear_rhs(positions: tuple[Vec2, ...], leaders: LeaderSet, u_c: Vec2) -> tuple[Vec2, ...]:
    """Instantaneous velocities of the linear model at one instant."""
    n = len(positions)
    if len(leaders) != n:
        raise ValueError("leader set size must match position count")
    out = []
    for i in range(n):
        nxt = positions[(i + 1) % n]
        cur = positions[i]
        vx = nxt.x - cur.x
        vy = nxt.y - cur.y
        if leaders[i]:
            vx += u_c.x
            vy += u_c.y
        out.append(Vec2(vx, vy))
    return tuple(out)


def _rhs(z: np.ndarray, idx: np.ndarray, bu: np.ndarray) -> np.ndarray:
    return z[idx] - z + bu


def _rk4_step(z: np.ndarray, h: float, idx: np.ndarray, bu: np.ndarray) -> np.ndarray:
    k1 = _rhs(z, idx, bu)
    k2 = _rhs(z + (0.5 * h) * k1, idx, bu)
    k3 = _rhs(z + (0.5 * h) * k2, idx, bu)
    k4 = _rhs(z + h * k3, idx, bu)
    return z + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def _vec_tuple(z: np.ndarray) -> tuple[Vec2, ...]:
    return tuple(Vec2(float(c.real), float(c.imag)) for c in z)


def _segments(schedule: ControlSchedule) -> list[tuple[float, float, int]]:
    """(start, end, interval index) triples covering [t0, t_end)."""
    starts = [iv.t_start for iv in schedule.intervals]
    ends = starts[1:] + [schedule.t_end]
    return [(s, e, k) for k, (s, e) in enumerate(zip(starts, ends))]


def simulate_linear(
    config: ScenarioConfig,
    initial: SwarmState | None = None,
) -> list[TrajectoryRecord]:
    """Integrate a linear scenario; returns records every output_stride steps.

    A record is always emitted at t0 and at t_end.  Record velocities are the
    right-hand side at the recorded state under the control in force at that
    time (at t_end: the final interval's control).
    """
    if config.model != "linear":
        raise ValueError("simulate_linear requires a linear-model config")
    state = initial if initial is not None else sample_initial_state(config)
    n = config.n
    idx = np.arange(1, n + 1) % n
    z = np.array([complex(p.x, p.y) for p in state.positions])

    records: list[TrajectoryRecord] = []
    stride = config.output_stride

    def emit(t: float, z_now: np.ndarray) -> None:
        # a record on an interval boundary reports the incoming control
        # (right-open intervals); at t_end the final interval still applies
        if t < config.t_end:
            iv = config.schedule.intervals[config.schedule.index_at(t)]
        else:
            iv = config.schedule.intervals[-1]
        b = np.array([1.0 if f else 0.0 for f in iv.leaders.flags])
        bu = b * complex(iv.u_c.x, iv.u_c.y)
        v = _rhs(z_now, idx, bu)
        records.append(
            TrajectoryRecord(
                t=t,
                positions=_vec_tuple(z_now),
                velocities=_vec_tuple(v),
                u_c=iv.u_c,
                n_l=iv.leaders.n_detecting,
            )
        )

    step_count = 0
    emit(config.t0, z)
    for seg_start, seg_end, k in _segments(config.schedule):
        iv = config.schedule.intervals[k]
        b = np.array([1.0 if f else 0.0 for f in iv.leaders.flags])
        bu = b * complex(iv.u_c.x, iv.u_c.y)
        m = 0  # steps completed inside this segment; t = seg_start + m dt
        while True:
            t = seg_start + m * config.dt
            if t >= seg_end:
                break
            t_next = seg_start + (m + 1) * config.dt
            if t_next > seg_end:
                t_next = seg_end
            # h is the float gap between the grid labels, not a nominal dt:
            # a replay that splits this segment at any grid point then takes
            # bit-identical steps
            h = t_next - t
            z = _rk4_step(z, h, idx, bu)
            m += 1
            step_count += 1
            at_final = t_next >= config.t_end
            if step_count % stride == 0 and not at_final:
                emit(t_next, z)
            elif at_final:
                emit(config.t_end, z)
                break
    return records
