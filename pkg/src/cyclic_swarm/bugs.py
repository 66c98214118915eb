"""Unit-speed ring pursuit with captures ("bugs" dynamics).

Each active agent moves at unit speed straight at the next active agent on
the ring; detecting agents additionally ride the broadcast command, so
p_i' = (p_j - p_i)/d_i + b_i u_c with ||p_i' - b_i u_c|| = 1 identically.

Captures: after each explicit-Euler advance, a chaser whose post-step
separation is at or below epsilon (proximity), or whose displacement
relative to its prey, projected on the pre-step line of sight, exceeds the
pre-step separation (overtake), merges into its prey's cluster.  The chaser
goes inactive, its whole cluster snaps onto the prey, and the merged cluster
detects the broadcast when any member's raw flag is set.  Merges are
resolved in ascending chaser index, repeatedly, until none fire.  Capture
decisions are built from relative motion on purpose: when every cluster
detects the command, the commanded drift moves chaser and prey together and
capture times cannot depend on the command at all.

Step-size guard: a nominal step h is subdivided whenever h would let some
gap close by more than the smallest active separation while that separation
is still above epsilon, so no chaser can jump far past its prey undetected.
Gaps close at relative speed, at most 2 when detection is uniform across
clusters and at most 2 + ||u_c|| when it is mixed.  A jump that clears two
preys at once raises StepTooLargeError instead of guessing.

Once one cluster remains the swarm is gathered: the remaining motion is the
detected command exactly, applied analytically instead of stepped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .linear import TrajectoryRecord, _segments
from .model import (
    LeaderSet,
    ScenarioConfig,
    SwarmState,
    Vec2,
    sample_initial_state,
)
from .spectral import InternalConsistencyError


class StepTooLargeError(RuntimeError):
    """One Euler step jumped past more than one prey; reduce dt."""


@dataclass(frozen=True)
class CaptureEvent:
    t: float
    chaser: int
    prey: int
    kind: str  # "proximity" | "overtake"
    d: float   # separation at resolution time


@dataclass(frozen=True)
class DistanceRateBreakdown:
    """Closed-form separation rate for one chaser, with its ingredients.

    rate comes from the four detection cases; inner_product is the direct
    form <v_prey - v_chaser, unit line of sight> and must agree with rate to
    numerical precision.  cos_alpha is None in the symmetric cases and when
    the command is zero (its contribution is then zero).
    """

    chaser: int
    prey: int
    case: str  # "neither" | "chaser_detects" | "prey_detects" | "both"
    d: float
    rate: float
    cos_theta: float
    cos_alpha: float | None
    inner_product: float


def gather_bound(n: int) -> float:
    """Command-magnitude threshold 1/(2 n^2) under which gathering is certain."""
    if n < 2:
        raise ValueError("bound needs at least 2 clusters")
    return 1.0 / (2.0 * n * n)


# ---- internal array core ----


class _Core:
    """Mutable array mirror of SwarmState used by the steppers."""

    def __init__(self, z: np.ndarray, raw: np.ndarray, cluster: np.ndarray, active: np.ndarray):
        self.n = len(z)
        self.z = z.astype(complex)
        self.raw = raw.astype(bool)
        self.cluster = cluster.astype(int)
        self.active = active.astype(bool)
        self.eff = np.zeros(self.n, dtype=bool)
        self._refresh_prey()
        self.refresh_flags()

    @classmethod
    def from_state(cls, state: SwarmState, raw_flags: LeaderSet | None = None) -> "_Core":
        raw = raw_flags if raw_flags is not None else state.detect
        return cls(
            np.array([complex(p.x, p.y) for p in state.positions]),
            np.array([bool(b) for b in raw.flags]),
            np.array(state.cluster_of),
            np.array(state.active),
        )

    def _refresh_prey(self) -> None:
        act = np.flatnonzero(self.active)
        self.act = act
        self.prey = np.full(self.n, -1, dtype=int)
        m = len(act)
        for pos, a in enumerate(act):
            self.prey[a] = act[(pos + 1) % m]

    def refresh_flags(self) -> None:
        # effective flag of a cluster: OR of its members' raw flags
        for a in self.act:
            members = self.cluster == a
            self.eff[members] = bool(self.raw[members].any())

    def set_raw_flags(self, leaders: LeaderSet) -> None:
        self.raw = np.array([bool(b) for b in leaders.flags])
        self.refresh_flags()

    def effective_for(self, leaders: LeaderSet) -> np.ndarray:
        """Effective flags the current clusters would have under other raw flags."""
        raw = np.array([bool(b) for b in leaders.flags])
        eff = np.zeros(self.n, dtype=bool)
        for a in self.act:
            members = self.cluster == a
            eff[members] = bool(raw[members].any())
        return eff

    @property
    def n_clusters(self) -> int:
        return len(self.act)

    def separations(self) -> np.ndarray:
        """Chaser-to-prey distances aligned with self.act; empty if gathered."""
        if len(self.act) < 2:
            return np.empty(0)
        return np.abs(self.z[self.prey[self.act]] - self.z[self.act])

    def merge(self, chaser: int, prey: int) -> None:
        self.active[chaser] = False
        moved = self.cluster == chaser
        self.cluster[moved] = prey
        self.z[moved] = self.z[prey]
        self._refresh_prey()
        members = self.cluster == prey
        self.eff[members] = bool(self.raw[members].any())

    def velocities(self, uc: complex, eff: np.ndarray | None = None) -> np.ndarray:
        if eff is None:
            eff = self.eff
        v = np.zeros(self.n, dtype=complex)
        if len(self.act) >= 2:
            diff = self.z[self.prey[self.act]] - self.z[self.act]
            d = np.abs(diff)
            if np.any(d == 0.0):
                raise InternalConsistencyError("zero separation survived capture resolution")
            v[self.act] = diff / d + eff[self.act] * uc
            v = v[self.cluster]  # riders move with their leader
        else:
            v[:] = (uc if eff[self.act[0]] else 0.0)
        return v

    def to_state(self, t: float) -> SwarmState:
        return SwarmState(
            t=t,
            positions=tuple(Vec2(float(c.real), float(c.imag)) for c in self.z),
            detect=LeaderSet(tuple(bool(b) for b in self.eff)),
            cluster_of=tuple(int(c) for c in self.cluster),
            active=tuple(bool(a) for a in self.active),
        )


def _advance(core: _Core, uc: complex, h: float, eps: float, t_new: float) -> list[CaptureEvent]:
    """One Euler advance of length h plus capture resolution at t_new."""
    if core.n_clusters < 2:
        # gathered: pure drift, exactly the detected command
        core.z = core.z + (uc if core.eff[core.act[0]] else 0.0) * h
        return []

    act = core.act
    diff = core.z[core.prey[act]] - core.z[act]
    d = np.abs(diff)
    if np.any(d == 0.0):
        raise InternalConsistencyError("zero separation at step start")
    pre = core.z.copy()
    core.z[act] = core.z[act] + h * (diff / d + core.eff[act] * uc)
    core.z = core.z[core.cluster]

    events: list[CaptureEvent] = []
    while True:
        fired = False
        for i in list(core.act):
            if core.n_clusters < 2:
                break
            if not core.active[i]:
                continue
            j = int(core.prey[i])
            d_post = abs(core.z[j] - core.z[i])
            kind = None
            if d_post <= eps:
                kind = "proximity"
            else:
                los = pre[j] - pre[i]
                d_pre = abs(los)
                if d_pre > 0.0:
                    # displacement is measured relative to the prey: capture
                    # is chase geometry, and a command detected by both moves
                    # chaser and prey alike, so it has to cancel here
                    disp = (core.z[i] - pre[i]) - (core.z[j] - pre[j])
                    proj = (disp * los.conjugate()).real / d_pre
                    if proj > d_pre:
                        kind = "overtake"
                        k = int(core.prey[j])
                        if k != i and proj > d_pre + abs(pre[k] - pre[j]):
                            raise StepTooLargeError(
                                f"chaser {i} cleared two preys in one step at t={t_new}"
                            )
            if kind is not None:
                core.merge(i, j)
                events.append(CaptureEvent(t=t_new, chaser=i, prey=j, kind=kind, d=float(d_post)))
                fired = True
        if not fired:
            break
    return events


def _guarded_dt_step(
    core: _Core, uc: complex, eps: float, t_base: float, h_nom: float
) -> tuple[list[CaptureEvent], float | None]:
    """Advance one nominal step of length h_nom with the step-size guard.

    Returns the capture events fired inside the step and the gathering time
    if the step left a single cluster, else None.
    """
    events: list[CaptureEvent] = []
    gathered: float | None = None
    remaining = h_nom
    advanced = 0.0
    while remaining > 0.0:
        seps = core.separations()
        if len(seps) == 0:
            h = remaining
        else:
            dmin = float(np.min(seps))
            flags = core.eff[core.act]
            # closing speeds are relative quantities: the command term
            # survives only while detection is mixed across the surviving
            # clusters, otherwise it rides along with every agent and
            # cannot close any gap
            gain = 2.0 + (abs(uc) if (flags.any() and not flags.all()) else 0.0)
            if dmin <= eps or remaining * gain <= dmin:
                h = remaining
            else:
                h = remaining / math.ceil(remaining * gain / dmin)
        advanced += h
        sub_events = _advance(core, uc, h, eps, t_base + advanced)
        remaining -= h
        if sub_events:
            events.extend(sub_events)
            if core.n_clusters == 1 and gathered is None:
                gathered = t_base + advanced
    return events, gathered


# ---- public operations ----


def bugs_rhs(state: SwarmState, u_c: Vec2) -> tuple[Vec2, ...]:
    """Instantaneous velocities; inactive agents move with their leader."""
    core = _Core.from_state(state)
    v = core.velocities(complex(u_c.x, u_c.y))
    return tuple(Vec2(float(c.real), float(c.imag)) for c in v)


def _next_active(state: SwarmState, i: int) -> int:
    n = state.n
    j = (i + 1) % n
    while not state.active[j]:
        j = (j + 1) % n
    return j


def distance_rate(state: SwarmState, i: int, u_c: Vec2) -> DistanceRateBreakdown:
    """Four-case closed-form separation rate for chaser i, with cross-check."""
    if not state.active[i]:
        raise ValueError(f"agent {i} is not active")
    if state.n_clusters < 2:
        raise ValueError("separation rate undefined for a gathered swarm")
    j = _next_active(state, i)
    k = _next_active(state, j)
    pi = complex(state.positions[i].x, state.positions[i].y)
    pj = complex(state.positions[j].x, state.positions[j].y)
    pk = complex(state.positions[k].x, state.positions[k].y)
    d_ij = abs(pj - pi)
    d_jk = abs(pk - pj)
    if d_ij == 0.0 or d_jk == 0.0:
        raise ValueError("coincident active agents")
    ui = (pj - pi) / d_ij
    uj = (pk - pj) / d_jk
    uc = complex(u_c.x, u_c.y)
    unorm = abs(uc)
    bi, bj = bool(state.detect[i]), bool(state.detect[j])

    cos_theta = (uj * ui.conjugate()).real
    ui_dot_uc = (uc * ui.conjugate()).real
    cos_alpha: float | None = None
    if bi == bj:
        case = "both" if bi else "neither"
        rate = cos_theta - 1.0
    elif bi:
        case = "chaser_detects"
        rate = cos_theta - ui_dot_uc - 1.0
        if unorm > 0.0:
            cos_alpha = ui_dot_uc / unorm
    else:
        case = "prey_detects"
        rate = cos_theta + ui_dot_uc - 1.0
        if unorm > 0.0:
            cos_alpha = ui_dot_uc / unorm

    vi = ui + (uc if bi else 0.0)
    vj = uj + (uc if bj else 0.0)
    inner = ((vj - vi) * ui.conjugate()).real
    return DistanceRateBreakdown(
        chaser=i, prey=j, case=case, d=float(d_ij), rate=float(rate),
        cos_theta=float(cos_theta), cos_alpha=cos_alpha, inner_product=float(inner),
    )


def step_bugs(
    state: SwarmState,
    u_c: Vec2,
    dt: float,
    epsilon: float,
) -> tuple[SwarmState, list[CaptureEvent]]:
    """One Euler step of length dt, then capture resolution.

    No internal subdivision happens here; callers that cannot bound dt
    against the current separations should use simulate_bugs, whose driver
    applies the step-size guard.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    core = _Core.from_state(state)
    t_new = state.t + dt
    events = _advance(core, complex(u_c.x, u_c.y), dt, epsilon, t_new)
    return core.to_state(t_new), events


def termination_bound(state: SwarmState, u_c: Vec2) -> float | None:
    """Certified gathering deadline, or None when the command is too strong.

    With m active clusters and ||u_c|| strictly below 1/(2 m^2) the swarm
    gathers by t + 2 m (sum of separations) / (1 - 2 m^2 ||u_c||).  At or
    above the threshold no bound is certified.  A gathered state returns its
    own time.
    """
    m = state.n_clusters
    if m == 1:
        return state.t
    unorm = u_c.norm()
    if not unorm < gather_bound(m):
        return None
    core = _Core.from_state(state)
    sum_d = float(np.sum(core.separations()))
    return state.t + 2.0 * m * sum_d / (1.0 - 2.0 * m * m * unorm)


class BugsResult(NamedTuple):
    records: list[TrajectoryRecord]
    events: list[CaptureEvent]
    gathered_at: float | None


def simulate_bugs(config: ScenarioConfig, initial: SwarmState | None = None) -> BugsResult:
    """Run a bugs scenario under its schedule until t_end.

    Records (with separations, active mask and effective flags) are emitted
    every output_stride nominal steps plus always at t0 and t_end.  Capture
    events carry exact sub-step times.  gathered_at is the time the last
    merge completed, or None if the swarm never gathered.
    """
    if config.model != "bugs":
        raise ValueError("simulate_bugs requires a bugs-model config")
    state = initial if initial is not None else sample_initial_state(config)
    first_leaders = config.schedule.intervals[0].leaders
    core = _Core.from_state(state, raw_flags=first_leaders)
    eps = config.epsilon

    records: list[TrajectoryRecord] = []
    events: list[CaptureEvent] = []
    gathered_at: float | None = state.t if core.n_clusters == 1 else None

    def emit(t: float) -> None:
        # a record on a boundary reports the incoming interval's control and
        # the effective flags the clusters carry under it (right-open rule)
        if t < config.t_end:
            iv = config.schedule.intervals[config.schedule.index_at(t)]
        else:
            iv = config.schedule.intervals[-1]
        uc = complex(iv.u_c.x, iv.u_c.y)
        eff = core.effective_for(iv.leaders)
        v = core.velocities(uc, eff)
        dist: list[float | None] = [None] * core.n
        if core.n_clusters >= 2:
            seps = core.separations()
            for a, dd in zip(core.act, seps):
                dist[int(a)] = float(dd)
        n_l = int(np.sum(eff[core.act]))
        records.append(
            TrajectoryRecord(
                t=t,
                positions=tuple(Vec2(float(c.real), float(c.imag)) for c in core.z),
                velocities=tuple(Vec2(float(c.real), float(c.imag)) for c in v),
                u_c=iv.u_c,
                n_l=n_l,
                distances=tuple(dist),
                active=tuple(bool(a) for a in core.active),
                detect=tuple(bool(b) for b in eff),
            )
        )

    step_count = 0
    emit(config.t0)
    for seg_start, seg_end, k in _segments(config.schedule):
        iv = config.schedule.intervals[k]
        core.set_raw_flags(iv.leaders)
        uc = complex(iv.u_c.x, iv.u_c.y)
        m = 0
        while True:
            t = seg_start + m * config.dt
            if t >= seg_end:
                break
            t_next = seg_start + (m + 1) * config.dt
            if t_next > seg_end:
                t_next = seg_end
            # h is the float gap between the grid labels, so a replay that
            # splits this segment at any grid point steps bit-identically
            sub_events, gathered = _guarded_dt_step(core, uc, eps, t, t_next - t)
            events.extend(sub_events)
            if gathered is not None and gathered_at is None:
                gathered_at = gathered
            m += 1
            step_count += 1
            at_final = t_next >= config.t_end
            if step_count % config.output_stride == 0 and not at_final:
                emit(t_next)
            elif at_final:
                emit(config.t_end)
                break
    return BugsResult(records, events, gathered_at)
