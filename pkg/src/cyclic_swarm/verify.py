"""Post-hoc property checks over trajectory traces.

Each check turns one guaranteed behavior of the dynamics into a Pass/Fail
report with the worst observed violation and where it happened.  Checks that
need an asymptotic regime or a small enough command report NotApplicable
when the trace cannot support the claim, instead of guessing.

The linear asymptotic checks apply once the final control interval has run
for at least 25 time constants of the slowest decaying mode, i.e. length >=
25 / (1 - cos(2 pi / n)).  e^-25 ~ 1.4e-11 leaves the transient far below
every tolerance used here.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .linear import TrajectoryRecord, linear_rhs
from .model import ControlSchedule, ScenarioConfig, Vec2
from .spectral import build_basis, deviation_gamma

ASYMPTOTIC_TIME_CONSTANTS = 25.0

TOL_TERMINAL_VELOCITY = 2e-3
TOL_COLLINEARITY = 1e-4
TOL_DEVIATION_GAPS = 1e-6
TOL_CENTROID_DRIFT = 1e-6
TOL_VELOCITY_CONSISTENCY = 1e-9
TOL_MONOTONE = 1e-9
TOL_AGGREGATE_SLACK = 1e-3
TOL_EXACT = 1e-12


@dataclass(frozen=True)
class PropertyReport:
    property_id: str
    status: str  # "Pass" | "Fail" | "NotApplicable"
    worst_violation: float
    location_t: float

    def as_json_dict(self) -> dict:
        return {
            "property_id": self.property_id,
            "status": self.status,
            "worst_violation": self.worst_violation,
            "location_t": self.location_t,
        }


def reports_as_json(reports: Iterable[PropertyReport]) -> dict:
    reports = list(reports)
    return {
        "reports": [r.as_json_dict() for r in reports],
        "failed": sorted(r.property_id for r in reports if r.status == "Fail"),
    }


def _finish(property_id: str, worst: float, where: float, tol: float) -> PropertyReport:
    status = "Fail" if worst > tol else "Pass"
    return PropertyReport(property_id, status, worst, where)


def _not_applicable(property_id: str, t: float) -> PropertyReport:
    return PropertyReport(property_id, "NotApplicable", 0.0, t)


def _check_trace(trace: Sequence[TrajectoryRecord], n: int) -> None:
    if not trace:
        raise ValueError("empty trace")
    for rec in trace:
        if rec.n != n:
            raise ValueError(f"record at t={rec.t} has {rec.n} agents, want {n}")
    ts = [rec.t for rec in trace]
    if ts != sorted(ts):
        raise ValueError("trace times are not sorted")


def _interval_overlap_drift(schedule: ControlSchedule, t1: float, t2: float) -> Vec2:
    """Integral of n_l(t) u_c(t) over [t1, t2] under the schedule."""
    acc_x = 0.0
    acc_y = 0.0
    for k, iv in enumerate(schedule.intervals):
        start = iv.t_start
        end = (
            schedule.intervals[k + 1].t_start
            if k + 1 < len(schedule.intervals)
            else schedule.t_end
        )
        lo = max(start, t1)
        hi = min(end, t2)
        if hi > lo:
            n_l = iv.leaders.n_detecting
            acc_x += n_l * iv.u_c.x * (hi - lo)
            acc_y += n_l * iv.u_c.y * (hi - lo)
    return Vec2(acc_x, acc_y)


def _interval_for(schedule: ControlSchedule, t: float):
    if t >= schedule.t_end:
        return schedule.intervals[-1]
    return schedule.intervals[schedule.index_at(t)]


def check_linear_asymptotics(
    trace: Sequence[TrajectoryRecord], schedule: ControlSchedule
) -> list[PropertyReport]:
    n = len(schedule.intervals[0].leaders.flags)
    _check_trace(trace, n)

    final = trace[-1]
    last_iv = schedule.intervals[-1]
    reports: list[PropertyReport] = []

    tau = 1.0 / (1.0 - math.cos(2.0 * math.pi / n))
    # float dust must not flip a window that is exactly at the gate
    settled = (schedule.t_end - last_iv.t_start) >= ASYMPTOTIC_TIME_CONSTANTS * tau - 1e-9

    u = last_iv.u_c
    n_l = last_iv.leaders.n_detecting

    # (i) terminal velocity: every agent moves at (n_l / n) u_c
    if settled:
        vx = n_l / n * u.x
        vy = n_l / n * u.y
        worst = max(v.minus(Vec2(vx, vy)).norm() for v in final.velocities)
        reports.append(_finish("terminal_velocity", worst, final.t, TOL_TERMINAL_VELOCITY))
    else:
        reports.append(_not_applicable("terminal_velocity", final.t))

    # (ii) the settled formation is a line in the command direction
    if settled:
        cx = sum(p.x for p in final.positions) / n
        cy = sum(p.y for p in final.positions) / n
        spread = max(p.minus(Vec2(cx, cy)).norm() for p in final.positions)
        if spread < 1e-8 or u.norm() == 0.0:
            reports.append(PropertyReport("collinearity", "Pass", 0.0, final.t))
        else:
            if abs(u.x) >= abs(u.y):
                want = u.y / u.x
                num = sum((p.x - cx) * (p.y - cy) for p in final.positions)
                den = sum((p.x - cx) ** 2 for p in final.positions)
            else:
                want = u.x / u.y
                num = sum((p.y - cy) * (p.x - cx) for p in final.positions)
                den = sum((p.y - cy) ** 2 for p in final.positions)
            worst = abs(num / den - want)
            reports.append(_finish("collinearity", worst, final.t, TOL_COLLINEARITY))
    else:
        reports.append(_not_applicable("collinearity", final.t))

    # (iii) centroid-relative gaps match the stationary deviation profile
    if settled:
        basis = build_basis(n)
        gamma = deviation_gamma(basis, last_iv.leaders)
        cx = sum(p.x for p in final.positions) / n
        cy = sum(p.y for p in final.positions) / n
        worst = 0.0
        for i, p in enumerate(final.positions):
            gap = Vec2(p.x - cx - gamma[i] * u.x, p.y - cy - gamma[i] * u.y)
            worst = max(worst, gap.norm())
        reports.append(_finish("deviation_gaps", worst, final.t, TOL_DEVIATION_GAPS))
    else:
        reports.append(_not_applicable("deviation_gaps", final.t))

    # (iv) centroid drift law: n * (centroid(t2) - centroid(t1)) equals the
    # schedule's integral of n_l u_c; exact for the dynamics, any t1 < t2
    worst = 0.0
    where = final.t
    for r1, r2 in zip(trace, trace[1:]):
        drift = _interval_overlap_drift(schedule, r1.t, r2.t)
        dx = sum(p.x for p in r2.positions) - sum(p.x for p in r1.positions)
        dy = sum(p.y for p in r2.positions) - sum(p.y for p in r1.positions)
        v = math.hypot(dx - drift.x, dy - drift.y)
        if v > worst:
            worst = v
            where = r2.t
    reports.append(_finish("centroid_drift", worst, where, TOL_CENTROID_DRIFT))

    # (v) recorded velocities are the dynamics applied to recorded positions
    worst = 0.0
    where = final.t
    for rec in trace:
        iv = _interval_for(schedule, rec.t)
        want = linear_rhs(rec.positions, iv.leaders, iv.u_c)
        v = max(a.minus(b).norm() for a, b in zip(rec.velocities, want))
        if v > worst:
            worst = v
            where = rec.t
    reports.append(_finish("velocity_consistency", worst, where, TOL_VELOCITY_CONSISTENCY))

    return reports


def _sum_distances(rec: TrajectoryRecord) -> float | None:
    if rec.distances is None:
        return None
    vals = [d for d in rec.distances if d is not None]
    return sum(vals) if vals else None


def _n_active(rec: TrajectoryRecord) -> int:
    if rec.active is None:
        return rec.n
    return sum(1 for a in rec.active if a)


def check_bugs_properties(
    trace: Sequence[TrajectoryRecord],
    events: Sequence,
    config: ScenarioConfig,
) -> list[PropertyReport]:
    n = config.n
    _check_trace(trace, n)
    schedule = config.schedule
    final = trace[-1]
    reports: list[PropertyReport] = []
    event_times = sorted(e.t for e in events)

    def events_between(t1: float, t2: float) -> bool:
        lo = bisect.bisect_right(event_times, t1)
        hi = bisect.bisect_right(event_times, t2)
        return hi > lo

    def same_interval(t1: float, t2: float) -> bool:
        if t2 > schedule.t_end:
            return False
        k1 = schedule.index_at(t1)
        nxt = (
            schedule.intervals[k1 + 1].t_start
            if k1 + 1 < len(schedule.intervals)
            else schedule.t_end
        )
        return t2 <= nxt

    # monotone separations while the command is zero
    worst = 0.0
    where = final.t
    checked_monotone = False
    for r1, r2 in zip(trace, trace[1:]):
        if not same_interval(r1.t, r2.t):
            continue
        iv = schedule.intervals[schedule.index_at(r1.t)]
        if iv.u_c.x != 0.0 or iv.u_c.y != 0.0:
            continue
        if events_between(r1.t, r2.t):
            continue
        if r1.distances is None or r2.distances is None:
            continue
        checked_monotone = True
        for d1, d2 in zip(r1.distances, r2.distances):
            if d1 is None or d2 is None:
                continue
            v = d2 - d1
            if v > worst:
                worst = v
                where = r2.t
    if checked_monotone:
        reports.append(_finish("monotone_separations", worst, where, TOL_MONOTONE))
    else:
        reports.append(_not_applicable("monotone_separations", final.t))

    # aggregate descent: total separation falls at rate <= -1/(2n) + n ||u_c||
    # while at least two clusters remain and the command is small
    worst = 0.0
    where = final.t
    checked_descent = False
    for r1, r2 in zip(trace, trace[1:]):
        if not same_interval(r1.t, r2.t) or r2.t <= r1.t:
            continue
        iv = schedule.intervals[schedule.index_at(r1.t)]
        u_norm = iv.u_c.norm()
        if not u_norm < 1.0 / (2.0 * n * n):
            continue
        s1 = _sum_distances(r1)
        s2 = _sum_distances(r2)
        if s1 is None or s2 is None:
            continue
        if _n_active(r1) < 2 or _n_active(r2) < 2:
            continue
        checked_descent = True
        allowed = (-1.0 / (2.0 * n) + n * u_norm + TOL_AGGREGATE_SLACK) * (r2.t - r1.t)
        v = (s2 - s1) - allowed
        if v > worst:
            worst = v
            where = r2.t
    if checked_descent:
        reports.append(_finish("aggregate_descent", worst, where, 0.0))
    else:
        reports.append(_not_applicable("aggregate_descent", final.t))

    # termination bound: from any state under a small constant command the
    # swarm must be gathered within 2m sum(d) / (1 - 2m^2 ||u_c||).  The
    # claim is certified when gathering is observed inside the same interval
    # (early is fine) and falsified when the window runs past the bound
    # without gathering; anything else is inconclusive
    if len(events) == n - 1:
        gathered_t = max(e.t for e in events)
    else:
        gathered_t = None
        for rec in trace:
            if rec.t > schedule.t0 and _n_active(rec) == 1:
                gathered_t = rec.t
                break
    bound_checked = False
    bound_failed = False
    worst = 0.0
    where = final.t
    for k, iv in enumerate(schedule.intervals):
        end = (
            schedule.intervals[k + 1].t_start
            if k + 1 < len(schedule.intervals)
            else schedule.t_end
        )
        first = next(
            (r for r in trace if iv.t_start <= r.t < end and _sum_distances(r) is not None),
            None,
        )
        if first is None:
            continue
        m = _n_active(first)
        if m < 2:
            continue
        u_norm = iv.u_c.norm()
        if not u_norm < 1.0 / (2.0 * m * m):
            continue
        s = _sum_distances(first)
        bound_t = first.t + 2.0 * m * s / (1.0 - 2.0 * m * m * u_norm)
        if gathered_t is not None and first.t < gathered_t <= end:
            bound_checked = True
            if gathered_t > bound_t + config.dt:
                bound_failed = True
                v = gathered_t - bound_t
                if v > worst:
                    worst = v
                    where = bound_t
        elif gathered_t is None and bound_t < end:
            bound_checked = True
            bound_failed = True
            v = final.t - bound_t
            if v > worst:
                worst = v
                where = bound_t
    if bound_checked:
        status = "Fail" if bound_failed else "Pass"
        reports.append(PropertyReport("termination_bound", status, worst, where))
    else:
        reports.append(_not_applicable("termination_bound", final.t))

    # unit speed relative to the detected command, before gathering
    worst = 0.0
    where = final.t
    checked_unit = False
    for rec in trace:
        if _n_active(rec) < 2:
            continue
        checked_unit = True
        for i in range(rec.n):
            b = 1.0 if (rec.detect is not None and rec.detect[i]) else 0.0
            rel = rec.velocities[i].minus(Vec2(b * rec.u_c.x, b * rec.u_c.y))
            v = abs(rel.norm() - 1.0)
            if v > worst:
                worst = v
                where = rec.t
    if checked_unit:
        reports.append(_finish("unit_relative_speed", worst, where, TOL_EXACT))
    else:
        reports.append(_not_applicable("unit_relative_speed", final.t))

    # gathered cluster rides the command it detects (or stands still)
    worst = 0.0
    where = final.t
    checked_post = False
    for rec in trace:
        if _n_active(rec) != 1:
            continue
        checked_post = True
        detected = any(rec.detect) if rec.detect is not None else False
        want = rec.u_c if detected else Vec2(0.0, 0.0)
        for v_i in rec.velocities:
            v = v_i.minus(want).norm()
            if v > worst:
                worst = v
                where = rec.t
    if checked_post:
        reports.append(_finish("post_gathering_velocity", worst, where, TOL_EXACT))
    else:
        reports.append(_not_applicable("post_gathering_velocity", final.t))

    return reports
