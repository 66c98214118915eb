"""Scenario model: value types, broadcast-control schedules, and swarm state.

Everything here is immutable.  A scenario is a ring of n agents, each chasing
its cyclic successor, plus an exogenous broadcast velocity command that only a
flagged subset of agents detects.  The command and the flag set are piecewise
constant in time, described by a ControlSchedule of right-open intervals.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .rng import Pcg32


class ConfigError(ValueError):
    """Raised for any structurally invalid scenario input."""


class Vec2(NamedTuple):
    x: float
    y: float

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def scaled(self, a: float) -> "Vec2":
        return Vec2(self.x * a, self.y * a)

    def plus(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def minus(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class LeaderSet:
    """Detection flags: flags[i] is True when agent i hears the broadcast."""

    flags: tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.flags) == 0:
            raise ConfigError("leader set must not be empty")

    @classmethod
    def from_bits(cls, bits: Iterable[int | bool]) -> "LeaderSet":
        return cls(tuple(bool(b) for b in bits))

    def __len__(self) -> int:
        return len(self.flags)

    def __getitem__(self, i: int) -> bool:
        return self.flags[i]

    @property
    def n_detecting(self) -> int:
        return sum(self.flags)

    @property
    def all_detect(self) -> bool:
        return all(self.flags)

    def with_flag(self, i: int, value: bool) -> "LeaderSet":
        flags = list(self.flags)
        flags[i] = bool(value)
        return LeaderSet(tuple(flags))

    def as_ints(self) -> list[int]:
        return [int(b) for b in self.flags]


@dataclass(frozen=True)
class ControlInterval:
    """One constant-control stretch starting at t_start (right-open)."""

    t_start: float
    u_c: Vec2
    leaders: LeaderSet


@dataclass(frozen=True)
class ControlSchedule:
    """Piecewise-constant control over [t0, t_end).

    Interval k applies on [t_start_k, t_start_{k+1}); the last interval runs
    to t_end.  A boundary time belongs to the newer interval.
    """

    intervals: tuple[ControlInterval, ...]
    t_end: float

    def __post_init__(self) -> None:
        if not self.intervals:
            raise ConfigError("schedule must contain at least one interval")
        starts = [iv.t_start for iv in self.intervals]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ConfigError("interval t_start values must be strictly increasing")
        if not self.t_end > starts[-1]:
            raise ConfigError("t_end must exceed the last interval start")
        n = len(self.intervals[0].leaders)
        if any(len(iv.leaders) != n for iv in self.intervals):
            raise ConfigError("all intervals must carry leader sets of equal size")

    @property
    def t0(self) -> float:
        return self.intervals[0].t_start

    def index_at(self, t: float) -> int:
        if not (self.t0 <= t < self.t_end):
            raise ConfigError(f"t={t!r} outside schedule domain [{self.t0!r}, {self.t_end!r})")
        starts = [iv.t_start for iv in self.intervals]
        return bisect_right(starts, t) - 1

    def evaluate(self, t: float) -> tuple[Vec2, LeaderSet]:
        iv = self.intervals[self.index_at(t)]
        return iv.u_c, iv.leaders


def evaluate_schedule(schedule: ControlSchedule, t: float) -> tuple[Vec2, LeaderSet]:
    """Control pair (u_c, leaders) in force at time t; pure lookup."""
    return schedule.evaluate(t)


@dataclass(frozen=True)
class SwarmState:
    """Positions plus the bookkeeping that capture merges introduce.

    cluster_of[i] is i itself while agent i is active, else the index of the
    active agent whose cluster absorbed i.  Inactive agents sit exactly on
    their leader and share its effective detect flag.
    """

    t: float
    positions: tuple[Vec2, ...]
    detect: LeaderSet
    cluster_of: tuple[int, ...]
    active: tuple[bool, ...]

    def __post_init__(self) -> None:
        n = len(self.positions)
        if not (len(self.detect) == len(self.cluster_of) == len(self.active) == n):
            raise ConfigError("state field lengths disagree")
        if not any(self.active):
            raise ConfigError("at least one agent must be active")
        for i in range(n):
            leader = self.cluster_of[i]
            if not 0 <= leader < n or not self.active[leader]:
                raise ConfigError(f"agent {i} points at a non-active cluster leader")
            if self.active[i]:
                if leader != i:
                    raise ConfigError(f"active agent {i} must lead its own cluster")
            else:
                if self.positions[i] != self.positions[leader]:
                    raise ConfigError(f"inactive agent {i} not snapped to its leader")
                if self.detect[i] != self.detect[leader]:
                    raise ConfigError(f"agent {i} flag differs from its cluster leader")

    @classmethod
    def fresh(cls, t: float, positions: Sequence[Vec2], leaders: LeaderSet) -> "SwarmState":
        n = len(positions)
        if len(leaders) != n:
            raise ConfigError("leader set size must match agent count")
        return cls(t, tuple(positions), leaders, tuple(range(n)), (True,) * n)

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def n_clusters(self) -> int:
        return sum(self.active)

    def active_indices(self) -> list[int]:
        return [i for i, a in enumerate(self.active) if a]


@dataclass(frozen=True)
class InitSpec:
    """Initial positions: a sampling box or an explicit list."""

    kind: str  # "box" | "explicit"
    low: Vec2 | None = None
    high: Vec2 | None = None
    positions: tuple[Vec2, ...] | None = None


DEFAULT_DT = 1e-3
DEFAULT_EPSILON = 1e-3
DEFAULT_STRIDE = 100
DEFAULT_BOX = InitSpec(kind="box", low=Vec2(-5.0, -5.0), high=Vec2(5.0, 5.0))


@dataclass(frozen=True)
class ScenarioConfig:
    model: str  # "linear" | "bugs"
    n: int
    schedule: ControlSchedule
    dt: float = DEFAULT_DT
    seed: int = 0
    output_stride: int = DEFAULT_STRIDE
    epsilon: float = DEFAULT_EPSILON
    init: InitSpec = DEFAULT_BOX

    def __post_init__(self) -> None:
        if self.model not in ("linear", "bugs"):
            raise ConfigError(f"unknown model {self.model!r}")
        if not isinstance(self.n, int) or self.n < 2:
            raise ConfigError("n must be an integer >= 2")
        if not (self.dt > 0.0):
            raise ConfigError("dt must be positive")
        if not isinstance(self.output_stride, int) or self.output_stride < 1:
            raise ConfigError("output_stride must be an integer >= 1")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if not (self.epsilon > 0.0):
            raise ConfigError("epsilon must be positive")
        for iv in self.schedule.intervals:
            if len(iv.leaders) != self.n:
                raise ConfigError("leader set size must equal n")
            # Unit-speed agents cannot outrun a faster broadcast unless every
            # agent detects it; reject the configs the theory excludes.
            if self.model == "bugs" and not iv.leaders.all_detect:
                if iv.u_c.norm() > 1.0 + 1e-12:
                    raise ConfigError(
                        "bugs model with a partial leader set requires |u_c| <= 1"
                    )
        if self.init.kind == "explicit":
            pos = self.init.positions or ()
            if len(pos) != self.n:
                raise ConfigError("explicit init must list exactly n positions")
            if self.model == "bugs":
                for i in range(self.n):
                    for j in range(i + 1, self.n):
                        if pos[i].minus(pos[j]).norm() <= self.epsilon:
                            raise ConfigError(
                                "bugs init positions must be pairwise farther apart than epsilon"
                            )
        elif self.init.kind == "box":
            if self.init.low is None or self.init.high is None:
                raise ConfigError("box init requires low and high corners")
            if not (self.init.low.x < self.init.high.x and self.init.low.y < self.init.high.y):
                raise ConfigError("box init corners must satisfy low < high")
        else:
            raise ConfigError(f"unknown init kind {self.init.kind!r}")

    @property
    def t0(self) -> float:
        return self.schedule.t0

    @property
    def t_end(self) -> float:
        return self.schedule.t_end

    # ---- JSON round-trip ----

    @classmethod
    def from_json_dict(cls, d: dict) -> "ScenarioConfig":
        try:
            return cls._parse(d)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(f"malformed scenario config: {exc}") from exc

    @classmethod
    def _parse(cls, d: dict) -> "ScenarioConfig":
        if not isinstance(d, dict):
            raise ConfigError("scenario config must be a JSON object")
        for key in ("model", "n", "t_end", "schedule"):
            if key not in d:
                raise ConfigError(f"missing required config key {key!r}")
        n = d["n"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise ConfigError("n must be an integer")
        intervals = []
        raw_sched = d["schedule"]
        if not isinstance(raw_sched, list):
            raise ConfigError("schedule must be a list of intervals")
        for item in raw_sched:
            u = item["u_c"]
            leaders = item["leaders"]
            if len(u) != 2:
                raise ConfigError("u_c must be a [ux, uy] pair")
            intervals.append(
                ControlInterval(
                    t_start=float(item["t_start"]),
                    u_c=Vec2(float(u[0]), float(u[1])),
                    leaders=LeaderSet.from_bits(leaders),
                )
            )
        schedule = ControlSchedule(tuple(intervals), t_end=float(d["t_end"]))

        raw_init = d.get("init")
        if raw_init is None:
            init = DEFAULT_BOX
        elif raw_init.get("kind") == "box":
            lo, hi = raw_init["low"], raw_init["high"]
            init = InitSpec("box", low=Vec2(float(lo[0]), float(lo[1])),
                            high=Vec2(float(hi[0]), float(hi[1])))
        elif raw_init.get("kind") == "explicit":
            init = InitSpec(
                "explicit",
                positions=tuple(Vec2(float(p[0]), float(p[1])) for p in raw_init["positions"]),
            )
        else:
            raise ConfigError("init.kind must be 'box' or 'explicit'")

        stride = d.get("output_stride", DEFAULT_STRIDE)
        if not isinstance(stride, int) or isinstance(stride, bool):
            raise ConfigError("output_stride must be an integer")
        seed = d.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError("seed must be an integer")
        return cls(
            model=d["model"],
            n=n,
            schedule=schedule,
            dt=float(d.get("dt", DEFAULT_DT)),
            seed=seed,
            output_stride=stride,
            epsilon=float(d.get("epsilon", DEFAULT_EPSILON)),
            init=init,
        )

    def to_json_dict(self) -> dict:
        init: dict
        if self.init.kind == "box":
            init = {"kind": "box",
                    "low": [self.init.low.x, self.init.low.y],
                    "high": [self.init.high.x, self.init.high.y]}
        else:
            init = {"kind": "explicit",
                    "positions": [[p.x, p.y] for p in self.init.positions]}
        return {
            "model": self.model,
            "n": self.n,
            "dt": self.dt,
            "t_end": self.t_end,
            "seed": self.seed,
            "output_stride": self.output_stride,
            "epsilon": self.epsilon,
            "init": init,
            "schedule": [
                {"t_start": iv.t_start,
                 "u_c": [iv.u_c.x, iv.u_c.y],
                 "leaders": iv.leaders.as_ints()}
                for iv in self.schedule.intervals
            ],
        }


def sample_initial_state(config: ScenarioConfig) -> SwarmState:
    """Initial SwarmState for a config; deterministic in config.seed.

    Box sampling draws x then y per agent from a single PCG32 stream.  For the
    bugs model the whole draw is rejected and repeated while any pair sits
    closer than max(2 * epsilon, 1e-6), since the pursuit direction is
    undefined at zero separation.
    """
    leaders = config.schedule.intervals[0].leaders
    if config.init.kind == "explicit":
        return SwarmState.fresh(config.t0, config.init.positions, leaders)

    rng = Pcg32(config.seed, stream=0)
    lo, hi = config.init.low, config.init.high
    min_sep = max(2.0 * config.epsilon, 1e-6) if config.model == "bugs" else 0.0
    while True:
        pts = [Vec2(rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)) for _ in range(config.n)]
        if min_sep == 0.0:
            break
        ok = all(
            pts[i].minus(pts[j]).norm() > min_sep
            for i in range(config.n)
            for j in range(i + 1, config.n)
        )
        if ok:
            break
    return SwarmState.fresh(config.t0, pts, leaders)
