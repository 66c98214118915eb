"""Cyclic-pursuit swarm engine with broadcast steering.

Two dynamics families over one scenario format: a linear consensus ring with
closed-form asymptotics, and a unit-speed pursuit ("bugs") system whose
agents merge on capture and provably gather under a weak enough command.
Batch simulation, closed-form prediction, trace verification, a live
steerable session, and HTTP/WebSocket plus CLI front ends.
"""

from .bugs import (
    BugsResult,
    CaptureEvent,
    DistanceRateBreakdown,
    StepTooLargeError,
    bugs_rhs,
    distance_rate,
    gather_bound,
    simulate_bugs,
    step_bugs,
    termination_bound,
)
from .linear import TrajectoryRecord, linear_rhs, simulate_linear
from .model import (
    ConfigError,
    ControlInterval,
    ControlSchedule,
    InitSpec,
    LeaderSet,
    ScenarioConfig,
    SwarmState,
    Vec2,
    evaluate_schedule,
    sample_initial_state,
)
from .rng import Pcg32
from .service import build_app
from .session import CommandRejected, SessionSnapshot, SteeringSession
from .spectral import (
    FormationPrediction,
    SpectralBasis,
    agreement_velocity,
    build_basis,
    deviation_gamma,
    deviation_vector,
    exact_axis_state,
    predict_formation,
)
from .traces import read_trace, write_csv, write_events_jsonl, write_jsonl
from .verify import (
    PropertyReport,
    check_bugs_properties,
    check_linear_asymptotics,
    reports_as_json,
)

__version__ = "0.1.0"

__all__ = [
    "BugsResult",
    "CaptureEvent",
    "CommandRejected",
    "ConfigError",
    "ControlInterval",
    "ControlSchedule",
    "DistanceRateBreakdown",
    "FormationPrediction",
    "InitSpec",
    "LeaderSet",
    "Pcg32",
    "PropertyReport",
    "ScenarioConfig",
    "SessionSnapshot",
    "SpectralBasis",
    "SteeringSession",
    "StepTooLargeError",
    "SwarmState",
    "TrajectoryRecord",
    "Vec2",
    "agreement_velocity",
    "bugs_rhs",
    "build_app",
    "build_basis",
    "check_bugs_properties",
    "check_linear_asymptotics",
    "deviation_gamma",
    "deviation_vector",
    "distance_rate",
    "evaluate_schedule",
    "exact_axis_state",
    "gather_bound",
    "linear_rhs",
    "predict_formation",
    "read_trace",
    "reports_as_json",
    "sample_initial_state",
    "simulate_bugs",
    "simulate_linear",
    "step_bugs",
    "termination_bound",
    "write_csv",
    "write_events_jsonl",
    "write_jsonl",
]
