"""Wind-aware quadrotor planning, estimation and control."""

import json

from ._gale import (
    ConfigError,
    Error,
    Esdf,
    InvalidInput,
    MincoTrajectory,
    PlanningFailure,
    Scenario,
    reference_plan_csv,
    run_verification,
)
from ._gale import run_episode as _run_episode

__all__ = [
    "ConfigError",
    "Error",
    "Esdf",
    "InvalidInput",
    "MincoTrajectory",
    "PlanningFailure",
    "Scenario",
    "reference_plan_csv",
    "run_episode",
    "run_verification",
]


def run_episode(scenario, seed=None, record_log=True):
    """Run one episode; metrics and timing come back as dicts."""
    out = _run_episode(scenario, scenario.seed if seed is None else seed, record_log)
    out["metrics"] = json.loads(out.pop("metrics_json"))
    out["timing"] = json.loads(out.pop("timing_json"))
    return out
