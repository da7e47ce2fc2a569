from .engine import RunConfig, RunResult, run
from .scenarios import (
    LocationSet,
    ScenarioTrajectory,
    Sm1Params,
    Sm2Params,
    Sm3Params,
    Sm4Params,
    gen_scenario,
    relative_pose_arrays,
    sm4_grid,
    waypoint_trajectory,
)
from .sweep import HeatmapRecords, accuracy_radius, sweep_grid

__all__ = [
    "LocationSet",
    "ScenarioTrajectory",
    "Sm1Params",
    "Sm2Params",
    "Sm3Params",
    "Sm4Params",
    "gen_scenario",
    "relative_pose_arrays",
    "sm4_grid",
    "waypoint_trajectory",
    "RunConfig",
    "RunResult",
    "run",
    "HeatmapRecords",
    "accuracy_radius",
    "sweep_grid",
]
