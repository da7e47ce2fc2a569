"""Scenario presets: two dynamic manoeuvres and two static location sets.

Dynamic presets describe the target's rear-bumper center relative to the
ego front-bumper center with monotone (PCHIP) waypoint splines, on top of an
ego vehicle driving straight at constant speed. Headings follow the velocity
vector, so the tail lights turn with the car.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from ..core import RelativeTargetState, TxUnit, VehicleGeometry, VehiclePose, rotate, tail_lights, wrap_angle
from ..errors import InvalidParams

LANE_WIDTH = 3.5  # m
MAX_CURVATURE = 0.2  # 1/m
MIN_PLAUSIBLE_SPEED = 30 / 3.6  # m/s, curvature limit applies above this


@dataclass(frozen=True, eq=False)
class ScenarioTrajectory:
    """Time-sampled ego and target poses, rows of (x, y, heading)."""

    t: np.ndarray
    ego: np.ndarray
    target: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
            raise InvalidParams("sample times must be strictly increasing")
        for arr in (self.ego, self.target):
            if np.shape(arr) != (t.size, 3):
                raise InvalidParams("pose arrays must have shape (n, 3)")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "ego", np.asarray(self.ego, dtype=float))
        object.__setattr__(self, "target", np.asarray(self.target, dtype=float))

    @property
    def dt(self) -> float:
        return float(np.median(np.diff(self.t)))

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def _interp(self, arr, t):
        t = np.asarray(t, dtype=float)
        xy = np.stack([np.interp(t, self.t, arr[:, k]) for k in range(2)], axis=-1)
        hd = wrap_angle(np.interp(t, self.t, np.unwrap(arr[:, 2])))
        return np.concatenate([xy, np.asarray(hd)[..., None]], axis=-1)

    def ego_at(self, t) -> np.ndarray:
        return self._interp(self.ego, t)

    def target_at(self, t) -> np.ndarray:
        return self._interp(self.target, t)

    def pose_at(self, t: float) -> tuple[VehiclePose, VehiclePose]:
        e = self.ego_at(t)
        g = self.target_at(t)
        return VehiclePose(*e), VehiclePose(*g)

    def relative_arrays(self, t, geom: VehicleGeometry = VehicleGeometry(), txs=None):
        """TX positions (..., 2, 2) and facings (..., 2) in the ego frame at times ``t``."""
        return relative_pose_arrays(self.ego_at(t), self.target_at(t), geom, txs)

    def relative_state(self, t: float, geom: VehicleGeometry = VehicleGeometry(), txs=None) -> RelativeTargetState:
        pos, fac = self.relative_arrays(t, geom, txs)
        return RelativeTargetState(tuple(pos[0]), tuple(pos[1]), tuple(fac))

    def relative_speed(self, geom: VehicleGeometry = VehicleGeometry()) -> np.ndarray:
        """Speed of the target light-bar midpoint in the ego frame, m/s per sample."""
        pos, _ = self.relative_arrays(self.t, geom)
        mid = pos.mean(axis=1)
        v = np.gradient(mid, self.t, axis=0)
        return np.hypot(v[:, 0], v[:, 1])

    def curvature(self, which: str = "target") -> np.ndarray:
        arr = self.target if which == "target" else self.ego
        vx, vy = (np.gradient(arr[:, k], self.t) for k in range(2))
        ax, ay = np.gradient(vx, self.t), np.gradient(vy, self.t)
        speed = np.hypot(vx, vy)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(speed > 0, (vx * ay - vy * ax) / speed**3, 0.0)

    def check_plausible(self, max_curvature: float = MAX_CURVATURE) -> None:
        for which in ("ego", "target"):
            arr = self.target if which == "target" else self.ego
            speed = np.hypot(np.gradient(arr[:, 0], self.t), np.gradient(arr[:, 1], self.t))
            k = np.abs(self.curvature(which))
            bad = (speed >= MIN_PLAUSIBLE_SPEED) & (k > max_curvature)
            if bad.any():
                raise InvalidParams(f"{which} curvature {k[bad].max():.3f} /m exceeds {max_curvature} /m")


def relative_pose_arrays(ego, target, geom: VehicleGeometry = VehicleGeometry(), txs: tuple[TxUnit, TxUnit] | None = None):
    """Vectorised ego-frame TX positions and facings from world pose rows."""
    ego = np.asarray(ego, dtype=float)
    target = np.asarray(target, dtype=float)
    if txs is None:
        txs = tail_lights(geom)
    origin = ego[..., :2] + rotate(np.array([-geom.rx_separation / 2.0, 0.0]), ego[..., 2])
    pos = []
    fac = []
    for tx in txs:
        world = target[..., :2] + rotate(np.asarray(tx.local_offset, dtype=float), target[..., 2])
        pos.append(rotate(world - origin, -ego[..., 2]))
        fac.append(wrap_angle(target[..., 2] + tx.facing - ego[..., 2]))
    return np.stack(pos, axis=-2), np.stack(fac, axis=-1)


def waypoint_trajectory(
    times,
    rel_x,
    rel_y,
    ego_speed: float,
    duration: float = 1.0,
    dt: float = 1e-4,
    name: str = "custom",
    rel_vx=None,
) -> ScenarioTrajectory:
    """Ego drives straight along +y; the target follows relative waypoints.

    Lateral motion uses a Hermite spline when ``rel_vx`` (lateral speed at
    each waypoint) is given, a shape-preserving PCHIP otherwise.
    """
    times = np.asarray(times, dtype=float)
    if times.size < 2 or np.any(np.diff(times) <= 0):
        raise InvalidParams("waypoint times must be strictly increasing")
    if times[0] > 0 or times[-1] < duration:
        raise InvalidParams("waypoints must span the whole duration")
    if ego_speed <= 0 or dt <= 0 or duration <= 0:
        raise InvalidParams("speed, duration and dt must be positive")
    n = int(round(duration / dt)) + 1
    t = np.linspace(0.0, duration, n)
    sx = PchipInterpolator(times, rel_x) if rel_vx is None else CubicHermiteSpline(times, rel_x, rel_vx)
    sy = PchipInterpolator(times, rel_y)
    ego = np.stack([np.zeros(n), ego_speed * t, np.zeros(n)], axis=-1)
    tx = sx(t)
    ty = ego[:, 1] + sy(t)
    vx = sx.derivative()(t)
    vy = ego_speed + sy.derivative()(t)
    heading = np.arctan2(-vx, vy)
    target = np.stack([tx, ty, heading], axis=-1)
    return ScenarioTrajectory(t, ego, target, name)


# -- presets -----------------------------------------------------------------

@dataclass(frozen=True)
class Sm1Params:
    """Collision avoidance: a leading car cuts in from the left lane while braking."""

    ego_speed: float = 25.0  # m/s
    duration: float = 1.0
    start: tuple[float, float] = (-2.5, 7.0)  # relative rear-bumper position, m
    cut_in: tuple[float, float] = (-0.8, 4.5)
    end: tuple[float, float] = (0.0, 2.0)
    t_cut_in: float = 0.5
    dt: float = 1e-4


@dataclass(frozen=True)
class Sm2Params:
    """Platooning: finish merging from the left, follow straight, leave to the right."""

    ego_speed: float = 25.0
    duration: float = 1.0
    start: tuple[float, float] = (-1.5, 6.5)
    join: tuple[float, float] = (0.0, 5.5)
    leave: tuple[float, float] = (0.0, 5.5)
    end: tuple[float, float] = (3.0, 2.0)
    start_lateral_speed: float = 6.0  # m/s, still moving toward the ego lane
    end_lateral_speed: float = 3.0  # m/s, still drifting right when the run stops
    t_join: float = 0.3
    t_leave: float = 0.45
    dt: float = 1e-4


@dataclass(frozen=True)
class Sm3Params:
    """Parallel static poses with the lateral offset swept at fixed range."""

    longitudinal: float = 12.0  # m
    offset_max: float = 3.5
    n_offsets: int = 15


@dataclass(frozen=True)
class Sm4Params:
    """Location grid with an orientation set per location."""

    x_max: float = 3.0
    y_min: float = 1.0
    y_max: float = 15.0
    step: float = 0.5
    orientations_deg: tuple[float, ...] = tuple(round(float(v), 6) for v in np.linspace(-30.0, 30.0, 10))


@dataclass(frozen=True, eq=False)
class LocationSet:
    """Static target poses relative to an ego vehicle parked at the origin."""

    targets: np.ndarray  # (n, 3) rows of (x, y, heading)
    name: str = "static"
    labels: np.ndarray | None = None  # per-pose location index

    @property
    def ego(self) -> np.ndarray:
        return np.zeros_like(self.targets)

    def relative_arrays(self, geom: VehicleGeometry = VehicleGeometry(), txs=None):
        return relative_pose_arrays(self.ego, self.targets, geom, txs)

    def states(self, geom: VehicleGeometry = VehicleGeometry(), txs=None) -> list[RelativeTargetState]:
        pos, fac = self.relative_arrays(geom, txs)
        return [RelativeTargetState(tuple(p[0]), tuple(p[1]), tuple(f)) for p, f in zip(pos, fac)]


def _sm1(p: Sm1Params) -> ScenarioTrajectory:
    if not 0 < p.t_cut_in < p.duration:
        raise InvalidParams("t_cut_in must lie inside the run")
    times = [0.0, p.t_cut_in, p.duration]
    xs = [p.start[0], p.cut_in[0], p.end[0]]
    ys = [p.start[1], p.cut_in[1], p.end[1]]
    return waypoint_trajectory(times, xs, ys, p.ego_speed, p.duration, p.dt, "SM1")


def _sm2(p: Sm2Params) -> ScenarioTrajectory:
    if not 0 < p.t_join < p.t_leave < p.duration:
        raise InvalidParams("need 0 < t_join < t_leave < duration")
    times = [0.0, p.t_join, p.t_leave, p.duration]
    xs = [p.start[0], p.join[0], p.leave[0], p.end[0]]
    ys = [p.start[1], p.join[1], p.leave[1], p.end[1]]
    vx = [p.start_lateral_speed, 0.0, 0.0, p.end_lateral_speed]
    return waypoint_trajectory(times, xs, ys, p.ego_speed, p.duration, p.dt, "SM2", rel_vx=vx)


def _sm3(p: Sm3Params) -> LocationSet:
    if p.longitudinal <= 0 or p.offset_max < 0 or p.n_offsets < 1:
        raise InvalidParams("SM3 needs a positive range and at least one offset")
    off = np.linspace(0.0, p.offset_max, p.n_offsets)
    targets = np.stack([off, np.full_like(off, p.longitudinal), np.zeros_like(off)], axis=-1)
    return LocationSet(targets, "SM3", np.arange(off.size))


def sm4_grid(p: Sm4Params) -> np.ndarray:
    """Grid locations (n, 2), x fastest."""
    if p.step <= 0 or p.x_max <= 0 or not 0 < p.y_min < p.y_max:
        raise InvalidParams("invalid SM4 grid bounds")
    xs = np.round(np.arange(-p.x_max, p.x_max + p.step / 2, p.step), 9)
    ys = np.round(np.arange(p.y_min, p.y_max + p.step / 2, p.step), 9)
    gx, gy = np.meshgrid(xs, ys)
    return np.stack([gx.ravel(), gy.ravel()], axis=-1)


def _sm4(p: Sm4Params) -> LocationSet:
    if len(p.orientations_deg) == 0:
        raise InvalidParams("SM4 needs at least one orientation")
    grid = sm4_grid(p)
    ori = np.radians(np.asarray(p.orientations_deg, dtype=float))
    n, m = len(grid), len(ori)
    targets = np.column_stack([np.repeat(grid, m, axis=0), np.tile(ori, n)])
    return LocationSet(targets, "SM4", np.repeat(np.arange(n), m))


PRESETS = {"SM1": (Sm1Params, _sm1), "SM2": (Sm2Params, _sm2), "SM3": (Sm3Params, _sm3), "SM4": (Sm4Params, _sm4)}


def gen_scenario(preset: str, params=None, **overrides):
    """Build a preset; ``params`` is the preset's parameter dataclass or a dict of overrides."""
    key = str(preset).upper()
    if key not in PRESETS:
        raise InvalidParams(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    cls, build = PRESETS[key]
    if params is None:
        params = cls()
    elif isinstance(params, dict):
        overrides = {**params, **overrides}
        params = cls()
    if not isinstance(params, cls):
        raise InvalidParams(f"{key} expects {cls.__name__}")
    if overrides:
        try:
            params = cls(**{**params.__dict__, **{k: _coerce(v) for k, v in overrides.items()}})
        except TypeError as exc:
            raise InvalidParams(str(exc)) from None
    out = build(params)
    if isinstance(out, ScenarioTrajectory):
        out.check_plausible()
    return out


def _coerce(v):
    return tuple(v) if isinstance(v, list) else v
