"""Frames, vehicle geometry and true bearings.

World frame: x to the right, y forward, heading 0 faces +y, counterclockwise
positive. A :class:`VehiclePose` locates the center of the light face that
matters for the scene: the front bumper (receiver side) of the ego vehicle
and the rear bumper (tail-light side) of a leading target.

Ego frame: origin at QRX 1 (left headlight), +x toward QRX 2 at (L, 0),
+y along the ego boresight. All bearings and triangulated positions live in
this frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BehindBaseline

TABLE_I_SEPARATION = 1.6  # m, both L and D
TABLE_I_BODY_LENGTH = 5.0  # m


def wrap_angle(a):
    """Wrap angle(s) to (-pi, pi]."""
    w = np.mod(np.asarray(a, dtype=float) + math.pi, 2.0 * math.pi) - math.pi
    w = np.where(w == -math.pi, math.pi, w)
    return float(w) if np.ndim(w) == 0 else w


def heading_vector(a):
    """Unit vector for an angle measured from +y, counterclockwise."""
    a = np.asarray(a, dtype=float)
    return np.stack([-np.sin(a), np.cos(a)], axis=-1)


def rotate(v, a):
    """Rotate 2D vector(s) ``v`` counterclockwise by ``a``."""
    v = np.asarray(v, dtype=float)
    c, s = np.cos(a), np.sin(a)
    return np.stack([c * v[..., 0] - s * v[..., 1], s * v[..., 0] + c * v[..., 1]], axis=-1)


@dataclass(frozen=True)
class VehiclePose:
    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    def to_world(self, local) -> np.ndarray:
        """Map a vehicle-local point (x right, y forward) to world coordinates."""
        return rotate(local, self.heading) + np.array([self.x, self.y])


@dataclass(frozen=True)
class VehicleGeometry:
    rx_separation: float = TABLE_I_SEPARATION
    tx_separation: float = TABLE_I_SEPARATION
    body_length: float = TABLE_I_BODY_LENGTH

    def __post_init__(self):
        if self.rx_separation <= 0 or self.tx_separation <= 0 or self.body_length <= 0:
            raise ValueError("vehicle dimensions must be positive")


@dataclass(frozen=True)
class TxUnit:
    """A transmitting light on the target vehicle."""

    local_offset: tuple[float, float]
    facing: float = math.pi
    optical_power: float = 2.0  # W, peak of the modulated component
    lambertian_order: int = 11
    tone_pair: tuple[float, float] = (5e3, 6e3)

    def __post_init__(self):
        if self.optical_power <= 0:
            raise ValueError("optical_power must be positive")
        if int(self.lambertian_order) != self.lambertian_order or self.lambertian_order < 1:
            raise ValueError("lambertian_order must be an integer >= 1")
        if self.tone_pair[0] == self.tone_pair[1]:
            raise ValueError("tone pair must hold two distinct frequencies")


def tail_lights(geom: VehicleGeometry = VehicleGeometry(), **kw) -> tuple[TxUnit, TxUnit]:
    """Left (TX 1) and right (TX 2) tail lights with the default tone plan."""
    half = geom.tx_separation / 2.0
    return (
        TxUnit((-half, 0.0), math.pi, tone_pair=(5e3, 6e3), **kw),
        TxUnit((half, 0.0), math.pi, tone_pair=(12e3, 13e3), **kw),
    )


@dataclass(frozen=True)
class RelativeTargetState:
    p1: tuple[float, float]
    p2: tuple[float, float]
    tx_facings: tuple[float, float] = (math.pi, math.pi)

    @property
    def positions(self) -> np.ndarray:
        return np.array([self.p1, self.p2], dtype=float)


def qrx_positions(L: float) -> np.ndarray:
    """QRX 1 and QRX 2 in the ego frame."""
    return np.array([[0.0, 0.0], [L, 0.0]])


def relative_tx_positions(
    ego: VehiclePose,
    target: VehiclePose,
    geom: VehicleGeometry = VehicleGeometry(),
    txs: tuple[TxUnit, TxUnit] | None = None,
) -> RelativeTargetState:
    """Express the target's two transmitters in the ego frame."""
    if txs is None:
        txs = tail_lights(geom)
    origin = ego.to_world((-geom.rx_separation / 2.0, 0.0))
    out = []
    for tx in txs:
        world = target.to_world(tx.local_offset)
        out.append(tuple(rotate(world - origin, -ego.heading)))
    facings = tuple(wrap_angle(target.heading + tx.facing - ego.heading) for tx in txs)
    return RelativeTargetState(out[0], out[1], facings)


def true_aoa(p, rx_index: int, L: float = TABLE_I_SEPARATION):
    """Bearing of transmitter ``p`` seen from QRX ``rx_index`` (1 or 2).

    Positive to the right of boresight. Accepts a single point or an array
    of points with trailing dimension 2.
    """
    p = np.asarray(p, dtype=float)
    x, y = p[..., 0], p[..., 1]
    if np.any(y <= 0):
        raise BehindBaseline("transmitter must be ahead of the receiver baseline")
    if rx_index == 2:
        x = x - L
    elif rx_index != 1:
        raise ValueError("rx_index must be 1 or 2")
    th = np.arctan2(x, y)
    return float(th) if th.ndim == 0 else th


def _angle_between(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    cross = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    dot = np.sum(u * v, axis=-1)
    return np.abs(np.arctan2(cross, dot))


def emission_angle(tx_facing, tx_pos, rx_pos):
    """Angle between the transmitter axis and the ray toward the receiver."""
    return _angle_between(heading_vector(tx_facing), np.asarray(rx_pos) - np.asarray(tx_pos))


def incidence_angle(rx_pos, tx_pos, rx_facing=0.0):
    """Unsigned angle of the incoming ray from the receiver boresight."""
    return _angle_between(heading_vector(rx_facing), np.asarray(tx_pos) - np.asarray(rx_pos))


def link_visible(
    tx_facing: float,
    tx_pos,
    rx_pos,
    emission_half_angle: float = math.radians(45.0),
    rx_fov: float = math.radians(80.0),
    rx_facing: float = 0.0,
):
    """True iff each end of the link lies inside the other's cone."""
    emit = emission_angle(tx_facing, tx_pos, rx_pos)
    inc = incidence_angle(rx_pos, tx_pos, rx_facing)
    ok = (emit <= emission_half_angle) & (inc < rx_fov)
    return bool(ok) if np.ndim(ok) == 0 else ok


def all_links_visible(state: RelativeTargetState, L: float, emission_half_angle: float, rx_fov: float) -> bool:
    rx = qrx_positions(L)
    return all(
        link_visible(state.tx_facings[j], state.positions[j], rx[i], emission_half_angle, rx_fov)
        for i in range(2)
        for j in range(2)
    )
