"""Dual-bearing triangulation and the localization error metric."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RelativeTargetState
from .errors import DegenerateGeometry, NegativeRange, Unavailable

DEGENERATE_SIN = 1e-6


@dataclass(frozen=True)
class PositionEstimate:
    p1_hat: tuple[float, float]
    p2_hat: tuple[float, float]
    valid1: bool = True
    valid2: bool = True
    timestamp: float = 0.0


@dataclass(frozen=True)
class LocalizationError:
    e1: float
    e2: float

    @property
    def norm(self) -> float:
        return math.hypot(self.e1, self.e2)


def triangulate_array(theta1, theta2, L: float):
    """Law-of-sines intersection of the bearing rays from QRX 1 and QRX 2.

    Vectorised; returns ``(x, y, ok)`` with ``ok`` False for near-parallel
    rays or a non-positive range.
    """
    theta1 = np.asarray(theta1, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    d = np.sin(theta1 - theta2)
    ok = np.abs(d) >= DEGENERATE_SIN
    safe = np.where(ok, d, 1.0)
    x = L * (1.0 + np.sin(theta2) * np.cos(theta1) / safe)
    y = L * np.cos(theta2) * np.cos(theta1) / safe
    ok = ok & (y > 0)
    return x, y, ok


def triangulate(theta1: float, theta2: float, L: float) -> tuple[float, float]:
    if abs(math.sin(theta1 - theta2)) < DEGENERATE_SIN:
        raise DegenerateGeometry("bearing rays are parallel")
    x, y, _ = triangulate_array(theta1, theta2, L)
    if y <= 0:
        raise NegativeRange("bearings intersect behind the baseline")
    return float(x), float(y)


def localization_error(truth: RelativeTargetState, est: PositionEstimate) -> LocalizationError:
    if not (est.valid1 and est.valid2):
        raise Unavailable("estimate is flagged invalid")
    e1 = math.dist(truth.p1, est.p1_hat)
    e2 = math.dist(truth.p2, est.p2_hat)
    return LocalizationError(e1, e2)
