"""QRX optics: defocused spot on a quadrant photodiode.

The lens throws a flat-top disk of diameter ``d_S`` onto a square QPD of side
``d_H``; a bearing ``theta`` slides the disk by ``d_X * tan(theta)`` along the
horizontal axis. Quadrant layout, seen from the lens::

    A | B
    --+--
    C | D

so a positive bearing moves power from (A, C) to (B, D).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BijectionViolated, NonPositiveSpot, ZeroIllumination


@dataclass(frozen=True)
class QrxOpticalConfig:
    """Lens/QPD geometry, lengths in millimetres."""

    d_L: float = 7.1
    n: float = 1.5
    d_H: float = 6.3
    d_X: float = 0.55
    gap: float = 0.0  # dead band between quadrants

    def __post_init__(self):
        if min(self.d_L, self.n, self.d_H, self.d_X) <= 0:
            raise ValueError("optical dimensions must be positive")
        if self.gap < 0 or self.gap >= self.d_H:
            raise ValueError("gap must lie in [0, d_H)")

    @property
    def d_S(self) -> float:
        return spot_diameter(self)

    @property
    def theta_fov(self) -> float:
        return fov(self)

    @property
    def bijective_by_design(self) -> bool:
        return self.d_S < self.d_H * math.sqrt(2.0)


@dataclass(frozen=True)
class QuadrantFractions:
    f_A: float
    f_B: float
    f_C: float
    f_D: float

    def as_array(self) -> np.ndarray:
        return np.array([self.f_A, self.f_B, self.f_C, self.f_D])

    @property
    def total(self) -> float:
        return self.f_A + self.f_B + self.f_C + self.f_D


def spot_diameter(cfg: QrxOpticalConfig) -> float:
    d_s = cfg.d_L - cfg.n * cfg.d_X
    if d_s <= 0:
        raise NonPositiveSpot(f"spot diameter {d_s:.4g} mm is not positive")
    return d_s


def spot_displacement(d_X: float, theta):
    return d_X * np.tan(theta)


def fov(cfg: QrxOpticalConfig) -> float:
    """Largest measurable bearing: the spot edge reaches the QPD center."""
    return math.atan(spot_diameter(cfg) / (2.0 * cfg.d_X))


def design_lens_distance(d_L: float, n: float, d_H: float) -> float:
    """Lens-QPD distance that makes the spot as wide as the QPD."""
    return (d_L - d_H) / n


# -- disk / rectangle overlap ------------------------------------------------

def _corner_area(a, b, R):
    """Area of the disk (radius R, origin-centred) inside [0, a] x [0, b], a, b >= 0."""
    a = np.minimum(a, R)
    b = np.minimum(b, R)
    xs = np.sqrt(np.maximum(R * R - b * b, 0.0))

    def prim(x):
        return 0.5 * (x * np.sqrt(np.maximum(R * R - x * x, 0.0)) + R * R * np.arcsin(np.clip(x / R, -1.0, 1.0)))

    inside = a <= xs
    arc = b * xs + prim(a) - prim(xs)
    return np.where(inside, a * b, arc)


def _signed_corner(a, b, R):
    return np.sign(a) * np.sign(b) * _corner_area(np.abs(a), np.abs(b), R)


def disk_rect_area(cx, cy, R, x0, x1, y0, y1):
    """Area of disk (centre cx, cy, radius R) inside the rectangle [x0,x1]x[y0,y1]."""
    x0, x1 = x0 - cx, x1 - cx
    y0, y1 = y0 - cy, y1 - cy
    return (
        _signed_corner(x1, y1, R)
        - _signed_corner(x0, y1, R)
        - _signed_corner(x1, y0, R)
        + _signed_corner(x0, y0, R)
    )


def quadrant_areas(d_T, cfg: QrxOpticalConfig) -> np.ndarray:
    """Illuminated area per quadrant (A, B, C, D) for a disk shifted by ``d_T``.

    Vectorised over ``d_T``; the quadrant axis is last.
    """
    R = spot_diameter(cfg) / 2.0
    h = cfg.d_H / 2.0
    g = cfg.gap / 2.0
    d_T = np.asarray(d_T, dtype=float)
    left = (-h, -g)
    right = (g, h)
    top = (g, h)
    bottom = (-h, -g)
    areas = [
        disk_rect_area(d_T, 0.0, R, *left, *top),
        disk_rect_area(d_T, 0.0, R, *right, *top),
        disk_rect_area(d_T, 0.0, R, *left, *bottom),
        disk_rect_area(d_T, 0.0, R, *right, *bottom),
    ]
    return np.clip(np.stack(areas, axis=-1), 0.0, None)


def quadrant_fraction_array(theta, cfg: QrxOpticalConfig) -> np.ndarray:
    """Fractions of collected power per quadrant, shape ``theta.shape + (4,)``.

    Computed on |theta| and mirrored so that the map is exactly odd.
    """
    theta = np.asarray(theta, dtype=float)
    R = spot_diameter(cfg) / 2.0
    d_T = spot_displacement(cfg.d_X, np.abs(theta))
    fr = quadrant_areas(d_T, cfg) / (math.pi * R * R)
    mirrored = fr[..., [1, 0, 3, 2]]
    return np.where((theta < 0)[..., None], mirrored, fr)


def quadrant_fractions(theta: float, cfg: QrxOpticalConfig) -> QuadrantFractions:
    return QuadrantFractions(*quadrant_fraction_array(float(theta), cfg))


def phi_from_powers(eps) -> np.ndarray:
    """Horizontal power ratio ((B + D) - (A + C)) / (A + B + C + D) over the last axis."""
    eps = np.asarray(eps, dtype=float)
    left = eps[..., 0] + eps[..., 2]
    right = eps[..., 1] + eps[..., 3]
    # grouped so that swapping left and right flips the sign exactly
    total = left + right
    diff = right - left
    with np.errstate(invalid="ignore", divide="ignore"):
        return diff / total


def f_qrx(theta, cfg: QrxOpticalConfig):
    """Forward map from bearing to horizontal quadrant power ratio."""
    fr = quadrant_fraction_array(theta, cfg)
    if np.any(fr.sum(axis=-1) <= 0):
        raise ZeroIllumination("spot misses the photodiode")
    phi = np.clip(phi_from_powers(fr), -1.0, 1.0)
    return float(phi) if phi.ndim == 0 else phi


@dataclass(frozen=True, eq=False)
class GqrxTable:
    """Tabulated inverse of :func:`f_qrx`, looked up by linear interpolation."""

    phi_grid: np.ndarray
    theta_grid: np.ndarray
    theta_fov: float

    def __post_init__(self):
        for arr in (self.phi_grid, self.theta_grid):
            arr.setflags(write=False)

    def __call__(self, phi):
        out = np.interp(phi, self.phi_grid, self.theta_grid)
        return float(out) if np.ndim(out) == 0 else out

    lookup = __call__


def build_g_qrx(cfg: QrxOpticalConfig = QrxOpticalConfig(), n_points: int = 2048) -> GqrxTable:
    """Sample ``f_qrx`` uniformly in bearing across the FoV and invert it."""
    if n_points < 3:
        raise ValueError("n_points must be >= 3")
    th_fov = fov(cfg)
    theta = np.linspace(-th_fov, th_fov, n_points)
    phi = f_qrx(theta, cfg)
    # endpoints saturate at exactly +-1 by construction
    phi[0], phi[-1] = -1.0, 1.0
    if not np.all(np.diff(phi) > 1e-12):
        raise BijectionViolated(
            f"f_qrx is not strictly increasing (d_S={cfg.d_S:.3f} mm, d_H*sqrt2={cfg.d_H * math.sqrt(2):.3f} mm)"
        )
    return GqrxTable(phi.copy(), theta.copy(), th_fov)


def fqrx_curve(cfg: QrxOpticalConfig, n_points: int = 721, theta_max: float = math.radians(89.0)):
    """(theta, phi) samples over +-theta_max for plotting; phi is NaN where the spot misses the QPD."""
    theta = np.linspace(-theta_max, theta_max, n_points)
    fr = quadrant_fraction_array(theta, cfg)
    phi = np.clip(phi_from_powers(fr), -1.0, 1.0)
    return theta, phi
