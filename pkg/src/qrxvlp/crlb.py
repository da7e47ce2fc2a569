"""Fisher information and Cramer-Rao bound for two-bearing localization.

The observation vector is the four bearings (theta_11, theta_12, theta_21,
theta_22), theta_ij being QRX i looking at TX j, each with independent
Gaussian noise. The unknowns are (x1, y1, x2, y2) in the ego frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelCondition, quadrant_noise_variance
from .core import RelativeTargetState, qrx_positions
from .errors import InsufficientTrials, LinkDown, SingularFim
from .optics import f_qrx
from .pipeline import SystemConfig, link_geometry, state_arrays, static_trials

MIN_TRIALS = 100
MAX_CONDITION = 1e12

# observation order: (rx, tx) pairs
CHANNELS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class AoANoiseModel:
    """Bearing noise standard deviation (rad) per observation channel."""

    sigma: tuple[float, float, float, float]

    def __post_init__(self):
        s = tuple(float(v) for v in np.asarray(self.sigma, dtype=float).ravel())
        if len(s) != 4:
            raise ValueError("need four sigma values")
        if min(s) <= 0 or not all(math.isfinite(v) for v in s):
            raise ValueError("sigma values must be positive and finite")
        object.__setattr__(self, "sigma", s)

    @classmethod
    def uniform(cls, sigma: float) -> "AoANoiseModel":
        return cls((sigma,) * 4)

    def scaled(self, c: float) -> "AoANoiseModel":
        return AoANoiseModel(tuple(c * s for s in self.sigma))


@dataclass(frozen=True)
class CrlbResult:
    fim: np.ndarray
    variances: np.ndarray  # m^2 for (x1, y1, x2, y2)
    position_bounds: tuple[float, float]  # m, per TX

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variances)


def bearing_jacobian(p1, p2, L: float) -> np.ndarray:
    """d(theta_h)/d(P_m), rows in :data:`CHANNELS` order, columns (x1, y1, x2, y2)."""
    pts = (np.asarray(p1, dtype=float), np.asarray(p2, dtype=float))
    if pts[0][1] <= 0 or pts[1][1] <= 0:
        raise ValueError("targets must be ahead of the baseline (y > 0)")
    rx = qrx_positions(L)
    J = np.zeros((4, 4))
    for h, (i, j) in enumerate(CHANNELS):
        dx = pts[j][0] - rx[i][0]
        dy = pts[j][1] - rx[i][1]
        r2 = dx * dx + dy * dy
        J[h, 2 * j] = dy / r2
        J[h, 2 * j + 1] = -dx / r2
    return J


def fim(p1, p2, L: float, noise: AoANoiseModel) -> np.ndarray:
    """Gaussian Fisher information J^T diag(1/sigma^2) J for the four positions."""
    J = bearing_jacobian(p1, p2, L)
    w = 1.0 / np.asarray(noise.sigma) ** 2
    F = J.T @ (w[:, None] * J)
    F = 0.5 * (F + F.T)
    if np.any(np.all(F == 0, axis=1)):
        raise SingularFim("a position coordinate carries no information")
    eig = np.linalg.eigvalsh(F)
    if eig.min() < -1e-9 * np.trace(F):
        raise SingularFim("information matrix is not positive semi-definite")
    return F


def crlb(F) -> CrlbResult:
    F = np.asarray(F, dtype=float)
    if F.shape != (4, 4):
        raise ValueError("expected a 4x4 information matrix")
    cond = np.linalg.cond(F)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularFim(f"information matrix condition number {cond:.3g} too large")
    var = np.diag(np.linalg.inv(F)).copy()
    bounds = (math.sqrt(var[0] + var[1]), math.sqrt(var[2] + var[3]))
    return CrlbResult(F, var, bounds)


def position_bounds(p1, p2, L: float, noise: AoANoiseModel) -> tuple[float, float]:
    return crlb(fim(p1, p2, L, noise)).position_bounds


def _require_visible(state: RelativeTargetState, system: SystemConfig, cond: ChannelCondition):
    pos, fac = state_arrays(state)
    geo = link_geometry(pos, fac, system, cond)
    if not geo.visible.all():
        raise LinkDown("every QRX/TX link must be visible")
    return geo


def estimate_aoa_sigma(
    state: RelativeTargetState,
    system: SystemConfig,
    cond: ChannelCondition,
    rate: float = 50.0,
    n_trials: int = 10_000,
    seed: int = 0,
    noise: bool = True,
    return_trials: bool = False,
):
    """Sample standard deviation of each bearing over full-pipeline trials.

    With ``noise=False`` the model would be degenerate, so the raw (zero)
    deviations are returned as an array instead of an :class:`AoANoiseModel`.
    """
    if n_trials < MIN_TRIALS:
        raise InsufficientTrials(f"need at least {MIN_TRIALS} trials, got {n_trials}")
    _require_visible(state, system, cond)
    batch = static_trials(system, cond, state, rate, n_trials, seed, noise=noise)
    th = np.stack([batch.theta_hat[:, i, j] for i, j in CHANNELS], axis=1)
    ok = np.stack([batch.aoa_valid[:, i, j] for i, j in CHANNELS], axis=1)
    sigma = np.array([np.std(th[ok[:, h], h], ddof=1) if ok[:, h].sum() > 1 else np.nan for h in range(4)])
    out = AoANoiseModel(tuple(sigma)) if noise else sigma
    return (out, batch) if return_trials else out


def analytic_aoa_sigma(
    state: RelativeTargetState,
    system: SystemConfig,
    cond: ChannelCondition,
    rate: float = 50.0,
) -> AoANoiseModel:
    """Small-signal bearing noise from the quadrant noise floor.

    Each correlator output has variance R_F^2 sigma_q^2 / (2 h); the power
    ratio perturbation is propagated through its gradient and divided by the
    local slope of the QRX response.
    """
    geo = _require_visible(state, system, cond)
    tia = system.tia
    h = system.h_buf(rate)
    power = geo.power[0]  # (rx, tx)
    frac = geo.fractions[0]  # (rx, tx, 4)
    theta = geo.theta[0]
    sign = np.array([-1.0, 1.0, -1.0, 1.0])
    out = []
    for i, j in CHANNELS:
        p_quad = np.sum(power[i][:, None] * frac[i], axis=0)
        var_q = tia.R_F**2 * quadrant_noise_variance(p_quad, tia, cond) / (2 * h)
        eps = tia.R_F * tia.responsivity * power[i, j] * frac[i, j] / 2
        S = eps.sum()
        phi = np.dot(sign, eps) / S
        var_phi = np.sum((sign - phi) ** 2 * var_q) / S**2
        dt = 1e-5
        slope = (f_qrx(theta[i, j] + dt, system.optics) - f_qrx(theta[i, j] - dt, system.optics)) / (2 * dt)
        out.append(math.sqrt(var_phi) / slope)
    return AoANoiseModel(tuple(out))
