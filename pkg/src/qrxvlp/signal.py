"""BFSK waveforms and the buffer-correlation bearing measurement.

A buffer of quadrant readings is demodulated, the decided bits are
re-modulated into a clean reference, and the reference is correlated with
each quadrant to estimate per-quadrant signal power. The horizontal power
ratio is then mapped back to a bearing through the tabulated inverse of the
QRX response.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .errors import DecodeFailure, InvalidPower
from .optics import GqrxTable, phi_from_powers


@dataclass(frozen=True)
class BfskConfig:
    tone0: float = 5e3
    tone1: float = 6e3
    bit_rate: float = 1e3
    sample_rate: float = 30e3
    amplitude: float = 1.0

    def __post_init__(self):
        if self.tone0 == self.tone1 or min(self.tone0, self.tone1, self.bit_rate) <= 0:
            raise ValueError("tones must be distinct and positive")
        if self.sample_rate <= 2 * max(self.tone0, self.tone1):
            raise ValueError("sample rate must exceed twice the highest tone")
        spb = self.sample_rate / self.bit_rate
        if abs(spb - round(spb)) > 1e-9:
            raise ValueError("sample rate must be an integer multiple of the bit rate")

    @property
    def T_s(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def samples_per_bit(self) -> int:
        return int(round(self.sample_rate / self.bit_rate))

    @property
    def tones(self) -> tuple[float, float]:
        return (self.tone0, self.tone1)


@dataclass(eq=False)
class QuadrantBuffer:
    """Quadrant readings (A, B, C, D) for one estimation cycle, in volts."""

    readings: np.ndarray
    w0: int = 0
    T_s: float = 1.0

    def __post_init__(self):
        self.readings = np.asarray(self.readings, dtype=float)
        if self.readings.ndim != 2 or self.readings.shape[0] != 4 or self.readings.shape[1] < 1:
            raise ValueError("readings must have shape (4, h_buf) with h_buf >= 1")

    @property
    def h_buf(self) -> int:
        return self.readings.shape[1]

    @property
    def midpoint(self) -> float:
        return self.T_s * (self.w0 + self.h_buf / 2)

    def summed(self) -> np.ndarray:
        return self.readings.sum(axis=0)

    def to_csv(self, path, s_hat=None) -> None:
        """Debug dump with columns ``w, Q_A, Q_B, Q_C, Q_D, s_hat``."""
        s_hat = np.full(self.h_buf, np.nan) if s_hat is None else np.asarray(s_hat)
        with open(Path(path), "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["w", "Q_A", "Q_B", "Q_C", "Q_D", "s_hat"])
            for k in range(self.h_buf):
                wr.writerow([self.w0 + k, *(f"{v:.9e}" for v in self.readings[:, k]), f"{s_hat[k]:.9e}"])


@dataclass(frozen=True)
class AoAMeasurement:
    theta_hat: float
    phi_hat: float
    per_quadrant_power: tuple[float, float, float, float]
    timestamp: float = 0.0
    valid: bool = True


@dataclass(frozen=True)
class LatencyModel:
    k_alpha: float = 1.0
    k_beta: float = 0.0
    h_LU: float = 64.0
    T_FP: float = 0.33e-9

    def __post_init__(self):
        if min(self.k_alpha, self.k_beta, self.h_LU, self.T_FP) < 0:
            raise ValueError("latency parameters must be non-negative")


@dataclass(frozen=True)
class LatencyReport:
    t_vlc: float
    t_vlp: float
    rate: float
    fixed_delay: float

    @property
    def t_up(self) -> float:
        return self.t_vlc + self.t_vlp


def bfsk_modulate(bits, cfg: BfskConfig, phase0=0.0, return_phase: bool = False):
    """Phase-continuous BFSK: ``amplitude * cos(phase)`` with the tone set per bit.

    ``bits`` may carry leading batch axes; ``phase0`` broadcasts against them.
    With ``return_phase`` the phase at the start of the next bit is also returned.
    """
    bits = np.asarray(bits, dtype=int)
    freq = np.repeat(np.where(bits > 0, cfg.tone1, cfg.tone0), cfg.samples_per_bit, axis=-1).astype(float)
    inc = 2 * math.pi * freq / cfg.sample_rate
    phase0 = np.asarray(phase0, dtype=float)[..., None]
    csum = np.cumsum(inc, axis=-1)
    phase = phase0 + csum - inc
    s = cfg.amplitude * np.cos(phase)
    if return_phase:
        end = np.mod(phase0[..., 0] + csum[..., -1], 2 * math.pi)
        return s, (float(end) if end.ndim == 0 else end)
    return s


def _tone_basis(cfg: BfskConfig):
    n = np.arange(cfg.samples_per_bit)
    basis = []
    for f in cfg.tones:
        w = 2 * math.pi * f / cfg.sample_rate * n
        basis.append(np.stack([np.cos(w), np.sin(w)]))
    return np.stack(basis)  # (tone, 2, spb)


def demod_remod_batch(samples, cfg: BfskConfig, margin_threshold: float = 0.8, max_weak_fraction: float = 0.5):
    """Vectorised demodulation/re-modulation over leading axes.

    Each bit is least-squares fitted with a free-phase sinusoid at either
    tone; the tone with more fitted energy wins and the clean reference is a
    unit sinusoid at the fitted phase. Returns ``(bits, s_hat, ok)`` where
    ``ok`` is False when more than ``max_weak_fraction`` of the bits had a
    normalised energy margin below ``margin_threshold``.
    """
    x = np.asarray(samples, dtype=float)
    spb = cfg.samples_per_bit
    if x.shape[-1] < spb or x.shape[-1] % spb:
        raise ValueError("buffer must hold a whole number (>= 1) of bits")
    nb = x.shape[-1] // spb
    xb = x.reshape(x.shape[:-1] + (nb, spb))
    basis = _tone_basis(cfg)
    gram = np.einsum("tis,tjs->tij", basis, basis)
    proj = np.einsum("...bs,tis->...bti", xb, basis)
    coef = np.einsum("tij,...btj->...bti", np.linalg.inv(gram), proj)
    energy = np.sum(coef * coef, axis=-1)  # (..., nb, tone)
    bits = (energy[..., 1] > energy[..., 0]).astype(int)
    tot = energy.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        margin = np.where(tot > 0, np.abs(energy[..., 1] - energy[..., 0]) / tot, 0.0)
    ok = np.mean(margin < margin_threshold, axis=-1) <= max_weak_fraction

    chosen = np.take_along_axis(coef, bits[..., None, None], axis=-2)[..., 0, :]  # (..., nb, 2)
    amp = np.hypot(chosen[..., 0], chosen[..., 1])
    unit = np.where(amp[..., None] > 0, chosen / np.where(amp > 0, amp, 1.0)[..., None], np.array([1.0, 0.0]))
    chosen_basis = basis[bits]  # (..., nb, 2, spb)
    s_hat = cfg.amplitude * np.einsum("...bi,...bis->...bs", unit, chosen_basis)
    return bits, s_hat.reshape(x.shape), ok


def bandpass(samples, cfg: BfskConfig, half_width: float | None = None, order: int = 4):
    """Zero-phase band-pass around the configured tone pair."""
    lo, hi = sorted(cfg.tones)
    hw = half_width if half_width is not None else 0.5 * (hi - lo) + cfg.bit_rate
    nyq = cfg.sample_rate / 2
    band = [max(lo - hw, 1.0) / nyq, min(hi + hw, 0.999 * nyq) / nyq]
    sos = sps.butter(order, band, btype="bandpass", output="sos")
    return sps.sosfiltfilt(sos, samples, axis=-1)


def demod_remod(buffer_sum, cfg: BfskConfig, margin_threshold: float = 0.8, max_weak_fraction: float = 0.5):
    """Demodulate one buffer and return ``(bits, s_hat)``; raises DecodeFailure on a weak link."""
    bits, s_hat, ok = demod_remod_batch(buffer_sum, cfg, margin_threshold, max_weak_fraction)
    if not bool(ok):
        raise DecodeFailure("energy margin below threshold for most bits")
    return bits, s_hat


def estimate_quadrant_power(buffer, s_hat) -> np.ndarray:
    """Mean of quadrant readings times the clean reference, per quadrant."""
    q = buffer.readings if isinstance(buffer, QuadrantBuffer) else np.asarray(buffer, dtype=float)
    s_hat = np.asarray(s_hat, dtype=float)
    if q.shape[-1] != s_hat.shape[-1]:
        raise ValueError("buffer and reference lengths differ")
    return np.einsum("...qw,...w->...q", q, s_hat) / q.shape[-1]


def measure_aoa_array(eps, table: GqrxTable):
    """Vectorised bearing lookup; returns ``(theta_hat, phi_hat, valid)``.

    Entries with a non-positive power sum come back as NaN and invalid.
    """
    eps = np.asarray(eps, dtype=float)
    total = eps.sum(axis=-1)
    phi = phi_from_powers(eps)
    good = total > 0
    valid = good & (np.abs(phi) < 1.0)
    phi_c = np.clip(np.where(good, phi, 0.0), -1.0, 1.0)
    theta = np.interp(phi_c, table.phi_grid, table.theta_grid)
    return np.where(good, theta, np.nan), np.where(good, phi_c, np.nan), valid


def measure_aoa(eps, table: GqrxTable, timestamp: float = 0.0) -> AoAMeasurement:
    eps = np.asarray(eps, dtype=float)
    if eps.sum() <= 0:
        raise InvalidPower("sum of quadrant powers must be positive")
    theta, phi, valid = measure_aoa_array(eps, table)
    return AoAMeasurement(float(theta), float(phi), tuple(float(e) for e in eps), timestamp, bool(valid))


def latency(model: LatencyModel, h_buf: int, T_s: float) -> LatencyReport:
    if h_buf < 1:
        raise ValueError("h_buf must be >= 1")
    t_vlc = model.T_FP * (model.k_alpha * h_buf * math.log2(h_buf) + model.k_beta)
    t_vlp = model.T_FP * (2 * h_buf + model.h_LU)
    return LatencyReport(t_vlc, t_vlp, 1.0 / (T_s * h_buf), T_s * h_buf / 2 + t_vlc + t_vlp)
