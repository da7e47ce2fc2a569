"""Line-of-sight optical link: Lambertian emission, weather loss, receiver noise."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy import constants

from .core import TxUnit, emission_angle, heading_vector, link_visible
from .errors import LinkDown

Q_E = constants.e
K_B = constants.k

AMBIENT_BG_CURRENT = {"night": 10e-6, "day": 750e-6}  # A, indirect sunlight for day
WEATHER_ATTENUATION = {"clear": 0.0, "rain": 0.1, "fog": 0.3}  # dB/m

DEFAULT_APERTURE = 50e-6  # m^2, lens area


@dataclass(frozen=True)
class ChannelCondition:
    ambient: str = "night"
    weather: str = "clear"
    I_bg: float | None = None
    attenuation: float | None = None  # dB/m

    def __post_init__(self):
        if self.I_bg is None:
            object.__setattr__(self, "I_bg", AMBIENT_BG_CURRENT[self.ambient])
        if self.attenuation is None:
            object.__setattr__(self, "attenuation", WEATHER_ATTENUATION[self.weather])
        if self.I_bg < 0 or self.attenuation < 0:
            raise ValueError("background current and attenuation must be non-negative")

    @property
    def label(self) -> str:
        return f"{self.ambient}/{self.weather}"


@dataclass(frozen=True)
class TiaConfig:
    """Per-quadrant transimpedance front end."""

    responsivity: float = 0.5  # A/W
    bandwidth: float = 10e6  # Hz
    C_T: float = 45e-12  # F
    R_F: float = 2.84e3  # ohm
    g_m: float = 30e-3  # S
    Gamma: float = 1.5
    I_B2: float = 0.562
    I_B3: float = 0.0868
    temperature: float = 298.0  # K
    open_loop_gain: float | None = None
    ct_per_quadrant: bool = True

    def __post_init__(self):
        if self.open_loop_gain is None:
            object.__setattr__(self, "open_loop_gain", 2 * math.pi * self.bandwidth * self.C_T * self.R_F)
        vals = [getattr(self, f) for f in ("responsivity", "bandwidth", "C_T", "R_F", "g_m", "Gamma",
                                           "I_B2", "I_B3", "temperature", "open_loop_gain")]
        if min(vals) <= 0:
            raise ValueError("TIA parameters must be positive")
        r_f = self.open_loop_gain / (2 * math.pi * self.bandwidth * self.C_T)
        if abs(r_f - self.R_F) > 0.05 * self.R_F:
            raise ValueError(f"R_F={self.R_F:.4g} inconsistent with G/(2 pi B C_T)={r_f:.4g}")

    @property
    def quadrant_capacitance(self) -> float:
        return self.C_T if self.ct_per_quadrant else self.C_T / 4.0


@dataclass(frozen=True)
class LinkGain:
    H: float
    received_power: float
    emission_angle: float
    incidence_aoa: float
    distance: float


def lambertian_order(half_power_angle: float) -> int:
    """Lambertian order whose intensity halves at ``half_power_angle`` (rounded down)."""
    return math.floor(-math.log(2.0) / math.log(math.cos(half_power_angle)))


def lambertian_intensity(m, phi):
    """Relative intensity cos^m(phi), zero outside the front hemisphere."""
    phi = np.asarray(phi, dtype=float)
    out = np.where(np.abs(phi) < math.pi / 2, np.cos(phi) ** m, 0.0)
    return float(out) if out.ndim == 0 else out


def lambertian_gain(m, phi):
    """Radiant intensity per watt emitted, (m + 1) / (2 pi) cos^m(phi)."""
    return (m + 1) / (2 * math.pi) * lambertian_intensity(m, phi)


def weather_factor(distance, cond: ChannelCondition):
    return 10.0 ** (-cond.attenuation * np.asarray(distance, dtype=float) / 10.0)


def received_power(
    optical_power,
    m,
    aperture,
    tx_pos,
    tx_facing,
    rx_pos,
    attenuation_db_per_m: float = 0.0,
    rx_facing: float = 0.0,
):
    """Vectorised received optical power; no visibility gating.

    ``tx_pos`` and ``rx_pos`` have a trailing axis of size 2.
    """
    tx_pos = np.asarray(tx_pos, dtype=float)
    rx_pos = np.asarray(rx_pos, dtype=float)
    d_vec = tx_pos - rx_pos
    dist = np.hypot(d_vec[..., 0], d_vec[..., 1])
    phi = emission_angle(tx_facing, tx_pos, rx_pos)
    cos_inc = np.sum(d_vec * heading_vector(rx_facing), axis=-1) / dist
    loss = 10.0 ** (-attenuation_db_per_m * dist / 10.0)
    p = optical_power * loss * lambertian_gain(m, phi) * aperture * np.clip(cos_inc, 0.0, None) / dist**2
    return p


def link_gain(
    tx: TxUnit,
    rx_aperture_area: float,
    tx_pos,
    tx_facing: float,
    rx_pos,
    cond: ChannelCondition = ChannelCondition(),
    emission_half_angle: float = math.radians(45.0),
    rx_fov: float = math.radians(80.0),
    rx_facing: float = 0.0,
) -> LinkGain:
    if not link_visible(tx_facing, tx_pos, rx_pos, emission_half_angle, rx_fov, rx_facing):
        raise LinkDown("receiver and transmitter are not in each other's cone")
    tx_pos = np.asarray(tx_pos, dtype=float)
    rx_pos = np.asarray(rx_pos, dtype=float)
    d = tx_pos - rx_pos
    p_r = float(received_power(tx.optical_power, tx.lambertian_order, rx_aperture_area,
                               tx_pos, tx_facing, rx_pos, cond.attenuation, rx_facing))
    return LinkGain(
        H=p_r / tx.optical_power,
        received_power=p_r,
        emission_angle=float(emission_angle(tx_facing, tx_pos, rx_pos)),
        incidence_aoa=math.atan2(d[0], d[1]) - rx_facing,
        distance=float(np.hypot(*d)),
    )


def shot_noise_variance(P_r, tia: TiaConfig, cond: ChannelCondition, bg_share: float = 1.0):
    """2 q gamma P_r B + 2 q I_bg I_B2 B, with ``bg_share`` of the background current."""
    B = tia.bandwidth
    return 2 * Q_E * tia.responsivity * np.asarray(P_r) * B + 2 * Q_E * cond.I_bg * bg_share * tia.I_B2 * B


def thermal_noise_variance(tia: TiaConfig, capacitance: float | None = None) -> float:
    C = tia.C_T if capacitance is None else capacitance
    B = tia.bandwidth
    return 4 * K_B * tia.temperature * (
        tia.I_B2 * B / tia.R_F + (2 * math.pi * C) ** 2 / tia.g_m * tia.Gamma * tia.I_B3 * B**3
    )


def noise_variance(P_r, tia: TiaConfig = TiaConfig(), cond: ChannelCondition = ChannelCondition(),
                   bg_share: float = 1.0, capacitance: float | None = None):
    """Total photocurrent noise variance (A^2) of one front end."""
    return shot_noise_variance(P_r, tia, cond, bg_share) + thermal_noise_variance(tia, capacitance)


def quadrant_noise_variance(P_quadrant, tia: TiaConfig, cond: ChannelCondition):
    """Noise on one quadrant: a quarter of the background, that quadrant's signal share."""
    return noise_variance(P_quadrant, tia, cond, bg_share=0.25, capacitance=tia.quadrant_capacitance)


def trial_seed(base: int, index: int) -> int:
    """Per-trial seed: the base occupies the high word, XOR-ed with the trial index."""
    return (int(base) << 32) ^ int(index)


def synthesize_quadrant_readings(
    clean_waveforms: np.ndarray | Sequence[np.ndarray],
    received_powers: float | Sequence[float],
    fractions,
    tia: TiaConfig = TiaConfig(),
    cond: ChannelCondition = ChannelCondition(),
    rng_seed: int | np.random.Generator | None = None,
    T_s: float = 1.0,
    w0: int = 0,
    noise: bool = True,
):
    """TIA output voltages on the four quadrants for one buffer.

    Each transmitter contributes ``gamma * P_r * f_q * s[w]``; contributions add
    and independent white Gaussian noise is drawn per quadrant and sample.
    ``received_powers`` may be a :class:`LinkGain` (or a list of them).
    """
    from .signal import QuadrantBuffer

    waves = [np.asarray(clean_waveforms, dtype=float)] if np.ndim(clean_waveforms[0]) == 0 else [
        np.asarray(w, dtype=float) for w in clean_waveforms]
    powers = received_powers if isinstance(received_powers, (list, tuple)) else [received_powers]
    powers = [p.received_power if isinstance(p, LinkGain) else float(p) for p in powers]
    fracs = fractions if isinstance(fractions, (list, tuple)) else [fractions]
    fracs = [np.asarray(f.as_array() if hasattr(f, "as_array") else f, dtype=float) for f in fracs]
    if not (len(waves) == len(powers) == len(fracs)):
        raise ValueError("need one power and one fraction set per waveform")

    h = waves[0].size
    current = np.zeros((4, h))
    p_quad = np.zeros(4)
    for s, p, f in zip(waves, powers, fracs):
        current += tia.responsivity * p * f[:, None] * s[None, :]
        p_quad += p * f
    if noise:
        rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
        sigma = np.sqrt(quadrant_noise_variance(p_quad, tia, cond))
        current = current + sigma[:, None] * rng.standard_normal((4, h))
    return QuadrantBuffer(tia.R_F * current, w0, T_s)
