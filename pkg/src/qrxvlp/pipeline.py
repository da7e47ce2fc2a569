"""End-to-end measurement of one estimation cycle, batched over trials.

This is the machinery shared by the scenario engine and the Monte Carlo
noise estimates: link geometry, quadrant synthesis with noise, de/re-
modulation, correlation, table lookup and triangulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .channel import DEFAULT_APERTURE, ChannelCondition, TiaConfig, quadrant_noise_variance, received_power, trial_seed
from .core import (
    RelativeTargetState,
    TxUnit,
    VehicleGeometry,
    emission_angle,
    qrx_positions,
    tail_lights,
)
from .optics import GqrxTable, QrxOpticalConfig, build_g_qrx, quadrant_fraction_array
from .signal import BfskConfig, LatencyModel, bandpass, bfsk_modulate, demod_remod_batch, measure_aoa_array
from .vlp import triangulate_array

DEFAULT_SAMPLE_RATE = 1e6  # 1 us sampling period


@lru_cache(maxsize=16)
def cached_table(optics: QrxOpticalConfig, n_points: int) -> GqrxTable:
    return build_g_qrx(optics, n_points)


@dataclass(frozen=True)
class SystemConfig:
    """Everything about the hardware that stays fixed across a run."""

    geom: VehicleGeometry = VehicleGeometry()
    txs: tuple[TxUnit, TxUnit] = field(default_factory=tail_lights)
    optics: QrxOpticalConfig = QrxOpticalConfig()
    tia: TiaConfig = TiaConfig()
    aperture: float = DEFAULT_APERTURE
    sample_rate: float = DEFAULT_SAMPLE_RATE
    bit_rate: float = 1e3
    emission_half_angle: float = math.radians(45.0)
    rx_fov: float = math.radians(80.0)
    table_points: int = 2048
    margin_threshold: float = 0.8
    use_bandpass: bool = False
    block_duration: float = 1e-3
    latency: LatencyModel = LatencyModel()

    def __post_init__(self):
        for j in range(2):
            self.bfsk(j)

    @property
    def L(self) -> float:
        return self.geom.rx_separation

    @property
    def T_s(self) -> float:
        return 1.0 / self.sample_rate

    def bfsk(self, j: int) -> BfskConfig:
        t0, t1 = self.txs[j].tone_pair
        return BfskConfig(t0, t1, self.bit_rate, self.sample_rate)

    @property
    def table(self) -> GqrxTable:
        return cached_table(self.optics, self.table_points)

    def h_buf(self, rate: float) -> int:
        """Buffer length for a localization rate; must be a whole number of bits."""
        h = self.sample_rate / rate
        spb = self.bfsk(0).samples_per_bit
        if abs(h - round(h)) > 1e-9 or round(h) % spb:
            raise ValueError(f"rate {rate} Hz does not give a whole number of bits per buffer")
        return int(round(h))

    @property
    def block_samples(self) -> int:
        return max(1, int(round(self.block_duration * self.sample_rate)))


@dataclass
class LinkGeometry:
    """Per-link quantities, shaped (..., rx, tx)."""

    power: np.ndarray
    fractions: np.ndarray  # (..., rx, tx, 4)
    visible: np.ndarray
    theta: np.ndarray
    distance: np.ndarray


def link_geometry(positions, facings, system: SystemConfig, cond: ChannelCondition) -> LinkGeometry:
    """Received power, quadrant split and visibility for every QRX/TX pair.

    ``positions`` has shape (..., 2 tx, 2) in the ego frame and ``facings``
    (..., 2 tx).
    """
    p = np.asarray(positions, dtype=float)[..., None, :, :]  # (..., 1, tx, 2)
    f = np.asarray(facings, dtype=float)[..., None, :]
    rx = qrx_positions(system.L)[:, None, :]  # (rx, 1, 2)
    d = p - rx
    theta = np.arctan2(d[..., 0], d[..., 1])
    dist = np.hypot(d[..., 0], d[..., 1])
    emit = emission_angle(f, p, rx)
    visible = (emit <= system.emission_half_angle) & (np.abs(theta) < system.rx_fov) & (d[..., 1] > 0)
    ptx = np.array([tx.optical_power for tx in system.txs])
    m = np.array([tx.lambertian_order for tx in system.txs])
    with np.errstate(divide="ignore", invalid="ignore"):
        power = received_power(ptx, m, system.aperture, p, f, rx, cond.attenuation)
    power = np.where(visible, np.nan_to_num(power), 0.0)
    lim = math.radians(89.0)
    fractions = quadrant_fraction_array(np.clip(theta, -lim, lim), system.optics)
    return LinkGeometry(power, fractions, visible, theta, dist)


def state_arrays(states: RelativeTargetState | Sequence[RelativeTargetState]):
    if isinstance(states, RelativeTargetState):
        states = [states]
    pos = np.array([s.positions for s in states])
    fac = np.array([s.tx_facings for s in states], dtype=float)
    return pos, fac


@dataclass
class CycleBatch:
    """Outputs of :func:`simulate_buffers`; leading axis is the trial."""

    theta_hat: np.ndarray  # (B, rx, tx)
    phi_hat: np.ndarray
    aoa_valid: np.ndarray
    eps: np.ndarray  # (B, rx, tx, 4)
    decode_ok: np.ndarray  # (B, rx, tx)
    p_hat: np.ndarray  # (B, tx, 2)
    p_valid: np.ndarray  # (B, tx)
    snr: np.ndarray  # (B, rx, tx), linear
    end_phase: np.ndarray  # (B, tx)


def simulate_buffers(
    system: SystemConfig,
    cond: ChannelCondition,
    power,
    fractions,
    visible,
    rngs: Sequence[np.random.Generator],
    h_buf: int,
    noise: bool = True,
    phase0=None,
) -> CycleBatch:
    """Run one buffer per trial through synthesis, demodulation and lookup.

    ``power`` is (B, nblk, rx, tx) and ``fractions`` (B, nblk, rx, tx, 4), one
    entry per geometry block of ``system.block_samples``; ``visible`` is
    (B, rx, tx) at the buffer midpoint.
    """
    power = np.asarray(power, dtype=float)
    fractions = np.asarray(fractions, dtype=float)
    B, nblk = power.shape[:2]
    blk = system.block_samples
    if nblk != 1 and nblk != -(-h_buf // blk):
        raise ValueError("block count does not match buffer length")
    cfgs = [system.bfsk(0), system.bfsk(1)]
    nb = h_buf // cfgs[0].samples_per_bit
    tia = system.tia

    bits = np.empty((B, 2, nb), dtype=int)
    draws = np.zeros((B, 2, 4, h_buf)) if noise else None
    for b, rng in enumerate(rngs):
        bits[b] = rng.integers(0, 2, size=(2, nb))
        if noise:
            draws[b] = rng.standard_normal((2, 4, h_buf))

    phase0 = np.zeros((B, 2)) if phase0 is None else np.broadcast_to(np.asarray(phase0, dtype=float), (B, 2))
    waves = np.empty((B, 2, h_buf))
    end_phase = np.empty((B, 2))
    for j in range(2):
        waves[:, j], end_phase[:, j] = bfsk_modulate(bits[:, j], cfgs[j], phase0[:, j], return_phase=True)

    amp = tia.responsivity * power[..., None] * fractions  # (B, nblk, rx, tx, q)
    p_quad = np.sum(power[..., None] * fractions, axis=3)  # (B, nblk, rx, q)
    sigma = np.sqrt(quadrant_noise_variance(p_quad, tia, cond))
    if nblk == 1:
        current = np.einsum("brtq,btw->brqw", amp[:, 0], waves)
        if noise:
            current += sigma[:, 0, :, :, None] * draws
    else:
        idx = np.arange(h_buf) // blk
        current = np.einsum("bwrtq,btw->brqw", amp[:, idx], waves)
        if noise:
            current += np.moveaxis(sigma[:, idx], 1, -1) * draws
    readings = tia.R_F * current  # (B, rx, q, w)

    summed = readings.sum(axis=2)
    eps = np.empty((B, 2, 2, 4))
    ok = np.empty((B, 2, 2), dtype=bool)
    for j in range(2):
        x = bandpass(summed, cfgs[j]) if system.use_bandpass else summed
        _, s_hat, ok[:, :, j] = demod_remod_batch(x, cfgs[j], system.margin_threshold)
        eps[:, :, j] = np.einsum("brqw,brw->brq", readings, s_hat) / h_buf

    theta, phi, valid = measure_aoa_array(eps, system.table)
    valid = valid & ok & np.asarray(visible, dtype=bool)

    p_hat = np.full((B, 2, 2), np.nan)
    p_valid = np.zeros((B, 2), dtype=bool)
    for j in range(2):
        with np.errstate(invalid="ignore"):
            x, y, okt = triangulate_array(theta[:, 0, j], theta[:, 1, j], system.L)
        good = valid[:, 0, j] & valid[:, 1, j] & okt
        p_hat[:, j, 0] = np.where(good, x, np.nan)
        p_hat[:, j, 1] = np.where(good, y, np.nan)
        p_valid[:, j] = good

    mid = min(nblk - 1, (h_buf // 2) // blk) if nblk > 1 else 0
    sig_tot = np.sum(sigma[:, mid] ** 2, axis=-1)  # (B, rx)
    snr = (tia.responsivity * power[:, mid]) ** 2 / 2 / sig_tot[..., None]

    return CycleBatch(theta, phi, valid, eps, ok, p_hat, p_valid, snr, end_phase)


def static_trials(
    system: SystemConfig,
    cond: ChannelCondition,
    states,
    rate: float,
    n_trials: int,
    seed: int,
    noise: bool = True,
    chunk: int | None = None,
) -> CycleBatch:
    """Monte Carlo over independent buffers at fixed geometry.

    ``states`` is one :class:`RelativeTargetState` (shared by all trials) or
    a sequence with one state per trial. Trial ``i`` draws from
    ``default_rng(trial_seed(seed, i))``.
    """
    pos, fac = state_arrays(states)
    geo = link_geometry(pos, fac, system, cond)
    shared = pos.shape[0] == 1
    if not shared and pos.shape[0] != n_trials:
        raise ValueError("need one state or one state per trial")
    h = system.h_buf(rate)
    if chunk is None:
        chunk = max(1, int(2e6 // (8 * h)))
    parts = []
    for start in range(0, n_trials, chunk):
        stop = min(n_trials, start + chunk)
        sl = slice(0, 1) if shared else slice(start, stop)
        n = stop - start
        rngs = [np.random.default_rng(trial_seed(seed, i)) for i in range(start, stop)]
        parts.append(
            simulate_buffers(
                system,
                cond,
                np.broadcast_to(geo.power[sl][:, None], (n, 1, 2, 2)),
                np.broadcast_to(geo.fractions[sl][:, None], (n, 1, 2, 2, 4)),
                np.broadcast_to(geo.visible[sl], (n, 2, 2)),
                rngs,
                h,
                noise=noise,
            )
        )
    return CycleBatch(*(np.concatenate([getattr(p, f) for p in parts]) for f in CycleBatch.__dataclass_fields__))
