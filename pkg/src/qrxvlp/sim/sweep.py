"""Static range characterization over a grid of target locations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..channel import ChannelCondition
from ..core import RelativeTargetState
from ..pipeline import SystemConfig, link_geometry, static_trials
from .scenarios import Sm4Params, relative_pose_arrays, sm4_grid


@dataclass(eq=False)
class HeatmapRecords:
    x: np.ndarray
    y: np.ndarray
    mean_err: np.ndarray  # NaN for locations with no usable estimate
    availability: np.ndarray  # valid trials over all orientations x repeats
    n_feasible: np.ndarray  # orientations with every link visible
    label: str = ""

    def __len__(self) -> int:
        return self.x.size

    @property
    def distance(self) -> np.ndarray:
        return np.hypot(self.x, self.y)


def cell_seed(seed: int, index: int) -> int:
    """Independent per-location seed derived from the run seed."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint32)[0])


def sweep_grid(
    system: SystemConfig,
    conditions,
    params: Sm4Params = Sm4Params(),
    rate: float = 50.0,
    n_repeats: int = 1,
    seed: int = 0,
    noise: bool = True,
) -> dict[str, HeatmapRecords]:
    """Mean localization error per location, averaged over feasible orientations and repeats.

    ``conditions`` is one :class:`ChannelCondition` or a sequence of them;
    the result is keyed by condition label.
    """
    if isinstance(conditions, ChannelCondition):
        conditions = [conditions]
    grid = sm4_grid(params)
    ori = np.radians(np.asarray(params.orientations_deg, dtype=float))
    n, m = len(grid), len(ori)
    targets = np.column_stack([np.repeat(grid, m, axis=0), np.tile(ori, n)])
    pos, fac = relative_pose_arrays(np.zeros_like(targets), targets, system.geom, system.txs)
    pos = pos.reshape(n, m, 2, 2)
    fac = fac.reshape(n, m, 2)

    out = {}
    for cond in conditions:
        vis = link_geometry(pos, fac, system, cond).visible.all(axis=(-1, -2))  # (n, m)
        mean_err = np.full(n, np.nan)
        avail = np.zeros(n)
        for i in range(n):
            idx = np.flatnonzero(vis[i])
            if idx.size == 0:
                continue
            states = [RelativeTargetState(tuple(pos[i, o, 0]), tuple(pos[i, o, 1]), tuple(fac[i, o]))
                      for o in idx for _ in range(n_repeats)]
            batch = static_trials(system, cond, states, rate, len(states), cell_seed(seed, i), noise=noise)
            truth = np.repeat(pos[i, idx], n_repeats, axis=0)
            e = np.linalg.norm(batch.p_hat - truth, axis=-1)
            ok = batch.p_valid.all(axis=-1)
            avail[i] = ok.sum() / (m * n_repeats)
            if ok.any():
                mean_err[i] = float(np.mean(np.hypot(e[ok, 0], e[ok, 1])))
        out[cond.label] = HeatmapRecords(grid[:, 0].copy(), grid[:, 1].copy(), mean_err, avail,
                                         vis.sum(axis=1), cond.label)
    return out


def accuracy_radius(rec: HeatmapRecords, threshold: float, band: float = 1.0, min_fraction: float = 0.5) -> float:
    """Range out to which a location typically meets ``threshold``.

    Available locations are binned into rings of width ``band`` by their
    distance from the ego bumper center. Walking outward, the radius is the
    outer edge of the last ring in which at least ``min_fraction`` of the
    locations meet the threshold; the walk stops at the first ring that
    does not.
    """
    ok = np.isfinite(rec.mean_err)
    if not ok.any():
        return 0.0
    d = rec.distance[ok]
    good = rec.mean_err[ok] <= threshold
    edges = np.arange(math.floor(d.min() / band) * band, d.max() + band, band)
    radius = edges[0]
    for lo in edges:
        sel = (d >= lo) & (d < lo + band)
        if not sel.any():
            continue
        if good[sel].mean() < min_fraction:
            break
        radius = lo + band
    return float(radius)
