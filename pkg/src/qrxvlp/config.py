"""TOML configuration: every table and key is optional and defaults to the reference setup.

Schema (units in key names or comments)::

    [vehicle]      rx_separation, tx_separation, body_length            # m
    [transmitter]  optical_power (W), lambertian_order | half_power_angle_deg,
                   emission_half_angle_deg
    [receiver]     aperture (m^2), fov_deg
    [optics]       d_L, n, d_H, d_X, gap (mm), table_points
    [tia]          responsivity, bandwidth, C_T, R_F, g_m, Gamma, I_B2, I_B3,
                   temperature, open_loop_gain, ct_per_quadrant
    [signal]       sample_rate, bit_rate, margin_threshold, use_bandpass, block_duration
    [latency]      k_alpha, k_beta, h_LU, T_FP
    [channel]      ambient ("night" | "day"), weather ("clear" | "rain" | "fog"),
                   I_bg (A), attenuation (dB/m)
    [run]          scenario, rate, seed, repeats, noise, error_reference
    [scenario]     preset parameters, e.g. ego_speed, start = [x, y]
    [sweep]        conditions = [["night", "clear"], ...], rate, repeats,
                   x_max, y_min, y_max, step, orientations_deg
    [crlb_map]     sigma_mode ("uniform" | "analytic"), sigma (rad), rate,
                   x_max, y_min, y_max, step
    [qrx_design]   n_points, theta_max_deg
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .channel import ChannelCondition, TiaConfig, lambertian_order
from .core import VehicleGeometry, tail_lights
from .errors import InvalidParams
from .optics import QrxOpticalConfig
from .pipeline import SystemConfig
from .signal import LatencyModel
from .sim.engine import RunConfig
from .sim.scenarios import Sm4Params

TABLES = {"vehicle", "transmitter", "receiver", "optics", "tia", "signal", "latency", "channel",
          "run", "scenario", "sweep", "crlb_map", "qrx_design"}


@dataclass(frozen=True)
class SweepSettings:
    conditions: tuple[tuple[str, str], ...] = (("night", "clear"), ("day", "rain"))
    rate: float = 50.0
    repeats: int = 1
    grid: Sm4Params = Sm4Params()


@dataclass(frozen=True)
class CrlbMapSettings:
    sigma_mode: str = "analytic"
    sigma: float = 1e-3  # rad, for the uniform mode
    rate: float = 50.0
    x_max: float = 3.0
    y_min: float = 1.0
    y_max: float = 15.0
    step: float = 0.5


@dataclass(frozen=True)
class QrxDesignSettings:
    n_points: int = 721
    theta_max_deg: float = 89.0


@dataclass(frozen=True)
class AppConfig:
    system: SystemConfig = SystemConfig()
    channel: ChannelCondition = ChannelCondition()
    run: RunConfig = RunConfig()
    sweep: SweepSettings = SweepSettings()
    crlb_map: CrlbMapSettings = CrlbMapSettings()
    qrx_design: QrxDesignSettings = QrxDesignSettings()
    raw: dict = field(default_factory=dict, compare=False)


def _take(table: dict, name: str, cls, allowed=None, rename=None):
    rename = rename or {}
    allowed = set(allowed if allowed is not None else (f.name for f in fields(cls)))
    kw = {}
    for key, val in table.items():
        k = rename.get(key, key)
        if k not in allowed:
            raise InvalidParams(f"unknown key [{name}].{key}")
        kw[k] = tuple(val) if isinstance(val, list) else val
    return kw


def _build(cls, kw, name):
    try:
        return cls(**kw)
    except (TypeError, ValueError, KeyError) as exc:
        raise InvalidParams(f"[{name}]: {exc}") from None


def from_dict(doc: dict) -> AppConfig:
    unknown = set(doc) - TABLES
    if unknown:
        raise InvalidParams(f"unknown table(s): {sorted(unknown)}")
    t = {k: dict(doc.get(k, {})) for k in TABLES}

    geom = _build(VehicleGeometry, _take(t["vehicle"], "vehicle", VehicleGeometry), "vehicle")

    tx = t["transmitter"]
    tx_allowed = {"optical_power", "lambertian_order", "half_power_angle_deg", "emission_half_angle_deg"}
    _take(tx, "transmitter", None, tx_allowed)
    tx_kw = {}
    if "optical_power" in tx:
        tx_kw["optical_power"] = float(tx["optical_power"])
    if "half_power_angle_deg" in tx:
        tx_kw["lambertian_order"] = lambertian_order(math.radians(tx["half_power_angle_deg"]))
    if "lambertian_order" in tx:
        tx_kw["lambertian_order"] = int(tx["lambertian_order"])
    try:
        txs = tail_lights(geom, **tx_kw)
    except ValueError as exc:
        raise InvalidParams(f"[transmitter]: {exc}") from None

    optics_tab = dict(t["optics"])
    table_points = int(optics_tab.pop("table_points", 2048))
    optics = _build(QrxOpticalConfig, _take(optics_tab, "optics", QrxOpticalConfig), "optics")
    tia = _build(TiaConfig, _take(t["tia"], "tia", TiaConfig), "tia")
    latency = _build(LatencyModel, _take(t["latency"], "latency", LatencyModel), "latency")

    rx = _take(t["receiver"], "receiver", None, {"aperture", "fov_deg"})
    sig = _take(t["signal"], "signal", None,
                {"sample_rate", "bit_rate", "margin_threshold", "use_bandpass", "block_duration"})
    sys_kw = dict(geom=geom, txs=txs, optics=optics, tia=tia, latency=latency, table_points=table_points, **sig)
    if "aperture" in rx:
        sys_kw["aperture"] = float(rx["aperture"])
    if "fov_deg" in rx:
        sys_kw["rx_fov"] = math.radians(rx["fov_deg"])
    if "emission_half_angle_deg" in tx:
        sys_kw["emission_half_angle"] = math.radians(tx["emission_half_angle_deg"])
    system = _build(SystemConfig, sys_kw, "signal")

    channel = _build(ChannelCondition, _take(t["channel"], "channel", ChannelCondition), "channel")

    run_tab = _take(t["run"], "run", None, {"scenario", "rate", "seed", "repeats", "noise", "error_reference"})
    run_kw = dict(system=system, channel=channel, scenario_params=dict(t["scenario"]))
    for key, dest in (("scenario", "scenario"), ("rate", "rate"), ("seed", "seed"), ("repeats", "n_repeats"),
                      ("noise", "noise"), ("error_reference", "error_reference")):
        if key in run_tab:
            run_kw[dest] = run_tab[key]
    run = _build(RunConfig, run_kw, "run")

    sw = _take(t["sweep"], "sweep", None,
               {"conditions", "rate", "repeats", "x_max", "y_min", "y_max", "step", "orientations_deg"})
    grid_kw = {k: sw.pop(k) for k in ("x_max", "y_min", "y_max", "step", "orientations_deg") if k in sw}
    if "conditions" in sw:
        sw["conditions"] = tuple(tuple(c) for c in sw["conditions"])
    sweep = SweepSettings(**sw, grid=_build(Sm4Params, grid_kw, "sweep"))
    for amb, wea in sweep.conditions:
        _build(ChannelCondition, {"ambient": amb, "weather": wea}, "sweep")

    cm = _build(CrlbMapSettings, _take(t["crlb_map"], "crlb_map", CrlbMapSettings), "crlb_map")
    if cm.sigma_mode not in ("uniform", "analytic"):
        raise InvalidParams("[crlb_map].sigma_mode must be 'uniform' or 'analytic'")
    qd = _build(QrxDesignSettings, _take(t["qrx_design"], "qrx_design", QrxDesignSettings), "qrx_design")
    return AppConfig(system, channel, run, sweep, cm, qd, raw=doc)


def load_config(path=None) -> AppConfig:
    if path is None:
        return from_dict({})
    with open(Path(path), "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise InvalidParams(f"{path}: {exc}") from None
    return from_dict(doc)


def with_overrides(cfg: AppConfig, seed=None, repeats=None) -> AppConfig:
    run = cfg.run
    if seed is not None:
        run = replace(run, seed=int(seed))
    if repeats is not None:
        run = replace(run, n_repeats=int(repeats))
    sweep = cfg.sweep if repeats is None else replace(cfg.sweep, repeats=int(repeats))
    return replace(cfg, run=run, sweep=sweep)
