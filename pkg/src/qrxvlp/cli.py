"""Command line entry point: ``qrxvlp <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .channel import ChannelCondition
from .config import load_config, with_overrides
from .core import VehiclePose, relative_tx_positions
from .crlb import AoANoiseModel, analytic_aoa_sigma, crlb, fim
from .errors import QrxVlpError
from .optics import fqrx_curve
from .sim import io
from .sim.engine import run
from .sim.scenarios import sm4_grid
from .sim.sweep import accuracy_radius, sweep_grid


def _svg(args) -> bool:
    return args.format == "csv+svg"


def cmd_qrx_design(cfg, args) -> dict:
    qd = cfg.qrx_design
    theta, phi = fqrx_curve(cfg.system.optics, qd.n_points, math.radians(qd.theta_max_deg))
    out = Path(args.out_dir)
    io.write_qrx_design(theta, phi, out / "qrx_design.csv")
    table = cfg.system.table  # raises BijectionViolated for a bad design
    if _svg(args):
        io.curve_svg(np.degrees(theta), phi, out / "qrx_design.svg", io.config_hash(cfg.system.optics),
                     "bearing (deg)", "horizontal power ratio")
    return {"fov_deg": math.degrees(table.theta_fov), "d_S_mm": cfg.system.optics.d_S}


def cmd_run(cfg, args) -> dict:
    res = run(cfg.run)
    out = Path(args.out_dir)
    io.write_trace(res, out / "trace.csv")
    for r in range(1, res.p_hat.shape[0]):
        io.write_trace(res, out / f"trace_repeat{r}.csv", repeat=r)
    if _svg(args):
        io.trace_svg({cfg.run.channel.label: res}, out / "trace.svg", io.config_hash(cfg.run))
    return res.summary()


def cmd_sweep(cfg, args) -> dict:
    sw = cfg.sweep
    conds = [ChannelCondition(a, w) for a, w in sw.conditions]
    recs = sweep_grid(cfg.system, conds, sw.grid, sw.rate, sw.repeats, cfg.run.seed)
    out = Path(args.out_dir)
    digest = io.config_hash((cfg.system, sw))
    summary = {}
    for cond in conds:
        rec = recs[cond.label]
        name = "heatmap" if len(conds) == 1 else f"heatmap_{cond.ambient}_{cond.weather}"
        io.write_heatmap(rec, out / f"{name}.csv")
        if _svg(args):
            io.heatmap_svg(rec, out / f"{name}.svg", digest)
        summary[cond.label] = {"radius_10cm_m": accuracy_radius(rec, 0.10), "radius_1m_m": accuracy_radius(rec, 1.0)}
    return summary


def cmd_crlb_map(cfg, args) -> dict:
    cm = cfg.crlb_map
    sysc = cfg.system
    from .sim.scenarios import Sm4Params

    grid = sm4_grid(Sm4Params(cm.x_max, cm.y_min, cm.y_max, cm.step, (0.0,)))
    rows = {k: [] for k in ("x", "y", "sigma", "b1", "b2")}
    ego = VehiclePose(0.0, 0.0, 0.0)
    for x, y in grid:
        st = relative_tx_positions(ego, VehiclePose(x, y, 0.0), sysc.geom, sysc.txs)
        try:
            if cm.sigma_mode == "uniform":
                noise = AoANoiseModel.uniform(cm.sigma)
            else:
                noise = analytic_aoa_sigma(st, sysc, cfg.channel, cm.rate)
            b1, b2 = crlb(fim(st.p1, st.p2, sysc.L, noise)).position_bounds
            sig = float(np.sqrt(np.mean(np.square(noise.sigma))))
        except (QrxVlpError, ValueError):
            b1 = b2 = sig = math.nan
        for k, v in zip(rows, (x, y, sig, b1, b2)):
            rows[k].append(v)
    out = Path(args.out_dir)
    io.write_crlb_map(rows["x"], rows["y"], rows["sigma"], rows["b1"], rows["b2"], out / "crlb_map.csv")
    if _svg(args):
        from .sim.sweep import HeatmapRecords

        rec = HeatmapRecords(np.array(rows["x"]), np.array(rows["y"]), np.array(rows["b1"]),
                             np.isfinite(rows["b1"]).astype(float), np.ones(len(grid), int), "CRLB, TX 1")
        io.heatmap_svg(rec, out / "crlb_map.svg", io.config_hash((sysc, cm, cfg.channel)))
    finite = np.isfinite(rows["b1"])
    return {"locations": len(grid), "bounded": int(finite.sum())}


COMMANDS = {"qrx-design": cmd_qrx_design, "run": cmd_run, "crlb-map": cmd_crlb_map, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qrxvlp", description="QRX-based vehicle localization simulator")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, default=None, help="TOML configuration file")
        s.add_argument("--seed", type=int, default=None)
        s.add_argument("--out-dir", type=Path, default=Path("."))
        s.add_argument("--repeats", type=int, default=None)
        s.add_argument("--format", choices=("csv", "csv+svg"), default="csv")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = with_overrides(load_config(args.config), args.seed, args.repeats)
        summary = COMMANDS[args.command](cfg, args)
    except QrxVlpError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
