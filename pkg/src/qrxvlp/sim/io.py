"""CSV and SVG outputs."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

TRACE_HEADER = ["t_s", "x1", "y1", "x2", "y2", "x1_hat", "y1_hat", "x2_hat", "y2_hat", "e1_m", "e2_m", "e_norm_m", "valid"]
HEATMAP_HEADER = ["x_m", "y_m", "mean_err_m", "availability"]
CRLB_HEADER = ["x", "y", "sigma_used", "bound_p1_m", "bound_p2_m"]
QRX_HEADER = ["theta_deg", "phi"]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    v = float(v)
    return "nan" if math.isnan(v) else repr(round(v, 12))


def _write(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(v) for v in row])
    return path


def _jsonable(obj):
    if is_dataclass(obj):
        return {k: _jsonable(v) for k, v in asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return repr(float(obj))
    if isinstance(obj, (np.integer, int, bool, str)) or obj is None:
        return obj
    return repr(obj)


def config_hash(obj) -> str:
    """Short stable digest of a configuration object."""
    blob = json.dumps(_jsonable(obj), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def write_trace(result, path, repeat: int = 0) -> Path:
    e = result.errors[repeat]
    norm = result.e_norm[repeat]
    valid = result.valid_both[repeat]
    rows = []
    for k in range(result.n_cycles):
        rows.append([result.t[k], *result.truth[k].ravel(), *result.p_hat[repeat, k].ravel(),
                     e[k, 0], e[k, 1], norm[k], bool(valid[k])])
    return _write(path, TRACE_HEADER, rows)


def write_heatmap(rec, path) -> Path:
    rows = zip(rec.x, rec.y, rec.mean_err, rec.availability)
    return _write(path, HEATMAP_HEADER, rows)


def write_crlb_map(x, y, sigma, b1, b2, path) -> Path:
    return _write(path, CRLB_HEADER, zip(x, y, sigma, b1, b2))


def write_qrx_design(theta, phi, path) -> Path:
    return _write(path, QRX_HEADER, zip(np.degrees(theta), phi))


# -- SVG ---------------------------------------------------------------------

def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "qrxvlp"  # stable element ids
    return plt


def _save(fig, path, digest: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.text(0.99, 0.005, f"config {digest}", ha="right", va="bottom", fontsize=6, color="0.4")
    fig.savefig(path, format="svg", metadata={"Description": f"config-hash {digest}", "Date": None})
    return path


def trace_svg(results: dict, path, digest: str) -> Path:
    """Error-vs-time lines, one per labelled run."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for label, res in results.items():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)  # cycles lost in every repeat
            err = np.nanmean(res.e_norm, axis=0)
        ax.semilogy(res.t, err, marker=".", label=label)
    ax.set_xlabel("t (s)")
    ax.set_ylabel("error norm (m)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    out = _save(fig, path, digest)
    plt.close(fig)
    return out


def heatmap_svg(rec, path, digest: str) -> Path:
    plt = _pyplot()
    xs = np.unique(rec.x)
    ys = np.unique(rec.y)
    img = np.full((ys.size, xs.size), np.nan)
    img[np.searchsorted(ys, rec.y), np.searchsorted(xs, rec.x)] = rec.mean_err
    fig, ax = plt.subplots(figsize=(4, 6))
    from matplotlib.colors import LogNorm

    mesh = ax.pcolormesh(xs, ys, img, shading="nearest", norm=LogNorm(vmin=1e-3, vmax=10))
    fig.colorbar(mesh, ax=ax, label="mean error (m)")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title(rec.label, fontsize=9)
    ax.set_aspect("equal")
    fig.tight_layout()
    out = _save(fig, path, digest)
    plt.close(fig)
    return out


def curve_svg(x, y, path, digest: str, xlabel: str, ylabel: str) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(x, y)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    out = _save(fig, path, digest)
    plt.close(fig)
    return out
