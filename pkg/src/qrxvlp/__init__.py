"""Vehicle-to-vehicle localization from quadrant-photodiode bearings."""

from .channel import ChannelCondition, TiaConfig, noise_variance, received_power, trial_seed
from .core import (
    RelativeTargetState,
    TxUnit,
    VehicleGeometry,
    VehiclePose,
    all_links_visible,
    link_visible,
    relative_tx_positions,
    tail_lights,
    true_aoa,
)
from .crlb import AoANoiseModel, CrlbResult, analytic_aoa_sigma, crlb, estimate_aoa_sigma, fim
from .errors import *  # noqa: F401,F403
from .optics import GqrxTable, QrxOpticalConfig, build_g_qrx, f_qrx, fov, quadrant_fractions
from .pipeline import SystemConfig, static_trials
from .signal import BfskConfig, LatencyModel, bfsk_modulate, demod_remod, latency, measure_aoa
from .vlp import PositionEstimate, localization_error, triangulate

__version__ = "0.1.0"
