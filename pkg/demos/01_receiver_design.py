# Receiver design: how a lens over a quadrant photodiode turns a bearing
# into a power imbalance, and how that mapping is inverted.

import math

import numpy as np

from qrxvlp.optics import QrxOpticalConfig, build_g_qrx, f_qrx, fov, quadrant_fractions

cfg = QrxOpticalConfig()
print("spot diameter (mm):", round(cfg.d_S, 4))
print("field of view (deg):", round(math.degrees(fov(cfg)), 4))

# spot split at a few bearings; quadrants are ordered A, B, C, D
for deg in (0, 10, 30, 60):
    q = quadrant_fractions(math.radians(deg), cfg)
    print(deg, np.round(q.as_array(), 4))

# the horizontal ratio is odd and monotonic inside the field of view
theta = np.radians(np.linspace(-80, 80, 9))
print(np.round(f_qrx(theta, cfg), 4))

# tabulated inverse: look a ratio up and get the bearing back
table = build_g_qrx(cfg)
phi = f_qrx(math.radians(17.0), cfg)
print("recovered bearing (deg):", math.degrees(np.interp(phi, table.phi_grid, table.theta_grid)))

# a spot wider than the detector diagonal leaves a flat zone, so the build refuses it
try:
    build_g_qrx(QrxOpticalConfig(d_L=10.0))
except Exception as exc:
    print(type(exc).__name__, exc)
