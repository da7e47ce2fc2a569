# Accuracy over a grid of target locations, and the radius within which
# the estimate stays below a given error.

import numpy as np

from qrxvlp import ChannelCondition, SystemConfig
from qrxvlp.sim import Sm4Params, accuracy_radius, sweep_grid

params = Sm4Params(step=1.0)
maps = sweep_grid(SystemConfig(), [ChannelCondition("night", "clear"), ChannelCondition("day", "rain")],
                  params, rate=50, seed=0)

for label, rec in maps.items():
    print(label)
    print("  cells:", rec.x.size, " mean availability:", round(float(np.mean(rec.availability)), 3))
    for thr in (0.1, 1.0):
        print(f"  error <= {thr} m out to {accuracy_radius(rec, thr):.1f} m")

# error against distance, binned in whole metres
rec = maps["night/clear"]
bins = np.floor(rec.distance).astype(int)
for b in np.unique(bins):
    print(b, np.round(np.nanmedian(rec.mean_err[bins == b]), 4))
