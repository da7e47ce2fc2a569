# A car joins the lane ahead, cruises and then leaves, simulated at
# 100 Hz under every ambient and weather combination.

import numpy as np

from qrxvlp import ChannelCondition
from qrxvlp.sim import RunConfig, run

conds = [ChannelCondition(a, w) for a in ("night", "day") for w in ("clear", "rain", "fog")]
for cond in conds:
    res = run(RunConfig("SM2", channel=cond, rate=100, n_repeats=4, seed=1))
    mid = (res.t > 0.3) & (res.t < 0.45)
    s = res.summary()
    print(f"{cond.label:12s} availability {s['availability']:.2f}  "
          f"mid error {100 * np.nanmean(res.e_norm[:, mid]):.1f} cm  "
          f"median {100 * s['median_err_m']:.1f} cm")

# errors per axis: range is always the weaker direction
ex, ey = res.axis_errors()
print("mean |x| and |y| error (cm):", 100 * np.nanmean(ex), 100 * np.nanmean(ey))
