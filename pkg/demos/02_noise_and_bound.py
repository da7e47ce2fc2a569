# Receiver noise and how close the bearing pipeline gets to the
# Cramer-Rao bound for a car straight ahead.

import numpy as np

from qrxvlp import ChannelCondition, SystemConfig, VehiclePose, relative_tx_positions
from qrxvlp.channel import TiaConfig, shot_noise_variance, thermal_noise_variance
from qrxvlp.crlb import analytic_aoa_sigma, crlb, estimate_aoa_sigma, fim

tia = TiaConfig()
print("shot, night, no signal (A^2):", shot_noise_variance(0.0, tia, ChannelCondition("night")))
print("shot, day, no signal (A^2):  ", shot_noise_variance(0.0, tia, ChannelCondition("day")))
print("thermal (A^2):               ", thermal_noise_variance(tia))

system = SystemConfig()
state = relative_tx_positions(VehiclePose(0, 0, 0), VehiclePose(0.8, 5.0, 0.0))
print("tail lights in the ego frame:", np.round(state.positions, 3).tolist())

for cond in (ChannelCondition("night", "clear"), ChannelCondition("day", "fog")):
    analytic = analytic_aoa_sigma(state, system, cond)
    mc, batch = estimate_aoa_sigma(state, system, cond, n_trials=1000, seed=3, return_trials=True)
    bound = crlb(fim(state.p1, state.p2, system.L, mc))
    err = batch.p_hat - state.positions
    rmse = np.sqrt(np.nanmean(np.sum(err**2, axis=-1), axis=0))
    print(cond.label)
    print("  bearing sigma, analytic (mrad):", np.round(1e3 * np.array(analytic.sigma), 4))
    print("  bearing sigma, simulated (mrad):", np.round(1e3 * np.array(mc.sigma), 4))
    print("  position bound (mm):", np.round(1e3 * np.array(bound.position_bounds), 3))
    print("  simulated RMSE (mm):", np.round(1e3 * rmse, 3))
