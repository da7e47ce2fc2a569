import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrxvlp.channel import (
    ChannelCondition,
    LinkGain,
    TiaConfig,
    lambertian_gain,
    lambertian_order,
    link_gain,
    noise_variance,
    quadrant_noise_variance,
    received_power,
    shot_noise_variance,
    synthesize_quadrant_readings,
    thermal_noise_variance,
    trial_seed,
    weather_factor,
)
from qrxvlp.core import tail_lights
from qrxvlp.errors import LinkDown

# Hand evaluation with q = 1.602176634e-19 C, k = 1.380649e-23 J/K:
#   shot, night, no signal: 2 q (10 uA) 0.562 (10 MHz)
#   thermal: 4 k 298 (0.562 B / 2840 + (2 pi 45 pF)^2 / 30 mS * 1.5 * 0.0868 B^3)
SHOT_NIGHT = 1.8008465366e-17
SHOT_DAY = 1.3506349025e-15
THERMAL = 3.8276954661e-17
P_R_5M = 7.6394372684e-06  # 2 W, m = 11, 50 mm^2, 5 m on axis


def test_shot_noise_night_dark():
    assert shot_noise_variance(0.0, TiaConfig(), ChannelCondition("night")) == pytest.approx(SHOT_NIGHT, rel=1e-9)
    assert shot_noise_variance(0.0, TiaConfig(), ChannelCondition("day")) == pytest.approx(SHOT_DAY, rel=1e-9)


def test_thermal_noise():
    assert thermal_noise_variance(TiaConfig()) == pytest.approx(THERMAL, rel=1e-9)


def test_noise_adds_signal_shot():
    tia, cond = TiaConfig(), ChannelCondition()
    extra = noise_variance(1e-5, tia, cond) - noise_variance(0.0, tia, cond)
    assert extra == pytest.approx(2 * 1.602176634e-19 * 0.5 * 1e-5 * 1e7)


def test_quadrant_noise_uses_quarter_background():
    tia, cond = TiaConfig(), ChannelCondition()
    assert quadrant_noise_variance(0.0, tia, cond) == pytest.approx(SHOT_NIGHT / 4 + THERMAL)
    shared = TiaConfig(ct_per_quadrant=False)
    assert quadrant_noise_variance(0.0, shared, cond) < quadrant_noise_variance(0.0, tia, cond)


def test_tia_consistency():
    assert TiaConfig().open_loop_gain == pytest.approx(8.0299108, rel=1e-6)
    with pytest.raises(ValueError):
        TiaConfig(open_loop_gain=10.0)
    TiaConfig(open_loop_gain=8.2)  # within 5 %
    with pytest.raises(ValueError):
        TiaConfig(R_F=-1.0)


def test_lambertian_order_from_half_power_angle():
    assert lambertian_order(math.radians(20)) == 11
    assert lambertian_order(math.radians(60)) == 1


def test_lambertian_gain_zero_behind():
    assert lambertian_gain(11, math.radians(95)) == 0.0
    assert lambertian_gain(1, 0.0) == pytest.approx(1 / math.pi)


def test_received_power_on_axis():
    p = received_power(2.0, 11, 50e-6, (0.0, 5.0), math.pi, (0.0, 0.0))
    assert p == pytest.approx(P_R_5M, rel=1e-9)


@given(st.floats(1, 30))
def test_received_power_inverse_square(d):
    p1 = received_power(2.0, 11, 50e-6, (0.0, d), math.pi, (0.0, 0.0))
    p2 = received_power(2.0, 11, 50e-6, (0.0, 2 * d), math.pi, (0.0, 0.0))
    assert p1 / p2 == pytest.approx(4.0)


def test_weather_attenuation():
    assert weather_factor(10.0, ChannelCondition(weather="fog")) == pytest.approx(10 ** -0.3)
    clear = received_power(2.0, 11, 50e-6, (0, 10), math.pi, (0, 0))
    rain = received_power(2.0, 11, 50e-6, (0, 10), math.pi, (0, 0), 0.1)
    assert rain / clear == pytest.approx(10 ** -0.1)  # 1 dB over 10 m


def test_condition_defaults_and_validation():
    c = ChannelCondition("day", "rain")
    assert c.I_bg == 750e-6 and c.attenuation == 0.1 and c.label == "day/rain"
    with pytest.raises(KeyError):
        ChannelCondition("dusk")
    with pytest.raises(ValueError):
        ChannelCondition(I_bg=-1.0)


def test_link_gain_and_link_down():
    tx = tail_lights()[0]
    g = link_gain(tx, 50e-6, (0.0, 5.0), math.pi, (0.0, 0.0))
    assert isinstance(g, LinkGain)
    assert g.received_power == pytest.approx(P_R_5M)
    assert g.H == pytest.approx(P_R_5M / 2)
    assert g.distance == pytest.approx(5.0)
    with pytest.raises(LinkDown):
        link_gain(tx, 50e-6, (0.0, 5.0), 0.0, (0.0, 0.0))


def test_trial_seeds_distinct_across_bases():
    seeds = {trial_seed(b, i) for b in range(20) for i in range(1000)}
    assert len(seeds) == 20 * 1000
    assert trial_seed(0, 7) == 7


def test_synthesis_superposition_and_determinism():
    n = 64
    s1 = np.cos(np.arange(n) * 0.3)
    s2 = np.cos(np.arange(n) * 0.9)
    f = np.array([0.1, 0.4, 0.1, 0.4])
    a = synthesize_quadrant_readings(s1, 1e-6, f, noise=False)
    b = synthesize_quadrant_readings(s2, 2e-6, f, noise=False)
    ab = synthesize_quadrant_readings([s1, s2], [1e-6, 2e-6], [f, f], noise=False)
    np.testing.assert_allclose(ab.readings, a.readings + b.readings)
    r1 = synthesize_quadrant_readings(s1, 1e-6, f, rng_seed=5)
    r2 = synthesize_quadrant_readings(s1, 1e-6, f, rng_seed=5)
    np.testing.assert_array_equal(r1.readings, r2.readings)
    with pytest.raises(ValueError):
        synthesize_quadrant_readings([s1, s2], [1e-6], [f, f])


def test_synthesized_noise_level():
    f = np.full(4, 0.25)
    buf = synthesize_quadrant_readings(np.zeros(200_000), 0.0, f, rng_seed=1)
    expected = TiaConfig().R_F * math.sqrt(SHOT_NIGHT / 4 + THERMAL)
    assert np.std(buf.readings[0]) == pytest.approx(expected, rel=0.01)
