import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrxvlp.errors import DecodeFailure, InvalidPower
from qrxvlp.signal import (
    BfskConfig,
    LatencyModel,
    QuadrantBuffer,
    bandpass,
    bfsk_modulate,
    demod_remod,
    demod_remod_batch,
    estimate_quadrant_power,
    latency,
    measure_aoa,
    measure_aoa_array,
)
from qrxvlp.optics import f_qrx

CFG = BfskConfig(sample_rate=30e3)


def test_config_validation():
    with pytest.raises(ValueError):
        BfskConfig(sample_rate=10e3)  # below Nyquist for 6 kHz
    with pytest.raises(ValueError):
        BfskConfig(sample_rate=30.5e3)
    with pytest.raises(ValueError):
        BfskConfig(tone0=5e3, tone1=5e3)
    assert CFG.samples_per_bit == 30


def test_modulation_tones_and_phase_continuity():
    bits = np.array([0, 1, 1, 0])
    s, end = bfsk_modulate(bits, CFG, return_phase=True)
    assert s.shape == (120,)
    assert s[0] == pytest.approx(1.0)
    spec = np.abs(np.fft.rfft(s[:30] * np.hanning(30), 3000))
    assert np.argmax(spec) * CFG.sample_rate / 3000 == pytest.approx(5e3, abs=200)
    # continuing from the returned phase equals modulating the concatenation
    s2 = bfsk_modulate(np.array([1, 0]), CFG, phase0=end)
    full = bfsk_modulate(np.array([0, 1, 1, 0, 1, 0]), CFG)
    np.testing.assert_allclose(np.concatenate([s, s2]), full, atol=1e-9)


def test_modulation_batched():
    bits = np.array([[0, 1], [1, 1]])
    s = bfsk_modulate(bits, CFG, phase0=np.array([0.0, 1.0]))
    np.testing.assert_allclose(s[1], bfsk_modulate(bits[1], CFG, 1.0))


@given(st.lists(st.integers(0, 1), min_size=1, max_size=40), st.floats(0, 2 * math.pi))
def test_noiseless_demod_recovers_bits_and_waveform(bits, phase):
    bits = np.array(bits)
    s = bfsk_modulate(bits, CFG, phase)
    dec, s_hat = demod_remod(3.7 * s, CFG)
    np.testing.assert_array_equal(dec, bits)
    np.testing.assert_allclose(s_hat, s, atol=1e-9)


def test_noise_only_buffer_fails_to_decode():
    rng = np.random.default_rng(0)
    with pytest.raises(DecodeFailure):
        demod_remod(rng.standard_normal(30 * 200), CFG)


def test_demod_rejects_partial_bit():
    with pytest.raises(ValueError):
        demod_remod_batch(np.zeros(45), CFG)


def test_bandpass_keeps_tones():
    s = bfsk_modulate(np.array([0, 1] * 20), CFG)
    y = bandpass(s + 0.5, CFG)
    assert abs(np.mean(y)) < 1e-2
    assert np.std(y[300:-300]) == pytest.approx(np.std(s), rel=0.1)


def test_estimate_quadrant_power_half_amplitude():
    s = bfsk_modulate(np.array([0, 1, 0, 0, 1] * 10), CFG)
    f = np.array([0.1, 0.2, 0.3, 0.4])
    buf = QuadrantBuffer(2.0 * f[:, None] * s[None, :])
    eps = estimate_quadrant_power(buf, s)
    np.testing.assert_allclose(eps, f, rtol=1e-2)  # mean(s^2) = 1/2


def test_measure_aoa_round_trip(table, optics):
    th = math.radians(23.0)
    from qrxvlp.optics import quadrant_fraction_array

    m = measure_aoa(quadrant_fraction_array(th, optics), table, timestamp=0.1)
    assert m.theta_hat == pytest.approx(th, abs=1e-6)
    assert m.valid and m.timestamp == 0.1
    assert m.phi_hat == pytest.approx(f_qrx(th, optics))


def test_measure_aoa_invalid(table):
    with pytest.raises(InvalidPower):
        measure_aoa([0, 0, 0, 0], table)
    th, phi, ok = measure_aoa_array(np.array([[0.0, 1.0, 0.0, 1.0], [-1, 0, 0, 0]]), table)
    assert not ok[0] and phi[0] == 1.0  # saturated ratio is outside the open interval
    assert np.isnan(th[1]) and not ok[1]


def test_buffer_midpoint_and_csv(tmp_path):
    buf = QuadrantBuffer(np.ones((4, 10)), w0=100, T_s=1e-6)
    assert buf.midpoint == pytest.approx(105e-6)
    assert buf.h_buf == 10
    buf.to_csv(tmp_path / "b.csv", np.zeros(10))
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "w,Q_A,Q_B,Q_C,Q_D,s_hat" and len(lines) == 11
    with pytest.raises(ValueError):
        QuadrantBuffer(np.ones((3, 10)))


def test_latency_arithmetic():
    rep = latency(LatencyModel(), 20000, 1e-6)
    assert rep.t_vlc == pytest.approx(0.33e-9 * 20000 * math.log2(20000))  # 94.3 us
    assert rep.t_vlp == pytest.approx(0.33e-9 * (40000 + 64))  # 13.2 us
    assert rep.t_up == pytest.approx(1.0752e-4, rel=1e-3)
    assert rep.rate == pytest.approx(50.0)
    with pytest.raises(ValueError):
        LatencyModel(T_FP=-1)
    with pytest.raises(ValueError):
        latency(LatencyModel(), 0, 1e-6)
