import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrxvlp.errors import BijectionViolated, NonPositiveSpot, ZeroIllumination
from qrxvlp.optics import (
    QrxOpticalConfig,
    build_g_qrx,
    design_lens_distance,
    disk_rect_area,
    f_qrx,
    fov,
    fqrx_curve,
    phi_from_powers,
    quadrant_fraction_array,
    quadrant_fractions,
    spot_diameter,
    spot_displacement,
)

# Quadrant fractions (A, B) of a uniform disk, by 1-D adaptive quadrature of
# the chord length; C = A and D = B by symmetry.
QUADRATURE = {
    10: (0.2401626373, 0.2585167787),
    20: (0.2297044881, 0.2659443812),
    30: (0.2178393182, 0.2731966794),
    45: (0.1944877720, 0.2847879905),
    60: (0.1548589162, 0.2981922582),
    70: (0.1028451545, 0.3055198053),
    75: (0.0577493679, 0.3012692010),
    80: (0.0001335109, 0.2529906948),
}
PHI_QUADRATURE = {10: 0.0368054922, 20: 0.0731160613, 30: 0.1127358512, 45: 0.1884097332,
                  60: 0.3163734035, 70: 0.4963076434, 75: 0.6782931419, 80: 0.998945096}


def test_spot_diameter_and_fov(optics):
    assert spot_diameter(optics) == pytest.approx(6.275)
    assert math.degrees(fov(optics)) == pytest.approx(80.0571438, abs=1e-6)


def test_non_positive_spot():
    with pytest.raises(NonPositiveSpot):
        spot_diameter(QrxOpticalConfig(d_L=1.0, d_X=1.0))


def test_design_lens_distance():
    assert design_lens_distance(7.1, 1.5, 6.3) == pytest.approx(0.8 / 1.5)


def test_spot_displacement():
    assert spot_displacement(0.55, math.radians(45)) == pytest.approx(0.55)


@pytest.mark.parametrize("deg", sorted(QUADRATURE))
def test_fractions_match_quadrature(optics, deg):
    fa, fb = QUADRATURE[deg]
    fr = quadrant_fractions(math.radians(deg), optics)
    assert fr.f_A == pytest.approx(fa, abs=1e-8)
    assert fr.f_B == pytest.approx(fb, abs=1e-8)
    assert fr.f_C == pytest.approx(fa, abs=1e-8)
    assert fr.f_D == pytest.approx(fb, abs=1e-8)
    assert f_qrx(math.radians(deg), optics) == pytest.approx(PHI_QUADRATURE[deg], abs=1e-8)


def test_fractions_match_monte_carlo(optics):
    rng = np.random.default_rng(0)
    n = 400_000
    R = optics.d_S / 2
    r = R * np.sqrt(rng.random(n))
    a = 2 * np.pi * rng.random(n)
    x = r * np.cos(a) + 0.55 * math.tan(math.radians(35))
    y = r * np.sin(a)
    h = optics.d_H / 2
    inq = (np.abs(x) <= h) & (np.abs(y) <= h)
    mc = [np.mean(inq & (x < 0) & (y > 0)), np.mean(inq & (x > 0) & (y > 0))]
    fr = quadrant_fraction_array(math.radians(35), optics)
    np.testing.assert_allclose(fr[:2], mc, atol=3e-3)


def test_centered_spot_splits_evenly(optics):
    np.testing.assert_allclose(quadrant_fraction_array(0.0, optics), [0.25] * 4, atol=1e-12)


def test_disk_rect_area_full_and_half():
    assert disk_rect_area(0, 0, 1.0, -2, 2, -2, 2) == pytest.approx(math.pi)
    assert disk_rect_area(0, 0, 1.0, 0, 2, -2, 2) == pytest.approx(math.pi / 2)
    assert disk_rect_area(5, 0, 1.0, -1, 1, -1, 1) == pytest.approx(0.0)


@given(st.floats(-1.45, 1.45))
def test_forward_map_is_odd(theta):
    cfg = QrxOpticalConfig()
    assert f_qrx(-theta, cfg) == -f_qrx(theta, cfg)


@given(st.floats(0.0, 1.39), st.floats(1e-4, 0.05))
def test_forward_map_increasing_inside_fov(theta, step):
    cfg = QrxOpticalConfig()
    hi = min(theta + step, cfg.theta_fov)
    if hi > theta:
        assert f_qrx(hi, cfg) > f_qrx(theta, cfg)


@given(st.floats(-1.5, 1.5))
def test_fractions_bounded(theta):
    fr = quadrant_fraction_array(theta, QrxOpticalConfig())
    assert np.all(fr >= 0) and fr.sum() <= 1 + 1e-12


def test_zero_illumination():
    with pytest.raises(ZeroIllumination):
        f_qrx(math.radians(89.5), QrxOpticalConfig())


def test_phi_from_powers():
    assert phi_from_powers([1, 3, 1, 3]) == pytest.approx(0.5)


def test_table_is_inverse(table, optics):
    th = np.radians(np.linspace(-75, 75, 301))
    np.testing.assert_allclose(table(f_qrx(th, optics)), th, atol=1e-5)
    assert table.phi_grid[0] == -1 and table.phi_grid[-1] == 1
    assert table.theta_fov == pytest.approx(optics.theta_fov)
    with pytest.raises(ValueError):
        table.phi_grid[0] = 0.0


def test_bijection_violated():
    cfg = QrxOpticalConfig(d_L=10.0)
    assert not cfg.bijective_by_design
    with pytest.raises(BijectionViolated):
        build_g_qrx(cfg)


def test_bijective_reference_design(optics):
    assert optics.bijective_by_design
    build_g_qrx(optics, 64)


def test_curve_marks_dead_zone(optics):
    theta, phi = fqrx_curve(optics)
    assert np.isnan(phi[0]) and np.isnan(phi[-1])
    assert np.nanmax(np.abs(phi)) <= 1.0


def test_gap_reduces_collected_power():
    fr = quadrant_fraction_array(0.2, QrxOpticalConfig(gap=0.2))
    assert fr.sum() < 1.0
