import math

import numpy as np
import pytest

from simulation.antenna_channel.main import (
    assemble_channels,
    attenuation,
    cascade_amplitude,
    element_gain,
    element_gain_quadrature,
    farfield_steering,
    nearfield_steering,
    planar_array_offsets,
    radiation_profile,
    sat_side_terms,
)
from simulation.errors import DegenerateGeometryError, OracleScaleError
from simulation.geometry.main import Vec3, element_grid
from simulation.ris_control.main import cascade_sum, panel_optimal_phases

from conftest import WAVELENGTH, make_panel, sat_direction


# --- Radiation profile and gain ---

@pytest.mark.parametrize("cos_theta, b, expected", [
    (1.0, 0.0, 1.0),
    (1.0, 3.0, 1.0),
    (0.0, 2.0, 0.0),
    (0.5, 2.0, 0.25),
    (-0.3, 2.0, 0.0),
    (-0.3, 0.0, 0.0),
])
def test_radiation_profile(cos_theta, b, expected):
    assert radiation_profile(cos_theta, b) == pytest.approx(expected)


def test_radiation_profile_vectorised():
    np.testing.assert_allclose(radiation_profile(np.array([1.0, 0.5, -0.5]), 1.0), [1.0, 0.5, 0.0])


@pytest.mark.parametrize("b", [0.0, 0.5, 1.0, 2.0, 3.0, 5.0])
def test_element_gain_matches_quadrature(b):
    assert element_gain_quadrature(b) == pytest.approx(element_gain(b), rel=1e-6)


def test_default_element_gain():
    assert element_gain(2.0) == 6.0


# --- Steering vectors ---

def test_nearfield_steering_unit_modulus(small_panel):
    steering = nearfield_steering(element_grid(small_panel), Vec3(12.0, 3.0, 0.0), 2 * math.pi / WAVELENGTH)
    np.testing.assert_allclose(np.abs(steering), 1.0, atol=1e-12)


def test_nearfield_steering_on_element_rejected():
    with pytest.raises(DegenerateGeometryError):
        nearfield_steering(np.array([[0.0, 0.0, 1.0]]), Vec3(0.0, 0.0, 1.0), 1.0)


def test_farfield_steering_broadside():
    offsets = planar_array_offsets(12, WAVELENGTH / 2)
    steering = farfield_steering(offsets, Vec3(0.0, 0.0, 1.0), 2 * math.pi / WAVELENGTH)
    np.testing.assert_allclose(steering, np.ones(12), atol=1e-12)


def test_farfield_steering_two_elements_endfire():
    offsets = np.array([[0.0, -WAVELENGTH / 4, 0.0], [0.0, WAVELENGTH / 4, 0.0]])
    steering = farfield_steering(offsets, Vec3(0.0, 1.0, 0.0), 2 * math.pi / WAVELENGTH)
    np.testing.assert_allclose(steering, [np.exp(0.5j * math.pi), np.exp(-0.5j * math.pi)], atol=1e-12)


def test_farfield_steering_oblique():
    offsets = np.array([[0.0, 0.0, 0.0], [0.0, WAVELENGTH / 2, 0.0]])
    direction = Vec3(math.cos(math.radians(30.0)), math.sin(math.radians(30.0)), 0.0)
    steering = farfield_steering(offsets, direction, 2 * math.pi / WAVELENGTH)
    assert np.angle(steering[0] / steering[1]) == pytest.approx(math.pi * 0.5)


def test_planar_array_shape():
    offsets = planar_array_offsets(12 * 24, 0.01)
    assert offsets.shape == (288, 3)
    np.testing.assert_allclose(offsets.mean(axis=0), 0.0, atol=1e-12)


# --- Attenuation ---

def test_attenuation_zero_behind_panel(small_panel):
    amp = attenuation(element_grid(small_panel), Vec3(-5.0, 0.0, 0.0), small_panel.boresight, 2.0)
    np.testing.assert_array_equal(amp, 0.0)


def test_attenuation_scales_inversely_with_distance():
    elements = np.array([[0.0, 0.0, 1.0], [0.0, 0.5, 1.0]])
    target = Vec3(3.0, 1.0, 0.0)
    axis = Vec3(1.0, 0.0, 0.0)
    near = attenuation(elements, target, axis, 2.0)
    far = attenuation(2.0 * elements, target.scale(2.0), axis, 2.0)
    np.testing.assert_allclose(far, near / 2.0, rtol=1e-12)


def test_attenuation_boresight_value():
    amp = attenuation(np.array([[0.0, 0.0, 0.0]]), Vec3(4.0, 0.0, 0.0), Vec3(1.0, 0.0, 0.0), 2.0)
    assert amp[0] == pytest.approx(0.25)


def test_far_field_sat_terms_share_centre_values(small_panel):
    sat = sat_direction(45.0, 1.7e6, small_panel.center)
    amp, steer = sat_side_terms(small_panel, sat, 2 * math.pi / WAVELENGTH, "far_field")
    assert amp[0] == pytest.approx(math.sqrt(0.5) / 1.7e6)
    assert np.all(amp == amp[0])
    assert np.all(steer == steer[0])


def test_exact_sat_terms_close_to_far_field(small_panel):
    sat = sat_direction(45.0, 1.7e6, small_panel.center)
    k = 2 * math.pi / WAVELENGTH
    far, _ = sat_side_terms(small_panel, sat, k, "far_field")
    exact, _ = sat_side_terms(small_panel, sat, k, "exact")
    np.testing.assert_allclose(exact, far, rtol=1e-5)


def test_unknown_sat_model(small_panel):
    with pytest.raises(ValueError, match="Supported models"):
        sat_side_terms(small_panel, Vec3(1e6, 0.0, 1e6), 1.0, "ray_traced")


# --- Channel matrices ---

def test_single_element_channels():
    spacing = WAVELENGTH / 2
    panel = make_panel(length_y=spacing, length_z=spacing, height=30.0)
    user = Vec3(10.0, 2.0, 0.0)
    sat = sat_direction(50.0, 1.2e6, panel.center)
    channels = assemble_channels(panel, sat, user, WAVELENGTH, 1, 1)
    assert channels.H.shape == (1, 1)
    assert channels.G.shape == (1, 1)

    p_u = user - panel.center
    f_u = (p_u.x / p_u.norm()) ** 2
    assert abs(channels.H[0, 0]) == pytest.approx(math.sqrt(f_u) / p_u.norm(), rel=1e-12)
    f_1 = math.cos(math.radians(50.0)) ** 2
    assert abs(channels.G[0, 0]) == pytest.approx(math.sqrt(f_1) / 1.2e6, rel=1e-12)


def test_channels_are_rank_one():
    panel = make_panel(length_y=WAVELENGTH, length_z=WAVELENGTH, height=20.0)
    assert panel.element_count == 4
    channels = assemble_channels(panel, sat_direction(35.0, 9e5, panel.center), Vec3(7.0, -1.0, 0.0),
                                 WAVELENGTH, 2, 2)
    assert channels.H.shape == (2, 4)
    assert channels.G.shape == (4, 2)
    assert np.linalg.matrix_rank(channels.H) == 1
    assert np.linalg.matrix_rank(channels.G) == 1
    assert np.linalg.norm(channels.w) == pytest.approx(1.0)
    assert np.linalg.norm(channels.f) == pytest.approx(1.0)


def test_memory_guard(small_panel):
    with pytest.raises(OracleScaleError):
        assemble_channels(small_panel, sat_direction(45.0, 1e6, small_panel.center), Vec3(5.0, 0.0, 0.0),
                          WAVELENGTH, 4, 4, max_entries=100)


@pytest.mark.parametrize("sat_model", ["far_field", "exact"])
def test_matrix_cascade_equals_element_sum(sat_model):
    rng = np.random.default_rng(7)
    for _ in range(10):
        n_y, n_z = (int(v) for v in rng.integers(1, 9, size=2))
        antennas = int(rng.integers(1, 5))
        panel = make_panel(length_y=n_y * WAVELENGTH / 2, length_z=n_z * WAVELENGTH / 2,
                           height=float(rng.uniform(20.0, 80.0)))
        user = Vec3(float(rng.uniform(1.0, 50.0)), float(rng.uniform(-10.0, 10.0)), 0.0)
        sat = sat_direction(float(rng.uniform(10.0, 80.0)), float(rng.uniform(5e5, 2e6)), panel.center)

        channels = assemble_channels(panel, sat, user, WAVELENGTH, antennas, antennas, sat_model=sat_model)
        config = panel_optimal_phases(panel, user, sat, WAVELENGTH, sat_model)
        matrix = cascade_amplitude(channels, config.phases)
        closed = cascade_sum(panel, user, config, sat, WAVELENGTH, sat_model)
        assert abs(matrix) == pytest.approx(abs(closed), rel=1e-10)
