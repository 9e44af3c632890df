import math

import numpy as np
import pytest

from simulation.constellation.main import ConstellationSpec, blockage_report, get_preset
from simulation.errors import ConfigurationError
from simulation.geometry.main import CanyonScenario, Vec3, elevation_for_central_angle, sat_position
from simulation.link_budget.main import LinkKind, SnrResult, snr_ris_tilted
from simulation.scenario_engine.main import (
    best_link,
    build_double_ris,
    cell_centres,
    central_angle_samples,
    coverage_map,
    double_ris_evaluate,
    optimal_tilt,
    tilt_angles,
    trajectory_sweep,
)

from conftest import make_panel

DEEP_ALTITUDE = 1300e3


def result(snr_db, blocked=False):
    if blocked:
        return SnrResult.blocked_link(LinkKind.LOS)
    return SnrResult(snr_linear=10 ** (snr_db / 10), snr_db=snr_db, link_kind=LinkKind.LOS)


# --- Link selection ---

def test_best_link_prefers_higher_snr():
    assert best_link([("los", result(3.0)), ("ris", result(5.0))]) == "ris"


def test_best_link_first_wins_ties():
    assert best_link([("los", result(4.0)), ("ris", result(4.0))]) == "los"


def test_best_link_skips_blocked():
    assert best_link([("los", result(0.0, blocked=True)), ("ris", result(-20.0))]) == "ris"
    assert best_link([("los", result(0.0, blocked=True))]) is None


# --- Coverage map ---

def test_cell_centres():
    assert cell_centres(0.0, 50.0, 1.0).size == 50
    np.testing.assert_allclose(cell_centres(-50.0, 50.0, 1.0)[[0, -1]], [-49.5, 49.5])
    assert cell_centres(-50.0, 50.0, 1.0).size == 100


def test_cell_centres_rejects_zero_spacing():
    with pytest.raises(ConfigurationError) as info:
        cell_centres(0.0, 50.0, 0.0)
    assert info.value.key == "grid.spacing"


def test_empty_grid_rejected(link_params, small_panel, deep_canyon):
    with pytest.raises(ConfigurationError):
        coverage_map(link_params, small_panel, deep_canyon, math.radians(45.0), DEEP_ALTITUDE,
                     spacing=1.0, x_range=(0.0, 0.5))


def test_unknown_link_kind(link_params, small_panel, deep_canyon):
    with pytest.raises(ConfigurationError):
        coverage_map(link_params, small_panel, deep_canyon, math.radians(45.0), DEEP_ALTITUDE, link="relay")


def test_coverage_shape_and_order(link_params, small_panel, deep_canyon):
    grid = coverage_map(link_params, small_panel, deep_canyon, math.radians(45.0), DEEP_ALTITUDE, spacing=5.0)
    assert grid.shape == (20, 10)
    cells = list(grid.cells())
    assert len(cells) == 200
    assert cells[0][:2] == (2.5, -47.5)
    assert cells[1][:2] == (7.5, -47.5)
    assert not grid.blocked.any()
    assert grid.metadata["elevation_deg"] == pytest.approx(45.0)


def test_serial_and_parallel_maps_agree(link_params, small_panel, deep_canyon):
    kwargs = dict(spacing=10.0, y_range=(-20.0, 20.0))
    serial = coverage_map(link_params, small_panel, deep_canyon, math.radians(45.0), DEEP_ALTITUDE, **kwargs)
    parallel = coverage_map(link_params, small_panel, deep_canyon, math.radians(45.0), DEEP_ALTITUDE,
                            workers=2, **kwargs)
    np.testing.assert_array_equal(serial.snr_db, parallel.snr_db)
    np.testing.assert_array_equal(serial.blocked, parallel.blocked)


def test_cells_behind_the_panel_are_blocked(link_params, small_panel, deep_canyon):
    grid = coverage_map(link_params, small_panel, deep_canyon, math.radians(45.0), DEEP_ALTITUDE,
                        spacing=5.0, x_range=(-10.0, 50.0), y_range=(-10.0, 10.0))
    behind = grid.x < 0
    assert grid.blocked[:, behind].all()
    assert np.isnan(grid.snr_db[:, behind]).all()
    assert not grid.blocked[:, ~behind].any()


def test_coverage_is_symmetric_along_the_street(link_params, small_panel, deep_canyon):
    grid = coverage_map(link_params, small_panel, deep_canyon, math.radians(45.0), DEEP_ALTITUDE, spacing=5.0)
    np.testing.assert_allclose(grid.snr_db, grid.snr_db[::-1, :], rtol=1e-9)


def test_far_side_beats_near_side_in_a_deep_canyon(link_params, small_panel, deep_canyon):
    grid = coverage_map(link_params, small_panel, deep_canyon, math.radians(45.0), DEEP_ALTITUDE, spacing=5.0)
    assert np.all(grid.snr_db[:, -1] > grid.snr_db[:, 0])


def test_high_elevation_map_is_weaker(link_params, small_panel, deep_canyon):
    low = coverage_map(link_params, small_panel, deep_canyon, math.radians(45.0), DEEP_ALTITUDE, spacing=10.0)
    high = coverage_map(link_params, small_panel, deep_canyon, math.radians(80.0), DEEP_ALTITUDE, spacing=10.0)
    assert np.all(high.snr_db < low.snr_db)


def test_best_link_map_dominates_ris_map(link_params, small_panel, deep_canyon):
    ris = coverage_map(link_params, small_panel, deep_canyon, math.radians(70.0), DEEP_ALTITUDE, spacing=10.0)
    best = coverage_map(link_params, small_panel, deep_canyon, math.radians(70.0), DEEP_ALTITUDE, spacing=10.0,
                        link="best")
    assert np.all(best.snr_db >= ris.snr_db)


# --- Tilt ---

def test_tilt_angles_inclusive():
    angles = tilt_angles(0.0, math.radians(60.0), math.radians(1.0))
    assert angles.size == 61
    assert angles[-1] == pytest.approx(math.radians(60.0))


@pytest.mark.parametrize("bounds", [(0.0, math.radians(90.0)), (math.radians(10.0), math.radians(5.0))])
def test_tilt_angles_rejects_bad_range(bounds):
    with pytest.raises(ConfigurationError):
        tilt_angles(*bounds, math.radians(1.0))


def tilt_setup(x):
    panel = make_panel()
    sat = sat_position(math.radians(45.0), DEEP_ALTITUDE, ris_center=panel.center)
    return panel, sat, Vec3(x, 0.0, 0.0)


def test_single_point_tilt_range(link_params):
    panel, sat, user = tilt_setup(5.0)
    best = optimal_tilt(link_params, panel, sat, user, tilt_min=0.0, tilt_max=0.0)
    assert best.tilt == 0.0
    assert len(best.curve) == 1


def test_near_user_wants_more_tilt(link_params):
    near = optimal_tilt(link_params, *tilt_setup(5.0))
    far = optimal_tilt(link_params, *tilt_setup(50.0))
    assert near.tilt > 0.0
    assert near.tilt > far.tilt
    assert math.degrees(near.tilt) == pytest.approx(21.0, abs=3.0)


def test_optimum_dominates_the_curve(link_params):
    best = optimal_tilt(link_params, *tilt_setup(25.0))
    for _, point in best.curve:
        assert point.blocked or point.snr_db <= best.snr_db


def test_far_user_at_near_user_tilt_loses_little(link_params):
    near = optimal_tilt(link_params, *tilt_setup(5.0))
    panel, sat, far_user = tilt_setup(50.0)
    far = optimal_tilt(link_params, panel, sat, far_user)
    shared = snr_ris_tilted(link_params, panel.with_tilt(near.tilt), sat, far_user)
    assert far.snr_db - shared.snr_db < 5.0


# --- Double RIS ---

def test_double_ris_mirror_symmetry(link_params, deep_canyon):
    spec = get_preset("starlink-1-1")
    elevation1 = elevation_for_central_angle(math.pi / spec.sats_per_orbit, spec.altitude)
    scenario = build_double_ris(deep_canyon, make_panel(), spec, elevation1)
    assert scenario.elevation2 == pytest.approx(elevation1, abs=1e-12)

    left = double_ris_evaluate(scenario, Vec3(10.0, 3.0, 0.0), link_params)
    right = double_ris_evaluate(scenario, Vec3(40.0, 3.0, 0.0), link_params)
    assert left.links["ris1"].snr_db == pytest.approx(right.links["ris2"].snr_db, rel=1e-9)
    assert left.links["ris2"].snr_db == pytest.approx(right.links["ris1"].snr_db, rel=1e-9)
    assert left.links["los1"].blocked == right.links["los2"].blocked


def test_double_ris_covers_the_whole_street(link_params, deep_canyon):
    spec = ConstellationSpec(altitude=DEEP_ALTITUDE, sats_per_orbit=20)
    los1_blocked = False
    for deg in (35.0, 45.0, 55.0, 65.0):
        scenario = build_double_ris(deep_canyon, make_panel(), spec, math.radians(deg))
        assert scenario.sat2 is not None
        for x in range(1, 50, 8):
            outcome = double_ris_evaluate(scenario, Vec3(float(x), 0.0, 0.0), link_params)
            assert not (outcome.links["ris1"].blocked and outcome.links["ris2"].blocked)
            assert outcome.serving is not None
            los1_blocked |= outcome.links["los1"].blocked
    assert los1_blocked


def test_los1_blocked_past_the_shadow_edge(link_params, deep_canyon):
    spec = ConstellationSpec(altitude=DEEP_ALTITUDE, sats_per_orbit=20)
    scenario = build_double_ris(deep_canyon, make_panel(), spec, math.radians(65.0))
    assert not double_ris_evaluate(scenario, Vec3(2.0, 0.0, 0.0), link_params).links["los1"].blocked
    assert double_ris_evaluate(scenario, Vec3(5.0, 0.0, 0.0), link_params).links["los1"].blocked


def test_companion_trails_on_the_same_side_while_sat1_is_low(link_params, deep_canyon):
    spec = ConstellationSpec(altitude=DEEP_ALTITUDE, sats_per_orbit=20)
    scenario = build_double_ris(deep_canyon, make_panel(), spec, math.radians(15.0))
    assert scenario.side2 == 1
    assert scenario.elevation2 > math.radians(15.0)
    assert scenario.sat2.x > deep_canyon.width
    assert scenario.sat2.x < scenario.sat1.x
    for x in (5.0, 25.0, 45.0):
        assert double_ris_evaluate(scenario, Vec3(x, 0.0, 0.0), link_params).links["ris2"].blocked

    crossed = build_double_ris(deep_canyon, make_panel(), spec, math.radians(35.0))
    assert crossed.side2 == -1
    assert crossed.sat2.x < 0.0


def test_panel_elevation_approximation_moves_ris_satellites(deep_canyon):
    spec = ConstellationSpec(altitude=DEEP_ALTITUDE, sats_per_orbit=20)
    exact = build_double_ris(deep_canyon, make_panel(), spec, math.radians(50.0))
    approx = build_double_ris(deep_canyon, make_panel(), spec, math.radians(50.0), approximate_panel_elevation=True)
    assert exact.sat1_ris == exact.sat1
    assert approx.sat1_ris != approx.sat1
    assert approx.sat1 == exact.sat1


# --- Trajectory ---

def test_central_angle_samples_are_symmetric():
    betas = central_angle_samples(0.1, 0.01)
    assert betas.size == 20
    np.testing.assert_allclose(betas, -betas[::-1], atol=1e-15)


def test_empty_trajectory():
    spec = get_preset("starlink-1-1")
    street = CanyonScenario(height=70.0, width=50.0, region_length=100.0)
    sweep = trajectory_sweep(spec, street, [Vec3(25.0, 0.0, 0.0)], math.radians(0.1), half_range=0.0)
    assert sweep.samples == []
    assert sweep.blocked_fraction == {}


def test_trajectory_blocked_fraction_matches_blockage_ratio():
    spec = get_preset("starlink-1-1")
    street = CanyonScenario(height=70.0, width=50.0, region_length=100.0)
    sweep = trajectory_sweep(spec, street, [Vec3(25.0, 0.0, 0.0)], math.radians(0.02))
    expected = blockage_report(spec, street).blockage_ratio
    assert sweep.blocked_fraction[0] == pytest.approx(expected, abs=0.01)
    assert all(s.link in (None, "los") for s in sweep.samples)


def test_ris_panel_reduces_blockage(link_params):
    spec = get_preset("starlink-1-1")
    street = CanyonScenario(height=70.0, width=50.0, region_length=100.0)
    users = [Vec3(25.0, 0.0, 0.0)]
    step = math.radians(0.5)
    los_only = trajectory_sweep(spec, street, users, step, params=link_params)
    with_ris = trajectory_sweep(spec, street, users, step, params=link_params, panels=[make_panel(height=70.0)])
    assert with_ris.blocked_fraction[0] < los_only.blocked_fraction[0]
    assert any(s.link == "ris1" for s in with_ris.samples)


def test_panels_need_link_params():
    street = CanyonScenario(height=70.0, width=50.0, region_length=100.0)
    with pytest.raises(ConfigurationError):
        trajectory_sweep(get_preset("starlink-1-1"), street, [Vec3(25.0, 0.0, 0.0)], 0.01, panels=[make_panel()])
