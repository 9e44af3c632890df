import math

import pytest

from simulation.geometry.main import SPEED_OF_LIGHT, CanyonScenario, RisPanel, Vec3
from simulation.link_budget.main import LinkParams

WAVELENGTH = SPEED_OF_LIGHT / 11.54e9


@pytest.fixture
def wavelength():
    return WAVELENGTH


@pytest.fixture
def link_params():
    """Ku-band downlink defaults with lambda/2 elements."""
    return LinkParams.from_db()


@pytest.fixture
def deep_canyon():
    return CanyonScenario(height=100.0, width=50.0, region_length=100.0)


def make_panel(length_y=0.3, length_z=0.2, height=100.0, tilt=0.0, spacing=WAVELENGTH / 2, facing=1, x=0.0, b=2.0):
    return RisPanel(
        length_y=length_y,
        length_z=length_z,
        element_spacing=spacing,
        center=Vec3(x, 0.0, height),
        tilt_angle=tilt,
        radiation_exponent=b,
        facing=facing,
    )


@pytest.fixture
def small_panel():
    """A few hundred elements on the x = 0 wall at roof height."""
    return make_panel()


def sat_direction(elevation_deg: float, distance: float, origin: Vec3, side: int = 1) -> Vec3:
    a = math.radians(elevation_deg)
    return origin + Vec3(side * math.cos(a), 0.0, math.sin(a)).scale(distance)
