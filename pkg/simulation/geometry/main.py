import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from simulation.errors import BelowHorizonError, DegenerateGeometryError, InvalidPanelError

logger = logging.getLogger(__name__)

EARTH_RADIUS_M = 6_371e3
SPEED_OF_LIGHT = 299_792_458.0

# Slack for floor() on length/spacing so 0.3/0.1 counts as 3 elements
_COUNT_EPS = 1e-9


# --- Domain Types ---

@dataclass(frozen=True)
class Vec3:
    """Point or direction in the local canyon frame (meters).

    x runs across the street, y along it, z up. The RIS foot is the origin.
    """
    x: float
    y: float
    z: float

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scale(self, factor: float) -> "Vec3":
        return Vec3(self.x * factor, self.y * factor, self.z * factor)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def unit(self) -> "Vec3":
        length = self.norm()
        if length == 0.0:
            raise DegenerateGeometryError("Cannot normalise a zero-length vector")
        return self.scale(1.0 / length)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


ORIGIN = Vec3(0.0, 0.0, 0.0)


class RisPanel(BaseModel):
    """A rectangular RIS mounted on a building face.

    ``facing`` is +1 for a panel on the x=0 building looking across the street
    towards +x, and -1 for a panel on the opposite building looking back.
    """
    model_config = ConfigDict(frozen=True)

    length_y: float = Field(..., gt=0, description="Panel extent along the street (m)")
    length_z: float = Field(..., gt=0, description="Panel extent vertically, before tilt (m)")
    element_spacing: float = Field(..., description="Element pitch in y and z (m), usually lambda/2")
    center: Vec3 = Field(..., description="Panel centre in the canyon frame")
    tilt_angle: float = Field(0.0, ge=0, lt=math.pi / 2, description="Down-tilt theta0 (rad)")
    radiation_exponent: float = Field(2.0, ge=0, description="Exponent b of the cos^b element profile")
    facing: int = Field(1, description="+1 faces +x, -1 faces -x")

    @property
    def counts(self) -> tuple:
        """(N_y, N_z) element counts; zero when the spacing does not fit."""
        if self.element_spacing <= 0:
            return 0, 0
        n_y = math.floor(self.length_y / self.element_spacing + _COUNT_EPS)
        n_z = math.floor(self.length_z / self.element_spacing + _COUNT_EPS)
        return n_y, n_z

    @property
    def element_count(self) -> int:
        n_y, n_z = self.counts
        return n_y * n_z

    @property
    def boresight(self) -> Vec3:
        """Unit normal of the (possibly tilted) panel, pointing into the street."""
        return Vec3(
            self.facing * math.cos(self.tilt_angle),
            0.0,
            -math.sin(self.tilt_angle),
        )

    def with_tilt(self, tilt_angle: float) -> "RisPanel":
        return self.model_copy(update={"tilt_angle": tilt_angle})


class CanyonScenario(BaseModel):
    """Street of width W between two buildings of height H, studied over length L.

    The RIS building occupies x <= 0 and the opposite one x >= W. Users sit at z = 0.
    """
    model_config = ConfigDict(frozen=True)

    height: float = Field(..., gt=0, description="Building height H (m), also the RIS height")
    width: float = Field(..., gt=0, description="Street width W (m)")
    region_length: float = Field(..., gt=0, description="Length L of the studied street segment (m)")

    @property
    def aspect_ratio(self) -> float:
        return self.height / self.width

    @property
    def ris_center(self) -> Vec3:
        return Vec3(0.0, 0.0, self.height)


# --- Element grid and tilt ---

def tilt_transform(p_local: Vec3, tilt_angle: float, height: float) -> Vec3:
    """Map an element offset (0, y_n, z_n) to its position after down-tilting.

    The panel turns about its horizontal centre line at height ``height``:
    (0, y, z) -> (z sin(theta0), y, z cos(theta0) + H).
    """
    return Vec3(
        p_local.z * math.sin(tilt_angle),
        p_local.y,
        p_local.z * math.cos(tilt_angle) + height,
    )


def _lattice_offsets(n: int, spacing: float) -> np.ndarray:
    return (np.arange(n, dtype=float) - (n - 1) / 2.0) * spacing


@lru_cache(maxsize=16)
def element_grid(panel: RisPanel) -> np.ndarray:
    """
    Element centres of a RIS panel.

    Args:
        panel: The panel. Its tilt and facing are applied.

    Returns:
        Read-only array of shape (N, 3); row n is the position p_n. Ordering is
        row-major with y varying fastest, so phase vectors line up run to run.

    Raises:
        InvalidPanelError: non-positive spacing or a panel smaller than one element.
    """
    if panel.element_spacing <= 0:
        raise InvalidPanelError(f"Element spacing must be positive, got {panel.element_spacing}")
    n_y, n_z = panel.counts
    if n_y < 1 or n_z < 1:
        raise InvalidPanelError(
            f"Panel {panel.length_y} m x {panel.length_z} m holds no element at spacing {panel.element_spacing} m"
        )

    y_offsets = _lattice_offsets(n_y, panel.element_spacing)
    z_offsets = _lattice_offsets(n_z, panel.element_spacing)
    zz, yy = np.meshgrid(z_offsets, y_offsets, indexing="ij")
    yy = yy.ravel()
    zz = zz.ravel()

    sin_t = math.sin(panel.tilt_angle)
    cos_t = math.cos(panel.tilt_angle)
    positions = np.empty((n_y * n_z, 3), dtype=float)
    positions[:, 0] = panel.center.x + panel.facing * zz * sin_t
    positions[:, 1] = panel.center.y + yy
    positions[:, 2] = panel.center.z + zz * cos_t
    positions.setflags(write=False)

    logger.debug(f"Built element grid {n_y}x{n_z} (tilt {math.degrees(panel.tilt_angle):.2f} deg)")
    return positions


# --- Angles ---

def elevation_cos(p: Vec3, axis: Vec3) -> float:
    """Absolute cosine of the angle between ``p`` and the unit ``axis``."""
    length = p.norm()
    if length == 0.0:
        raise DegenerateGeometryError("Elevation of a zero-length vector is undefined")
    return abs(p.dot(axis)) / length


def boresight_cos(vectors: np.ndarray, axis: Vec3) -> np.ndarray:
    """Signed cosines between each row of ``vectors`` and ``axis``.

    Negative values mean the target is behind the panel plane.
    """
    vectors = np.atleast_2d(vectors)
    lengths = np.linalg.norm(vectors, axis=1)
    if np.any(lengths == 0.0):
        raise DegenerateGeometryError("Target coincides with an element position")
    return (vectors @ axis.as_array()) / lengths


def elevation_angle(origin: Vec3, target: Vec3) -> float:
    """Angle of ``target`` above the horizontal plane through ``origin`` (rad)."""
    d = target - origin
    horizontal = math.hypot(d.x, d.y)
    if horizontal == 0.0 and d.z == 0.0:
        raise DegenerateGeometryError("Elevation between coincident points is undefined")
    return math.atan2(d.z, horizontal)


# --- Near/far field ---

def fraunhofer_distance(aperture: float, wavelength: float) -> float:
    """2 D^2 / lambda."""
    return 2.0 * aperture ** 2 / wavelength


def panel_aperture(panel: RisPanel) -> float:
    """Largest dimension of the panel, its diagonal."""
    return math.hypot(panel.length_y, panel.length_z)


def is_near_field(distance: float, panel: RisPanel, wavelength: float) -> bool:
    return distance < fraunhofer_distance(panel_aperture(panel), wavelength)


# --- Satellite placement ---

def slant_range(elevation: float, altitude: float, earth_radius: float = EARTH_RADIUS_M) -> float:
    """Ground-to-satellite distance at ``elevation`` on a spherical Earth."""
    r_orbit = earth_radius + altitude
    return (math.sqrt(r_orbit ** 2 - (earth_radius * math.cos(elevation)) ** 2)
            - earth_radius * math.sin(elevation))


def sat_position(
    elevation: float,
    altitude: float,
    earth_radius: float = EARTH_RADIUS_M,
    ris_center: Vec3 = ORIGIN,
    side: int = 1,
) -> Vec3:
    """
    Place a satellite in the x-z plane at a given elevation seen from ``ris_center``.

    Args:
        elevation: Elevation angle alpha in (0, pi/2] (rad).
        altitude: Orbit altitude h (m).
        earth_radius: Earth radius R (m).
        ris_center: Reference point the elevation is measured from.
        side: +1 puts the satellite towards +x, -1 towards -x.

    Returns:
        Satellite position ``ris_center + d (side*cos(alpha), 0, sin(alpha))``.
    """
    if elevation <= 0:
        raise BelowHorizonError(f"Satellite elevation {elevation} rad is at or below the horizon")
    if elevation > math.pi / 2:
        raise ValueError(f"Elevation must not exceed pi/2, got {elevation}")
    d = slant_range(elevation, altitude, earth_radius)
    direction = Vec3(side * math.cos(elevation), 0.0, math.sin(elevation))
    return ris_center + direction.scale(d)


def central_angle_for_elevation(elevation: float, altitude: float,
                                earth_radius: float = EARTH_RADIUS_M) -> float:
    """Earth central angle between the observer and a satellite seen at ``elevation``."""
    ratio = earth_radius / (earth_radius + altitude)
    return math.acos(ratio * math.cos(elevation)) - elevation


def elevation_for_central_angle(central_angle: float, altitude: float,
                                earth_radius: float = EARTH_RADIUS_M) -> float:
    """Inverse of :func:`central_angle_for_elevation`; negative below the horizon."""
    ratio = earth_radius / (earth_radius + altitude)
    return math.atan2(math.cos(central_angle) - ratio, math.sin(abs(central_angle)))


def sat_from_central_angle(
    central_angle: float,
    altitude: float,
    earth_radius: float = EARTH_RADIUS_M,
    origin: Vec3 = ORIGIN,
) -> Vec3:
    """Satellite on a circular orbit in the x-z plane, ``central_angle`` from the zenith of ``origin``.

    Positive angles lie towards +x.
    """
    r_orbit = earth_radius + altitude
    return origin + Vec3(
        r_orbit * math.sin(central_angle),
        0.0,
        r_orbit * math.cos(central_angle) - earth_radius,
    )
