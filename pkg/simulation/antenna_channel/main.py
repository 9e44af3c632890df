import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import integrate

from simulation.errors import DegenerateGeometryError, OracleScaleError
from simulation.geometry.main import RisPanel, Vec3, boresight_cos, element_grid

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# Largest N * max(M_t, M_r) assemble_channels will build explicitly
DEFAULT_MAX_CHANNEL_ENTRIES = 2_000_000

SAT_MODELS = ("far_field", "exact")


# --- Element radiation ---

def radiation_profile(cos_theta, b: float):
    """
    cos^b profile of a single RIS element.

    Args:
        cos_theta: Signed cosine(s) of the angle from boresight.
        b: Profile exponent, b >= 0.

    Returns:
        cos^b for targets in front of the panel, 0 at grazing or behind it.
        Scalars in, scalar out; arrays in, arrays out.
    """
    cos_arr = np.asarray(cos_theta, dtype=float)
    front = cos_arr > 0.0
    gain = np.where(front, np.power(np.clip(cos_arr, 0.0, None), b), 0.0)
    if gain.ndim == 0:
        return float(gain)
    return gain


def element_gain(b: float) -> float:
    """Closed-form gain 4*pi / integral of cos^b over the front hemisphere, i.e. 2(b+1)."""
    return 2.0 * (b + 1.0)


def element_gain_quadrature(b: float, epsrel: float = 1e-10) -> float:
    """Same gain from numeric double integration of the profile (back hemisphere contributes 0)."""
    integral, abserr = integrate.dblquad(
        lambda theta, phi: radiation_profile(math.cos(theta), b) * math.sin(theta),
        0.0, TWO_PI,
        0.0, math.pi / 2,
        epsabs=0.0, epsrel=epsrel,
    )
    logger.debug(f"Element gain quadrature b={b}: integral={integral:.12g} (err {abserr:.2g})")
    return 4.0 * math.pi / integral


# --- Steering vectors and attenuation ---

def wrapped_phase(distances, k: float) -> np.ndarray:
    """k*d reduced to [0, 2*pi).

    Every path phase in the simulator goes through here so that closed-form and
    matrix evaluations see identical reduced phases.
    """
    phase = np.mod(k * np.asarray(distances, dtype=float), TWO_PI)
    return np.where(phase >= TWO_PI, 0.0, phase)


def element_distances(element_positions: np.ndarray, target: Vec3) -> np.ndarray:
    offsets = target.as_array() - np.atleast_2d(element_positions)
    distances = np.linalg.norm(offsets, axis=1)
    if np.any(distances == 0.0):
        raise DegenerateGeometryError(f"Target {target} coincides with an element position")
    return distances


def nearfield_steering(element_positions: np.ndarray, target: Vec3, k: float) -> np.ndarray:
    """Spherical-wave steering vector, entry n = exp(-j k |target - p_n|)."""
    return np.exp(-1j * wrapped_phase(element_distances(element_positions, target), k))


def attenuation(element_positions: np.ndarray, target: Vec3, axis: Vec3, b: float) -> np.ndarray:
    """Per-element amplitude sqrt(F_n) / |target - p_n|; zero for targets behind the panel."""
    offsets = target.as_array() - np.atleast_2d(element_positions)
    distances = np.linalg.norm(offsets, axis=1)
    if np.any(distances == 0.0):
        raise DegenerateGeometryError(f"Target {target} coincides with an element position")
    cosines = boresight_cos(offsets, axis)
    return np.sqrt(radiation_profile(cosines, b)) / distances


def planar_array_offsets(count: int, spacing: float, plane: str = "xy") -> np.ndarray:
    """
    Element offsets of a near-square planar array centred on its origin.

    Args:
        count: Number of elements M.
        spacing: Element pitch (m), normally lambda/2.
        plane: "xy" for a horizontal array (ground terminal, satellite),
            "yz" for a vertical one.

    Returns:
        (M, 3) array of offsets.
    """
    if count < 1:
        raise ValueError(f"Array needs at least one element, got {count}")
    rows = max(1, int(math.floor(math.sqrt(count))))
    while count % rows:
        rows -= 1
    cols = count // rows
    a = (np.arange(cols, dtype=float) - (cols - 1) / 2.0) * spacing
    c = (np.arange(rows, dtype=float) - (rows - 1) / 2.0) * spacing
    cc, aa = np.meshgrid(c, a, indexing="ij")
    offsets = np.zeros((count, 3), dtype=float)
    if plane == "xy":
        offsets[:, 0] = cc.ravel()
        offsets[:, 1] = aa.ravel()
    elif plane == "yz":
        offsets[:, 1] = aa.ravel()
        offsets[:, 2] = cc.ravel()
    else:
        raise ValueError(f"Unsupported array plane: {plane}. Supported planes: xy, yz")
    return offsets


def farfield_steering(array_offsets: np.ndarray, direction: Vec3, k: float) -> np.ndarray:
    """Plane-wave steering vector, entry m = exp(-j k <r_m, direction>)."""
    return np.exp(-1j * k * (np.atleast_2d(array_offsets) @ direction.as_array()))


# --- SAT side ---

def sat_side_terms(
    panel: RisPanel,
    sat: Vec3,
    k: float,
    sat_model: str = "far_field",
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Attenuation and steering entries of the SAT-RIS hop.

    With ``far_field`` every element uses the panel-centre elevation and the
    centre distance |p_1|; ``exact`` uses each element's own geometry.

    Returns:
        (attenuation, steering), both of length N.
    """
    elements = element_grid(panel)
    n = elements.shape[0]
    if sat_model == "far_field":
        p1 = sat - panel.center
        d1 = p1.norm()
        if d1 == 0.0:
            raise DegenerateGeometryError("Satellite coincides with the panel centre")
        cos1 = p1.dot(panel.boresight) / d1
        amp = math.sqrt(radiation_profile(cos1, panel.radiation_exponent)) / d1
        steer = np.exp(-1j * wrapped_phase(d1, k))
        return np.full(n, amp), np.full(n, steer, dtype=complex)
    if sat_model == "exact":
        return (attenuation(elements, sat, panel.boresight, panel.radiation_exponent),
                nearfield_steering(elements, sat, k))
    raise ValueError(f"Unsupported SAT model: {sat_model}. Supported models: {', '.join(SAT_MODELS)}")


# --- Explicit channel matrices (oracle path) ---

@dataclass(frozen=True)
class ChannelMatrices:
    """H (M_r x N), G (N x M_t) and the matched beamformers w, f (unit norm)."""
    H: np.ndarray
    G: np.ndarray
    w: np.ndarray
    f: np.ndarray


def assemble_channels(
    panel: RisPanel,
    sat: Vec3,
    user: Vec3,
    wavelength: float,
    tx_antennas: int,
    rx_antennas: int,
    sat_model: str = "far_field",
    max_entries: int = DEFAULT_MAX_CHANNEL_ENTRIES,
) -> ChannelMatrices:
    """
    Build the RIS-user channel H = c a^T A_u and the SAT-RIS channel G = A_s a_s b^H.

    The far-field steering vectors c and b are scaled to unit norm, and the
    beamformers are w = c, f = b. Array gain therefore lives only in G_t and G_r.

    Raises:
        OracleScaleError: N * max(M_t, M_r) above ``max_entries``.
    """
    n = panel.element_count
    entries = n * max(tx_antennas, rx_antennas)
    if entries > max_entries:
        raise OracleScaleError(
            f"Explicit channels need {entries} entries (cap {max_entries}); use the closed-form SNR at this scale"
        )

    k = TWO_PI / wavelength
    elements = element_grid(panel)
    half_wave = wavelength / 2.0

    a_u = nearfield_steering(elements, user, k)
    amp_u = attenuation(elements, user, panel.boresight, panel.radiation_exponent)
    user_dir = (panel.center - user).unit()
    c = farfield_steering(planar_array_offsets(rx_antennas, half_wave), user_dir, k)
    c = c / np.linalg.norm(c)
    H = np.outer(c, a_u * amp_u)

    amp_s, a_s = sat_side_terms(panel, sat, k, sat_model)
    sat_dir = (panel.center - sat).unit()
    b_vec = farfield_steering(planar_array_offsets(tx_antennas, half_wave), sat_dir, k)
    b_vec = b_vec / np.linalg.norm(b_vec)
    G = np.outer(amp_s * a_s, b_vec.conj())

    logger.debug(f"Assembled H {H.shape} and G {G.shape}")
    return ChannelMatrices(H=H, G=G, w=c, f=b_vec)


def cascade_amplitude(channels: ChannelMatrices, phases: np.ndarray) -> complex:
    """w^H H Omega G f for RIS phases ``phases``."""
    omega = np.exp(1j * np.asarray(phases, dtype=float))
    return complex(channels.w.conj() @ (channels.H * omega) @ channels.G @ channels.f)
