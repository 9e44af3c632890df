import logging
import math
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from simulation.antenna_channel.main import element_gain
from simulation.constellation.main import los_blocked
from simulation.errors import ConfigurationError, DomainError
from simulation.geometry.main import SPEED_OF_LIGHT, CanyonScenario, RisPanel, Vec3
from simulation.ris_control.main import PhaseConfig, path_terms, phase_sum

logger = logging.getLogger(__name__)


# --- dB bookkeeping ---

def to_db(value: float) -> float:
    """10 log10 of a positive linear ratio."""
    if value <= 0:
        raise DomainError(f"Cannot express nonpositive value {value} in dB")
    return 10.0 * math.log10(value)


def from_db(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


# --- Models ---

class LinkParams(BaseModel):
    """Downlink budget terms, all linear (W, ratios, m)."""
    model_config = ConfigDict(frozen=True)

    tx_power: float = Field(..., gt=0, description="Satellite transmit power P_t (W)")
    tx_gain: float = Field(..., gt=0, description="Satellite array gain G_t (linear)")
    rx_gain: float = Field(..., gt=0, description="User terminal array gain G_r (linear)")
    wavelength: float = Field(..., gt=0, description="Carrier wavelength (m)")
    noise_power: float = Field(..., gt=0, description="Receiver noise power sigma^2 (W)")
    atmospheric_loss: float = Field(1.0, gt=0, le=1, description="Atmospheric loss as a linear factor")
    element_dy: float = Field(..., gt=0, description="RIS element width d_y (m)")
    element_dz: float = Field(..., gt=0, description="RIS element height d_z (m)")
    tx_antennas: int = Field(288, ge=1, description="Satellite antenna count M_t")
    rx_antennas: int = Field(576, ge=1, description="User antenna count M_r")

    @classmethod
    def from_db(
        cls,
        tx_power_dbw: float = 15.0,
        tx_gain_db: float = 24.6,
        rx_gain_db: float = 27.6,
        noise_dbw: float = -120.5,
        atmospheric_loss_db: float = 0.0166,
        frequency_hz: float = 11.54e9,
        element_size: Optional[float] = None,
        tx_antennas: int = 12 * 24,
        rx_antennas: int = 24 * 24,
    ) -> "LinkParams":
        """
        Build parameters from the usual dB figures of a Ku-band LEO downlink.

        Args:
            element_size: RIS element pitch d_y = d_z (m). Defaults to lambda/2.
        """
        wavelength = SPEED_OF_LIGHT / frequency_hz
        size = element_size if element_size is not None else wavelength / 2.0
        return cls(
            tx_power=from_db(tx_power_dbw),
            tx_gain=from_db(tx_gain_db),
            rx_gain=from_db(rx_gain_db),
            wavelength=wavelength,
            noise_power=from_db(noise_dbw),
            atmospheric_loss=from_db(-atmospheric_loss_db),
            element_dy=size,
            element_dz=size,
            tx_antennas=tx_antennas,
            rx_antennas=rx_antennas,
        )


class LinkKind(str, Enum):
    RIS = "ris"
    RIS_TILTED = "ris_tilted"
    LOS = "los"


class SnrResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    snr_linear: float = Field(..., ge=0, description="Linear SNR, 0 when blocked")
    snr_db: float = Field(..., description="SNR in dB, -inf when blocked")
    link_kind: LinkKind
    blocked: bool = False

    @classmethod
    def from_linear(cls, snr_linear: float, link_kind: LinkKind) -> "SnrResult":
        snr_db = to_db(snr_linear) if snr_linear > 0 else -math.inf
        return cls(snr_linear=snr_linear, snr_db=snr_db, link_kind=link_kind)

    @classmethod
    def blocked_link(cls, link_kind: LinkKind) -> "SnrResult":
        return cls(snr_linear=0.0, snr_db=-math.inf, link_kind=link_kind, blocked=True)


# --- SNR ---

def coef(params: LinkParams, g_ris: float) -> float:
    """sqrt(P_t G_t G_r G_RIS d_y d_z L_atm) lambda / (4 pi)."""
    power = (params.tx_power * params.tx_gain * params.rx_gain * g_ris
             * params.element_dy * params.element_dz * params.atmospheric_loss)
    return math.sqrt(power) * params.wavelength / (4.0 * math.pi)


def _ris_snr(
    params: LinkParams,
    panel: RisPanel,
    sat: Vec3,
    user: Vec3,
    link_kind: LinkKind,
    sat_model: str,
    config: Optional[PhaseConfig],
) -> SnrResult:
    amp_u, amp_s, path_phase = path_terms(panel, user, sat, params.wavelength, sat_model)
    if not np.any(amp_s > 0.0) or not np.any(amp_u > 0.0):
        logger.debug(f"RIS link blocked: user {user} or satellite behind the panel")
        return SnrResult.blocked_link(link_kind)

    amplitude = phase_sum(amp_u * amp_s, path_phase, config)
    c = coef(params, element_gain(panel.radiation_exponent))
    snr = c * c * abs(amplitude) ** 2 / params.noise_power
    return SnrResult.from_linear(snr, link_kind)


def snr_ris(
    params: LinkParams,
    panel: RisPanel,
    sat: Vec3,
    user: Vec3,
    sat_model: str = "far_field",
    config: Optional[PhaseConfig] = None,
) -> SnrResult:
    """
    SNR of the SAT -> RIS -> user link with an untilted panel.

    Args:
        params: Link budget.
        panel: RIS panel; must not be tilted (use :func:`snr_ris_tilted`).
        sat: Satellite position.
        user: User position.
        sat_model: "far_field" or "exact" SAT-side geometry.
        config: Phase configuration; optimal phases when omitted.

    Returns:
        SnrResult; blocked when the satellite or every element path to the
        user lies behind the panel.
    """
    if panel.tilt_angle != 0.0:
        raise ConfigurationError("snr_ris expects an untilted panel; use snr_ris_tilted", key="panel.tilt_deg")
    return _ris_snr(params, panel, sat, user, LinkKind.RIS, sat_model, config)


def snr_ris_tilted(
    params: LinkParams,
    panel: RisPanel,
    sat: Vec3,
    user: Vec3,
    sat_model: str = "far_field",
    config: Optional[PhaseConfig] = None,
) -> SnrResult:
    """SNR of the RIS link for a down-tilted panel.

    Elements and boresight follow the tilt, so the SAT elevation seen by the
    panel becomes theta_1 + theta_0. A zero tilt gives the :func:`snr_ris` value.
    """
    return _ris_snr(params, panel, sat, user, LinkKind.RIS_TILTED, sat_model, config)


def snr_los(params: LinkParams, sat: Vec3, user: Vec3, canyon: CanyonScenario) -> SnrResult:
    """Direct-link SNR, blocked when the user-to-satellite ray hits a building."""
    if los_blocked(user, sat, canyon):
        return SnrResult.blocked_link(LinkKind.LOS)
    distance = (sat - user).norm()
    c = math.sqrt(params.tx_power * params.tx_gain * params.rx_gain * params.atmospheric_loss) \
        * params.wavelength / (4.0 * math.pi)
    return SnrResult.from_linear(c * c / (params.noise_power * distance ** 2), LinkKind.LOS)


def ris_snr_from_matrices(params: LinkParams, panel: RisPanel, amplitude: complex) -> float:
    """Linear SNR coef^2 |w^H H Omega G f|^2 / sigma^2 for a cascade amplitude."""
    c = coef(params, element_gain(panel.radiation_exponent))
    return c * c * abs(amplitude) ** 2 / params.noise_power
