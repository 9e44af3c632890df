import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from simulation.antenna_channel.main import (
    TWO_PI,
    attenuation,
    sat_side_terms,
    wrapped_phase,
    element_distances,
)
from simulation.errors import ConfigurationError
from simulation.geometry.main import RisPanel, Vec3, element_grid

logger = logging.getLogger(__name__)

# Largest configuration count exhaustive_search will enumerate
MAX_SEARCH_CONFIGS = 1 << 20


@dataclass(frozen=True)
class PhaseConfig:
    """Phase shifts psi_n of the RIS elements, stored in [0, 2*pi).

    Ordering matches ``element_grid``.
    """
    phases: np.ndarray

    def __post_init__(self):
        canonical = np.mod(np.asarray(self.phases, dtype=float).ravel(), TWO_PI)
        canonical = np.where(canonical >= TWO_PI, 0.0, canonical)
        canonical.setflags(write=False)
        object.__setattr__(self, "phases", canonical)

    def __len__(self) -> int:
        return self.phases.shape[0]

    def shifted(self, offset: float) -> "PhaseConfig":
        return PhaseConfig(self.phases + offset)


# --- Phase settings ---

def optimal_phases(element_positions: np.ndarray, user: Vec3, sat_distance: float,
                   wavelength: float) -> PhaseConfig:
    """
    Closed-form optimal RIS phases under the far-field SAT hop.

    Args:
        element_positions: (N, 3) element centres.
        user: User position.
        sat_distance: Panel-centre to satellite distance |p_1| (m).
        wavelength: Carrier wavelength (m).

    Returns:
        psi_n = mod(k(|p_u,n| + |p_1|), 2*pi).
    """
    if wavelength <= 0:
        raise ValueError(f"Wavelength must be positive, got {wavelength}")
    k = TWO_PI / wavelength
    user_phase = wrapped_phase(element_distances(element_positions, user), k)
    return PhaseConfig(user_phase + wrapped_phase(sat_distance, k))


def optimal_phases_per_element(element_positions: np.ndarray, user: Vec3, sat: Vec3,
                               wavelength: float) -> PhaseConfig:
    """Optimal phases with each element's own SAT distance |p_SAT,n|."""
    if wavelength <= 0:
        raise ValueError(f"Wavelength must be positive, got {wavelength}")
    k = TWO_PI / wavelength
    user_phase = wrapped_phase(element_distances(element_positions, user), k)
    sat_phase = wrapped_phase(element_distances(element_positions, sat), k)
    return PhaseConfig(user_phase + sat_phase)


def panel_optimal_phases(panel: RisPanel, user: Vec3, sat: Vec3, wavelength: float,
                         sat_model: str = "far_field") -> PhaseConfig:
    elements = element_grid(panel)
    if sat_model == "exact":
        return optimal_phases_per_element(elements, user, sat, wavelength)
    return optimal_phases(elements, user, (sat - panel.center).norm(), wavelength)


def quantize_phases(config: PhaseConfig, bits: int) -> PhaseConfig:
    """Round every phase to the nearest of 2^bits uniform levels."""
    if bits < 1:
        raise ValueError(f"Quantisation needs at least 1 bit, got {bits}")
    levels = 1 << bits
    step = TWO_PI / levels
    index = np.mod(np.rint(config.phases / step), levels)
    return PhaseConfig(index * step)


# --- Coherent sums ---

def path_terms(panel: RisPanel, user: Vec3, sat: Vec3, wavelength: float, sat_model: str):
    """Per-element amplitudes and reduced path phases of the two-hop link."""
    k = TWO_PI / wavelength
    elements = element_grid(panel)
    amp_u = attenuation(elements, user, panel.boresight, panel.radiation_exponent)
    phase_u = wrapped_phase(element_distances(elements, user), k)
    amp_s, _ = sat_side_terms(panel, sat, k, sat_model)
    if sat_model == "exact":
        phase_s = wrapped_phase(element_distances(elements, sat), k)
    else:
        phase_s = wrapped_phase((sat - panel.center).norm(), k)
    path_phase = np.mod(phase_u + phase_s, TWO_PI)
    path_phase = np.where(path_phase >= TWO_PI, 0.0, path_phase)
    return amp_u, amp_s, path_phase


def _check_length(panel: RisPanel, config: PhaseConfig) -> None:
    if len(config) != panel.element_count:
        raise ConfigurationError(
            f"Phase configuration has {len(config)} entries, panel has {panel.element_count} elements"
        )


def coherent_amplitude(panel: RisPanel, user: Vec3, config: PhaseConfig, sat: Vec3,
                       wavelength: float) -> complex:
    """
    Sum over elements of sqrt(F_u,n)/|p_u,n| e^{j psi_n} e^{-jk(|p_u,n| + |p_1|)}.

    The SAT-side factor sqrt(F_1)/|p_1| is left out. Under optimal phases the
    result is real and nonnegative.

    Raises:
        ConfigurationError: ``config`` length differs from the element count.
    """
    _check_length(panel, config)
    amp_u, _, path_phase = path_terms(panel, user, sat, wavelength, "far_field")
    return complex(np.sum(amp_u * np.exp(1j * (config.phases - path_phase))))


def cascade_sum(panel: RisPanel, user: Vec3, config: PhaseConfig, sat: Vec3,
                wavelength: float, sat_model: str = "far_field") -> complex:
    """Full two-hop element sum, SAT-side attenuation included.

    With ``far_field`` this is sqrt(F_1)/|p_1| times :func:`coherent_amplitude`.
    """
    _check_length(panel, config)
    amp_u, amp_s, path_phase = path_terms(panel, user, sat, wavelength, sat_model)
    return phase_sum(amp_u * amp_s, path_phase, config)


def phase_sum(weights: np.ndarray, path_phase: np.ndarray, config: Optional[PhaseConfig] = None) -> complex:
    """
    sum_n w_n e^{j(psi_n - phi_n)} over precomputed element terms.

    Optimal phases cancel every path phase, so without ``config`` the sum is
    the real total of the weights.
    """
    if config is None:
        return complex(np.sum(weights))
    if len(config) != len(weights):
        raise ConfigurationError(
            f"Phase configuration has {len(config)} entries, panel has {len(weights)} elements"
        )
    return complex(np.sum(weights * np.exp(1j * (config.phases - path_phase))))


def exhaustive_search(amplitudes: np.ndarray, path_phases: np.ndarray, bits: int):
    """
    Best |sum a_n e^{j(psi_n - phi_n)}| over every configuration on a 2^bits grid.

    Args:
        amplitudes: Nonnegative per-element amplitudes a_n.
        path_phases: Path phases phi_n (rad).
        bits: Phase resolution.

    Returns:
        (best modulus, best PhaseConfig).
    """
    amplitudes = np.asarray(amplitudes, dtype=float)
    path_phases = np.asarray(path_phases, dtype=float)
    n = amplitudes.shape[0]
    levels = 1 << bits
    total = levels ** n
    if total > MAX_SEARCH_CONFIGS:
        raise ValueError(f"Exhaustive search over {total} configurations exceeds {MAX_SEARCH_CONFIGS}")

    grid = np.indices((levels,) * n).reshape(n, -1).T * (TWO_PI / levels)
    moduli = np.abs(np.exp(1j * (grid - path_phases)) @ amplitudes)
    best = int(np.argmax(moduli))
    logger.debug(f"Exhaustive search: {total} configurations, best modulus {moduli[best]:.6g}")
    return float(moduli[best]), PhaseConfig(grid[best])


def coherent_bound(amplitudes: np.ndarray) -> float:
    """Upper bound sum |a_n|, reached by the optimal phases."""
    return float(np.sum(np.abs(amplitudes)))


def quantisation_loss_db(bits: int) -> float:
    """Worst-case amplitude loss in dB of a b-bit grid, 20 log10 cos(pi / 2^bits)."""
    return -20.0 * math.log10(math.cos(math.pi / (1 << bits)))
