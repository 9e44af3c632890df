import copy
import logging
import math
import os
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv
from pydantic import ValidationError

from simulation.constellation.main import ConstellationSpec, get_preset
from simulation.errors import ConfigurationError
from simulation.geometry.main import (
    SPEED_OF_LIGHT,
    CanyonScenario,
    RisPanel,
    fraunhofer_distance,
    is_near_field,
    panel_aperture,
    slant_range,
)
from simulation.antenna_channel.main import element_gain
from simulation.link_budget.main import LinkParams
from simulation.models import RunConfig

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(__file__), "scenario.yaml")

# Environment variables and the config keys they override
ENV_OVERRIDES = {
    "RIS_SIM_WORKERS": ("output", "workers"),
    "RIS_SIM_OUTPUT_DIR": ("output", "directory"),
}


def load_env_vars(env_file_path: Optional[str] = None):
    """
    Load environment variables from a .env file.
    Prioritizes specified path, then current dir, then the project root.
    """
    loaded_path = None
    if env_file_path:
        if os.path.exists(env_file_path):
            load_dotenv(dotenv_path=env_file_path, override=False)
            loaded_path = env_file_path
        else:
            logger.warning(f"Specified --env-file not found: {env_file_path}")

    if not loaded_path:
        if load_dotenv(override=False):
            loaded_path = ".env (in current dir)"
        else:
            project_root_env = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '.env'))
            if os.path.exists(project_root_env) and load_dotenv(dotenv_path=project_root_env, override=False):
                loaded_path = project_root_env

    if loaded_path:
        logger.info(f"Loaded environment variables from: {loaded_path}")
    else:
        logger.debug("No .env file found or loaded")


def load_yaml(path: str) -> Dict[str, Any]:
    """
    Read a YAML mapping.

    Raises:
        ConfigurationError: the file does not hold a mapping or is not valid YAML.
        OSError: the file cannot be read.
    """
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML in {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"Configuration {path} must be a mapping, got {type(data).__name__}")
    logger.info(f"Loaded configuration from {path}")
    return data


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Merge ``override`` into a copy of ``base``; nested mappings merge key by key."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def env_overrides() -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    for variable, (section, key) in ENV_OVERRIDES.items():
        value = os.getenv(variable)
        if value:
            overrides.setdefault(section, {})[key] = value
            logger.info(f"Using {variable}={value} for {section}.{key}")
    return overrides


def validate_config(data: Dict[str, Any]) -> RunConfig:
    """Validate a raw mapping, naming the first offending key on failure."""
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        error = e.errors()[0]
        key = ".".join(str(part) for part in error["loc"])
        raise ConfigurationError(f"{key}: {error['msg']}", key=key) from e


def load_run_config(
    config_path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
    use_env: bool = True,
) -> RunConfig:
    """
    Resolve the run configuration.

    Precedence, lowest first: packaged defaults, ``config_path``, environment,
    ``overrides`` (CLI flags).
    """
    data = load_yaml(DEFAULT_CONFIG_PATH)
    if config_path:
        data = deep_merge(data, load_yaml(config_path))
    if use_env:
        data = deep_merge(data, env_overrides())
    if overrides:
        data = deep_merge(data, overrides)
    return validate_config(data)


# --- Domain objects from the configuration ---

def wavelength(config: RunConfig) -> float:
    return SPEED_OF_LIGHT / config.link.frequency_hz


def build_canyon(config: RunConfig) -> CanyonScenario:
    c = config.canyon
    return CanyonScenario(height=c.height, width=c.width, region_length=c.region_length)


def build_panel(config: RunConfig) -> RisPanel:
    """Panel on the x = 0 building, centred at the roof line (0, 0, H)."""
    p = config.panel
    spacing = p.element_spacing if p.element_spacing is not None else wavelength(config) / 2.0
    panel = RisPanel(
        length_y=p.length_y,
        length_z=p.length_z,
        element_spacing=spacing,
        center=build_canyon(config).ris_center,
        tilt_angle=math.radians(p.tilt_deg),
        radiation_exponent=p.radiation_exponent,
    )
    if panel.element_count == 0:
        raise ConfigurationError(
            f"Panel {p.length_y} m x {p.length_z} m holds no element at spacing {spacing} m",
            key="panel.element_spacing",
        )
    return panel


def build_link_params(config: RunConfig) -> LinkParams:
    link = config.link
    element_size = link.element_size
    if element_size is None:
        element_size = config.panel.element_spacing
    return LinkParams.from_db(
        tx_power_dbw=link.tx_power_dbw,
        tx_gain_db=link.tx_gain_db,
        rx_gain_db=link.rx_gain_db,
        noise_dbw=link.noise_dbw,
        atmospheric_loss_db=link.atmospheric_loss_db,
        frequency_hz=link.frequency_hz,
        element_size=element_size,
        tx_antennas=link.tx_antennas,
        rx_antennas=link.rx_antennas,
    )


def resolve_constellation(config: RunConfig) -> ConstellationSpec:
    c = config.constellation
    if c.preset:
        try:
            spec = get_preset(c.preset)
        except ValueError as e:
            raise ConfigurationError(str(e), key="constellation.preset") from e
        return spec.model_copy(update={"earth_radius": c.earth_radius_km * 1e3})
    return ConstellationSpec(
        altitude=c.altitude_km * 1e3,
        sats_per_orbit=c.sats_per_orbit,
        earth_radius=c.earth_radius_km * 1e3,
    )


def derived_quantities(config: RunConfig) -> Dict[str, Any]:
    """Quantities computed from the configuration, recorded next to every output."""
    lam = wavelength(config)
    panel = build_panel(config)
    spec = resolve_constellation(config)
    n_y, n_z = panel.counts
    aperture = panel_aperture(panel)
    zenith_range = slant_range(math.pi / 2, spec.altitude, spec.earth_radius)
    return {
        "wavelength_m": lam,
        "element_spacing_m": panel.element_spacing,
        "elements_y": n_y,
        "elements_z": n_z,
        "element_count": panel.element_count,
        "element_gain": element_gain(panel.radiation_exponent),
        "fraunhofer_distance_m": fraunhofer_distance(aperture, lam),
        "satellite_in_near_field": is_near_field(zenith_range, panel, lam),
        "constellation": spec.name,
        "altitude_km": spec.altitude / 1e3,
        "sats_per_orbit": spec.sats_per_orbit,
    }
