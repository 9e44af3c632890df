from typing import Annotated, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator

# --- Run configuration sections ---


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CanyonConfig(Section):
    height: float = Field(100.0, gt=0, description="Building height H (m)")
    width: float = Field(50.0, gt=0, description="Street width W (m)")
    region_length: float = Field(100.0, gt=0, description="Studied street length L (m)")


class PanelConfig(Section):
    length_y: float = Field(5.0, gt=0, description="Panel width along the street (m)")
    length_z: float = Field(3.0, gt=0, description="Panel height (m)")
    element_spacing: Optional[float] = Field(None, gt=0, description="Element pitch (m); lambda/2 when unset")
    tilt_deg: float = Field(0.0, ge=0, lt=90, description="Down-tilt of the panel (deg)")
    radiation_exponent: float = Field(2.0, ge=0, description="Exponent b of the cos^b element profile")


class LinkConfig(Section):
    frequency_hz: float = Field(11.54e9, gt=0, description="Carrier frequency (Hz)")
    tx_power_dbw: float = Field(15.0, description="Satellite transmit power (dBW)")
    tx_gain_db: float = Field(24.6, description="Satellite array gain (dB)")
    rx_gain_db: float = Field(27.6, description="User terminal array gain (dB)")
    noise_dbw: float = Field(-120.5, description="Noise power (dBW)")
    atmospheric_loss_db: float = Field(0.0166, ge=0, description="Atmospheric loss (dB)")
    element_size: Optional[float] = Field(None, gt=0, description="RIS element size d_y = d_z (m); the spacing when unset")
    tx_antennas: int = Field(12 * 24, ge=1, description="Satellite antenna count")
    rx_antennas: int = Field(24 * 24, ge=1, description="User antenna count")


class ConstellationConfig(Section):
    preset: Optional[str] = Field(None, description="Built-in constellation name; overrides altitude and Q")
    altitude_km: float = Field(1300.0, gt=0, description="Orbit altitude (km)")
    sats_per_orbit: int = Field(20, ge=1, description="Satellites per orbit Q")
    earth_radius_km: float = Field(6371.0, gt=0, description="Earth radius (km)")


class GridConfig(Section):
    spacing: float = Field(1.0, gt=0, description="Cell size of coverage maps (m)")
    x_min: Optional[float] = Field(None, description="Lower x of the map (m); 0 when unset")
    x_max: Optional[float] = Field(None, description="Upper x of the map (m); W when unset")
    y_min: Optional[float] = Field(None, description="Lower y of the map (m); -L/2 when unset")
    y_max: Optional[float] = Field(None, description="Upper y of the map (m); L/2 when unset")
    link: Literal["ris", "los", "best"] = Field("ris", description="Link evaluated per cell")

    @field_validator("x_max", "y_max")
    @classmethod
    def check_extent(cls, value: Optional[float], info: ValidationInfo) -> Optional[float]:
        lower_name = info.field_name.replace("max", "min")
        lower = info.data.get(lower_name)
        if value is not None and lower is not None and value <= lower:
            raise ValueError(f"{info.field_name} must exceed {lower_name}")
        return value


ElevationDeg = Annotated[float, Field(gt=0, le=90)]


class UserPoint(Section):
    x: float = Field(..., description="Distance from the RIS building (m)")
    y: float = Field(0.0, description="Position along the street (m)")


class SweepConfig(Section):
    elevations_deg: List[ElevationDeg] = Field([30.0, 45.0, 60.0], min_length=1, description="Coverage elevations (deg)")
    tilt_elevation_deg: float = Field(45.0, gt=0, le=90, description="SAT elevation of the tilt sweep (deg)")
    tilt_min_deg: float = Field(0.0, ge=0, lt=90)
    tilt_max_deg: float = Field(60.0, ge=0, lt=90)
    tilt_step_deg: float = Field(1.0, gt=0)
    tilt_users: List[UserPoint] = Field(
        default_factory=lambda: [UserPoint(x=5.0), UserPoint(x=25.0), UserPoint(x=50.0)],
        description="Users of the tilt sweep",
    )
    double_ris_elevations_deg: List[ElevationDeg] = Field([35.0, 45.0, 55.0, 65.0], min_length=1)
    double_ris_user_step: float = Field(1.0, gt=0, description="Step of the user-building distance sweep (m)")
    trajectory_step_deg: float = Field(0.1, gt=0, description="Central-angle step of the trajectory sweep (deg)")
    trajectory_users: List[UserPoint] = Field(default_factory=lambda: [UserPoint(x=25.0)])
    trajectory_panels: Literal["none", "single", "double"] = Field("none", description="RIS links in the trajectory sweep")

    @field_validator("tilt_max_deg")
    @classmethod
    def check_tilt_range(cls, value: float, info: ValidationInfo) -> float:
        lower = info.data.get("tilt_min_deg")
        if lower is not None and value < lower:
            raise ValueError("tilt_max_deg must not be below tilt_min_deg")
        return value


class ModelConfig(Section):
    sat_model: Literal["far_field", "exact"] = Field("far_field", description="SAT-side channel model")
    approximate_panel_elevation: bool = Field(False, description="Use the street-centre elevation at each panel")


class OutputConfig(Section):
    directory: str = Field("results", description="Output directory")
    workers: int = Field(1, ge=1, description="Worker processes for grid and sweep evaluation")


class RunConfig(Section):
    canyon: CanyonConfig = Field(default_factory=CanyonConfig)
    panel: PanelConfig = Field(default_factory=PanelConfig)
    link: LinkConfig = Field(default_factory=LinkConfig)
    constellation: ConstellationConfig = Field(default_factory=ConstellationConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    seed: Optional[int] = Field(None, description="Reserved; runs are deterministic")
