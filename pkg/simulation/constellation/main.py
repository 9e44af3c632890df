import argparse
import logging
import math
import sys
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from simulation.geometry.main import (
    EARTH_RADIUS_M,
    CanyonScenario,
    Vec3,
    central_angle_for_elevation,
    elevation_for_central_angle,
)

logger = logging.getLogger(__name__)


class ConstellationSpec(BaseModel):
    """One orbital plane of a LEO constellation: altitude and satellites per orbit."""
    model_config = ConfigDict(frozen=True)

    name: str = Field("custom", description="Preset name or 'custom'")
    altitude: float = Field(..., gt=0, description="Orbit altitude h (m)")
    sats_per_orbit: int = Field(..., ge=1, description="Satellites per orbit Q")
    earth_radius: float = Field(EARTH_RADIUS_M, gt=0, description="Earth radius R (m)")
    fitted: bool = Field(False, description="Parameters fitted to published blockage ratios, not published themselves")


# Built-in constellation shells, selectable by name
PRESETS: Dict[str, ConstellationSpec] = {
    "telesat-polar": ConstellationSpec(name="telesat-polar", altitude=1000e3, sats_per_orbit=13, fitted=True),
    "telesat-inclined": ConstellationSpec(name="telesat-inclined", altitude=1200e3, sats_per_orbit=12, fitted=True),
    "starlink-1-1": ConstellationSpec(name="starlink-1-1", altitude=550e3, sats_per_orbit=22),
    "starlink-1-2": ConstellationSpec(name="starlink-1-2", altitude=570e3, sats_per_orbit=20),
    "starlink-1-3": ConstellationSpec(name="starlink-1-3", altitude=560e3, sats_per_orbit=58),
}


def get_preset(name: str) -> ConstellationSpec:
    """
    Look up a built-in constellation preset.

    Args:
        name: Preset key, e.g. ``starlink-1-1``.

    Returns:
        The matching ConstellationSpec.
    """
    if name not in PRESETS:
        logger.error(f"Unsupported constellation preset: {name}")
        raise ValueError(f"Unsupported constellation preset: {name}. "
                         f"Supported presets: {', '.join(PRESETS.keys())}")
    return PRESETS[name]


class Regime(str, Enum):
    SINGLE_VISIBLE = "single_visible"
    PARTIAL_BLOCKAGE = "partial_blockage"
    ALWAYS_LOS = "always_los"


class QMin(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float = Field(..., gt=0, description="2 pi / beta_B")
    count: int = Field(..., description="Nearest integer, the reported Q_min")
    floor_count: int = Field(..., description="Largest Q whose blockage ratio stays positive")


class BlockageReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha_b: float = Field(..., description="Blockage-start elevation (rad)")
    beta_b: float = Field(..., description="Unblocked central angle (rad)")
    beta_max: float = Field(..., description="Coverage half-angle pi / Q (rad)")
    blockage_ratio: float = Field(..., ge=0, le=1)
    q_min: QMin
    q_th: int
    regime: Regime
    boundary: bool = Field(False, description="Q sits on a regime boundary")


# --- Visibility geometry ---

def coverage_half_angle(sats_per_orbit: int) -> float:
    """beta_max = pi / Q, half the orbit arc each satellite is responsible for."""
    if sats_per_orbit < 1:
        raise ValueError(f"Satellites per orbit must be at least 1, got {sats_per_orbit}")
    return math.pi / sats_per_orbit


def blockage_start_elevation(height: float, width: float) -> float:
    """Elevation alpha_B = atan(H/W) below which a user by the wall loses the LoS link."""
    if height <= 0 or width <= 0:
        raise ValueError(f"Canyon height and width must be positive, got H={height}, W={width}")
    return math.atan(height / width)


def unblocked_central_angle(alpha_b: float, altitude: float, earth_radius: float = EARTH_RADIUS_M) -> float:
    """Earth central angle between the zenith and the satellite seen at ``alpha_b``.

    beta_B = arccos(R/(R+h) cos(alpha_B)) - alpha_B.
    """
    if not 0.0 < alpha_b < math.pi / 2:
        raise ValueError(f"alpha_B must lie in (0, pi/2), got {alpha_b}")
    return central_angle_for_elevation(alpha_b, altitude, earth_radius)


def blockage_ratio(sats_per_orbit: int, beta_b: float) -> float:
    """T_B = 1 - beta_B / (2 beta_max), clamped to [0, 1]."""
    ratio = 1.0 - beta_b * sats_per_orbit / (2.0 * math.pi)
    return min(1.0, max(0.0, ratio))


def q_min(beta_b: float) -> QMin:
    """Satellites per orbit needed for an always-available LoS link, 2 pi / beta_B."""
    if beta_b <= 0:
        raise ValueError(f"beta_B must be positive, got {beta_b}")
    value = 2.0 * math.pi / beta_b
    return QMin(value=value, count=int(round(value)), floor_count=int(math.floor(value + 1e-12)))


def q_threshold(altitude: float, earth_radius: float = EARTH_RADIUS_M) -> int:
    """Largest Q with at most one satellite above the horizon: floor(2 pi / beta_Qth)."""
    if altitude <= 0:
        raise ValueError(f"Altitude must be positive, got {altitude}")
    beta_th = 2.0 * math.acos(earth_radius / (earth_radius + altitude))
    return int(math.floor(2.0 * math.pi / beta_th + 1e-12))


def classify_regime(spec: ConstellationSpec, canyon: CanyonScenario) -> Tuple[Regime, bool]:
    """
    Place a constellation/canyon pair in one of the three visibility regimes.

    Returns:
        (regime, boundary). ``boundary`` is True when Q equals Q_th or the
        floor of Q_min; such cases go to the smaller regime.
    """
    alpha_b = blockage_start_elevation(canyon.height, canyon.width)
    beta_b = unblocked_central_angle(alpha_b, spec.altitude, spec.earth_radius)
    q_lo = q_threshold(spec.altitude, spec.earth_radius)
    # Above floor(2 pi / beta_B) the blockage ratio clamps to 0
    q_hi = q_min(beta_b).floor_count
    q = spec.sats_per_orbit

    if q < q_lo:
        return Regime.SINGLE_VISIBLE, False
    if q == q_lo:
        logger.warning(f"Q={q} equals Q_th for {spec.name}; treating as {Regime.SINGLE_VISIBLE.value}")
        return Regime.SINGLE_VISIBLE, True
    if q < q_hi:
        return Regime.PARTIAL_BLOCKAGE, False
    if q == q_hi:
        logger.warning(f"Q={q} equals floor(Q_min) for {spec.name}; treating as {Regime.PARTIAL_BLOCKAGE.value}")
        return Regime.PARTIAL_BLOCKAGE, True
    return Regime.ALWAYS_LOS, False


def blockage_report(spec: ConstellationSpec, canyon: CanyonScenario) -> BlockageReport:
    alpha_b = blockage_start_elevation(canyon.height, canyon.width)
    beta_b = unblocked_central_angle(alpha_b, spec.altitude, spec.earth_radius)
    beta_max = coverage_half_angle(spec.sats_per_orbit)
    regime, boundary = classify_regime(spec, canyon)
    return BlockageReport(
        alpha_b=alpha_b,
        beta_b=beta_b,
        beta_max=beta_max,
        blockage_ratio=blockage_ratio(spec.sats_per_orbit, beta_b),
        q_min=q_min(beta_b),
        q_th=q_threshold(spec.altitude, spec.earth_radius),
        regime=regime,
        boundary=boundary,
    )


# --- Canyon shadow ---

def los_blocked(user: Vec3, sat: Vec3, canyon: CanyonScenario) -> bool:
    """
    Whether the user-to-satellite ray hits a building.

    Buildings are infinitely long along y and fill x <= 0 and x >= W up to
    height H. A satellite at or below the user's horizontal plane is blocked.
    """
    d = sat - user
    if d.z <= 0.0:
        return True
    if d.x > 0.0:
        t = (canyon.width - user.x) / d.x
    elif d.x < 0.0:
        t = (0.0 - user.x) / d.x
    else:
        return False
    if t < 0.0:
        return True
    return user.z + t * d.z < canyon.height


def companion_central_angle(elevation: float, spec: ConstellationSpec) -> float:
    """
    Central angle of the next satellite on the same orbit, 2 pi / Q behind the leading one.

    The leading satellite sits on the +x side. A positive result places the
    companion on the -x side; zero or negative means it has not yet crossed
    the zenith and trails on the +x side at central angle ``-result``.
    """
    beta_1 = central_angle_for_elevation(elevation, spec.altitude, spec.earth_radius)
    return 2.0 * math.pi / spec.sats_per_orbit - beta_1


def companion_elevation(elevation: float, spec: ConstellationSpec) -> float:
    """
    Elevation of the next satellite on the same orbit.

    Args:
        elevation: Elevation of the leading satellite (rad), which sits on the +x side.
        spec: Constellation.

    Returns:
        Elevation (rad) of the companion; nonpositive when it is below the
        horizon. Use :func:`companion_central_angle` for its side.
    """
    beta_2 = companion_central_angle(elevation, spec)
    return elevation_for_central_angle(beta_2, spec.altitude, spec.earth_radius)


# --- Table ---

DEFAULT_ASPECT_RATIOS = (1.4, 2.0, 2.4)


def blockage_table(
    specs: Sequence[ConstellationSpec],
    aspect_ratios: Sequence[float] = DEFAULT_ASPECT_RATIOS,
    width: float = 50.0,
) -> List[Dict]:
    """Blockage ratio, Q_min and Q_th for every (constellation, H/W) pair, row by row."""
    rows = []
    for spec in specs:
        for ratio in aspect_ratios:
            canyon = CanyonScenario(height=ratio * width, width=width, region_length=1.0)
            report = blockage_report(spec, canyon)
            rows.append({
                "constellation": spec.name,
                "altitude_km": spec.altitude / 1e3,
                "sats_per_orbit": spec.sats_per_orbit,
                "h_over_w": ratio,
                "blockage_ratio_pct": 100.0 * report.blockage_ratio,
                "q_min_value": report.q_min.value,
                "q_min": report.q_min.count,
                "q_min_floor": report.q_min.floor_count,
                "q_th": report.q_th,
                "fitted": spec.fitted,
            })
    return rows


def format_table(rows: List[Dict]) -> str:
    header = f"{'constellation':<18} {'h_km':>7} {'Q':>4} {'H/W':>5} {'T_B%':>6} {'Q_min':>6} {'floor':>6} {'Q_th':>5}"
    lines = [header, "-" * len(header)]
    for row in rows:
        mark = " *" if row["fitted"] else ""
        lines.append(
            f"{row['constellation']:<18} {row['altitude_km']:>7.0f} {row['sats_per_orbit']:>4d} "
            f"{row['h_over_w']:>5.1f} {row['blockage_ratio_pct']:>6.1f} {row['q_min']:>6d} "
            f"{row['q_min_floor']:>6d} {row['q_th']:>5d}{mark}"
        )
    if any(row["fitted"] for row in rows):
        lines.append("* fitted constellation parameters")
    return "\n".join(lines)


def main(argv: Optional[List[str]] = None) -> int:
    """Print the blockage report of one constellation and canyon."""
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    parser = argparse.ArgumentParser(description="Canyon blockage geometry of a LEO constellation")
    parser.add_argument("--preset", help=f"Constellation preset ({', '.join(PRESETS.keys())})")
    parser.add_argument("--altitude-km", type=float, help="Custom orbit altitude (km)")
    parser.add_argument("--sats-per-orbit", type=int, help="Custom satellites per orbit")
    parser.add_argument("--height", type=float, default=100.0, help="Building height H (m)")
    parser.add_argument("--width", type=float, default=50.0, help="Street width W (m)")
    args = parser.parse_args(argv)

    try:
        if args.preset:
            spec = get_preset(args.preset)
        elif args.altitude_km and args.sats_per_orbit:
            spec = ConstellationSpec(altitude=args.altitude_km * 1e3, sats_per_orbit=args.sats_per_orbit)
        else:
            parser.error("Give --preset or both --altitude-km and --sats-per-orbit")
        canyon = CanyonScenario(height=args.height, width=args.width, region_length=1.0)
        report = blockage_report(spec, canyon)

        print(f"Constellation:      {spec.name} (h={spec.altitude / 1e3:.0f} km, Q={spec.sats_per_orbit})")
        print(f"Canyon H/W:         {canyon.aspect_ratio:.3g}")
        print(f"alpha_B:            {math.degrees(report.alpha_b):.3f} deg")
        print(f"beta_B:             {report.beta_b:.6f} rad")
        print(f"beta_max:           {report.beta_max:.6f} rad")
        print(f"Blockage ratio:     {100.0 * report.blockage_ratio:.1f} %")
        print(f"Q_min:              {report.q_min.count} (value {report.q_min.value:.2f}, floor {report.q_min.floor_count})")
        print(f"Q_th:               {report.q_th}")
        print(f"Regime:             {report.regime.value}{' (boundary)' if report.boundary else ''}")
        return 0
    except Exception as e:
        logger.error(f"Blockage report failed: {str(e)}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
