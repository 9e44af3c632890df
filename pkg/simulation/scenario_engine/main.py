import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from simulation.constellation.main import (
    ConstellationSpec,
    Regime,
    classify_regime,
    companion_central_angle,
    companion_elevation,
    coverage_half_angle,
    los_blocked,
)
from simulation.errors import ConfigurationError
from simulation.geometry.main import (
    EARTH_RADIUS_M,
    CanyonScenario,
    RisPanel,
    Vec3,
    elevation_angle,
    sat_from_central_angle,
    sat_position,
)
from simulation.link_budget.main import LinkParams, SnrResult, snr_los, snr_ris, snr_ris_tilted

logger = logging.getLogger(__name__)

LINK_KINDS = ("ris", "los", "best")

# Slack for floor() on extent/spacing so 100/1 counts as 100 cells
_CELL_EPS = 1e-9


def _parallel_map(fn: Callable, items: Sequence, workers: int) -> List:
    """Order-preserving map, in-process for one worker."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))


def ris_link(params: LinkParams, panel: RisPanel, sat: Vec3, user: Vec3,
             sat_model: str = "far_field") -> SnrResult:
    """RIS-link SNR, picking the tilted evaluation for a down-tilted panel."""
    if panel.tilt_angle == 0.0:
        return snr_ris(params, panel, sat, user, sat_model)
    return snr_ris_tilted(params, panel, sat, user, sat_model)


def best_link(results: Iterable[Tuple[str, SnrResult]]) -> Optional[str]:
    """Name of the highest-SNR unblocked link; earlier entries win ties."""
    serving = None
    best = -math.inf
    for name, result in results:
        if result.blocked or result.snr_linear <= 0.0:
            continue
        if result.snr_db > best:
            best = result.snr_db
            serving = name
    return serving


# --- Coverage map ---

@dataclass(frozen=True)
class SnrGrid:
    """SNR over a rectangle of ground cells at z = 0.

    ``snr_db`` has shape (ny, nx); blocked cells are NaN there and True in
    ``blocked``.
    """
    x: np.ndarray
    y: np.ndarray
    snr_db: np.ndarray
    blocked: np.ndarray
    spacing: float
    metadata: Dict = field(default_factory=dict)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.snr_db.shape

    def cells(self) -> Iterator[Tuple[float, float, Optional[float], bool]]:
        """(x, y, snr_db or None, blocked), y outer and x inner."""
        for j, y in enumerate(self.y):
            for i, x in enumerate(self.x):
                blocked = bool(self.blocked[j, i])
                yield float(x), float(y), None if blocked else float(self.snr_db[j, i]), blocked


def cell_centres(lower: float, upper: float, spacing: float) -> np.ndarray:
    if spacing <= 0:
        raise ConfigurationError(f"Grid spacing must be positive, got {spacing}", key="grid.spacing")
    count = int(math.floor((upper - lower) / spacing + _CELL_EPS))
    return lower + (np.arange(count, dtype=float) + 0.5) * spacing


def _evaluate_cell(params: LinkParams, panel: RisPanel, sat: Vec3, user: Vec3,
                   canyon: CanyonScenario, link: str, sat_model: str) -> SnrResult:
    if link == "los":
        return snr_los(params, sat, user, canyon)
    ris = ris_link(params, panel, sat, user, sat_model)
    if link == "ris":
        return ris
    los = snr_los(params, sat, user, canyon)
    serving = best_link([("los", los), ("ris", ris)])
    return ris if serving == "ris" else los


def _coverage_row(task) -> Tuple[np.ndarray, np.ndarray]:
    params, panel, sat, canyon, xs, y, link, sat_model = task
    snr = np.full(xs.shape[0], np.nan)
    blocked = np.zeros(xs.shape[0], dtype=bool)
    for i, x in enumerate(xs):
        result = _evaluate_cell(params, panel, sat, Vec3(float(x), float(y), 0.0), canyon, link, sat_model)
        if result.blocked or result.snr_linear <= 0.0:
            blocked[i] = True
        else:
            snr[i] = result.snr_db
    return snr, blocked


def coverage_map(
    params: LinkParams,
    panel: RisPanel,
    canyon: CanyonScenario,
    elevation: float,
    altitude: float,
    spacing: float = 1.0,
    x_range: Optional[Tuple[float, float]] = None,
    y_range: Optional[Tuple[float, float]] = None,
    link: str = "ris",
    sat_model: str = "far_field",
    workers: int = 1,
    earth_radius: float = EARTH_RADIUS_M,
) -> SnrGrid:
    """
    Evaluate the SNR on a grid of ground cells for one satellite elevation.

    Args:
        params: Link budget.
        panel: RIS panel on the x = 0 building.
        canyon: Street geometry.
        elevation: Satellite elevation seen from the panel centre (rad).
        altitude: Orbit altitude (m).
        spacing: Cell size (m).
        x_range: Cell extent across the street; defaults to [0, W].
        y_range: Cell extent along the street; defaults to [-L/2, L/2].
        link: "ris", "los" or "best" (the better of the two per cell).
        sat_model: SAT-side model for the RIS link.
        workers: Processes used for the rows; results do not depend on it.
        earth_radius: Earth radius (m).

    Returns:
        SnrGrid with one value per cell centre.
    """
    if link not in LINK_KINDS:
        raise ConfigurationError(f"Unsupported link kind: {link}. Supported kinds: {', '.join(LINK_KINDS)}",
                                 key="grid.link")
    x_lo, x_hi = x_range if x_range is not None else (0.0, canyon.width)
    y_lo, y_hi = y_range if y_range is not None else (-canyon.region_length / 2, canyon.region_length / 2)
    xs = cell_centres(x_lo, x_hi, spacing)
    ys = cell_centres(y_lo, y_hi, spacing)
    if xs.size == 0 or ys.size == 0:
        raise ConfigurationError(
            f"Grid over x=[{x_lo}, {x_hi}], y=[{y_lo}, {y_hi}] at spacing {spacing} has no cells",
            key="grid.spacing",
        )

    sat = sat_position(elevation, altitude, earth_radius, ris_center=panel.center, side=1)
    logger.info(f"Coverage map: {xs.size}x{ys.size} cells, elevation {math.degrees(elevation):.1f} deg, "
                f"{panel.element_count} elements, {workers} worker(s)")

    tasks = [(params, panel, sat, canyon, xs, float(y), link, sat_model) for y in ys]
    rows = _parallel_map(_coverage_row, tasks, workers)
    snr = np.vstack([row[0] for row in rows])
    blocked = np.vstack([row[1] for row in rows])

    logger.info(f"Coverage map done: {int(blocked.sum())} of {blocked.size} cells blocked")
    return SnrGrid(
        x=xs,
        y=ys,
        snr_db=snr,
        blocked=blocked,
        spacing=spacing,
        metadata={
            "elevation_deg": math.degrees(elevation),
            "tilt_deg": math.degrees(panel.tilt_angle),
            "link": link,
            "sat_model": sat_model,
        },
    )


# --- Tilt ---

@dataclass(frozen=True)
class TiltResult:
    tilt: float
    snr_db: float
    curve: List[Tuple[float, SnrResult]]


def tilt_angles(tilt_min: float, tilt_max: float, step: float) -> np.ndarray:
    """Inclusive grid tilt_min, tilt_min + step, ... <= tilt_max."""
    if step <= 0:
        raise ConfigurationError(f"Tilt step must be positive, got {step}", key="sweep.tilt_step_deg")
    if tilt_max < tilt_min:
        raise ConfigurationError(f"Empty tilt range [{tilt_min}, {tilt_max}]", key="sweep.tilt_max_deg")
    if tilt_min < 0 or tilt_max >= math.pi / 2:
        raise ConfigurationError(f"Tilt range must lie in [0, pi/2), got [{tilt_min}, {tilt_max}]",
                                 key="sweep.tilt_max_deg")
    count = int(math.floor((tilt_max - tilt_min) / step + _CELL_EPS)) + 1
    return tilt_min + np.arange(count, dtype=float) * step


def tilt_curve(params: LinkParams, panel: RisPanel, sat: Vec3, user: Vec3, tilts: Sequence[float],
               sat_model: str = "far_field") -> List[Tuple[float, SnrResult]]:
    return [(float(t), snr_ris_tilted(params, panel.with_tilt(float(t)), sat, user, sat_model)) for t in tilts]


def optimal_tilt(
    params: LinkParams,
    panel: RisPanel,
    sat: Vec3,
    user: Vec3,
    tilt_min: float = 0.0,
    tilt_max: float = math.radians(60.0),
    step: float = math.radians(1.0),
    sat_model: str = "far_field",
) -> TiltResult:
    """
    Grid search of the down-tilt maximising the RIS-link SNR of one user.

    Returns:
        TiltResult with the best tilt (smallest on ties), its SNR in dB and the
        full curve. A user blocked at every tilt gets the first tilt and -inf.
    """
    curve = tilt_curve(params, panel, sat, user, tilt_angles(tilt_min, tilt_max, step), sat_model)
    best_tilt, best_snr = curve[0][0], -math.inf
    for tilt, result in curve:
        if not result.blocked and result.snr_db > best_snr:
            best_tilt, best_snr = tilt, result.snr_db
    logger.debug(f"Optimal tilt for user {user}: {math.degrees(best_tilt):.1f} deg, {best_snr:.2f} dB")
    return TiltResult(tilt=best_tilt, snr_db=best_snr, curve=curve)


# --- Double RIS ---

DOUBLE_RIS_LINKS = ("los1", "los2", "ris1", "ris2")


@dataclass(frozen=True)
class DoubleRisScenario:
    """
    Two panels facing each other across the street and two satellites of one orbit.

    SAT1 is on the +x side and illuminates ``panel_left`` (x = 0, facing +x).
    SAT2 is normally on the -x side (``side2`` = -1) and illuminates
    ``panel_right`` (x = W, facing -x); while SAT1 is low it still trails on
    the +x side (``side2`` = 1), where the right panel cannot see it.
    ``sat2`` is None when the companion satellite is below the horizon.
    The ``*_ris`` positions are the ones used for the RIS links; they differ
    from the LoS positions only with the panel-elevation approximation.
    """
    canyon: CanyonScenario
    panel_left: RisPanel
    panel_right: RisPanel
    sat1: Vec3
    sat2: Optional[Vec3]
    sat1_ris: Vec3
    sat2_ris: Optional[Vec3]
    elevation1: float
    elevation2: float
    side2: int = -1


def build_double_ris(
    canyon: CanyonScenario,
    panel: RisPanel,
    spec: ConstellationSpec,
    elevation1: float,
    approximate_panel_elevation: bool = False,
) -> DoubleRisScenario:
    """
    Place both panels and both satellites for a SAT1 elevation.

    Args:
        canyon: Street geometry.
        panel: Template panel; its size, spacing, tilt and exponent are used for both.
        spec: Constellation; SAT2 trails SAT1 by 2 pi / Q.
        elevation1: SAT1 elevation seen from the street centre (rad).
        approximate_panel_elevation: Use the street-centre elevation also at
            each panel centre for the RIS links.
    """
    regime, _ = classify_regime(spec, canyon)
    if regime != Regime.PARTIAL_BLOCKAGE:
        logger.warning(f"Double RIS deployment studied in the {regime.value} regime")

    origin = Vec3(canyon.width / 2.0, 0.0, 0.0)
    left = panel.model_copy(update={"center": Vec3(0.0, 0.0, canyon.height), "facing": 1})
    right = panel.model_copy(update={"center": Vec3(canyon.width, 0.0, canyon.height), "facing": -1})

    elevation2 = companion_elevation(elevation1, spec)
    side2 = -1 if companion_central_angle(elevation1, spec) > 0 else 1
    if side2 == 1:
        logger.info(f"Companion satellite has not crossed the zenith, trailing on the +x side at "
                    f"{math.degrees(elevation2):.1f} deg")
    sat1 = sat_position(elevation1, spec.altitude, spec.earth_radius, ris_center=origin, side=1)
    sat2 = None
    if elevation2 > 0:
        sat2 = sat_position(min(elevation2, math.pi / 2), spec.altitude, spec.earth_radius,
                            ris_center=origin, side=side2)
    else:
        logger.warning(f"Companion satellite below the horizon ({math.degrees(elevation2):.1f} deg)")

    sat1_ris, sat2_ris = sat1, sat2
    if approximate_panel_elevation:
        sat1_ris = sat_position(elevation1, spec.altitude, spec.earth_radius, ris_center=left.center, side=1)
        if sat2 is not None:
            sat2_ris = sat_position(min(elevation2, math.pi / 2), spec.altitude, spec.earth_radius,
                                    ris_center=right.center, side=side2)

    return DoubleRisScenario(
        canyon=canyon,
        panel_left=left,
        panel_right=right,
        sat1=sat1,
        sat2=sat2,
        sat1_ris=sat1_ris,
        sat2_ris=sat2_ris,
        elevation1=elevation1,
        elevation2=elevation2,
        side2=side2,
    )


@dataclass(frozen=True)
class DoubleRisResult:
    links: Dict[str, SnrResult]
    serving: Optional[str]


def double_ris_evaluate(scenario: DoubleRisScenario, user: Vec3, params: LinkParams,
                        sat_model: str = "far_field") -> DoubleRisResult:
    """Evaluate both LoS links and both RIS links for one user and pick the serving link."""
    canyon = scenario.canyon
    links = {"los1": snr_los(params, scenario.sat1, user, canyon)}
    if scenario.sat2 is not None:
        links["los2"] = snr_los(params, scenario.sat2, user, canyon)
    else:
        links["los2"] = SnrResult.blocked_link(links["los1"].link_kind)
    links["ris1"] = ris_link(params, scenario.panel_left, scenario.sat1_ris, user, sat_model)
    if scenario.sat2_ris is not None:
        links["ris2"] = ris_link(params, scenario.panel_right, scenario.sat2_ris, user, sat_model)
    else:
        links["ris2"] = SnrResult.blocked_link(links["ris1"].link_kind)

    serving = best_link((name, links[name]) for name in DOUBLE_RIS_LINKS)
    return DoubleRisResult(links=links, serving=serving)


# --- Trajectory ---

@dataclass(frozen=True)
class TrajectorySample:
    central_angle: float
    user_id: int
    elevation: float
    link: Optional[str]
    snr_db: float
    blocked: bool


@dataclass(frozen=True)
class TrajectoryResult:
    samples: List[TrajectorySample]
    blocked_fraction: Dict[int, float]


def central_angle_samples(half_range: float, step: float) -> np.ndarray:
    """Midpoints of equal steps covering [-half_range, half_range]."""
    if step <= 0:
        raise ConfigurationError(f"Trajectory step must be positive, got {step}", key="sweep.trajectory_step_deg")
    count = int(round(2.0 * half_range / step))
    if count <= 0:
        return np.empty(0, dtype=float)
    width = 2.0 * half_range / count
    return -half_range + (np.arange(count, dtype=float) + 0.5) * width


def _trajectory_point(task) -> List[TrajectorySample]:
    beta, spec, canyon, users, params, panels, sat_model = task
    origin = Vec3(canyon.width / 2.0, 0.0, 0.0)
    sat = sat_from_central_angle(beta, spec.altitude, spec.earth_radius, origin)
    samples = []
    for user_id, user in enumerate(users):
        elevation = elevation_angle(user, sat)
        if elevation <= 0.0:
            samples.append(TrajectorySample(beta, user_id, elevation, None, -math.inf, True))
            continue
        links: List[Tuple[str, SnrResult]] = []
        if params is not None:
            links.append(("los", snr_los(params, sat, user, canyon)))
            for index, panel in enumerate(panels, start=1):
                links.append((f"ris{index}", ris_link(params, panel, sat, user, sat_model)))
            serving = best_link(links)
            snr_db = dict(links)[serving].snr_db if serving else -math.inf
        else:
            serving = None if los_blocked(user, sat, canyon) else "los"
            snr_db = math.nan
        samples.append(TrajectorySample(beta, user_id, elevation, serving, snr_db, serving is None))
    return samples


def trajectory_sweep(
    spec: ConstellationSpec,
    canyon: CanyonScenario,
    users: Sequence[Vec3],
    step: float,
    params: Optional[LinkParams] = None,
    panels: Sequence[RisPanel] = (),
    half_range: Optional[float] = None,
    sat_model: str = "far_field",
    workers: int = 1,
) -> TrajectoryResult:
    """
    Walk one satellite along its orbit arc and record, per user, the serving link.

    Args:
        spec: Constellation; the default arc is the satellite's own window
            [-pi/Q, pi/Q] of Earth central angle around the street zenith.
        canyon: Street geometry.
        users: Ground users.
        step: Central-angle step (rad).
        params: Link budget; without it only LoS visibility is evaluated.
        panels: RIS panels offering extra links (needs ``params``).
        half_range: Arc half-width (rad) instead of pi/Q.
        sat_model: SAT-side model for the RIS links.
        workers: Processes used for the samples.

    Returns:
        TrajectoryResult with samples ordered by angle then user and the
        blocked fraction of each user.
    """
    if panels and params is None:
        raise ConfigurationError("RIS links in a trajectory sweep need link parameters", key="link")
    if half_range is None:
        half_range = coverage_half_angle(spec.sats_per_orbit)
    betas = central_angle_samples(half_range, step)
    logger.info(f"Trajectory sweep: {betas.size} samples, {len(users)} user(s), {len(panels)} panel(s)")

    tasks = [(float(beta), spec, canyon, list(users), params, tuple(panels), sat_model) for beta in betas]
    samples = [s for point in _parallel_map(_trajectory_point, tasks, workers) for s in point]

    fractions = {}
    if betas.size:
        for user_id in range(len(users)):
            blocked = sum(1 for s in samples if s.user_id == user_id and s.blocked)
            fractions[user_id] = blocked / betas.size
    return TrajectoryResult(samples=samples, blocked_fraction=fractions)
