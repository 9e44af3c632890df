import csv
import logging
import math
import os
from typing import Any, Dict, Iterable, List, Optional, Sequence

import yaml

from simulation.models import RunConfig
from simulation.scenario_engine.main import DOUBLE_RIS_LINKS, DoubleRisResult, SnrGrid, TrajectoryResult

logger = logging.getLogger(__name__)

COVERAGE_HEADER = ["x_m", "y_m", "snr_db", "blocked"]
TILT_HEADER = ["tilt_deg", "user_id", "x_m", "y_m", "snr_db", "blocked"]
DOUBLE_RIS_HEADER = ["sat1_elevation_deg", "user_x_m", "link", "snr_db", "blocked", "serving"]
BLOCKAGE_HEADER = ["constellation", "altitude_km", "sats_per_orbit", "h_over_w", "blockage_ratio_pct",
                   "q_min_value", "q_min", "q_min_floor", "q_th", "fitted"]
TRAJECTORY_HEADER = ["central_angle_deg", "user_id", "elevation_deg", "link", "snr_db", "blocked"]


def format_value(value: Any) -> str:
    """Decimal text for a CSV field; floats keep 9 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return ""
        return f"{value:.9g}"
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    """
    Write a header and rows as UTF-8 CSV with LF line endings.

    Returns:
        Number of data rows written.
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    count = 0
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return count


def coverage_filename(elevation_deg: float) -> str:
    return f"coverage_el{elevation_deg:g}.csv"


def write_coverage(grid: SnrGrid, path: str) -> int:
    return write_csv(path, COVERAGE_HEADER,
                     ((x, y, snr, blocked) for x, y, snr, blocked in grid.cells()))


def write_tilt_sweep(rows: List[Dict[str, Any]], path: str) -> int:
    return write_csv(path, TILT_HEADER, ([r[k] for k in TILT_HEADER] for r in rows))


def double_ris_rows(elevation_deg: float, user_x: float, result: DoubleRisResult) -> List[List[Any]]:
    rows = []
    for name in DOUBLE_RIS_LINKS:
        link = result.links[name]
        rows.append([elevation_deg, user_x, name, None if link.blocked else link.snr_db, link.blocked,
                     name == result.serving])
    return rows


def write_double_ris(rows: List[List[Any]], path: str) -> int:
    return write_csv(path, DOUBLE_RIS_HEADER, rows)


def write_blockage_table(rows: List[Dict[str, Any]], path: str) -> int:
    return write_csv(path, BLOCKAGE_HEADER, ([r[k] for k in BLOCKAGE_HEADER] for r in rows))


def write_trajectory(result: TrajectoryResult, path: str) -> int:
    return write_csv(path, TRAJECTORY_HEADER, (
        [math.degrees(s.central_angle), s.user_id, math.degrees(s.elevation), s.link,
         None if s.blocked else s.snr_db, s.blocked]
        for s in result.samples
    ))


def write_run_metadata(config: RunConfig, path: str, command: str,
                       derived: Optional[Dict[str, Any]] = None,
                       extra: Optional[Dict[str, Any]] = None) -> None:
    """Record the resolved configuration and derived quantities; no timestamps."""
    document = {
        "command": command,
        "config": config.model_dump(mode="json"),
        "derived": derived or {},
    }
    if extra:
        document.update(extra)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        yaml.safe_dump(document, f, sort_keys=False, default_flow_style=False)
    logger.info(f"Wrote run metadata to {path}")
