import argparse
import logging
import math
import os
import sys
from typing import Any, Callable, Dict, List, Optional

# Allow `python simulation/main.py` from the repository root
if __package__ in (None, ""):
    sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from simulation.config import (
    build_canyon,
    build_link_params,
    build_panel,
    derived_quantities,
    load_env_vars,
    load_run_config,
    resolve_constellation,
)
from simulation.constellation.main import PRESETS, blockage_report, blockage_table, format_table
from simulation.errors import ConfigurationError, SimulationError
from simulation.geometry.main import Vec3, sat_position
from simulation.models import RunConfig
from simulation.reports.main import (
    coverage_filename,
    double_ris_rows,
    write_blockage_table,
    write_coverage,
    write_double_ris,
    write_run_metadata,
    write_tilt_sweep,
    write_trajectory,
)
from simulation.scenario_engine.main import (
    build_double_ris,
    coverage_map,
    double_ris_evaluate,
    optimal_tilt,
    trajectory_sweep,
)
from simulation.validate.main import format_report, run_validation

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_VALIDATION = 3

METADATA_FILE = "run_config.yaml"


def _out(config: RunConfig, name: str) -> str:
    return os.path.join(config.output.directory, name)


def _grid_ranges(config: RunConfig):
    canyon = config.canyon
    g = config.grid
    x_range = (g.x_min if g.x_min is not None else 0.0,
               g.x_max if g.x_max is not None else canyon.width)
    y_range = (g.y_min if g.y_min is not None else -canyon.region_length / 2,
               g.y_max if g.y_max is not None else canyon.region_length / 2)
    return x_range, y_range


def street_positions(width: float, step: float) -> List[float]:
    """User-building distances step, 2 step, ... strictly inside (0, W)."""
    count = int(math.ceil(width / step - 1e-9)) - 1
    return [float(i * step) for i in range(1, count + 1)]


# --- Commands ---

def cmd_coverage(config: RunConfig) -> int:
    params = build_link_params(config)
    panel = build_panel(config)
    canyon = build_canyon(config)
    spec = resolve_constellation(config)
    x_range, y_range = _grid_ranges(config)

    outputs = []
    for elevation_deg in config.sweep.elevations_deg:
        grid = coverage_map(
            params, panel, canyon,
            elevation=math.radians(elevation_deg),
            altitude=spec.altitude,
            spacing=config.grid.spacing,
            x_range=x_range,
            y_range=y_range,
            link=config.grid.link,
            sat_model=config.model.sat_model,
            workers=config.output.workers,
            earth_radius=spec.earth_radius,
        )
        name = coverage_filename(elevation_deg)
        write_coverage(grid, _out(config, name))
        outputs.append(name)

    write_run_metadata(config, _out(config, METADATA_FILE), "coverage", derived_quantities(config),
                       {"outputs": outputs})
    return EXIT_OK


def cmd_tilt_sweep(config: RunConfig) -> int:
    params = build_link_params(config)
    panel = build_panel(config)
    spec = resolve_constellation(config)
    sweep = config.sweep
    sat = sat_position(math.radians(sweep.tilt_elevation_deg), spec.altitude, spec.earth_radius,
                       ris_center=panel.center, side=1)

    rows: List[Dict[str, Any]] = []
    optima = {}
    for user_id, point in enumerate(sweep.tilt_users):
        user = Vec3(point.x, point.y, 0.0)
        result = optimal_tilt(
            params, panel, sat, user,
            tilt_min=math.radians(sweep.tilt_min_deg),
            tilt_max=math.radians(sweep.tilt_max_deg),
            step=math.radians(sweep.tilt_step_deg),
            sat_model=config.model.sat_model,
        )
        for tilt, snr in result.curve:
            rows.append({
                "tilt_deg": round(math.degrees(tilt), 9),
                "user_id": user_id,
                "x_m": point.x,
                "y_m": point.y,
                "snr_db": None if snr.blocked else snr.snr_db,
                "blocked": snr.blocked,
            })
        optima[user_id] = {"tilt_deg": round(math.degrees(result.tilt), 9), "snr_db": result.snr_db}
        logger.info(f"User {user_id} at x={point.x} m: best tilt {math.degrees(result.tilt):.1f} deg, "
                    f"{result.snr_db:.2f} dB")

    write_tilt_sweep(rows, _out(config, "tilt_sweep.csv"))
    write_run_metadata(config, _out(config, METADATA_FILE), "tilt-sweep", derived_quantities(config),
                       {"optimal_tilt": optima})
    return EXIT_OK


def cmd_double_ris(config: RunConfig) -> int:
    params = build_link_params(config)
    panel = build_panel(config)
    canyon = build_canyon(config)
    spec = resolve_constellation(config)
    positions = street_positions(canyon.width, config.sweep.double_ris_user_step)

    rows = []
    for elevation_deg in config.sweep.double_ris_elevations_deg:
        scenario = build_double_ris(canyon, panel, spec, math.radians(elevation_deg),
                                    config.model.approximate_panel_elevation)
        logger.info(f"SAT1 at {elevation_deg:g} deg, SAT2 at {math.degrees(scenario.elevation2):.2f} deg")
        for x in positions:
            result = double_ris_evaluate(scenario, Vec3(x, 0.0, 0.0), params, config.model.sat_model)
            rows.extend(double_ris_rows(elevation_deg, x, result))

    write_double_ris(rows, _out(config, "double_ris.csv"))
    write_run_metadata(config, _out(config, METADATA_FILE), "double-ris", derived_quantities(config))
    return EXIT_OK


def cmd_blockage_table(config: RunConfig) -> int:
    specs = list(PRESETS.values())
    configured = resolve_constellation(config)
    if configured.name not in PRESETS:
        specs.append(configured)
    rows = blockage_table(specs, width=config.canyon.width)
    print(format_table(rows))
    write_blockage_table(rows, _out(config, "blockage_table.csv"))
    write_run_metadata(config, _out(config, METADATA_FILE), "blockage-table")
    return EXIT_OK


def cmd_validate(config: RunConfig) -> int:
    results = run_validation()
    print(format_report(results))
    if all(r.passed for r in results):
        logger.info("All validation checks passed")
        return EXIT_OK
    logger.error(f"{sum(not r.passed for r in results)} validation check(s) failed")
    return EXIT_VALIDATION


def cmd_trajectory(config: RunConfig) -> int:
    canyon = build_canyon(config)
    spec = resolve_constellation(config)
    sweep = config.sweep
    users = [Vec3(p.x, p.y, 0.0) for p in sweep.trajectory_users]

    params = None
    panels = []
    if sweep.trajectory_panels != "none":
        params = build_link_params(config)
        panel = build_panel(config)
        panels = [panel]
        if sweep.trajectory_panels == "double":
            panels.append(panel.model_copy(update={"center": Vec3(canyon.width, 0.0, canyon.height),
                                                   "facing": -1}))

    result = trajectory_sweep(spec, canyon, users, math.radians(sweep.trajectory_step_deg),
                              params=params, panels=panels, sat_model=config.model.sat_model,
                              workers=config.output.workers)
    report = blockage_report(spec, canyon)
    for user_id, fraction in result.blocked_fraction.items():
        print(f"user {user_id}: blocked {100.0 * fraction:.2f} % of the pass "
              f"(canyon blockage ratio {100.0 * report.blockage_ratio:.2f} %)")

    write_trajectory(result, _out(config, "trajectory.csv"))
    write_run_metadata(config, _out(config, METADATA_FILE), "trajectory", derived_quantities(config), {
        "blocked_fraction": {int(k): float(v) for k, v in result.blocked_fraction.items()},
        "blockage_ratio": float(report.blockage_ratio),
    })
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "coverage": cmd_coverage,
    "tilt-sweep": cmd_tilt_sweep,
    "double-ris": cmd_double_ris,
    "blockage-table": cmd_blockage_table,
    "validate": cmd_validate,
    "trajectory": cmd_trajectory,
}


# --- CLI ---

def parse_elevations(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Elevations must be a comma-separated list of degrees, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='Path to a run configuration YAML file')
    common.add_argument('--out', help='Output directory (overrides output.directory)')
    common.add_argument('--workers', type=int, help='Worker processes (overrides output.workers)')
    common.add_argument('--elevations', type=parse_elevations, help='Comma-separated SAT elevations in degrees')
    common.add_argument('--preset', help=f"Constellation preset ({', '.join(PRESETS.keys())})")
    common.add_argument('--seed', type=int, help='Reserved; runs are deterministic')
    common.add_argument('--env-file', help='Path to .env file for environment variables')
    common.add_argument('--log-level', help='Logging level (overrides RIS_SIM_LOG_LEVEL)')

    parser = argparse.ArgumentParser(description='RIS-assisted LEO downlink simulator for urban canyons')
    subparsers = parser.add_subparsers(dest='command', required=True)
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[common])
    return parser


# Sweep key each command reads --elevations into
ELEVATION_KEYS = {
    "coverage": "elevations_deg",
    "tilt-sweep": "tilt_elevation_deg",
    "double-ris": "double_ris_elevations_deg",
}


def cli_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if args.out:
        overrides.setdefault("output", {})["directory"] = args.out
    if args.workers is not None:
        overrides.setdefault("output", {})["workers"] = args.workers
    if args.elevations:
        key = ELEVATION_KEYS.get(args.command)
        if key is None:
            raise ConfigurationError(f"{args.command} takes no --elevations")
        value: Any = args.elevations
        if key == "tilt_elevation_deg":
            if len(args.elevations) != 1:
                raise ConfigurationError(f"tilt-sweep takes a single elevation, got {len(args.elevations)}",
                                         key=f"sweep.{key}")
            value = args.elevations[0]
        overrides.setdefault("sweep", {})[key] = value
    if args.preset:
        overrides.setdefault("constellation", {})["preset"] = args.preset
    if args.seed is not None:
        overrides["seed"] = args.seed
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point of the simulator CLI."""
    args = build_parser().parse_args(argv)

    try:
        load_env_vars(args.env_file)
        level = (args.log_level or os.getenv("RIS_SIM_LOG_LEVEL") or "INFO").upper()
        logging.getLogger().setLevel(level)
        config = load_run_config(args.config, cli_overrides(args))
    except (SimulationError, OSError, ValueError) as e:
        key = getattr(e, "key", None)
        logger.error(f"Invalid configuration{f' ({key})' if key else ''}: {str(e)}")
        return EXIT_CONFIG

    try:
        logger.info(f"Running {args.command}, outputs in {config.output.directory}")
        return COMMANDS[args.command](config)
    except ConfigurationError as e:
        logger.error(f"Invalid configuration ({e.key}): {str(e)}")
        return EXIT_CONFIG
    except SimulationError as e:
        logger.error(f"{args.command} failed: {str(e)}", exc_info=True)
        return EXIT_CONFIG
    except OSError as e:
        logger.error(f"Could not write outputs: {str(e)}", exc_info=True)
        return EXIT_IO
    except Exception as e:
        logger.error(f"{args.command} failed: {str(e)}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
