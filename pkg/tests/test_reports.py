import math

import numpy as np
import pytest
import yaml

from simulation.config import load_run_config
from simulation.link_budget.main import LinkKind, SnrResult
from simulation.reports.main import (
    coverage_filename,
    double_ris_rows,
    format_value,
    write_coverage,
    write_csv,
    write_run_metadata,
)
from simulation.scenario_engine.main import DoubleRisResult, SnrGrid


@pytest.mark.parametrize("value, expected", [
    (None, ""),
    (True, "1"),
    (False, "0"),
    (3, "3"),
    (math.nan, ""),
    (-math.inf, ""),
    (1.0, "1"),
    (1 / 3, "0.333333333"),
    (-123.456789012, "-123.456789"),
    ("los", "los"),
])
def test_format_value(value, expected):
    assert format_value(value) == expected


def test_coverage_filename():
    assert coverage_filename(45.0) == "coverage_el45.csv"
    assert coverage_filename(37.5) == "coverage_el37.5.csv"


def test_write_csv_uses_lf(tmp_path):
    path = tmp_path / "nested" / "out.csv"
    assert write_csv(str(path), ["a", "b"], [[1, 2.5], [None, True]]) == 2
    assert path.read_bytes() == b"a,b\n1,2.5\n,1\n"


def test_write_coverage_marks_blocked_cells(tmp_path):
    grid = SnrGrid(
        x=np.array([-0.5, 0.5]),
        y=np.array([0.0]),
        snr_db=np.array([[np.nan, 12.25]]),
        blocked=np.array([[True, False]]),
        spacing=1.0,
    )
    path = tmp_path / "coverage.csv"
    write_coverage(grid, str(path))
    assert path.read_text().splitlines() == ["x_m,y_m,snr_db,blocked", "-0.5,0,,1", "0.5,0,12.25,0"]


def test_double_ris_rows_flag_serving_link():
    links = {
        "los1": SnrResult.blocked_link(LinkKind.LOS),
        "los2": SnrResult(snr_linear=10.0, snr_db=10.0, link_kind=LinkKind.LOS),
        "ris1": SnrResult(snr_linear=100.0, snr_db=20.0, link_kind=LinkKind.RIS),
        "ris2": SnrResult.blocked_link(LinkKind.RIS),
    }
    rows = double_ris_rows(45.0, 10.0, DoubleRisResult(links=links, serving="ris1"))
    assert [row[2] for row in rows][:4] == ["los1", "los2", "ris1", "ris2"]
    assert rows[0][3] is None
    assert [row[5] for row in rows] == [False, False, True, False]


def test_run_metadata_has_no_timestamp(tmp_path):
    path = tmp_path / "run_config.yaml"
    write_run_metadata(load_run_config(use_env=False), str(path), "coverage", {"element_count": 4})
    document = yaml.safe_load(path.read_text())
    assert document["command"] == "coverage"
    assert document["derived"] == {"element_count": 4}
    assert document["config"]["canyon"]["width"] == 50.0
    assert "time" not in path.read_text()
