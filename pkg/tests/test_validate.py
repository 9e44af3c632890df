import inspect

import pytest

from simulation.validate.main import (
    CHECKS,
    check_blockage_table,
    check_element_gain,
    check_matrix_equivalence,
    check_phase_optimality,
    check_q_constants,
    format_report,
    run_validation,
)


@pytest.mark.parametrize("check", [
    check_element_gain,
    check_blockage_table,
    check_q_constants,
])
def test_fast_checks_pass(check):
    result = check()
    assert result.passed, result.detail


def test_phase_optimality_check():
    result = check_phase_optimality()
    assert result.passed, result.detail


def test_matrix_equivalence_check():
    result = check_matrix_equivalence()
    assert result.passed, result.detail
    assert result.residual <= 1e-9


def test_default_trial_counts():
    assert inspect.signature(check_phase_optimality).parameters["trials"].default == 100
    assert inspect.signature(check_matrix_equivalence).parameters["trials"].default == 50


def test_report_lists_every_check():
    results = run_validation()
    assert len(results) == len(CHECKS)
    report = format_report(results)
    assert "FAIL" not in report
    assert report.count("PASS") == len(CHECKS)
