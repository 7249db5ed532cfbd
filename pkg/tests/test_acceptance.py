"""One test per acceptance criterion; each prints its PASS/FAIL line."""

import pytest

from ars_tangency.acceptance import CRITERIA, run_acceptance


@pytest.fixture(scope="module")
def report():
    return run_acceptance()


@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1))
def test_criterion(report, number, capsys):
    result = report.results[number - 1]
    with capsys.disabled():
        print("\n" + result.line())
        for name, check in result.checks.items():
            mark = "ok  " if check.ok else "FAIL"
            print(f"    {mark} {name}: {check.value:.10g} (target {check.target})")
    assert result.passed, result.line()


def test_full_suite_within_ten_minutes(report):
    assert report.runtime < 600.0


def test_report_contains_headline_numbers(report):
    c = report.constants
    assert c["g1_2K"] == pytest.approx(-6.283185307, abs=1e-8)
    assert c["grushin_conjugate_root"] == pytest.approx(4.493409, abs=1e-6)
    assert "s0_over_K" in c
