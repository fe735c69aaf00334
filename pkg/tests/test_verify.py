import json

import pytest

from verify import (
    CheckResult,
    VerifyReport,
    check_bargaining,
    check_characteristic_form,
    check_equal_efficiency,
    check_externality,
    check_md_conservation,
    check_mobility_trend,
    check_split_sweep,
    run_verify,
)
from verify import _negated_weight


@pytest.mark.parametrize(
    "check",
    [
        check_md_conservation,
        check_characteristic_form,
        check_equal_efficiency,
        check_externality,
        check_split_sweep,
        check_bargaining,
    ],
)
def test_quick_checks_pass(check):
    result = check(quick=True)
    assert result.passed, result.counterexample
    assert result.cases > 0


def test_flipped_externality_sign_is_caught():
    result = check_externality(quick=True, weight_fn=_negated_weight)
    assert not result.passed
    assert result.counterexample["closed_form"] < 0


def test_report_rendering():
    report = VerifyReport([
        CheckResult(name="good", passed=True, cases=3),
        CheckResult(name="bad", passed=False, cases=1, counterexample={"x": 1}),
    ])
    assert not report.passed
    assert [c.name for c in report.failures()] == ["bad"]
    assert "❌ FAIL" in report.table()
    assert json.loads(report.counterexamples_json()) == {"bad": {"x": 1}}


def test_unknown_mutation():
    with pytest.raises(ValueError):
        run_verify(quick=True, mutate="nonsense")


@pytest.mark.slow
def test_quick_suite_passes():
    report = run_verify(quick=True)
    assert report.passed, report.counterexamples_json()
    assert len(report.checks) == 10
    assert [c.name for c in report.checks if c.skipped] == ["mobility_trend"]


@pytest.mark.slow
def test_mutated_suite_fails_only_externality():
    report = run_verify(quick=True, mutate="externality-sign")
    assert [c.name for c in report.failures()] == ["externality"]


def test_mobility_trend_is_skipped_when_quick():
    result = check_mobility_trend(quick=True)
    assert result.skipped and result.passed and result.cases == 0
    assert "⏭ skip" in VerifyReport([result]).table()


@pytest.mark.slow
def test_mobility_trend_holds(monkeypatch):
    monkeypatch.setenv("COALSPEC_THREADS", "4")
    result = check_mobility_trend()
    assert result.passed, result.counterexample
    assert result.cases == 3
