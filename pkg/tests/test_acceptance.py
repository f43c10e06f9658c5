"""Tests for the acceptance suite plumbing and its inexpensive checks."""

import pytest

from cvreceivers.lib.acceptance import (
    SUITES,
    CheckResult,
    SuiteContext,
    run_suite,
    select_suites,
    suite_artifact,
)
from cvreceivers.lib.errors import DomainError, SpecError

CHEAP = ["closed_form", "identity_rotation", "non_optimal", "appendix_a", "oracle_equivalence", "stellar"]


def test_every_criterion_has_a_suite():
    assert list(SUITES) == [
        "closed_form", "identity_rotation", "bounds_chain", "near_optimality", "kennedy_crossover",
        "legendre", "appendix_b", "appendix_c", "non_optimal", "laguerre", "appendix_a",
        "oracle_equivalence", "stellar", "determinism",
    ]


def test_select_suites_defaults_to_all():
    assert select_suites() == list(SUITES)
    assert select_suites("") == list(SUITES)


def test_select_suites_keeps_canonical_order():
    assert select_suites("stellar, closed_form") == ["closed_form", "stellar"]


def test_select_suites_rejects_unknown_names():
    with pytest.raises(SpecError, match="figure_9"):
        select_suites("closed_form,figure_9")


@pytest.mark.parametrize("scale", [0.0, -1.0, float("nan")])
def test_tolerance_scale_must_be_positive(scale):
    with pytest.raises(DomainError):
        SuiteContext(scale)


def test_context_scales_tolerances():
    assert SuiteContext(0.5).tol(1e-8) == pytest.approx(5e-9)


@pytest.mark.parametrize("name", CHEAP)
def test_cheap_checks_pass(name):
    (result,) = run_suite([name])
    assert result.name == name
    assert result.passed, result.detail


def test_determinism_check_passes():
    (result,) = run_suite(["determinism"])
    assert result.passed


def test_oracle_deviation_is_reported():
    (result,) = run_suite(["oracle_equivalence"])
    assert 0.0 <= result.values["max_deviation"] <= 1e-10


def test_artifact_shape():
    results = (CheckResult("a", True, "fine"), CheckResult("b", False, "broken", {"x": 1}))
    artifact = suite_artifact(results, 1.0)
    assert artifact["passed"] is False
    assert artifact["tolerance_scale"] == 1.0
    assert artifact["checks"][1] == {"name": "b", "passed": False, "detail": "broken", "values": {"x": 1}}


def test_run_suite_passes_the_scale_to_checks(monkeypatch):
    seen = []

    def fake_check(ctx):
        seen.append(ctx.scale)
        return CheckResult("fake", ctx.tol(1.0) > 0.01, "scaled")

    monkeypatch.setitem(SUITES, "fake", fake_check)
    assert run_suite(["fake"], tolerance_scale=0.001)[0].passed is False
    assert run_suite(["fake"])[0].passed is True
    assert seen == [0.001, 1.0]


@pytest.fixture(scope="module")
def non_optimal_values():
    (result,) = run_suite(["non_optimal"])
    return result.values


@pytest.mark.parametrize("alpha_sq,n1,n2", [
    ("0.5", 0.23040, 0.21896),
    ("1", 0.17646, 0.17556),
    ("2", 0.07674, 0.13895),
])
def test_non_optimal_pacs_values(non_optimal_values, alpha_sq, n1, n2):
    point = non_optimal_values[alpha_sq]
    assert point["pacs_n1"] == pytest.approx(n1, abs=5e-5)
    assert point["pacs_n2"] == pytest.approx(n2, abs=5e-5)
    assert point["gaussian"] < point["pacs_n0"] < point["pacs_n1"]
