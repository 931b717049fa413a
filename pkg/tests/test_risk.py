from __future__ import annotations

import json
import math
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conesafe import risk
from conesafe.errors import DomainError

GOLDEN = Path(__file__).parent / "golden"
N = st.integers(1, 10_000)
rho = st.floats(0.0, 1.0)


@pytest.mark.parametrize("which, golden", [
    ("power", "power_table.csv"),
    ("indifference", "indifference_table.csv"),
    ("matrix", "risk_matrix.csv"),
    ("levels", "probability_levels.csv"),
])
def test_tables_match_goldens(which, golden):
    assert risk.render_table(which, "csv") == (GOLDEN / golden).read_bytes().decode()


def test_power_examples():
    assert risk.power_function(20, 0.10) == pytest.approx(0.8784, abs=5e-5)
    assert risk.power_function(1000, 0.001) == pytest.approx(0.6323, abs=5e-5)
    assert risk.power_function(5, 1.0) == 1.0
    assert risk.power_function(5, 0.0) == 0.0 == risk.ALPHA


@pytest.mark.parametrize("n, want", [(1, 0.5), (10, 0.06697), (100, 0.00691)])
def test_indifference_examples(n, want):
    assert risk.indifference_proportion(n) == pytest.approx(want, abs=5e-6)


def test_upper_bound_examples():
    assert risk.upper_bound(1, 0.9) == pytest.approx(0.9, abs=1e-15)
    assert risk.SamplingPlan(100).upper_bound() == risk.indifference_proportion(100)
    assert risk.SamplingPlan(10).power(0.5) == risk.power_function(10, 0.5)


@pytest.mark.parametrize("call", [
    lambda: risk.power_function(0, 0.1),
    lambda: risk.power_function(True, 0.1),
    lambda: risk.power_function(5, 1.5),
    lambda: risk.indifference_proportion(0),
    lambda: risk.upper_bound(5, 1.0),
    lambda: risk.SamplingPlan(5, tolerated_failures=1),
    lambda: risk.indemnify(5, -1.0),
    lambda: risk.poisson_pmf(-1, 1, 0),
    lambda: risk.poisson_pmf(1, 1, 0.5),
    lambda: risk.classify_level(1.5),
    lambda: risk.classify_severity(-1),
    lambda: risk.risk_matrix("G", 1),
    lambda: risk.risk_matrix("A", 5),
    lambda: risk.standardize_exposure(1, 1, 0, 0),
    lambda: risk.CompoundPoissonModel(-1, 1),
    lambda: risk.CompoundPoissonModel(1, 1, 0.5, 1.0, 2.0),
    lambda: risk.CompoundPoissonModel(1, 1, 0.5, 1.0, None),
])
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call()


def test_indemnification():
    assert risk.indemnify(7, 0.0).per_second == 0.0
    ind = risk.indemnify(100, 2.0)
    assert ind.per_second == pytest.approx(0.01382, abs=2e-5)
    assert ind.per_hour == pytest.approx(3600 * ind.per_second)
    assert risk.indemnify(1, 3.0).per_second == pytest.approx(1.5)


def test_poisson():
    assert risk.poisson_pmf(0, 5, 0) == 1.0 and risk.poisson_pmf(0, 5, 2) == 0.0
    assert risk.poisson_pmf(2, 1, 0) == pytest.approx(math.exp(-2), rel=1e-12)
    for lt in (0.5, 3.0, 20.0):
        assert math.fsum(risk.poisson_pmf(lt, 1.0, k) for k in range(201)) == pytest.approx(1, abs=1e-9)


def test_compound_poisson():
    assert risk.cpp_expectation(risk.CompoundPoissonModel(1, 1), 1) == 1
    assert risk.cpp_expectation(risk.CompoundPoissonModel(0.5, 4), 10) == pytest.approx(20)
    assert risk.cpp_expectation(risk.CompoundPoissonModel(0.5, 4, 0.5), 10) == pytest.approx(10)
    m = risk.CompoundPoissonModel.from_durations(2.0, 3.0, mean_on=3.0, mean_off=1.0)
    assert m.idle_ratio == 0.25
    assert risk.statistical_risk(m) == pytest.approx(0.75 * 2 * 3)
    assert risk.statistical_risk(risk.CompoundPoissonModel(2, 3, 1.0)) == 0.0


@given(st.lists(st.tuples(st.floats(0, 100), st.floats(0, 1e6), st.floats(0, 1)), min_size=3, max_size=3))
def test_risks_add_up(params):
    models = [risk.CompoundPoissonModel(*p) for p in params]
    assert risk.statistical_risk(models) == pytest.approx(sum(risk.statistical_risk(m) for m in models))


@pytest.mark.parametrize("p, level", [(0.5, "A"), (0.1, "A"), (0.05, "B"), (0.001, "C"), (1e-4, "D"),
                                      (1e-6, "D"), (9.99e-7, "E"), (0.0, "E")])
def test_levels(p, level):
    assert risk.classify_level(p) == level
    assert risk.classify_level(p, eliminated=True) == "F"


def test_matrix_and_assessment():
    assert risk.risk_matrix("A", 1) == "High"
    assert risk.risk_matrix("D", 2) == "Medium"
    assert {risk.risk_matrix("F", c) for c in risk.CATEGORIES} == {"Eliminated"}
    a = risk.MilStdAssessment.of("C", 3)
    assert (a.probability_level, a.severity_category, a.risk_value) == ("C", 3, "Medium")
    assert [risk.classify_severity(x) for x in (2e7, 1e7, 5e6, 1e5, 99_999)] == [1, 1, 2, 3, 4]


def test_exposure_examples():
    assert risk.standardize_exposure(5, 1, 0, 1) == 5
    assert risk.standardize_exposure(100, 2, 0.5, 10) == 10
    assert risk.standardize_exposure(42, 3, 1, 7) == 0


def test_annual_probability():
    m = risk.CompoundPoissonModel(1e-4, 1.0)
    assert risk.annual_probability(m) == pytest.approx(1 - math.exp(-1e-4 * 8766))


@given(N, rho)
def test_power_is_in_unit_interval_and_sample_size_one_is_identity(n, r):
    k = risk.power_function(n, r)
    assert 0.0 <= k <= 1.0
    assert risk.power_function(1, r) == pytest.approx(r, abs=1e-15)


@given(N, rho, rho)
def test_power_is_monotone(n, r1, r2):
    lo, hi = sorted((r1, r2))
    assert risk.power_function(n, lo) <= risk.power_function(n, hi)
    assert risk.power_function(n, lo) <= risk.power_function(n + 1, lo)


@given(N)
def test_duality(n):
    assert abs(risk.power_function(n, risk.indifference_proportion(n)) - 0.5) <= 1e-12


@given(N, st.floats(0.01, 0.98), st.floats(0.001, 0.01))
def test_upper_bound_increases_with_confidence(n, c, dc):
    assert risk.upper_bound(n, c) <= risk.upper_bound(n, c + dc)


def test_text_and_json_tables():
    text = risk.render_table("indifference", "text")
    assert ".00691" in text and text.endswith("\n")
    doc = json.loads(risk.render_table("power", "json"))
    assert doc["header"][0] == "N" and len(doc["rows"]) == 14
    with pytest.raises(DomainError):
        risk.render_table("nope")
    with pytest.raises(DomainError):
        risk.render_table("power", "xml")
