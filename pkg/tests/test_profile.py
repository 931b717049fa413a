from __future__ import annotations

import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conesafe.automaton import walk
from conesafe.errors import DomainError, InsufficientDataError, PreconditionError, TruncationError
from conesafe.inference import edge
from conesafe.profile import (
    EVERYTHING,
    NOTHING,
    RelativeProfile,
    StepPredicate,
    UsagePattern,
    absolute_profile,
    arrival_times,
    check_limit_conjectures,
    count_arrivals,
    counting_norm,
    derive_seed,
    estimate_relative_profile,
    simulate_orbit,
    sync,
)

from oracles import stationary_distribution

FIRE = StepPredicate(loci={"FIRE"}, name="fire")


@pytest.fixture(scope="module")
def orbit(gate):
    return simulate_orbit(gate.automaton, gate.start, gate.pattern, 100_000)


def test_derive_seed():
    assert derive_seed(5, 0) == derive_seed(5, 0)
    seeds = {derive_seed(5, r) for r in range(100)}
    assert len(seeds) == 100 and all(0 <= s < 2**64 for s in seeds)
    assert derive_seed(5, 1) != derive_seed(6, 1)


@pytest.mark.parametrize("kw", [
    dict(mode="markov"),
    dict(distributions={"s": [(0, 0.5), (1, 0.6)]}),
    dict(distributions={"s": [(0, -0.5), (1, 1.5)]}),
    dict(distributions={"s": [(0, 0.5), (0, 0.5)]}),
    dict(seed=-1),
])
def test_pattern_validation(kw):
    with pytest.raises(DomainError):
        UsagePattern(**kw)


def test_pattern_must_cover_volatile_domain(gate):
    with pytest.raises(DomainError):
        UsagePattern(distributions={"sensor": [(2, 1.0)]}).validate(gate.automaton)
    with pytest.raises(DomainError):
        UsagePattern(distributions={}).validate(gate.automaton)


def test_orbits_are_seed_deterministic(gate):
    a = gate.automaton
    w1 = simulate_orbit(a, gate.start, gate.pattern.with_seed(9), 500)
    w2 = simulate_orbit(a, gate.start, gate.pattern.with_seed(9), 500)
    w3 = simulate_orbit(a, gate.start, gate.pattern.with_seed(10), 500)
    assert w1.steps == w2.steps and w1.steps != w3.steps


def test_trace_mode_replays_and_truncates(gate):
    a = gate.automaton
    trace = [{"sensor": 1}, {"sensor": 0}, {"sensor": 0}]
    w = simulate_orbit(a, gate.start, UsagePattern("trace", trace=trace), 4)
    assert [s.locus for s in w.steps] == ["IDLE", "IDLE", "FIRE", "IDLE"]
    with pytest.raises(TruncationError):
        simulate_orbit(a, gate.start, UsagePattern("trace", trace=trace), 5)


def test_orbit_frequencies_match_stationary_law(gate, orbit):
    pi = stationary_distribution(gate.automaton, gate.pattern, gate.start)
    n = len(orbit.steps)
    counts = Counter(orbit.steps)
    assert set(counts) == set(pi)
    for s, p in pi.items():
        assert abs(counts[s] / n - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_counting_examples(gate):
    a = gate.automaton
    trace = [{"sensor": x} for x in (1, 0, 1, 0, 0)]
    w = walk(a, gate.start, trace, 6)
    assert arrival_times(w, FIRE) == [3, 5]
    assert [count_arrivals(w, FIRE, k) for k in range(7)] == [0, 0, 0, 1, 1, 2, 2]
    assert absolute_profile(w, FIRE) == pytest.approx(2 / 6)
    # durations: wait 0.5 s, fire 2.0 s
    assert sync(a, w, 0) == 0.0
    assert sync(a, w, 6) == 4 * 0.5 + 2 * 2.0
    with pytest.raises(DomainError):
        count_arrivals(w, FIRE, 7)


def test_predicates(gate):
    s = gate.crux_step("FIRE")
    assert EVERYTHING(s) and not NOTHING(s)
    assert StepPredicate(where="mode' = 0 and mode = 1")(s)
    assert not StepPredicate(functionalities={"fire"})(s)
    either = StepPredicate(loci={"FIRE"}) | StepPredicate(steps={s})
    assert either(s) and "any_of" in either.describe()


def test_relative_profile(gate, gate_cone, orbit):
    Z = StepPredicate(steps=frozenset(edge(gate_cone)), name="edge")
    prof = estimate_relative_profile(orbit, Z, seed=1)
    assert math.fsum(prof.probability.values()) == pytest.approx(1.0, abs=1e-12)
    assert prof.total_matches == sum(prof.counts.values())
    # only the FIRE steps entered from mode 0 occur; sensor splits them 3:1
    assert {s.abscissa["mode"] for s in prof.support} == {0}
    by_sensor = {s.abscissa["sensor"]: prof[s] for s in prof.support}
    n = prof.total_matches
    assert abs(by_sensor[0] - 0.75) <= 3 * math.sqrt(0.75 * 0.25 / n)
    with pytest.raises(InsufficientDataError):
        estimate_relative_profile(orbit, NOTHING)


def test_uniform_profile(gate_cone):
    prof = RelativeProfile.uniform(edge(gate_cone))
    assert all(prof[s] == 0.25 for s in edge(gate_cone))
    with pytest.raises(InsufficientDataError):
        RelativeProfile.uniform([])


def test_counting_norm(gate, orbit):
    est = counting_norm(gate.automaton, orbit, FIRE, 10_000)
    # 0.2 FIRE steps per step over a 0.8 s mean step
    assert est.value == pytest.approx(0.25, rel=0.02)
    assert est.converged and est.steps_used == 100_000
    with pytest.raises(DomainError):
        counting_norm(gate.automaton, orbit.steps[:100], FIRE, 60)
    assert counting_norm(gate.automaton, orbit, NOTHING, 10).value == 0.0


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=2, max_size=60))
def test_norm_is_arrivals_over_sync(gate, xs):
    a = gate.automaton
    w = walk(a, gate.start, [{"sensor": x} for x in xs], len(xs) + 1)
    est = counting_norm(a, w, FIRE, 1)
    k = len(w)
    assert est.value == pytest.approx(count_arrivals(w, FIRE, k) / sync(a, w, k))
    assert 0 <= est.value <= 1 / 0.5


def test_limit_conjectures_hold_for_gate(gate):
    U = StepPredicate(loci={"FIRE"}, where="sensor = 1")
    rep = check_limit_conjectures(gate.automaton, gate.start, gate.pattern, FIRE, U, 3, 100_000, 0.05)
    assert rep.passed and len(set(rep.seeds)) == 3


def test_identical_seeds_give_zero_spread(gate):
    U = StepPredicate(loci={"FIRE"}, where="sensor = 1")
    rep = check_limit_conjectures(gate.automaton, gate.start, gate.pattern, FIRE, U, 3, 2_000, 0.0,
                                  seeds=[4, 4, 4])
    assert rep.ratio_deviation == 0.0 and rep.rate_deviation == 0.0 and rep.passed


def test_changed_usage_between_runs_is_detected(gate):
    U = StepPredicate(loci={"FIRE"}, where="sensor = 1")
    other = UsagePattern(distributions={"sensor": [(0, 0.25), (1, 0.75)]}, seed=3)
    rep = check_limit_conjectures(gate.automaton, gate.start, [gate.pattern, other], FIRE, U, 2, 20_000, 0.05)
    assert not rep.passed


def test_limit_conjectures_need_u_inside_z(gate):
    U = StepPredicate(loci={"IDLE"})
    with pytest.raises(PreconditionError):
        check_limit_conjectures(gate.automaton, gate.start, gate.pattern, FIRE, U, 2, 100, 0.05)
