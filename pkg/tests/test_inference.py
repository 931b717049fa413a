from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conesafe.automaton import Frame, Step, make_consistent_step
from conesafe.ensemble import Choice
from conesafe.errors import BindingError, DomainError
from conesafe.inference import (
    PredecessorWalk,
    StoppingRule,
    build_cone,
    check_complete,
    check_independent,
    converse,
    edge,
    edge_bijection,
    edge_is_bijective,
    precedes,
    predecessor_generations,
    replay,
    to_test,
)

from corpus import random_automaton
from oracles import all_canonical_steps, brute_cone_walks, brute_converse


def test_gate_converse_matches_oracle(gate):
    a = gate.automaton
    for target in all_canonical_steps(a):
        assert set(converse(a, target)) == brute_converse(a, target)


def test_gate_cone_is_frozen(gate_cone):
    # four walks IDLE <- FIRE, one per FIRE stimulus, all ending at the entry locus
    got = [(w.path(), w.edge_step.abscissa.to_dict()) for w in gate_cone.walks]
    assert got == [
        (["IDLE", "FIRE"], {"mode": 0, "sensor": 0}),
        (["IDLE", "FIRE"], {"mode": 0, "sensor": 1}),
        (["IDLE", "FIRE"], {"mode": 1, "sensor": 0}),
        (["IDLE", "FIRE"], {"mode": 1, "sensor": 1}),
    ]
    assert gate_cone.acyclic and edge_is_bijective(gate_cone)


@pytest.mark.parametrize("depth, entry", [(1, ()), (2, ()), (3, ("FIRE",)), (3, ())])
def test_gate_cone_matches_brute_force(gate, depth, entry):
    a = gate.automaton
    crux = gate.crux_step("FIRE")
    cone = build_cone(a, crux, StoppingRule(depth, frozenset(entry)))
    assert {w.steps for w in cone.walks} == brute_cone_walks(a, crux, depth, frozenset(entry))


def test_converse_of_non_canonical_target_is_empty(gate):
    a = gate.automaton
    s = gate.crux_step("FIRE")
    wrong = Step(s.locus, "fire", Frame(s.abscissa, Choice({"mode": 1})))
    assert converse(a, wrong) == ()


def test_converse_rejects_foreign_steps(gate):
    bad = Step("NOWHERE", "wait", Frame(Choice({"mode": 0, "sensor": 0}), Choice({"mode": 0})))
    with pytest.raises(DomainError):
        converse(gate.automaton, bad)


def test_generations(gate):
    a = gate.automaton
    crux = gate.crux_step("FIRE")
    g = predecessor_generations(a, crux, 2)
    assert g[0] == (crux,)
    assert set(g[1]) == set(converse(a, crux))
    assert all(any(precedes(a, p, s) for s in g[1]) for p in g[2])
    with pytest.raises(DomainError):
        predecessor_generations(a, crux, -1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 5000), st.data())
def test_converse_oracle_on_random_models(seed, data):
    a = random_automaton(seed)
    steps = all_canonical_steps(a)
    target = data.draw(st.sampled_from(steps))
    assert set(converse(a, target)) == brute_converse(a, target, steps)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 5000), st.data())
def test_cone_matches_brute_force_on_random_models(seed, data):
    a = random_automaton(seed)
    crux = data.draw(st.sampled_from(all_canonical_steps(a)))
    entry = frozenset(data.draw(st.sets(st.sampled_from(a.loci))))
    cone = build_cone(a, crux, StoppingRule(2, entry))
    assert {w.steps for w in cone.walks} == brute_cone_walks(a, crux, 2, entry)
    assert check_complete(a, cone.walks) and check_independent(cone.walks)
    assert cone.acyclic == (not any(w.has_cycle() for w in cone.walks))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 5000), st.data())
def test_deleting_any_walk_breaks_completeness(seed, data):
    a = random_automaton(seed)
    crux = data.draw(st.sampled_from(all_canonical_steps(a)))
    cone = build_cone(a, crux, StoppingRule(3))
    if len(cone.walks) < 2:
        return
    j = data.draw(st.integers(0, len(cone.walks) - 1))
    rest = cone.walks[:j] + cone.walks[j + 1:]
    res = check_complete(a, rest)
    assert not res
    wi, k, missing = res.counterexample
    assert k <= 0 and missing in converse(a, rest[wi].at(k))


def test_prefix_completeness_is_stricter_than_pointwise():
    a = random_automaton(22)
    cone = build_cone(a, make_consistent_step(a, "L2", {"a": 0, "b": "lo"}), StoppingRule(3))
    assert len(cone.walks) == 8
    rest = cone.walks[1:]
    # another walk passes the same step at index -2 through a different prefix
    assert check_complete(a, rest, pointwise=True)
    res = check_complete(a, rest)
    assert not res and res.counterexample[:2] == (0, -2)
    assert res.counterexample[2] == cone.walks[0].edge_step


def test_independence():
    s = [Step(f"L{i}", "f", Frame(Choice({"x": i}), Choice({"x": 0}))) for i in range(3)]
    w1 = PredecessorWalk((s[0], s[1]))
    w2 = PredecessorWalk((s[0], s[1], s[2]))
    w3 = PredecessorWalk((s[0], s[2]))
    assert check_independent([w2, w3])
    assert not check_independent([w1, w2])
    assert not check_independent([w3, w3])


def test_cyclic_cone(gate):
    cone = build_cone(gate.automaton, gate.crux_step("FIRE"), StoppingRule(3))
    assert not cone.acyclic
    assert sum(w.has_cycle() for w in cone.walks) == 4
    assert check_complete(gate.automaton, cone.walks) and check_independent(cone.walks)


def test_degenerate_cone_is_the_crux():
    a = random_automaton(0)
    crux = make_consistent_step(a, "L0", {"a": 0, "b": 0, "c": 1})
    cone = build_cone(a, crux, StoppingRule(3))
    assert [w.steps for w in cone.walks] == [(crux,)]
    assert edge(cone) == (crux,) and check_complete(a, cone.walks)


def test_shared_edge_step_breaks_the_bijection():
    a = random_automaton(3)
    cone = build_cone(a, make_consistent_step(a, "L2", {"a": 0, "b": 0}), StoppingRule(2))
    # three walks differ only in the volatile part of their middle step
    assert cone.acyclic and len(cone.walks) == 3 and len(edge(cone)) == 1
    assert not edge_is_bijective(cone)
    with pytest.raises(BindingError) as info:
        edge_bijection(cone)
    assert info.value.offenders


def test_stopping_rule_needs_positive_depth():
    with pytest.raises(DomainError):
        StoppingRule(0)


def test_inconsistent_crux_rejected(gate):
    s = gate.crux_step("FIRE")
    with pytest.raises(DomainError):
        build_cone(gate.automaton, Step(s.locus, s.functionality, Frame(s.abscissa, Choice({"mode": 1}))),
                   StoppingRule(2))


def test_walk_indexing():
    s = [Step("L", "f", Frame(Choice({"x": i}), Choice({"x": 0}))) for i in range(3)]
    w = PredecessorWalk(tuple(s))
    assert w.at(0) == s[0] and w.at(-2) == s[2] and w.crux == s[0] and w.edge_step == s[2]
    with pytest.raises(IndexError):
        w.at(1)
    with pytest.raises(IndexError):
        w.at(-3)
    with pytest.raises(DomainError):
        PredecessorWalk(())


def test_test_round_trip_and_replay(gate_cone, gate):
    a = gate.automaton
    for w in gate_cone.walks:
        t = to_test(w)
        assert t.at(1) == w.edge_step and t.at(len(t)) == w.crux
        assert t.to_walk() == w
        assert replay(a, t) == list(t.steps)
        assert replay(a, t, from_edge_stimulus=True) == list(t.steps)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 5000), st.data())
def test_tests_replay_on_random_models(seed, data):
    a = random_automaton(seed)
    cone = build_cone(a, data.draw(st.sampled_from(all_canonical_steps(a))), StoppingRule(3))
    for w in cone.walks:
        t = to_test(w)
        assert t.to_walk() == w
        assert replay(a, t) == list(t.steps)
