from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conesafe.errors import ExpressionError
from conesafe.expr import Expression, frame_env, parse, tokenize


@pytest.mark.parametrize("src, env, want", [
    ("1 + 2 * 3", {}, 7),
    ("(1 + 2) * 3", {}, 9),
    ("-a - -1", {"a": 4}, -3),
    ("2 × 3", {}, 6),
    ("a = 1 and b != 'x'", {"a": 1, "b": "y"}, True),
    ("not a = 1 or b = \"y\"", {"a": 1, "b": "y"}, True),
    ("a ≥ 2 and a ≤ 3 and a ≠ 4", {"a": 2}, True),
    ("a <> 2", {"a": 2}, False),
    ("if a > 1 then 'hi' else 'lo'", {"a": 0}, "lo"),
    ("if a = 0 then 1 else if a = 1 then 2 else 3", {"a": 1}, 2),
    ("true and not false", {}, True),
])
def test_evaluation(src, env, want):
    assert Expression(src)(env) == want


def test_equality_never_crosses_types():
    assert Expression("a = 1")({"a": "1"}) is False
    assert Expression("a != 1")({"a": "1"}) is True


def test_primed_names_read_the_ordinate():
    e = Expression("x' = x + 1")
    assert e.names == {"x"} and e.primed_names == {"x"}
    assert e.test(frame_env({"x": 1}, {"x": 2}))
    assert not e.test(frame_env({"x": 1}, {"x": 1}))


@pytest.mark.parametrize("src, col", [
    ("1 +", 4),
    ("(a", 3),
    ("a $ b", 3),
    ("if a then b", 12),
    ("true'", 1),
    ("a b", 3),
])
def test_syntax_errors_carry_columns(src, col):
    with pytest.raises(ExpressionError) as info:
        parse(src)
    assert info.value.column == col


@pytest.mark.parametrize("src, env", [
    ("a + 1", {"a": "x"}),
    ("a < 'x'", {"a": 1}),
    ("not 1", {}),
    ("1 and true", {}),
    ("if 1 then 2 else 3", {}),
    ("-'x'", {}),
    ("zz", {}),
])
def test_type_errors(src, env):
    with pytest.raises(ExpressionError):
        Expression(src)(env)


def test_guard_must_be_boolean():
    with pytest.raises(ExpressionError):
        Expression("1 + 1").test({})


def test_short_circuit_skips_ill_typed_right_side():
    assert Expression("false and 1")({}) is False
    assert Expression("true or 1")({}) is True


def test_tokens_are_one_based():
    toks = tokenize("ab <= 3")
    assert [(t.kind, t.column) for t in toks] == [("name", 1), ("op", 4), ("int", 7), ("eof", 8)]


def test_expression_equality_by_source():
    assert Expression("a = 1") == Expression("a = 1")
    assert len({Expression("a = 1"), Expression("a = 1"), Expression("a=1")}) == 2


alphabet = st.sampled_from(list("ab01 '=!<>+-*()") + ["if ", " then ", " else ", " and ", " or ", "not ",
                                                       "true", "false", "≤", "×", "$", "x'"])


@given(st.lists(alphabet, max_size=12).map("".join),
       st.fixed_dictionaries({"a": st.integers(-2, 2), "b": st.sampled_from(["p", "q"]),
                              "x": st.integers(0, 1), "x'": st.integers(0, 1)}))
def test_fuzz_only_expression_errors(src, env):
    try:
        e = Expression(src)
        e(env)
    except ExpressionError:
        pass
