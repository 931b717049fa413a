"""Guarded-expression language for model documents.

Grammar, loosest binding first::

    expr   := 'if' expr 'then' expr 'else' expr | or
    or     := and ('or' and)*
    and    := not ('and' not)*
    not    := 'not' not | cmp
    cmp    := sum (CMP sum)?
    sum    := term (('+' | '-') term)*
    term   := unary (('*' | '×') unary)*
    unary  := '-' unary | atom
    atom   := INT | 'sym' | "sym" | true | false | NAME | NAME "'" | '(' expr ')'

``CMP`` is one of ``= == != ≠ < <= ≤ > >= ≥``.  ``NAME'`` refers to the
ordinate (post-state) value of a persistent variable and is only legal in
frame predicates.  Expressions are pure and loop-free.
"""

from __future__ import annotations

import operator
import re
from collections.abc import Callable, Mapping
from dataclasses import dataclass

from .errors import ExpressionError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<int>\d+)
  | (?P<str>'[^']*'|"[^"]*")
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*'?)
  | (?P<op><=|>=|==|!=|<>|[=<>≤≥≠+\-*×()])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"if", "then", "else", "and", "or", "not", "true", "false"}
_CMP = {"=": "==", "==": "==", "!=": "!=", "≠": "!=", "<>": "!=", "<": "<", "<=": "<=",
        "≤": "<=", ">": ">", ">=": ">=", "≥": ">="}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    column: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExpressionError(f"unexpected character {source[pos]!r}", source, pos + 1)
        kind = m.lastgroup
        text = m.group()
        if kind == "name" and text.rstrip("'") in _KEYWORDS:
            if text.endswith("'"):
                raise ExpressionError(f"keyword {text[:-1]!r} cannot be primed", source, pos + 1)
            kind = "kw"
        if kind != "ws":
            tokens.append(Token(kind, text, pos + 1))
        pos = m.end()
    tokens.append(Token("eof", "", len(source) + 1))
    return tokens


# -- syntax tree -------------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    value: int | str | bool


@dataclass(frozen=True)
class Var:
    name: str
    primed: bool = False

    @property
    def key(self) -> str:
        return self.name + "'" if self.primed else self.name


@dataclass(frozen=True)
class Unary:
    op: str
    operand: object


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class IfElse:
    cond: object
    then: object
    other: object


Node = Lit | Var | Unary | Binary | IfElse


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def _fail(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ExpressionError(msg, self.source, tok.column)

    def _accept(self, kind: str, *texts: str) -> Token | None:
        t = self.tok
        if t.kind == kind and (not texts or t.text in texts):
            self.i += 1
            return t
        return None

    def _expect(self, kind: str, text: str) -> Token:
        t = self._accept(kind, text)
        if t is None:
            found = self.tok.text or "end of input"
            self._fail(f"expected {text!r}, found {found!r}")
        return t

    def parse(self) -> Node:
        if self.tok.kind == "eof":
            self._fail("empty expression")
        node = self.expr()
        if self.tok.kind != "eof":
            self._fail(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> Node:
        if self._accept("kw", "if"):
            cond = self.expr()
            self._expect("kw", "then")
            then = self.expr()
            self._expect("kw", "else")
            other = self.expr()
            return IfElse(cond, then, other)
        return self.or_()

    def or_(self) -> Node:
        node = self.and_()
        while self._accept("kw", "or"):
            node = Binary("or", node, self.and_())
        return node

    def and_(self) -> Node:
        node = self.not_()
        while self._accept("kw", "and"):
            node = Binary("and", node, self.not_())
        return node

    def not_(self) -> Node:
        if self._accept("kw", "not"):
            return Unary("not", self.not_())
        return self.cmp()

    def cmp(self) -> Node:
        node = self.sum()
        t = self._accept("op", *_CMP)
        if t is not None:
            node = Binary(_CMP[t.text], node, self.sum())
            if self.tok.kind == "op" and self.tok.text in _CMP:
                self._fail("comparisons do not chain")
        return node

    def sum(self) -> Node:
        node = self.term()
        while True:
            t = self._accept("op", "+", "-")
            if t is None:
                return node
            node = Binary(t.text, node, self.term())

    def term(self) -> Node:
        node = self.unary()
        while self._accept("op", "*", "×"):
            node = Binary("*", node, self.unary())
        return node

    def unary(self) -> Node:
        if self._accept("op", "-"):
            return Unary("-", self.unary())
        return self.atom()

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return Lit(int(t.text))
        if t.kind == "str":
            self.i += 1
            return Lit(t.text[1:-1])
        if t.kind == "kw" and t.text in ("true", "false"):
            self.i += 1
            return Lit(t.text == "true")
        if t.kind == "kw" and t.text == "if":
            return self.expr()
        if t.kind == "name":
            self.i += 1
            if t.text.endswith("'"):
                return Var(t.text[:-1], primed=True)
            return Var(t.text)
        if self._accept("op", "("):
            node = self.expr()
            self._expect("op", ")")
            return node
        self._fail(f"unexpected {t.text or 'end of input'!r}")


def parse(source: str) -> Node:
    if not isinstance(source, str):
        raise ExpressionError(f"expression must be a string, got {type(source).__name__}")
    return _Parser(source).parse()


# -- evaluation --------------------------------------------------------------

def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _type_name(v) -> str:
    if isinstance(v, bool):
        return "boolean"
    return "integer" if isinstance(v, int) else "symbol"


def _compile(node: Node, source: str) -> Callable[[Mapping], object]:
    if isinstance(node, Lit):
        value = node.value
        return lambda env: value
    if isinstance(node, Var):
        key = node.key

        def var(env):
            try:
                return env[key]
            except KeyError:
                raise ExpressionError(f"unbound variable {key!r}", source) from None
        return var
    if isinstance(node, IfElse):
        c, t, o = (_compile(n, source) for n in (node.cond, node.then, node.other))

        def if_else(env):
            cv = c(env)
            if not isinstance(cv, bool):
                raise ExpressionError(f"'if' needs a boolean condition, got {_type_name(cv)}", source)
            return t(env) if cv else o(env)
        return if_else
    if isinstance(node, Unary):
        f = _compile(node.operand, source)
        if node.op == "not":
            def not_(env):
                v = f(env)
                if not isinstance(v, bool):
                    raise ExpressionError(f"'not' needs a boolean, got {_type_name(v)}", source)
                return not v
            return not_

        def neg(env):
            v = f(env)
            if not _is_int(v):
                raise ExpressionError(f"'-' needs an integer, got {_type_name(v)}", source)
            return -v
        return neg

    left = _compile(node.left, source)
    right = _compile(node.right, source)
    op = node.op
    if op in ("and", "or"):
        is_and = op == "and"

        def logic(env):
            lv = left(env)
            if not isinstance(lv, bool):
                raise ExpressionError(f"'{op}' needs booleans, got {_type_name(lv)}", source)
            if lv is not is_and:
                return lv
            rv = right(env)
            if not isinstance(rv, bool):
                raise ExpressionError(f"'{op}' needs booleans, got {_type_name(rv)}", source)
            return rv
        return logic
    if op in ("==", "!="):
        want = op == "=="

        def eq(env):
            lv, rv = left(env), right(env)
            return (type(lv) is type(rv) and lv == rv) is want
        return eq
    if op in ("<", "<=", ">", ">="):
        fn = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}[op]

        def order(env):
            lv, rv = left(env), right(env)
            if not (_is_int(lv) and _is_int(rv)):
                raise ExpressionError(
                    f"'{op}' needs integers, got {_type_name(lv)} and {_type_name(rv)}", source)
            return fn(lv, rv)
        return order

    def arith(env):
        lv, rv = left(env), right(env)
        if not (_is_int(lv) and _is_int(rv)):
            raise ExpressionError(
                f"'{op}' needs integers, got {_type_name(lv)} and {_type_name(rv)}", source)
        if op == "+":
            return lv + rv
        if op == "-":
            return lv - rv
        return lv * rv
    return arith


def _collect(node: Node, out: set[Var]) -> None:
    if isinstance(node, Var):
        out.add(node)
    elif isinstance(node, Unary):
        _collect(node.operand, out)
    elif isinstance(node, Binary):
        _collect(node.left, out)
        _collect(node.right, out)
    elif isinstance(node, IfElse):
        for n in (node.cond, node.then, node.other):
            _collect(n, out)


class Expression:
    """A parsed, compiled expression; equal when the source text is equal."""

    __slots__ = ("source", "tree", "_fn", "variables")

    def __init__(self, source: str):
        self.source = source
        self.tree = parse(source)
        self._fn = _compile(self.tree, source)
        refs: set[Var] = set()
        _collect(self.tree, refs)
        self.variables = frozenset(refs)

    def __call__(self, env: Mapping) -> object:
        return self._fn(env)

    def test(self, env: Mapping) -> bool:
        """Evaluate as a guard; anything but a boolean is an error."""
        v = self._fn(env)
        if not isinstance(v, bool):
            raise ExpressionError(f"guard evaluated to {_type_name(v)}, expected boolean", self.source)
        return v

    @property
    def names(self) -> frozenset[str]:
        return frozenset(v.name for v in self.variables if not v.primed)

    @property
    def primed_names(self) -> frozenset[str]:
        return frozenset(v.name for v in self.variables if v.primed)

    def __eq__(self, other) -> bool:
        return isinstance(other, Expression) and other.source == self.source

    def __hash__(self) -> int:
        return hash(self.source)

    def __repr__(self) -> str:
        return f"Expression({self.source!r})"


TRUE = Expression("true")


def frame_env(abscissa: Mapping, ordinate: Mapping) -> dict:
    """Evaluation environment for frame predicates: ``x`` is pre-state, ``x'`` post-state."""
    env = dict(abscissa)
    for k, v in ordinate.items():
        env[k + "'"] = v
    return env
