"""Loader for ``.model`` documents (JSON with embedded expression strings).

Top-level keys::

    variables        {name: {"domain": [...], "kind": "persistent" | "volatile"}}
    functionalities  {name: {"assign": {var: expr}, "duration": seconds}}
    actuators        {name: {"rules": [{"when": expr, "use": functionality}], "default": functionality}}
    loci             [name, ...]
    locator          {locus: actuator}
    jump             {locus: {"rules": [{"when": expr, "goto": locus}], "default": locus}}
    usage            {"mode": "independent", "distributions": {var: [[value, p], ...]}, "seed": int}
                     or {"mode": "trace", "trace": [{var: value}, ...]}
    constraints      [{"name": str, "expr": frame predicate}]
    cruxes           {name: {"locus": locus, "where": frame predicate, "entry": [locus, ...]}}
    start            {"locus": locus, "stimulus": {var: value}}

Only the first six are required.  Errors carry ``file:line:column``.
"""

from __future__ import annotations

import json
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

from .automaton import Actuator, Automaton, Functionality, JumpTable, Step, make_consistent_step
from .demonstration import SafetyConstraint
from .ensemble import DEFAULT_BOUND, Basis, Ensemble
from .errors import ConesafeError, DomainError, ExpressionError, ModelError, RangeCheckError, ValidationError
from .expr import Expression, frame_env
from .profile import UsagePattern

_REQUIRED = ("variables", "functionalities", "actuators", "loci", "locator", "jump")
_KNOWN = set(_REQUIRED) | {"name", "description", "usage", "constraints", "cruxes", "start"}


@dataclass(frozen=True)
class CruxSpec:
    name: str
    locus: str
    where: Expression | None = None
    entry: frozenset[str] = frozenset()


@dataclass
class Model:
    automaton: Automaton
    pattern: UsagePattern | None
    constraints: list[SafetyConstraint]
    cruxes: dict[str, CruxSpec]
    start: Step | None
    name: str = ""
    source: str = ""
    document: dict = field(default_factory=dict, repr=False)

    def crux_step(self, name: str) -> Step:
        """First canonical step at the crux locus whose frame satisfies its filter."""
        if name not in self.cruxes:
            raise DomainError(f"unknown crux {name!r}; defined: {sorted(self.cruxes)}")
        spec = self.cruxes[name]
        for s in self.automaton.canonical_steps():
            if s.locus != spec.locus:
                continue
            if spec.where is None or spec.where.test(frame_env(s.abscissa, s.ordinate)):
                return s
        raise DomainError(f"crux {name!r} matches no step")


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    return line, offset - (text.rfind("\n", 0, offset) + 1) + 1


class _Doc:
    """Document with enough of its source text to point diagnostics at it."""

    def __init__(self, text: str, file: str):
        self.text = text
        self.file = file

    def locate(self, *needles: str) -> tuple[int | None, int | None]:
        # most specific needle first; fall back to coarser ones
        for n in needles:
            if not n:
                continue
            i = self.text.find(n)
            if i >= 0:
                return _line_col(self.text, i)
        return None, None

    def fail(self, message: str, path: str, *needles: str) -> ModelError:
        line, col = self.locate(*needles, _key(path.split(".")[-1]) if path else "")
        err = ModelError(message, path, line, col)
        return err.locate(self.file, line, col)

    def expr(self, source, path: str) -> Expression:
        if not isinstance(source, str):
            raise self.fail(f"expected an expression string, got {type(source).__name__}", path)
        try:
            return Expression(source)
        except ExpressionError as exc:
            lit = json.dumps(source, ensure_ascii=False)
            line, col = self.locate(lit)
            if line is not None and exc.column is not None:
                col += exc.column  # opening quote, then 1-based column inside the string
            raise ModelError(exc.message, path, line, col).locate(self.file, line, col) from exc


def _key(name: str) -> str:
    return json.dumps(name, ensure_ascii=False) + ":" if name else ""


def _obj(doc: _Doc, value, path: str, kind=dict):
    if not isinstance(value, kind):
        raise doc.fail(f"expected {'an object' if kind is dict else 'a list'}", path)
    return value


def load_model(path: str | Path, bound: int = DEFAULT_BOUND) -> Model:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelError(f"cannot read model: {exc.strerror}").locate(str(path), None, None) from exc
    return loads_model(text, str(path), bound)


def loads_model(text: str, file: str = "<model>", bound: int = DEFAULT_BOUND) -> Model:
    doc = _Doc(text, file)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(exc.msg).locate(file, exc.lineno, exc.colno) from exc
    raw = _obj(doc, raw, "")
    unknown = sorted(set(raw) - _KNOWN)
    if unknown:
        raise doc.fail(f"unknown top-level keys {unknown}", unknown[0], _key(unknown[0]))
    for k in _REQUIRED:
        if k not in raw:
            raise ModelError(f"missing required key {k!r}", k).locate(file, 1, 1)
    try:
        return _build(doc, raw, bound)
    except ModelError:
        raise
    except ConesafeError as exc:
        if exc.line is None:
            exc.locate(file, *_locate_error(doc, exc))
        raise


def _locate_error(doc: _Doc, exc: ConesafeError) -> tuple[int | None, int | None]:
    # validation errors name the catalog entry involved; find it in the text
    if isinstance(exc, RangeCheckError):
        return doc.locate(_key(exc.functionality), _key("functionalities"))
    if isinstance(exc, ValidationError):
        names = re.findall(r"'([^']+)'", exc.detail)
        section = {"locator": "locator", "jump": "jump", "actuator": "actuators",
                   "functionality": "functionalities"}
        keys = [_key(n) for n in names]
        for word, sec in section.items():
            if word in exc.check:
                keys.append(_key(sec))
        return doc.locate(*keys)
    return None, None


def _build(doc: _Doc, raw: Mapping, bound: int) -> Model:
    variables = _obj(doc, raw["variables"], "variables")
    persistent, stimulus = {}, {}
    for name, spec in variables.items():
        p = f"variables.{name}"
        spec = _obj(doc, spec, p)
        dom = _obj(doc, spec.get("domain"), p + ".domain", list)
        kind = spec.get("kind", "persistent")
        if kind not in ("persistent", "volatile"):
            raise doc.fail(f"variable kind must be persistent or volatile, got {kind!r}", p, _key(name))
        if any(isinstance(v, (bool, float)) or not isinstance(v, (int, str)) for v in dom):
            raise doc.fail("domain values must be integers or strings", p, _key(name))
        stimulus[name] = dom
        if kind == "persistent":
            persistent[name] = dom
    try:
        stim = Ensemble(stimulus)
        pers = Ensemble(persistent) if persistent else None
    except DomainError as exc:
        raise doc.fail(str(exc), "variables", _key("variables")) from exc
    if pers is None:
        raise doc.fail("at least one persistent variable is required", "variables", _key("variables"))
    basis = Basis(stim, pers)

    funcs = []
    for name, spec in _obj(doc, raw["functionalities"], "functionalities").items():
        p = f"functionalities.{name}"
        spec = _obj(doc, spec, p)
        assign = _obj(doc, spec.get("assign", {}), p + ".assign")
        exprs = {var: doc.expr(e, f"{p}.assign.{var}") for var, e in assign.items()}
        dur = spec.get("duration", 1.0)
        if isinstance(dur, bool) or not isinstance(dur, (int, float)) or not dur > 0:
            raise doc.fail(f"duration must be a positive number of seconds, got {dur!r}", p, _key(name))
        funcs.append(Functionality(name, exprs, float(dur)))

    acts = []
    for name, spec in _obj(doc, raw["actuators"], "actuators").items():
        p = f"actuators.{name}"
        spec = _obj(doc, spec, p)
        rules = []
        for i, r in enumerate(_obj(doc, spec.get("rules", []), p + ".rules", list)):
            r = _obj(doc, r, f"{p}.rules[{i}]")
            rules.append((doc.expr(r.get("when"), f"{p}.rules[{i}].when"), r.get("use")))
        if "default" not in spec:
            raise doc.fail("actuator needs a default functionality", p, _key(name))
        acts.append(Actuator(name, tuple(rules), spec["default"]))

    loci = _obj(doc, raw["loci"], "loci", list)
    locator = _obj(doc, raw["locator"], "locator")
    jump = {}
    for lam, spec in _obj(doc, raw["jump"], "jump").items():
        p = f"jump.{lam}"
        spec = _obj(doc, spec, p)
        rules = []
        for i, r in enumerate(_obj(doc, spec.get("rules", []), p + ".rules", list)):
            r = _obj(doc, r, f"{p}.rules[{i}]")
            rules.append((doc.expr(r.get("when"), f"{p}.rules[{i}].when"), r.get("goto")))
        if "default" not in spec:
            raise doc.fail("jump table needs a default locus", p, _key(lam))
        jump[lam] = JumpTable(tuple(rules), spec["default"])

    automaton = Automaton(basis, funcs, acts, loci, locator, jump, bound)

    pattern = None
    if "usage" in raw:
        u = _obj(doc, raw["usage"], "usage")
        try:
            pattern = UsagePattern(
                u.get("mode", "independent"),
                {k: [tuple(x) for x in v] for k, v in u.get("distributions", {}).items()},
                list(u.get("trace", [])),
                int(u.get("seed", 0)),
            )
            pattern.validate(automaton)
        except (DomainError, TypeError, ValueError) as exc:
            raise doc.fail(f"bad usage pattern: {exc}", "usage", _key("usage")) from exc

    constraints = []
    for i, c in enumerate(_obj(doc, raw.get("constraints", []), "constraints", list)):
        c = _obj(doc, c, f"constraints[{i}]")
        expr = doc.expr(c.get("expr"), f"constraints[{i}].expr")
        _check_frame_names(doc, automaton, expr, f"constraints[{i}].expr")
        constraints.append(SafetyConstraint(str(c.get("name", f"constraint{i}")), expr))

    cruxes = {}
    for name, spec in _obj(doc, raw.get("cruxes", {}), "cruxes").items():
        p = f"cruxes.{name}"
        spec = _obj(doc, spec, p)
        if spec.get("locus") not in automaton.locator:
            raise doc.fail(f"crux locus {spec.get('locus')!r} is not a locus", p, _key(name))
        where = None
        if spec.get("where") is not None:
            where = doc.expr(spec["where"], p + ".where")
            _check_frame_names(doc, automaton, where, p + ".where")
        entry = frozenset(_obj(doc, spec.get("entry", []), p + ".entry", list))
        bad = sorted(entry - set(automaton.loci))
        if bad:
            raise doc.fail(f"entry loci {bad} are not loci", p, _key(name))
        cruxes[name] = CruxSpec(name, spec["locus"], where, entry)

    start = None
    if "start" in raw:
        s = _obj(doc, raw["start"], "start")
        try:
            start = make_consistent_step(automaton, s.get("locus"), s.get("stimulus", {}))
        except DomainError as exc:
            raise doc.fail(f"bad start: {exc}", "start", _key("start")) from exc

    return Model(automaton, pattern, constraints, cruxes, start, str(raw.get("name", "")), doc.file, dict(raw))


def _check_frame_names(doc: _Doc, automaton: Automaton, expr: Expression, path: str) -> None:
    unknown = sorted(expr.names - set(automaton.stimulus))
    unknown += sorted(n + "'" for n in expr.primed_names - set(automaton.persistent))
    if unknown:
        raise doc.fail(f"unknown variables {unknown}", path, json.dumps(expr.source, ensure_ascii=False))


def bundled_model_path(name: str) -> Path:
    """Path of a model shipped with the package, e.g. ``gate.model``."""
    return Path(__file__).parent / "data" / name
