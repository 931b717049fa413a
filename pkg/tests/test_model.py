from __future__ import annotations

import json

import pytest

from conesafe.errors import ConesafeError, DomainError, ModelError, RangeCheckError, ValidationError
from conesafe.model import bundled_model_path, load_model, loads_model

GATE_TEXT = bundled_model_path("gate.model").read_text()


def edited(fn) -> str:
    doc = json.loads(GATE_TEXT)
    fn(doc)
    return json.dumps(doc, indent=2)


def line_of(text: str, needle: str) -> int:
    return text[: text.index(needle)].count("\n") + 1


def test_gate_loads(gate):
    a = gate.automaton
    assert a.loci == ("IDLE", "FIRE")
    assert set(a.persistent) == {"mode"} and set(a.volatile) == {"sensor"}
    assert a.functionalities["fire"].duration == 2.0
    assert [c.name for c in gate.constraints] == ["gate_fires"]
    assert gate.start.locus == "IDLE" and gate.pattern.seed == 1
    crux = gate.crux_step("FIRE")
    assert crux.locus == "IDLE" and crux.abscissa == {"mode": 1, "sensor": 0}
    with pytest.raises(DomainError):
        gate.crux_step("NOPE")


def test_locator_not_total_is_located():
    text = edited(lambda d: d["locator"].pop("FIRE"))
    with pytest.raises(ValidationError) as info:
        loads_model(text, "g.model")
    err = info.value
    assert err.check == "locator not total"
    assert err.file == "g.model" and err.line is not None
    assert str(err).startswith(f"g.model:{err.line}:")


def test_range_check_names_variable_and_stimulus():
    text = edited(lambda d: d["functionalities"]["fire"]["assign"].update(mode="mode + 1"))
    with pytest.raises(RangeCheckError) as info:
        loads_model(text, "g.model")
    err = info.value
    assert err.variable == "mode" and err.value == 2
    assert dict(err.stimulus)["mode"] == 1
    assert err.line == line_of(text, '"fire": {')


def test_json_syntax_error_position():
    text = '{\n  "name": "x",\n  "loci": [1 2]\n}'
    with pytest.raises(ModelError) as info:
        loads_model(text, "bad.model")
    assert (info.value.line, info.value.column) == (3, 14)


def test_expression_error_column():
    text = edited(lambda d: d["jump"]["IDLE"]["rules"][0].update(when="sensor = = 1"))
    with pytest.raises(ModelError) as info:
        loads_model(text, "g.model")
    err = info.value
    needle = '"sensor = = 1"'
    assert err.line == line_of(text, needle)
    # column of the second '=' inside the string literal
    line_start = text.rfind("\n", 0, text.index(needle)) + 1
    assert err.column == text.index(needle) - line_start + 1 + 10
    assert err.path == "jump.IDLE.rules[0].when"


@pytest.mark.parametrize("edit, fragment", [
    (lambda d: d.update(extra=1), "unknown top-level keys"),
    (lambda d: d.pop("jump"), "missing required key 'jump'"),
    (lambda d: d["variables"]["mode"].update(kind="sticky"), "variable kind"),
    (lambda d: d["variables"]["mode"].update(domain=[0, 0.5]), "integers or strings"),
    (lambda d: d["functionalities"]["wait"].update(duration=0), "duration"),
    (lambda d: d["usage"]["distributions"].update(sensor=[[0, 0.5]]), "bad usage pattern"),
    (lambda d: d["cruxes"]["FIRE"].update(locus="MOON"), "crux locus"),
    (lambda d: d["cruxes"]["FIRE"].update(entry=["MOON"]), "entry loci"),
    (lambda d: d["constraints"][0].update(expr="speed' = 1"), "unknown variables"),
    (lambda d: d["start"].update(locus="MOON"), "bad start"),
])
def test_document_errors(edit, fragment):
    with pytest.raises(ModelError) as info:
        loads_model(edited(edit), "g.model")
    assert fragment in str(info.value)
    assert info.value.line is not None


def test_unreadable_file(tmp_path):
    with pytest.raises(ConesafeError) as info:
        load_model(tmp_path / "missing.model")
    assert "missing.model" in str(info.value)


def test_dangling_references():
    text = edited(lambda d: d["actuators"]["fire_act"].update(default="boom"))
    with pytest.raises(ValidationError, match="dangling functionality"):
        loads_model(text)


def test_faulty_model_differs_only_in_fire(gate, gate_faulty):
    assert gate_faulty.automaton.loci == gate.automaton.loci
    assert gate_faulty.automaton.stimulus == gate.automaton.stimulus
