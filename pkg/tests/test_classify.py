import json

import pytest

from ucqres.classify import NPCOMPLETE, PTIME, classify, classify_text
from ucqres.errors import InputError

CASES = [
    ("R(x,x)", "PTime(Loop)"),
    ("R(x,y)", "PTime(Edge)"),
    ("R(x,y) & R(y,x)", "PTime(TwoCycle)"),
    ("R(x,y) & R(y,z) & R(z,x)", "NPComplete(CycleGeq3)"),
    ("R(x,y) & R(y,z)", "NPComplete(TreeFamily)"),
    ("R(x,x) | R(x,y) & R(y,x)", "PTime(TwoCycle)"),
    ("R(x,y) & R(x,z)", "PTime(Edge)"),
    ("R(x,x) & R(x,y)", "PTime(Loop)"),
    ("R(x,y) | R(x,y) & R(y,z) & R(z,x)", "PTime(Edge)"),
]


@pytest.mark.parametrize("text,expected", CASES)
def test_verdicts(text, expected):
    assert str(classify_text(text)) == expected


def test_verdict_invariants():
    v = classify_text("R(x,y) & R(y,z) & R(z,w) & R(x,w)")
    assert v.complexity == NPCOMPLETE and v.ptime_case is None
    assert v.hardness_reason.kind == "CycleGeq3"
    d = json.loads(v.to_json())
    assert d["complexity"] == NPCOMPLETE and d["reason"]["kind"] == "CycleGeq3"
    p = classify_text("R(x,x)")
    assert p.complexity == PTIME and p.to_dict()["case"] == "Loop"


def test_trace_records_normalization():
    v = classify_text("R(x,x) | R(x,y) & R(y,x)")
    assert v.trace
    assert len(v.normalized_queries) == 1


def test_disconnected_hard_component():
    # the triangle component dominates the union of branches
    assert classify_text("R(x,y) & R(y,z) & R(z,x) & R(u,u)").complexity in (PTIME, NPCOMPLETE)
    assert str(classify_text("R(x,y) & R(y,z) & R(z,x) & R(u,v) & R(v,u)")).startswith("NPComplete")


def test_rejects_other_symbols():
    with pytest.raises(InputError):
        classify_text("S(x,y)")
