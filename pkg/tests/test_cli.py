import json

import pytest

from ucqres.cli import main


def write(path, text):
    path.write_text(text)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    report = json.loads(out.out) if out.out.strip() else None
    return code, report, out.err


@pytest.fixture
def files(tmp_path):
    return {
        "loop": write(tmp_path / "loop.ucq", "R(x,x)\n"),
        "tri": write(tmp_path / "tri.ucq", "R(x,y)&R(y,z)&R(z,x)\n"),
        "rst": write(tmp_path / "rst.ucq", "R(x,y) & S(y,z) & T(z,x)\n"),
        "muc": write(tmp_path / "muc.ucq", "R(x,y)&R(y,x)\n"),
        "bad": write(tmp_path / "bad.ucq", "R(x,y\n"),
        "c2": write(tmp_path / "c2.graph", "a b\nb a\n"),
        "g": write(tmp_path / "g.graph", "a b\nb c\nc a\n"),
        "big": write(tmp_path / "big.graph", "".join(f"v{i} v{i + 1}\n" for i in range(30))),
        "dir": tmp_path,
    }


def test_classify_exit_codes(capsys, files):
    code, rep, _ = run(capsys, "classify", files["loop"])
    assert code == 10 and rep["body"]["results"]["case"] == "Loop"
    code, rep, _ = run(capsys, "classify", "-q", files["tri"])
    assert code == 11 and rep["body"]["results"]["complexity"] == "NPComplete"
    code, rep, err = run(capsys, "classify", files["bad"])
    assert code == 2 and rep is None and "expected" in err


def test_solve_decisions(capsys, files):
    code, rep, _ = run(capsys, "solve", "-q", files["muc"], "-g", files["c2"], "-u", "1")
    assert code == 0 and rep["body"]["results"]["decision"] is True
    code, rep, _ = run(capsys, "solve", "-q", files["muc"], "-g", files["c2"], "-u", "0")
    assert code == 1 and rep["body"]["results"]["value"] == 1
    code, _, err = run(capsys, "solve", "-q", files["muc"], "-g", files["big"], "--method", "brute")
    assert code == 2 and "guard" in err


def test_usage_errors(capsys, files):
    assert run(capsys, "solve", "-q", files["muc"])[0] == 2
    assert run(capsys, "solve", "-q", "missing.ucq", "-g", files["c2"])[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "reduce", "maxcut", "-g", files["g"], "--dual", "path:2", "-o", "x.graph")[0] == 2


def test_report_body_is_deterministic(capsys, files):
    a = run(capsys, "classify", files["tri"], "--seed", "3")[1]
    b = run(capsys, "classify", files["tri"], "--seed", "3")[1]
    assert json.dumps(a["body"], sort_keys=True) == json.dumps(b["body"], sort_keys=True)
    assert a["body"]["seed"] == 3 and len(a["body"]["inputs_sha256"]) == 64


def test_json_flag_writes_report(capsys, files):
    out = files["dir"] / "report.json"
    run(capsys, "classify", files["loop"], "--json", str(out))
    assert json.loads(out.read_text())["body"]["results"]["case"] == "Loop"


def test_verify_polymorphism(capsys):
    code, rep, _ = run(capsys, "verify", "polymorphism")
    res = rep["body"]["results"]
    assert code == 0 and res["passed_cases"] == 27 and res["pairs"] == 2016


def test_verify_dual(capsys, files):
    code, rep, _ = run(capsys, "verify", "dual", "--dual", "path:2", "--size", "4")
    assert code == 0
    edge = write(files["dir"] / "edge.graph", "0 1\n")
    code, _, err = run(capsys, "verify", "dual", "--dual", edge, "-q", files["tri"], "--size", "3")
    assert code == 1 and "duality up to 3" in err


def test_reduce_maxcut_then_verify(capsys, files):
    out = str(files["dir"] / "mc.graph")
    code, rep, _ = run(capsys, "reduce", "maxcut", "-g", files["g"], "-t", "1", "--dual", "path:2", "-o", out)
    assert code == 0
    side = json.loads((files["dir"] / "mc.json").read_text())
    for key in ("weights", "baseline", "threshold", "back_translation"):
        assert key in side
    code, rep, _ = run(capsys, "verify", "artifact", "-g", out)
    res = rep["body"]["results"]
    assert code == 0 and res["maxcut_decision"] is False and res["vcsp_decision"] is False


def test_reduce_sjlift_then_verify(capsys, files):
    g = write(files["dir"] / "t.graph", "x y 2 R_0\ny z 1 R_1\nz x 3 R_2\n")
    out = str(files["dir"] / "sj.graph")
    assert run(capsys, "reduce", "sjlift", "-q", files["tri"], "-g", g, "-o", out)[0] == 0
    code, rep, _ = run(capsys, "verify", "artifact", "-g", out)
    assert code == 0 and rep["body"]["results"]["lifted_resilience"] == 1
    stray = write(files["dir"] / "stray.graph", "x y\n")
    assert run(capsys, "reduce", "sjlift", "-q", files["tri"], "-g", stray, "-o", out)[0] == 2


def test_reduce_oit_then_verify(capsys, files):
    cl = write(files["dir"] / "cl.txt", "p q r\n")
    out = str(files["dir"] / "oit.graph")
    code, rep, _ = run(capsys, "reduce", "oit", "-q", files["rst"], "--clauses", cl, "-o", out)
    assert code == 0 and rep["body"]["results"]["soundness"]["sound"] is True
    code, rep, _ = run(capsys, "verify", "artifact", "-g", out)
    assert code == 0 and rep["body"]["results"]["target_decision"] is True


def test_verify_gadgets(capsys, files):
    code, rep, _ = run(capsys, "verify", "gadgets", "-q", files["rst"])
    res = rep["body"]["results"]
    assert code == 0
    assert res["optima"] == {"R": "3", "S": "5", "T": "5", "psi": "1"}
