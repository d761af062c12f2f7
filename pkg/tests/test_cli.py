import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from hardy_adjoint.cli import parse_complex, parse_function, parse_grid, parse_sweep, run, UsageError

DATA = Path(__file__).resolve().parents[1] / "data"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def sym(name):
    return DATA / f"{name}.json"


# -- parsing -----------------------------------------------------------------


@pytest.mark.parametrize("text, value", [("2i", 2j), ("1+i", 1 + 1j), ("-0.5-2i", -0.5 - 2j), ("1,2", 1 + 2j), ("i", 1j), ("3", 3)])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_errors():
    for bad in ("x", "1,y"):
        with pytest.raises(UsageError):
            parse_complex(bad)
    with pytest.raises(UsageError):
        parse_sweep("0:1")
    with pytest.raises(UsageError):
        parse_sweep("0:1:0")
    with pytest.raises(UsageError):
        parse_grid("0:1:2")
    with pytest.raises(UsageError):
        parse_function("h_2")


def test_parse_function_library():
    assert parse_function("g_2").name == parse_function('{"kind": "g", "p": 2}').name
    assert parse_function("K_2i")(1j) == pytest.approx(1 / (6 * 3.141592653589793))
    assert parse_function("P_0,1")(0.0) == pytest.approx(1 / 3.141592653589793)
    h = parse_function('{"sum": [{"coef": 2, "f": "g_2"}, {"coef": [0, 1], "f": "K_i"}]}')
    assert h(0.5) == pytest.approx(2 * parse_function("g_2")(0.5) + 1j * parse_function("K_i")(0.5))


def test_sweep_and_grid_shapes():
    assert list(parse_sweep("-2:2:5")) == [-2.0, -1.0, 0.0, 1.0, 2.0]
    assert len(parse_grid("0:1:3,1:2:2")) == 6


# -- classify ----------------------------------------------------------------


def test_classify_linear_bounded():
    code, out, _ = call("classify", "--symbol", sym("linear"))
    assert code == 0 and json.loads(out)["bounded"] is True


def test_classify_recip_unbounded_with_witness():
    code, out, _ = call("classify", "--symbol", sym("recip"))
    js = json.loads(out)
    assert code == 0 and js["bounded"] is False and js["obstruction"] is not None


def test_classify_square_not_selfmap():
    js = json.loads(call("classify", "--symbol", sym("square"))[1])
    assert js["is_selfmap"] is False and js["bounded"] is None


@pytest.mark.parametrize("name, bounded", [("qlp_gap1", True), ("qlp_gap_half", False)])
def test_classify_qlp(name, bounded):
    code, out, _ = call("classify", "--qlp", sym(name))
    assert code == 0 and json.loads(out)["bounded"] is bounded


# -- errors and exit codes ---------------------------------------------------


def test_malformed_json_position(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"num": [[1, 0],\n  [2, 0]\n "den": []}')
    code, out, err = call("classify", "--symbol", bad)
    assert code == 2 and out == ""
    assert f"{bad}:3:2: malformed JSON" in err


def test_invalid_symbol(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"num": "z"}')
    code, _, err = call("classify", "--symbol", bad)
    assert code == 2 and "invalid symbol" in err


def test_missing_file():
    code, _, err = call("classify", "--symbol", "/nonexistent/x.json")
    assert code == 2 and "cannot read" in err


def test_usage_errors():
    assert call()[0] == 2
    assert call("frobnicate")[0] == 2
    assert call("adjoint", "--symbol", sym("linear"), "--f", "g_2", "--z", "1,1", "--nodes", "8")[0] == 2
    assert call("adjoint", "--symbol", sym("linear"), "--f", "g_2", "--z", "1,1", "--tol", "0.5")[0] == 2
    assert call("adjoint", "--symbol", sym("linear"), "--f", "g_2")[0] == 2
    assert call("ac-measure", "--symbol", sym("example2"))[0] == 2


def test_not_applicable_is_usage_error():
    code, _, err = call("adjoint", "--symbol", sym("recip"), "--f", "g_2", "--z", "0,1")
    assert code == 2 and err.startswith("error:")
    code, _, _ = call("ac-measure", "--symbol", sym("recip"), "--alpha", "0")
    assert code == 2


# -- ac-measure --------------------------------------------------------------


def test_ac_measure_json():
    code, out, _ = call("ac-measure", "--symbol", sym("example2"), "--alpha", "0")
    js = json.loads(out)
    assert code == 0
    assert [a["mass"] for a in js["atoms"]] == pytest.approx([0.5, 0.5], abs=1e-12)
    assert js["total_mass"] == pytest.approx(1, abs=1e-10)


def test_ac_measure_sweep_csv():
    code, out, _ = call("ac-measure", "--symbol", sym("example2"), "--sweep=-2:2:5")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [float(r["alpha"]) for r in rows] == [-2, -1, 0, 1, 2]
    for r in rows:
        a = float(r["alpha"])
        s = (a * a + 4) ** 0.5
        assert float(r["mass_1"]) == pytest.approx((s - a) / (2 * s), abs=1e-10)
        assert float(r["total_mass"]) == pytest.approx(1, abs=1e-10)


def test_ac_measure_sweep_json():
    code, out, _ = call("ac-measure", "--symbol", sym("mixed"), "--sweep=0:1:2", "--format", "json")
    js = json.loads(out)
    assert code == 0 and len(js["measures"]) == 2
    assert js["measures"][0]["total_mass"] == pytest.approx(0.5, abs=1e-8)


# -- adjoint -----------------------------------------------------------------


def test_adjoint_linear():
    code, out, _ = call("adjoint", "--symbol", sym("linear"), "--f", "g_2", "--z", "0,1")
    res = json.loads(out)["results"][0]
    assert code == 0 and res["backend"] == "residue"
    assert complex(*res["value"]) == pytest.approx(-0.25j, abs=1e-14)


@pytest.mark.parametrize("backend, z", [("integral", "0,1"), ("ac", "0.5")])
def test_adjoint_backends(backend, z):
    code, out, _ = call("adjoint", "--symbol", sym("example2"), "--f", "K_2i", "--z", z, "--backend", backend)
    assert code == 0 and json.loads(out)["results"][0]["backend"] == backend


def test_adjoint_grid():
    code, out, _ = call("adjoint", "--symbol", sym("example2"), "--f", "g_2", "--grid=-1:1:3,0.5:1:2")
    assert code == 0 and len(json.loads(out)["results"]) == 6


# -- verify and transfer-check -----------------------------------------------


def test_verify_example2_passes():
    code, out, _ = call("verify", "--symbol", sym("example2"))
    js = json.loads(out)
    assert code == 0 and js["pass"]
    assert max(r["gap"] for r in js["duality"]) <= 1e-6
    assert max(r["defect"] for r in js["isometry"]) <= 1e-6


def test_verify_dilation_is_not_isometric():
    js = json.loads(call("verify", "--symbol", sym("dilation"))[1])
    assert js["pass"] and all(not r["expected_isometry"] for r in js["isometry"])


def test_verify_unbounded_fails():
    code, out, _ = call("verify", "--symbol", sym("recip"))
    assert code == 1 and json.loads(out)["pass"] is False


def test_transfer_check():
    code, out, _ = call("transfer-check", "--symbol", sym("linear"))
    js = json.loads(out)
    assert code == 0 and js["pass"] and js["two_path"]["max_error"] <= 1e-7
    code, out, _ = call("transfer-check", "--symbol", sym("recip"))
    assert code == 0 and json.loads(out)["weight_near_minus_one"]["blows_up"]


# -- determinism and entry point ---------------------------------------------


@pytest.mark.parametrize(
    "argv",
    [
        ("classify", "--symbol", sym("mixed")),
        ("ac-measure", "--symbol", sym("mixed"), "--alpha", "0.5"),
        ("ac-measure", "--symbol", sym("example2"), "--sweep=-2:2:5"),
        ("adjoint", "--symbol", sym("example2"), "--f", "g_2", "--z", "2i"),
    ],
)
def test_output_byte_identical(argv):
    assert call(*argv)[1] == call(*argv)[1]


def test_module_entry_point():
    cmd = [sys.executable, "-m", "hardy_adjoint", "classify", "--symbol", str(sym("example2"))]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["bounded"] is True
