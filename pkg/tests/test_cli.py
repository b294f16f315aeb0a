import io
import json
import math
import subprocess
import sys

import pytest

from timespace import cli


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv):
    code, out, err = run(*argv, "--output", "json")
    return code, json.loads(out), err


def test_validate_minkowski():
    code, rep, _ = run_json("validate", "minkowski.toml", "--samples", "1000")
    assert code == 0
    assert rep["exit_status"] == 0
    assert rep["results"]["n_violations"] == 0
    assert rep["spec"] == "minkowski"


def test_validate_cone():
    code, rep, _ = run_json("validate", "cone_cylinder.toml", "--samples", "1000")
    assert code == 0 and rep["results"]["n_violations"] == 0


def test_validate_broken():
    code, rep, _ = run_json("validate", "broken_riemannian_g.toml", "--samples", "50")
    assert code == 1
    kinds = {v["kind"] for v in rep["results"]["violations"]}
    assert "WrongSignature" in kinds


def test_split_minkowski():
    code, rep, _ = run_json("split", "minkowski.toml", "--point", "0,0,0,0")
    assert code == 0
    assert rep["results"]["eigenvalue"] == -1.0
    assert rep["results"]["direction"] == [1.0, 0.0, 0.0, 0.0]
    assert rep["results"]["causal_class"] == "timelike"


def test_split_schwarzschild():
    code, rep, _ = run_json("split", "schwarzschild.toml", "--point", "0,4,1.5707963,0")
    assert code == 0
    assert rep["results"]["eigenvalue"] == pytest.approx(-0.5, abs=1e-12)


def test_split_accepts_expressions():
    code, rep, _ = run_json("split", "schwarzschild.toml", "--point", "0,2*M+2,pi/2,0")
    assert code == 0
    assert rep["results"]["point"][2] == math.pi / 2


def test_split_excluded_point():
    code, rep, err = run_json("split", "schwarzschild.toml", "--point", "0,2,1.5707963,0")
    assert code == 1
    assert rep["error"]["type"] == "ExcludedPoint"
    assert "ExcludedPoint" in err


@pytest.mark.parametrize("bad", ["0,0,0", "0,0,0,zz", "0,0,(0,0"])
def test_split_bad_point(bad):
    code, out, err = run("split", "minkowski.toml", "--point", bad)
    assert code == 1
    assert err.startswith("error:")


def test_missing_spec_file(tmp_path):
    code, _, err = run("validate", str(tmp_path / "nope.toml"))
    assert code == 1 and "error" in err


def test_orient_cone_not_orientable():
    code, rep, _ = run_json("orient", "cone_cylinder.toml")
    assert code == 2 and rep["exit_status"] == 2
    loops = {l["loop"]: l["holonomy"] for l in rep["results"]["loops"]}
    assert loops == {"theta": -1, "theta_twice": 1}
    assert rep["results"]["verdict"] == "not-orientable"


def test_orient_minkowski_and_schwarzschild():
    for name in ("minkowski.toml", "schwarzschild.toml"):
        code, rep, err = run_json("orient", name)
        assert code == 0
        assert all(l["holonomy"] == 1 for l in rep["results"]["loops"])
        assert rep["warnings"]
        assert "tested loops" in err


def test_orient_doubleloop_has_caveat():
    code, out, _ = run("orient", "cone_cylinder_doubleloop.toml")
    assert code == 0
    assert "warning:" in out and "tested loops" in out
    assert "holonomy +1" in out


def test_section_cos_theta():
    code, rep, _ = run_json("section", "cone_cylinder.toml", "--multiplier", "cos(theta)",
                            "--grid", "theta=0:2*pi:512")
    assert code == 0
    centers = sorted(z["center"][2] for z in rep["results"]["zero_regions"])
    step = 2 * math.pi / 512
    assert len(centers) == 2
    assert abs(centers[0] - math.pi / 2) <= step and abs(centers[1] - 1.5 * math.pi) <= step


def test_section_minkowski_constant():
    code, rep, _ = run_json("section", "minkowski.toml", "--multiplier", "1",
                            "--grid", "x=-1:1:5,y=0:1:3")
    assert code == 0
    assert rep["results"]["zero_regions"] == []
    assert all(s["value"] == [1.0, 0.0, 0.0, 0.0] for s in rep["results"]["samples"])


def test_section_bad_grid():
    code, _, err = run("section", "minkowski.toml", "--multiplier", "1", "--grid", "x=0:1")
    assert code == 1 and "--grid" in err


def test_derive_time():
    code, rep, _ = run_json("derive", "minkowski.toml", "--field", "t,0,0,0",
                            "--point", "0,0,0,0", "--multiplier", "2")
    assert code == 0
    assert rep["results"]["derivative"] == [2.0, 0.0, 0.0, 0.0]


def test_derive_zero_multiplier_warns():
    code, rep, _ = run_json("derive", "minkowski.toml", "--field", "x*t,y,0,0",
                            "--point", "1,2,3,4", "--multiplier", "0")
    assert code == 0
    assert rep["results"]["derivative"] == [0.0, 0.0, 0.0, 0.0]
    assert rep["warnings"]


def test_derive_space():
    code, rep, _ = run_json("derive", "minkowski.toml", "--mode", "space", "--coeffs", "1,0,0",
                            "--field", "x,0,0,0", "--point", "0,1,2,3")
    assert code == 0
    assert rep["results"]["derivative"] == [1.0, 0.0, 0.0, 0.0]


def test_derive_space_requires_coeffs():
    code, _, err = run("derive", "minkowski.toml", "--mode", "space", "--field", "x,0,0,0",
                       "--point", "0,0,0,0")
    assert code == 1 and "--coeffs" in err


def test_derive_unknown_variable():
    code, rep, _ = run_json("derive", "minkowski.toml", "--field", "w,0,0,0", "--point", "0,0,0,0")
    assert code == 1
    assert rep["error"]["type"] == "UnknownCoordinate"


def test_derive_verbose_prints_christoffel():
    code, out, _ = run("derive", "schwarzschild.toml", "--field", "1,0,0,0",
                       "--point", "0,4,pi/2,0", "--verbose")
    assert code == 0
    assert "Gamma^r_{t t} = 0.03125" in out


def test_christoffel_dump():
    code, rep, _ = run_json("christoffel", "schwarzschild.toml", "--point", "0,4,pi/2,0")
    assert code == 0
    assert rep["results"]["gamma"][1][0][0] == pytest.approx(0.03125, abs=1e-12)
    code, rep, _ = run_json("christoffel", "minkowski.toml", "--point", "0,0,0,0")
    assert rep["results"]["nonzero"] == []


def test_json_roundtrip_lossless():
    code, out, _ = run("split", "schwarzschild.toml", "--point", "0,5.3,1.1,0.2", "--output", "json")
    data = json.loads(out)
    again = json.loads(json.dumps(data))
    assert again == data
    # 17 significant digits survive a float round trip exactly
    assert cli.to_json(data) == cli.to_json(again)


def test_json_deterministic():
    argv = ("section", "cone_cylinder.toml", "--multiplier", "cos(theta)",
            "--grid", "theta=0:2*pi:64", "--output", "json")
    assert run(*argv)[1] == run(*argv)[1]


def test_to_json_formats():
    assert cli.to_json({"a": 0.1, "b": [1, True, None], "c": float("nan")}) == (
        '{\n  "a": 0.10000000000000001,\n  "b": [1, true, null],\n  "c": null\n}')


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "timespace", "orient", "cone_cylinder.toml"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "verdict: not-orientable" in proc.stdout
