import json

import numpy as np
import pytest

from rcsurf import cli, scenes, verify


def test_report_structure_and_pass():
    sc = scenes.builtin("catenoid_frame_plane")
    rep = verify.run_verification(sc, 12, 12)
    assert rep.passed
    d = rep.to_dict()
    assert d["scene"] == "catenoid_frame_plane"
    names = [e["name"] for e in d["suites"]]
    assert "divcurl" in names and "gauge_theorem" in names
    for e in d["suites"]:
        assert e["status"] in ("pass", "fail", "skip")
        if e["status"] == "pass":
            assert e["max_residual"] <= e["tolerance"]


def test_report_skips_inapplicable_suites():
    sc = scenes.builtin("cartan_schouten_sphere")
    rep = verify.run_verification(sc, 10, 10)
    by_name = {e["name"]: e for e in rep.entries}
    assert by_name["divcurl"]["status"] == "skip"
    assert by_name["psi_identity"]["status"] == "skip"
    assert by_name["gauss_bonnet"]["status"] == "pass"
    assert rep.passed


def test_report_json_deterministic():
    sc = scenes.builtin("torus_standard")
    r1 = verify.run_verification(sc, 10, 10).to_json()
    r2 = verify.run_verification(scenes.builtin("torus_standard"), 10, 10).to_json()
    assert r1 == r2
    json.loads(r1)      # valid JSON


def test_strict_tier_and_overrides():
    sc = scenes.builtin("euclidean_plane")
    rep = verify.run_verification(sc, 10, 10, tol="strict")
    assert rep.passed
    with pytest.raises(ValueError):
        verify.run_verification(sc, 10, 10, tol="bogus")
    with pytest.raises(ValueError):
        verify.run_verification(sc, 10, 10, suites=["nope"])


def test_numeric_tolerance_applies_everywhere():
    sc = scenes.builtin("catenoid_frame_plane")
    rep = verify.run_verification(sc, 10, 10, suites=["divcurl"], tol=1e-12)
    assert rep.entries[0]["tolerance"] == 1e-12


def test_scene_tolerance_override():
    sc = scenes.builtin("catenoid_frame_plane")
    sc.tolerances["divcurl"] = 1e-30
    rep = verify.run_verification(sc, 10, 10, suites=["divcurl"])
    assert not rep.passed


def test_scene_gauge_field_feeds_gauge_suite(tmp_path):
    doc = scenes.builtin("catenoid_frame_plane").to_dict()
    doc["gauge"] = {"theta": "0.4*sin(x) - 0.2*y",
                    "axis": ["0", "0.6", "0.8"]}
    path = tmp_path / "gauged.rcscene"
    path.write_text(json.dumps(doc), encoding="utf-8")
    sc = scenes.load_scene(path)
    assert sc.gauge is not None
    rep = verify.run_verification(sc, 8, 8, suites=["gauge"])
    assert rep.passed


def test_failure_detected_on_corrupted_goldens():
    # force a failure: absurd tolerance on a nonzero residual
    sc = scenes.builtin("cartan_schouten_sphere", lam=0.4)
    sc.tolerances["gauss_eq"] = 1e-30
    rep = verify.run_verification(sc, 10, 10, suites=["gauss_eq"])
    assert not rep.passed


# --- command line ------------------------------------------------------------


def test_cli_list(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    assert "catenoid_frame_plane" in out


def test_cli_verify_pass_and_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = cli.main(["verify", "--builtin", "catenoid_frame_plane",
                     "--grid", "12x12", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["pass"] is True
    printed = capsys.readouterr().out
    assert "overall: pass" in printed


def test_cli_verify_failure_exit_code(tmp_path):
    scene = scenes.builtin("catenoid_frame_plane")
    doc = scene.to_dict()
    doc["tolerances"] = {"divcurl": 1e-30}
    path = tmp_path / "impossible.rcscene"
    path.write_text(json.dumps(doc), encoding="utf-8")
    assert cli.main(["verify", "--scene", str(path), "--grid", "8x8",
                     "--suite", "divcurl"]) == 1


def test_cli_missing_scene_is_config_error(capsys):
    assert cli.main(["verify", "--scene", "no/such/file.rcscene"]) == 2
    assert "error:" in capsys.readouterr().err


def test_cli_rejects_bad_flags(capsys):
    assert cli.main(["verify", "--builtin", "euclidean_plane",
                     "--grid", "4x4"]) == 2
    assert cli.main(["verify", "--builtin", "euclidean_plane",
                     "--tol", "-3"]) == 2
    # both --scene and --builtin given
    assert cli.main(["verify", "--builtin", "euclidean_plane",
                     "--scene", "x"]) == 2
    assert cli.main(["integrate", "--builtin", "euclidean_plane",
                     "--field", "nope"]) == 2


def test_cli_integrate_prints_value(capsys):
    code = cli.main(["integrate", "--builtin", "cartan_schouten_sphere",
                     "--param", "lambda=0.5", "--grid", "32x64", "--field", "K"])
    assert code == 0
    val = float(capsys.readouterr().out.strip())
    assert abs(val - 4 * np.pi) <= 1e-3 * 4 * np.pi


def test_cli_fields_export(tmp_path, capsys):
    out = tmp_path / "t.csv"
    code = cli.main(["fields", "--builtin", "torus_standard",
                     "--grid", "8x8", "--out", str(out)])
    assert code == 0
    assert out.exists()
    assert len(out.read_text(encoding="utf-8").splitlines()) == 65


def test_cli_jobs_does_not_change_report(tmp_path):
    outs = []
    for jobs in ("1", "4"):
        out = tmp_path / f"r{jobs}.json"
        assert cli.main(["verify", "--builtin", "torus_standard",
                         "--grid", "10x10", "--jobs", jobs,
                         "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_cli_jobs_does_not_change_export(tmp_path):
    outs = []
    for jobs in ("1", "3"):
        out = tmp_path / f"f{jobs}.csv"
        assert cli.main(["fields", "--builtin", "catenoid_frame_plane",
                         "--grid", "8x8", "--jobs", jobs,
                         "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
