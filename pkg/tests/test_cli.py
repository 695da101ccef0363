import json
import subprocess
import sys
from pathlib import Path

import pytest

from geoverify import catalog, specio
from geoverify.cli import main

GOLDEN = Path(__file__).parent / "golden"


def run(argv):
    return main([str(a) for a in argv])


@pytest.mark.parametrize("args, golden", [
    (["catalog", "emit", "kundt3", "--param", "C=sin(x)*u"], "kundt3.json"),
    (["catalog", "emit", "plane_wave", "--param", "n=2"], "plane_wave.json"),
    (["check", GOLDEN / "kundt3.json", "--points", "100", "--seed", "7"], "kundt3_check_seed7.json"),
    (["check", GOLDEN / "plane_wave.json", "--points", "10", "--seed", "3"], "plane_wave_check_seed3.json"),
    (["geodesic", GOLDEN / "kundt3.json", "--x0", "0,0,0", "--v0", "0.3,0.5,2", "--tmax", "0.45",
      "--step", "0.01", "--track", "p", "--fit", "reciprocal", "--witness"], "kundt3_geodesic.json"),
])
def test_golden_files(tmp_path, args, golden):
    out = tmp_path / "out.json"
    assert run(args + ["--out", out]) == 0
    assert out.read_bytes() == (GOLDEN / golden).read_bytes()


def test_check_report_contents():
    report = json.loads((GOLDEN / "kundt3_check_seed7.json").read_text())
    ids = {c["check_id"] for c in report["checks"]}
    assert {"nabla_xi", "nabla_S", "bianchi_components", "kundt_condition", "kundt_geodesic",
            "kundt_expansion", "kundt_shear", "kundt_twist"} <= ids
    assert report["overall_pass"] is True
    assert all(c["pass"] for c in report["checks"])
    assert [c["check_id"] for c in report["checks"]] == sorted(ids)
    assert report["meta"]["vol_sign"] == -1


def test_reports_are_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    spec = GOLDEN / "plane_wave.json"
    assert run(["check", spec, "--points", "5", "--seed", "11", "--out", a]) == 0
    assert run(["check", spec, "--points", "5", "--seed", "11", "--out", b]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_thread_count_does_not_change_report(tmp_path, monkeypatch):
    spec = GOLDEN / "kundt3.json"
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("GEOVERIFY_THREADS", threads)
        out = tmp_path / f"r{threads}.json"
        assert run(["check", spec, "--points", "5", "--seed", "1", "--out", out]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_check_exit_codes(tmp_path, capsys):
    broken = tmp_path / "broken.json"
    broken.write_text((GOLDEN / "kundt3.json").read_text()[:200])
    assert run(["check", broken]) == 2

    a0 = tmp_path / "kundt3_a0.json"
    a0.write_text(json.dumps({"catalog": "kundt3", "params": {"a": 0}}))
    assert run(["check", a0]) == 2
    assert "a != 0" in capsys.readouterr().err

    assert run(["check", tmp_path / "missing.json"]) == 2
    assert run(["check", GOLDEN / "kundt3.json", "--tol", "oops"]) == 2
    assert run(["check", GOLDEN / "kundt3.json", "--points", "0"]) == 2

    # an impossible tolerance turns a passing check into a failure
    out = tmp_path / "r.json"
    assert run(["check", GOLDEN / "kundt3.json", "--points", "3", "--tol", "bianchi_general=0",
                "--out", out]) == 1
    report = json.loads(out.read_text())
    assert report["overall_pass"] is False


def test_bare_metric_runs_default_suite(tmp_path):
    spec = catalog.de_sitter(2).with_(manifest=None)
    path = tmp_path / "bare.json"
    path.write_text(specio.dump_spec(spec))
    out = tmp_path / "r.json"
    assert run(["check", path, "--points", "5", "--out", out]) == 0
    ids = [c["check_id"] for c in json.loads(out.read_text())["checks"]]
    assert "metric_compatibility" in ids and "torsion_closed_form" in ids


def test_catalog_list(capsys):
    assert run(["catalog", "list"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) >= 8
    assert all("[" in line and "]" in line for line in lines)


@pytest.mark.parametrize("args", [
    ["catalog", "emit", "nosuch"],
    ["catalog", "emit", "kundt3", "--param", "a"],
    ["catalog", "emit", "kundt3", "--param", "b=1"],
    ["catalog", "emit", "kundt3", "--param", "a=0"],
])
def test_catalog_exit_codes(args):
    assert run(args) == 2


def test_emitted_plane_wave_passes_check(tmp_path):
    spec = tmp_path / "pw.json"
    assert run(["catalog", "emit", "plane_wave", "--param", "n=2", "--out", spec]) == 0
    assert run(["check", spec, "--points", "10", "--out", tmp_path / "r.json"]) == 0


def test_spec_round_trip():
    for name in catalog.ENTRIES:
        spec = catalog.build(name)
        again = specio.spec_from_dict(json.loads(specio.dump_spec(spec)))
        assert specio.dump_spec(again) == specio.dump_spec(spec)


def test_geodesic_kundt_reciprocal():
    doc = json.loads((GOLDEN / "kundt3_geodesic.json").read_text())
    assert doc["fit"]["pass"]
    assert abs(abs(doc["fit"]["t_singular"]) - 0.5) < 1e-3
    assert doc["witness"]["halted"]


def test_geodesic_warped_arctan(tmp_path):
    spec = tmp_path / "w.json"
    assert run(["catalog", "emit", "warped_riemannian", "--out", spec]) == 0
    out = tmp_path / "g.json"
    code = run(["geodesic", spec, "--x0", "0,0,0,0", "--v0", "0,1,0,0", "--tmax", "0.45",
                "--track", "xi", "--fit", "arctan", "--no-trace", "--out", out])
    doc = json.loads(out.read_text())
    assert code == 0
    assert abs(doc["fit"]["params"]["m"] + 1.0) < 1e-4
    assert "trace" not in doc


def test_geodesic_exit_codes(tmp_path):
    spec = tmp_path / "m.json"
    assert run(["catalog", "emit", "minkowski", "--out", spec]) == 0
    out = tmp_path / "g.json"
    # constant alpha: model mismatch
    assert run(["geodesic", spec, "--x0", "0,0,0,0", "--v0", "1,0,0,0", "--tmax", "0.5",
                "--track", "1,0,0,0", "--fit", "reciprocal", "--out", out]) == 1
    assert json.loads(out.read_text())["fit"]["pass"] is False
    bad = [
        ["--x0", "0,0,0", "--v0", "1,0,0,0", "--tmax", "0.5"],
        ["--x0", "0,a,0,0", "--v0", "1,0,0,0", "--tmax", "0.5"],
        ["--x0", "5,0,0,0", "--v0", "1,0,0,0", "--tmax", "0.5"],
        ["--x0", "0,0,0,0", "--v0", "1,0,0,0", "--tmax", "0.5", "--step", "0"],
        ["--x0", "0,0,0,0", "--v0", "1,0,0,0", "--tmax", "0.5", "--fit", "reciprocal"],
        ["--x0", "0,0,0,0", "--v0", "1,0,0,0", "--tmax", "0.5", "--track", "p"],
        ["--x0", "0,0,0,0", "--v0", "1,0,0,0", "--tmax", "0.5", "--track", "xi"],
    ]
    for extra in bad:
        assert run(["geodesic", spec] + extra + ["--out", out]) == 2


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["check"])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "geoverify", "catalog", "list"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "kundt3" in proc.stdout
