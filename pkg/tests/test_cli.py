import json
import subprocess
import sys

import numpy as np
import pytest

from sobolab import io as gio
from sobolab.cli import main
from sobolab.spectral import GridFunction, build_grid


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out), err


# norm --------------------------------------------------------------------------------

def test_norm_lp_of_one(capsys):
    code, out, _ = run_json(capsys, "norm", "--kind", "lp", "--p", "2", "--analytic", "const:1",
                            "--n", "1", "--G", "64", "--L", "1")
    assert code == 0 and out["value"] == 1.0 and out["kind"] == "lp"
    assert out["grid"] == {"n": 1, "G": 64, "L": 1.0}


def test_norm_lorentz_flat_weight_equals_lp(capsys):
    f = ["--analytic", "bandrand:3,1,6", "--G", "128", "--L", "2"]
    _, lor, _ = run_json(capsys, "norm", "--kind", "lorentz", "--p", "2", "--weight", "power:1,0", *f)
    _, lp, _ = run_json(capsys, "norm", "--kind", "lp", "--p", "2", *f)
    assert lor["value"] == pytest.approx(lp["value"], rel=1e-12)


def test_norm_besov_of_constant_fails(capsys):
    code, out, err = run_json(capsys, "norm", "--kind", "besov", "--beta", "1", "--analytic", "const:1")
    assert code == 2
    assert "Besov norm divergent on torus" in out["error"] and "Besov" in err


def test_norm_from_file(tmp_path, capsys):
    g = build_grid(1, 64, 1.0)
    path = tmp_path / "f.bin"
    gio.save(GridFunction.constant(g, 3.0), path)
    code, out, _ = run_json(capsys, "norm", "--kind", "lp", "--p", "1", "--input", str(path))
    assert code == 0 and out["value"] == pytest.approx(3.0)


@pytest.mark.parametrize(
    "argv",
    [
        ("norm", "--kind", "lp", "--p", "2", "--analytic", "nonsense"),
        ("norm", "--kind", "lp", "--p", "2", "--input", "/nonexistent/file.json"),
        ("weight", "--class", "bp", "--p", "2", "--weight", "power:oops"),
    ],
)
def test_parse_failures_exit_3(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code in (2, 3)
    if "--input" in argv or "power:oops" in argv:
        assert code == 3


def test_bad_file_contents_exit_3(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    code, _, _ = run(capsys, "norm", "--kind", "lp", "--p", "2", "--input", str(path))
    assert code == 3


def test_norm_invalid_parameters_exit_2(capsys):
    code, out, _ = run_json(capsys, "norm", "--kind", "morrey", "--p", "2", "--a", "1.5",
                            "--analytic", "mode:1,1")
    assert code == 2 and "Morrey index" in out["error"]


@pytest.mark.parametrize(
    "kind,extra",
    [
        ("weak-lp", ["--p", "2"]),
        ("sobolev", ["--s", "0.5", "--p", "2"]),
        ("w11", []),
        ("besov", ["--beta", "1"]),
        ("weak-lorentz", ["--p", "2", "--weight", "power:1,-0.5"]),
        ("morrey", ["--p", "2", "--a", "0.5"]),
        ("weighted-lp", ["--p", "2", "--field", "power:-0.5"]),
    ],
)
def test_norm_kinds_run(capsys, kind, extra):
    code, out, _ = run_json(capsys, "norm", "--kind", kind, "--analytic", "mode:2,1.5", *extra)
    assert code == 0 and out["value"] > 0


# weight ------------------------------------------------------------------------------

def test_weight_bp(capsys):
    code, out, _ = run_json(capsys, "weight", "--class", "bp", "--p", "2", "--weight", "power:1,0")
    assert code == 0 and out["value"] == 1.0 and out["finite"]


def test_weight_bp_rejection(capsys):
    code, out, _ = run_json(capsys, "weight", "--class", "bp", "--p", "2", "--weight", "power:1,2")
    assert code == 0 and not out["finite"] and out["reason"] == "tail divergent"


def test_weight_a1_ones(capsys):
    code, out, _ = run_json(capsys, "weight", "--class", "a1", "--field", "ones")
    assert code == 0 and out["value"] == pytest.approx(1.0)


def test_weight_ap_and_two_weight(capsys):
    code, out, _ = run_json(capsys, "weight", "--class", "ap", "--p", "2", "--field", "power:-0.5")
    assert code == 0 and out["value"] > 1
    code, out, _ = run_json(capsys, "weight", "--class", "two-weight", "--p", "2", "--q0", "2")
    assert code == 0 and out["finite"]


def test_weight_invalid_exponent(capsys):
    code, _, _ = run(capsys, "weight", "--class", "bp", "--p", "0.5", "--weight", "power:1,0")
    assert code == 2


# verify ------------------------------------------------------------------------------

def test_verify_rejects_bad_exponent(tmp_path, capsys):
    code, out, err = run_json(capsys, "verify", "thm1", "--q", "2", "--s", "0.6",
                              "--out-dir", str(tmp_path))
    assert code == 2 and "s < 1/q violated" in out["error"]
    assert list(tmp_path.iterdir()) == []


def test_verify_is_bit_identical(tmp_path, capsys):
    argv = ["verify", "thm1", "--q", "2", "--s", "0", "--G", "512", "--L", "40",
            "--corpus", "gaussian:24", "--seed", "7", "--out-dir", str(tmp_path)]
    code, out1, _ = run(capsys, *argv)
    first = (tmp_path / "thm1-seed7.json").read_bytes()
    csv1 = (tmp_path / "thm1-seed7.csv").read_bytes()
    code2, out2, _ = run(capsys, *argv)
    assert code == code2 == 0
    assert out1 == out2 and out1.startswith("case=thm1 C_emp=") and out1.strip().endswith("n=24")
    assert (tmp_path / "thm1-seed7.json").read_bytes() == first
    assert (tmp_path / "thm1-seed7.csv").read_bytes() == csv1
    rep = json.loads(first)
    assert rep["provenance"]["seed"] == 7
    assert rep["provenance"]["parameters"]["radii"]["count"] >= 12
    assert len(csv1.splitlines()) == 25


def test_verify_hedberg_reports_pointwise_constant(tmp_path, capsys):
    code, _, _ = run(capsys, "verify", "hedberg", "--s", "1", "--s1", "0.5", "--beta", "1",
                     "--corpus", "dgauss:4", "--out-dir", str(tmp_path), "--name", "h")
    rep = json.loads((tmp_path / "h.json").read_text())
    assert code == 0
    assert rep["extras"]["pointwise_constant"] > 0
    assert len(rep["extras"]["argmax_cell"]) == 1


def test_verify_flagged_exit_1(tmp_path, capsys):
    code, _, _ = run(capsys, "verify", "thm1", "--q", "2", "--corpus", "zero:2",
                     "--out-dir", str(tmp_path))
    assert code == 1


def test_verify_with_studies(tmp_path, capsys):
    code, _, _ = run(capsys, "verify", "thm1", "--q", "2", "--corpus", "dgauss:2",
                     "--scaling", "--refine", "256,512", "--out-dir", str(tmp_path), "--name", "r",
                     "--G", "512")
    rep = json.loads((tmp_path / "r.json").read_text())
    assert code == 0
    assert set(rep["extras"]) == {"scaling", "refinement"}


# sweep --------------------------------------------------------------------------------

def test_sweep_matches_verify_and_lists_rejections(tmp_path, capsys):
    table = tmp_path / "sweep.csv"
    code, out, _ = run_json(capsys, "sweep", "thm1", "--axis", "q=2,3", "--axis", "s=0,0.4",
                            "--corpus", "dgauss:3", "--csv", str(table))
    assert code == 0
    # s = 0.4 is only valid for q = 2
    assert len(out["rows"]) == 3
    assert [r["point"] for r in out["rejected"]] == [{"q": 3.0, "s": 0.4}]
    assert "s < 1/q violated" in out["rejected"][0]["reason"]
    assert table.read_text().splitlines()[0] == "q,s,C_emp,mean_ratio,n,flagged"

    run(capsys, "verify", "thm1", "--q", "2", "--s", "0", "--corpus", "dgauss:3",
        "--out-dir", str(tmp_path), "--name", "one")
    rep = json.loads((tmp_path / "one.json").read_text())
    row = next(r for r in out["rows"] if r["q"] == 2.0 and r["s"] == 0.0)
    assert row["C_emp"] == rep["aggregate"]["max_ratio"]


def test_sweep_needs_axis(capsys):
    code, _, _ = run(capsys, "sweep", "thm1")
    assert code == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "sobolab", "norm", "--kind", "lp", "--p", "2",
         "--analytic", "const:1", "--G", "64", "--L", "1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["value"] == 1.0
