import json
import os

import pytest

from gammaflag import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def test_describe_a1(capsys):
    code, out = run(capsys, "describe", "--space", "A1", "--ip", "")
    doc = json.loads(out)
    assert code == 0
    assert doc["ell"] == 1
    assert doc["WP_words"] == ["e", "1"]


def test_describe_a2_parabolic(capsys):
    code, out = run(capsys, "describe", "--space", "A2", "--ip", "2")
    doc = json.loads(out)
    assert code == 0
    assert len(doc["WP_words"]) == 3
    assert doc["c1_pairings"] == {"q1": 3}


def test_describe_gr24(capsys):
    code, out = run(capsys, "describe", "--space", "A3", "--ip", "1,3")
    doc = json.loads(out)
    assert code == 0
    assert doc["ell"] == 4
    assert len(doc["beta_multiset"]) == 4


def test_spectra_p1(capsys):
    code, out = run(capsys, "spectra", "--space", "P1", "--q", "1")
    doc = json.loads(out)
    assert code == 0
    assert doc["E_O"] == pytest.approx(2.0, abs=1e-9)
    assert doc["multiplicity"] == 1


def test_positive_point_p2(capsys):
    code, out = run(capsys, "positive-point", "--space", "P2", "--q", "1")
    doc = json.loads(out)
    assert code == 0
    assert all(v > 0 for v in doc["schubert_positive"].values())
    assert doc["abs_err"] < 1e-9


def test_mirror_command(capsys):
    code, out = run(capsys, "mirror", "--space", "P2", "--t", "1.4")
    doc = json.loads(out)
    assert code == 0
    assert doc["abs_diff"] < 1e-8
    assert doc["hessian_det"] > 0


def test_mirror_rejects_non_type_a(capsys):
    code, out = run(capsys, "mirror", "--space", "B2")
    assert code == 2
    assert "type A" in json.loads(out)["error"]


def test_integrals_p1(capsys, tmp_path):
    code, out = run(
        capsys, "integrals", "--space", "P1", "--hbar-grid", "1", "--q", "1",
        "--emit-plot-data", str(tmp_path),
    )
    doc = json.loads(out)
    assert code == 0
    assert doc["status"] == "pass"
    assert doc["max_abs_err"] < 1e-6
    names = sorted(os.listdir(tmp_path))
    assert any(n.endswith(".dat") for n in names)
    assert any(n.endswith(".png") for n in names)


def test_integrals_csv_format(capsys):
    code, out = run(capsys, "integrals", "--space", "P1", "--hbar-grid", "1",
                    "--q", "1", "--format", "csv")
    assert code == 0
    header = out.splitlines()[0]
    assert "IA_re" in header and "abs_err" in header


def test_gamma_p1(capsys, tmp_path):
    code, out = run(capsys, "gamma", "--space", "P1", "--tol", "1e-3",
                    "--emit-plot-data", str(tmp_path))
    doc = json.loads(out)
    assert code == 0
    assert doc["status"] == "convergent"
    assert abs(doc["estimate"][1] + 1.15443133) < 1e-3
    assert any("gamma_component" in n for n in os.listdir(tmp_path))


def test_asymptotics_p1(capsys):
    code, out = run(capsys, "asymptotics", "--space", "P1")
    doc = json.loads(out)
    assert code == 0
    assert doc["passes"] and doc["perturbed_fails"]


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("q=4\ntol=1e-8\n")
    code, out = run(capsys, "spectra", "--space", "P1", "--config", str(cfg))
    doc = json.loads(out)
    assert code == 0
    assert doc["q"] == [4.0]
    # explicit flags beat the config file
    code, out = run(capsys, "spectra", "--space", "P1", "--config", str(cfg), "--q", "1")
    assert json.loads(out)["q"] == [1.0]


def test_deterministic_output(capsys):
    _, out1 = run(capsys, "spectra", "--space", "Fl3", "--q", "1,1")
    _, out2 = run(capsys, "spectra", "--space", "Fl3", "--q", "1,1")
    assert out1 == out2


def test_invalid_space(capsys):
    code, out = run(capsys, "describe", "--space", "Zr9")
    assert code == 2
