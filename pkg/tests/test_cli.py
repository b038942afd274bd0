import json
import subprocess
import sys

import numpy as np
import pytest

from gsdtail.cli import main
from gsdtail.model import ModelSpec

from _util import bivariate


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(bivariate([1.0, 1.5], 0.5).to_json())
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_qp_solve(tmp_path, capsys):
    path = tmp_path / "qp.json"
    path.write_text(json.dumps({"Sigma": [[1, 0.5], [0.5, 1]], "b": [1, 0.5]}))
    code, out, _ = run(capsys, "qp-solve", str(path))
    doc = json.loads(out)
    assert code == 0
    assert doc["I"] == [0] and doc["J"] == [1] and doc["min_value"] == 1.0
    assert all(c["passed"] for c in doc["verification"].values())


def test_qp_solve_bad_input(tmp_path, capsys):
    path = tmp_path / "qp.json"
    path.write_text(json.dumps({"Sigma": [[1, 0], [0, 1]], "b": [-1, -1]}))
    assert run(capsys, "qp-solve", str(path))[0] == 2
    assert run(capsys, "qp-solve", str(tmp_path / "nope.json"))[0] == 2
    path.write_text("{")
    assert run(capsys, "qp-solve", str(path))[0] == 2


def test_asym(model_file, capsys):
    code, out, _ = run(capsys, "asym", model_file, "--b", "1,0.5", "--u", "3,4")
    doc = json.loads(out)
    assert code == 0
    assert doc["branch"] == "thm-a" and doc["L"] == [1] and doc["exponent"] == -1.5
    assert [r["u"] for r in doc["evaluate_at"]] == [3.0, 4.0]
    assert doc["evaluate_at"][0]["value"] == pytest.approx(np.exp(doc["evaluate_at"][0]["log_value"]))


def test_asym_corollary_custom(model_file, capsys):
    code, out, _ = run(capsys, "asym", model_file, "--b", "1,0.5", "--mode", "custom", "--q-J", "0.3", "--route", "corollary")
    assert code == 0
    assert json.loads(out)["thresholds"]["q_J"] == [0.3]


def test_asym_csv(model_file, capsys):
    code, out, _ = run(capsys, "--format", "csv", "asym", model_file, "--b", "1,0.5", "--u", "3")
    assert code == 0
    assert out.splitlines()[0] == "u,value,log_value" and len(out.splitlines()) == 2


def test_mc_estimate_deterministic(model_file, capsys):
    args = ("mc-estimate", model_file, "--b", "1,0.5", "--u", "2", "--n", "20000", "--estimator", "tilt", "--seed", "7")
    a = run(capsys, *args)[1]
    b = run(capsys, *args)[1]
    assert a == b
    doc = json.loads(a)
    assert doc["seed"] == 7 and doc["n_samples"] == 20000 and doc["estimator"] == "tilt"


def test_global_seed_before_subcommand(model_file, capsys):
    out = run(capsys, "--seed", "5", "mc-estimate", model_file, "--b", "1,0.5", "--u", "2", "--n", "5000")[1]
    assert json.loads(out)["seed"] == 5


def test_mc_estimate_argument_error(model_file, capsys):
    code, _, err = run(capsys, "mc-estimate", model_file, "--b", "1,0.5,2", "--u", "2")
    assert code == 2 and "error" in err


def test_mda_check(capsys, tmp_path):
    code, out, _ = run(capsys, "mda-check", "--law", '{"kind": "weibull_tail", "c": 1, "tau": 1.5}')
    assert code == 0 and json.loads(out)["passed"] is True
    path = tmp_path / "law.json"
    path.write_text('{"kind": "chi", "dof": 3}')
    assert json.loads(run(capsys, "mda-check", "--law-file", str(path))[1])["passed"] is True
    assert run(capsys, "mda-check", "--law", '{"kind": "pareto"}')[0] == 2
    assert run(capsys, "mda-check")[0] == 2


def test_example1(capsys, tmp_path):
    out_path = tmp_path / "ex1.json"
    code, out, _ = run(capsys, "example1", "--k", "3", "--rho", "0.5", "--p", "1", "--u-grid", "2", "--n", "5000",
                       "--output", str(out_path))
    assert code == 0 and out == ""
    doc = json.loads(out_path.read_text())
    assert all(c["passed"] for c in doc["checks"].values())


def test_example1_bad_rho(capsys):
    assert run(capsys, "example1", "--k", "3", "--rho", "-0.7")[0] == 2


def test_example2_csv(capsys):
    code, out, _ = run(capsys, "--format", "csv", "example2", "--alpha1", "1", "--alpha2", "1.5", "--rho", "0",
                       "--a", "0.5", "--u-grid", "2,3", "--n", "5000")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "u,mc,mc_se,asym,ratio,log_ratio" and len(lines) == 3


def test_densities(model_file, capsys, tmp_path):
    doc = json.loads(run(capsys, "densities", model_file, "--kind", "kotz", "--x", "0.3,0.2")[1])
    spec = ModelSpec.load(model_file)
    from gsdtail.model import KotzParams, kotz_density

    assert doc["density"] == pytest.approx(kotz_density(spec, KotzParams(), np.array([0.3, 0.2])))
    doc = json.loads(run(capsys, "densities", model_file, "--kind", "sd", "--x", "0.5")[1])
    assert doc["density"] > 0
    ident = tmp_path / "ident.json"
    ident.write_text(ModelSpec.build([0.3, 1.0]).to_json())
    doc = json.loads(run(capsys, "densities", str(ident), "--kind", "joint", "--x", "0,1")[1])
    assert doc["singular"] is True and doc["density"] is None
    doc = json.loads(run(capsys, "densities", str(ident), "--kind", "subvector-radial", "--x", "1", "--index-set", "0")[1])
    assert doc["density"] > 0


def test_csv_unavailable(tmp_path, capsys):
    path = tmp_path / "qp.json"
    path.write_text(json.dumps({"Sigma": [[1, 0], [0, 1]], "b": [1, 1]}))
    assert run(capsys, "--format", "csv", "qp-solve", str(path))[0] == 2


def test_unwritable_output(model_file, capsys, tmp_path):
    code, _, err = run(capsys, "--output", str(tmp_path / "no" / "x.json"), "asym", model_file, "--b", "1,0.5")
    assert code == 2 and "error" in err


def test_argparse_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["asym"])
    assert exc.value.code == 2


def test_console_script(model_file):
    res = subprocess.run([sys.executable, "-m", "gsdtail.cli", "asym", model_file, "--b", "1,0.5"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["branch"] == "thm-a"


def test_degeneracy_exit_code(model_file, capsys):
    # b_2 sits in the gray zone around the tie rho = a: (C b*)_2 is neither zero nor clearly nonzero
    code, _, err = run(capsys, "asym", model_file, "--b", "1,0.500000005")
    assert code == 3 and "neither" in err


def test_accuracy_exit_code(model_file, capsys, monkeypatch):
    from gsdtail import asymptotics

    monkeypatch.setattr(asymptotics, "BACKEND_RTOL", 0.0)
    code, _, err = run(capsys, "asym", model_file, "--b", "1,0.5", "--method", "both")
    assert code == 4 and "disagree" in err
