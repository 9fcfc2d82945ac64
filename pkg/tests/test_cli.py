import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from stablecv import __version__
from stablecv.cli import main
from stablecv.data_io import bundled

GOLDEN = Path(__file__).parent / "golden"
REGEN = os.environ.get("STABLECV_REGEN_GOLDEN") == "1"


def run(tmp_path, *argv):
    out = tmp_path / "out.json"
    code = main([*argv, "--out", str(out), "--workers", "1"])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def approx_equal(a, b, path="$"):
    if isinstance(a, dict):
        assert a.keys() == b.keys(), path
        for k in a:
            approx_equal(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list):
        assert len(a) == len(b), path
        for i, (x, y) in enumerate(zip(a, b)):
            approx_equal(x, y, f"{path}[{i}]")
    elif isinstance(a, float) and isinstance(b, float):
        assert a == pytest.approx(b, rel=1e-12, abs=1e-15) or (math.isnan(a) and math.isnan(b)), path
    else:
        assert a == b, path


GOLDEN_CASES = {
    "bounds": ["bounds", "--n", "1000", "--k", "5", "--m", "1", "--models", "1000"],
    "counterexample_rerm": ["counterexample", "rerm", "--n", "100", "--k", "5", "--m", "10",
                            "--seed", "3"],
    "diagnose_rerm": ["diagnose", "--construction", "rerm", "--n", "100", "--k", "5", "--m", "10"],
    "diagnose_ridge": ["diagnose", "--construction", "linear_gaussian", "--n", "60", "--k", "3",
                       "--lam", "0.5", "--seed", "4"],
    "probe_rerm": ["probe", "--family", "rerm", "--m", "10", "--sizes", "25,50", "--trials", "1"],
}


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_golden_reports(tmp_path, name, capsys):
    code, doc = run(tmp_path, *GOLDEN_CASES[name])
    assert code == 0
    assert doc["passed"] is True and doc["version"] == __version__
    path = GOLDEN / f"{name}.json"
    if REGEN:
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    approx_equal(doc, json.loads(path.read_text()))


def test_bounds_values(tmp_path, capsys):
    code, doc = run(tmp_path, "bounds", "--n", "1000", "--k", "5")
    assert code == 0
    assert doc["result"]["kfold_upper_bound"] == pytest.approx(0.4553572049, abs=1e-9)
    assert doc["result"]["corrected_upper_bound"] == pytest.approx(0.7026409608, abs=1e-9)
    assert "model_selection_bound" not in doc["result"]
    assert "0.455357" in capsys.readouterr().out


def test_rerm_counterexample_table(tmp_path, capsys):
    code, doc = run(tmp_path, "counterexample", "rerm", "--n", "100", "--k", "5", "--m", "10")
    assert code == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_sgd_counterexample_reports_failed_check(tmp_path, capsys):
    code, doc = run(tmp_path, "counterexample", "sgd", "--n", "100", "--k", "5", "--t", "10",
                    "--m", "10", "--replicates", "20000")
    assert code == 1
    checks = {c["check"]: c["passed"] for c in doc["checks"]}
    assert len(checks) == 4 and not all(checks.values())
    assert doc["result"]["expected_bias_exact"] == pytest.approx(math.log(1.25) / 9)


def test_select_on_bundled_csv(tmp_path, capsys):
    csv = str(bundled("synthetic_regression.csv"))
    code, doc = run(tmp_path, "select", "--csv", csv, "--grid-values", "0.01,0.1,1,10",
                    "--k", "3,5", "--seeds", "2", "--reference", "3:1.0,1.0", "--truncate")
    assert code == 0
    rows = doc["result"]["rows"]
    assert [r["k"] for r in rows] == [3, 5]
    assert rows[0]["reference"] == [1.0, 1.0] and rows[1]["reference"] is None
    assert len(rows[0]["runs"]) == 2
    out = capsys.readouterr().out
    assert "corrected K-fold" in out and "synthetic_regression" in out


def test_select_classification(tmp_path, capsys):
    csv = str(bundled("synthetic_classification.csv"))
    code, doc = run(tmp_path, "select", "--csv", csv, "--learner", "hinge_sgd",
                    "--positive-label", "pos", "--grid-values", "0.01,0.1,1", "--passes", "2",
                    "--truncate")
    assert code == 0
    assert 0 <= doc["result"]["rows"][0]["standard"] <= 1


def test_select_divisibility_error(tmp_path, capsys):
    csv = str(bundled("synthetic_regression.csv"))
    # 200 training rows are not divisible by 3
    code, _ = run(tmp_path, "select", "--csv", csv, "--grid-values", "1", "--k", "3")
    assert code == 2
    assert "divisible" in capsys.readouterr().err
    code, doc = run(tmp_path, "select", "--csv", csv, "--grid-values", "1", "--k", "3", "--truncate")
    assert code == 0 and doc["config"]["truncate"] is True


def test_data_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,y\n1,2\n3,oops\n")
    code, doc = run(tmp_path, "select", "--csv", str(bad))
    assert code == 3 and doc is None
    assert "row 2" in capsys.readouterr().err


def test_missing_file_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "select", "--csv", str(tmp_path / "none.csv"))
    assert code == 3


def test_missing_option_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "bounds", "--k", "5")
    assert code == 2
    assert "--n" in capsys.readouterr().err


def test_construction_error_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "counterexample", "rerm", "--n", "100", "--k", "3", "--m", "10")
    assert code == 2


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# bounds setup\nn = 1000\nk=5\ndelta = 0.1\n")
    code, doc = run(tmp_path, "bounds", "--config", str(cfg))
    assert code == 0 and doc["config"]["delta"] == 0.1 and doc["config"]["n"] == 1000
    code, doc = run(tmp_path, "bounds", "--config", str(cfg), "--delta", "0.05")
    assert doc["config"]["delta"] == 0.05
    assert doc["result"]["kfold_upper_bound"] == pytest.approx(0.4553572049, abs=1e-9)


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n=10\nbogus=1\n")
    with pytest.raises(SystemExit) as err:
        main(["bounds", "--config", str(cfg)])
    assert err.value.code == 2
    assert "bogus" in capsys.readouterr().err


def test_probe_csv_out(tmp_path, capsys):
    csv_out = tmp_path / "profile.csv"
    code, doc = run(tmp_path, "probe", "--sizes", "10,20", "--trials", "1", "--removals", "5",
                    "--csv-out", str(csv_out))
    assert code == 0
    assert csv_out.read_text().splitlines()[0] == "n_T,beta_hat,trials"
    assert "lower-bound witness" in doc["result"]["label"]


def test_probe_sgd_randomized(tmp_path, capsys):
    code, doc = run(tmp_path, "probe", "--family", "sgd", "--sizes", "20", "--trials", "1",
                    "--inner-reps", "256", "--eval-points", "8", "--removals", "5")
    assert doc["result"]["randomized"] is True
    assert code == 0


def test_diagnose_sgd(tmp_path, capsys):
    code, doc = run(tmp_path, "diagnose", "--construction", "sgd", "--n", "50", "--k", "5")
    assert code == 0
    assert doc["result"]["d_cv"] == pytest.approx(doc["result"]["standard_error"] - doc["result"]["bias"])


def test_version_and_module_entry():
    proc = subprocess.run([sys.executable, "-m", "stablecv", "--version"],
                          capture_output=True, text=True, check=True)
    assert __version__ in proc.stdout


def test_pure_python_switch():
    env = dict(os.environ, STABLECV_PURE_PYTHON="1")
    proc = subprocess.run([sys.executable, "-c", "import stablecv; print(stablecv.BACKEND)"],
                          capture_output=True, text=True, check=True, env=env)
    assert proc.stdout.strip() == "python"


def test_select_bundled_corrected_not_worse(tmp_path, capsys):
    csv = str(bundled("synthetic_regression.csv"))
    code, doc = run(tmp_path, "select", "--csv", csv, "--grid", "0.01,10,0.01", "--k", "3",
                    "--seeds", "10", "--truncate")
    row = doc["result"]["rows"][0]
    assert code == 0 and row["corrected"] <= row["standard"]


def test_select_single_model_columns_equal(tmp_path, capsys):
    csv = str(bundled("synthetic_regression.csv"))
    code, doc = run(tmp_path, "select", "--csv", csv, "--grid-values", "2", "--seeds", "3",
                    "--truncate")
    row = doc["result"]["rows"][0]
    assert row["corrected"] == row["standard"]


def test_table_echoes_config(tmp_path, capsys):
    run(tmp_path, "bounds", "--n", "1000", "--k", "5")
    first = capsys.readouterr().out.splitlines()[0]
    assert first.startswith(f"# stablecv {__version__} bounds") and "delta=0.05" in first
