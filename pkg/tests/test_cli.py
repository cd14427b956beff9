import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from gpsselect import __version__
from gpsselect.cli import dumps, main, strip_timing
from support import gaussian_design

TABLE6_LASSO = {"age": 0, "sex": -209, "bmi": 522, "map": 303, "tc": -120, "ldl": 0,
                "hdl": -224, "tch": 12, "ltg": 518, "glu": 58}


def run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(argv + ["--out", str(out)])
    return code, out


@pytest.fixture
def small_csv(tmp_path):
    d = gaussian_design(30, 4, seed=5)
    path = tmp_path / "small.csv"
    np.savetxt(path, np.column_stack([d.X, d.y]), delimiter=",", header="a,b,c,d,target", comments="")
    return path


def test_fit_diabetes_lasso(tmp_path):
    code, out = run(["fit", "--data", "builtin:diabetes", "--response", "y", "--penalty", "lasso",
                     "--criterion", "cp"], tmp_path)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["schema"] == "gpsselect/1" and doc["kind"] == "fit"
    sel = doc["runs"][0]["selections"]["cp"]
    assert sel["intercept_std"] == pytest.approx(152, abs=0.5)
    for name, value in TABLE6_LASSO.items():
        assert sel["beta_std"][name] == pytest.approx(value, abs=5)
    m = doc["manifest"]
    assert m["command"] == "fit" and m["version"] == __version__ and len(m["input"]["sha256"]) == 64
    assert m["resolved"]["tau2"] == pytest.approx(2932.68, abs=0.01)
    steps = doc["runs"][0]["steps"]
    assert steps[0]["l1"] == 0 and steps[0]["coef"] == {}
    assert any(s["step"] == sel["step"] for s in steps)


def test_fit_genet_zeros(tmp_path):
    code, out = run(["fit", "--data", "builtin:diabetes", "--penalty", "genet", "--alpha", "0.5"], tmp_path)
    assert code == 0
    beta = json.loads(out.read_text())["runs"][0]["selections"]["cp"]["beta_std"]
    assert {k for k, v in beta.items() if v == 0} == {"age", "tc", "tch", "glu"}


def test_nonsense_delta_t_exit_2(capsys):
    assert main(["fit", "--data", "builtin:diabetes", "--steps", "10", "--delta-t", "1e9"]) == 2
    assert "no step can be taken" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["fit", "--data", "missing.csv"],
    ["fit", "--data", "builtin:diabetes", "--bogus"],
    ["fit", "--data", "builtin:diabetes", "--criterion", "hqic"],
    ["fit", "--data", "builtin:diabetes", "--penalty", "scad"],
    ["fit", "--data", "builtin:diabetes", "--tau2", "true"],
    ["fit", "--data", "builtin:diabetes", "--tau2", "-1"],
    ["fit", "--data", "builtin:diabetes", "--response", "nope"],
    ["simulate", "--tau2", "3.0", "--reps", "2"],
    ["bench", "--n", "1"],
])
def test_input_errors_exit_1(argv):
    assert main(argv) == 1


def test_tau2_needing_criterion_on_wide_data(tmp_path):
    d = gaussian_design(6, 5, seed=0)
    data = tmp_path / "wide.csv"
    np.savetxt(data, np.column_stack([d.X, d.y]), delimiter=",", header="a,b,c,d,e,y", comments="")
    assert main(["fit", "--data", str(data), "--criterion", "cp"]) == 2
    code, out = run(["fit", "--data", str(data), "--criterion", "aicc,gcv"], tmp_path)
    assert code == 0
    assert json.loads(out.read_text())["manifest"]["resolved"]["tau2_source"] == "unavailable"


def test_json_is_canonical(tmp_path, small_csv):
    code, out = run(["fit", "--data", str(small_csv), "--response", "target", "--criterion", "all"], tmp_path)
    text = out.read_text()
    assert dumps(json.loads(text)) == text
    doc = json.loads(text)
    assert set(doc["runs"][0]["selections"]) == {"cp", "aic", "aicc", "bic", "gcv", "cv"}
    assert doc["runs"][0]["selections"]["cv"]["df"] is None
    assert len(doc["runs"][0]["cv"]["cv_error"]) == 101


def test_csv_and_manifest_sidecar(tmp_path, small_csv):
    out = tmp_path / "sel.csv"
    assert main(["fit", "--data", str(small_csv), "--response", "target", "--format", "csv",
                 "--criterion", "cp", "--criterion", "bic", "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [r["criterion"] for r in rows] == ["cp", "bic"]
    assert {"a", "raw_a", "intercept", "intercept_std"} <= set(rows[0])
    manifest = json.loads((tmp_path / "sel.csv.manifest.json").read_text())
    assert manifest["options"]["criterion"] == ["cp", "bic"]


def test_alpha_sweep(tmp_path):
    code, out = run(["fit", "--data", "builtin:diabetes", "--penalty", "genet", "--alpha", "0.2,0.5,0.8",
                     "--criterion", "cp", "--thin", "500"], tmp_path)
    doc = json.loads(out.read_text())
    labels = [r["penalty"] for r in doc["runs"]]
    assert labels == ["genet(0.2)", "genet(0.5)", "genet(0.8)"]
    values = [r["selections"]["cp"]["value"] for r in doc["runs"]]
    assert doc["sweep"]["cp"]["penalty"] == labels[int(np.argmin(values))]


def test_plot_data(tmp_path):
    pd = tmp_path / "plots"
    code, out = run(["fit", "--data", "builtin:diabetes", "--df", "both", "--plot-data", str(pd),
                     "--trace-var", "2", "--thin", "100"], tmp_path)
    assert code == 0
    names = sorted(p.name for p in pd.iterdir())
    assert "df.txt" in names and "trace_sex.txt" in names and "coef_bmi.txt" in names
    df = np.loadtxt(pd / "df.txt")
    assert df.shape[1] == 2 and df[0, 0] == 0 and df[-1, 1] == pytest.approx(9.899, abs=1e-3)
    doc = json.loads(out.read_text())
    assert doc["runs"][0]["path"]["df_dense_max_gap"] < 1e-8
    assert "df_dense" in doc["runs"][0]["steps"][1]


def test_trace_var_validation():
    assert main(["fit", "--data", "builtin:diabetes", "--trace-var", "99"]) == 1
    assert main(["fit", "--data", "builtin:diabetes", "--trace-var", "weight"]) == 1


def test_simulate_table_layout(tmp_path):
    out = tmp_path / "sim.csv"
    assert main(["simulate", "--example", "1", "--reps", "5", "--seed", "1", "--penalty", "lasso",
                 "--criterion", "all", "--steps", "3000", "--format", "csv", "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [r["criterion"] for r in rows] == ["cp", "aicc", "gcv", "bic", "cv"]
    assert set(rows[0]) >= {"example", "penalty", "mse", "sd", "mse_se", "zz", "nn"}


def test_simulate_compare_df(tmp_path):
    code, out = run(["simulate", "--example", "1", "--reps", "5", "--compare-df", "--steps", "3000"], tmp_path)
    doc = json.loads(out.read_text())
    assert code == 0 and doc["manifest"]["resolved"]["tau2_mode"] == "true"
    assert [r["df"] for r in doc["rows"]] == ["gps", "zou"]


def test_bench_csv(tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--n", "50,70", "--reps", "1", "--steps", "1000", "--format", "csv",
                 "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [r["n"] for r in rows] == ["50", "70"] and "ratio" in rows[0]


def test_verify_jsonl(tmp_path, small_csv):
    code, out = run(["verify", "--data", str(small_csv), "--response", "target"], tmp_path, "v.jsonl")
    assert code == 0
    recs = [json.loads(line) for line in out.read_text().splitlines()]
    assert all(r["passed"] for r in recs)
    assert {"metric", "main", "oracle", "tolerance", "instance", "kind"} <= set(recs[0])


def test_replay_detects_changed_input(tmp_path, small_csv):
    code, out = run(["fit", "--data", str(small_csv), "--response", "target"], tmp_path)
    small_csv.write_text(small_csv.read_text().replace("target", "target", 1) + "0,0,0,0,0\n")
    assert main(["replay", str(out)]) == 1


def test_replay_check_mismatch(tmp_path, small_csv):
    code, out = run(["fit", "--data", str(small_csv), "--response", "target"], tmp_path)
    doc = json.loads(out.read_text())
    doc["runs"][0]["path"]["n_steps"] += 1
    tampered = tmp_path / "tampered.json"
    tampered.write_text(dumps(doc))
    assert main(["replay", str(out), "--check", str(tampered), "--out", str(tmp_path / "r.json")]) == 3
    assert main(["replay", str(tmp_path / "small.csv")]) == 1


def test_strip_timing():
    assert strip_timing({"rows": [{"n": 1, "ratio": 2.0, "naive_s": 1.0}], "loglog_slope": {}}) == {"rows": [{"n": 1}]}


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gpsselect", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
