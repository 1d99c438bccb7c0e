import csv
import subprocess
import sys

import pytest

from softwrap import cli


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert cli.run(["gen-data", "--mode", "uniform", "--n", "3000", "--seed", "1", "--out", str(d / "train.csv"), "--schema-out", str(d / "schema.json")]) == 0
    assert cli.run(["gen-data", "--mode", "representative", "--n", "2000", "--seed", "2", "--out", str(d / "eval.csv"), "--schema-out", str(d / "schema.json")]) == 0
    return d


def train(d, approach, out, *extra):
    return cli.run(
        ["train", "--approach", approach, "--data", str(d / "train.csv"), "--schema", str(d / "schema.json"), "--out", str(out), "--hyper", "max_depth=3,n_trees=3", *extra]
    )


def test_train_then_evaluate(workdir):
    assert train(workdir, "dt", workdir / "dt.json") == 0
    assert cli.run(["evaluate", "--model", str(workdir / "dt.json"), "--data", str(workdir / "eval.csv"), "--out-report", str(workdir / "dt.csv")]) == 0
    rows = list(csv.DictReader((workdir / "dt.csv").open()))
    assert len(rows) == 1
    for col in ("bs", "var", "res", "uns", "unr", "oconf"):
        assert 0.0 <= float(rows[0][col]) <= 1.0
    assert rows[0]["model_id"] == "DT"


def test_calibrate_bad_cl(workdir, capsys):
    assert train(workdir, "dt", workdir / "dt.json") == 0
    code = cli.run(["calibrate", "--model", str(workdir / "dt.json"), "--data", str(workdir / "eval.csv"), "--cl", "1.5", "--out", str(workdir / "c.json")])
    assert code == 1
    assert capsys.readouterr().err.startswith("error: ")
    assert not (workdir / "c.json").exists()


@pytest.mark.parametrize("approach", ["fuzzy-rf", "bagged-soft-dt"])
def test_predict_explain_weights(workdir, capsys, approach):
    model, cal = workdir / f"{approach}.json", workdir / f"{approach}-cal.json"
    assert train(workdir, approach, model, "--seed", "4") == 0
    assert cli.run(["calibrate", "--model", str(model), "--data", str(workdir / "eval.csv"), "--out", str(cal)]) == 0
    capsys.readouterr()
    point = "distance=8.5,precipitation=10,fog=40,occlusion=0.2,ped_type=child"
    assert cli.run(["predict", "--model", str(cal), "--point", point, "--explain"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("uncertainty ") and lines[0].endswith("(calibrated)")
    weights = [float(part.split("=")[1]) for line in lines[1:] for part in line.split("\t") if part.startswith("weight=")]
    assert abs(sum(weights) - 1.0) <= 1e-6
    leaf_lines = [line for line in lines[1:] if line.startswith("t")]
    assert all(float(line.split("\t")[1].split("=")[1]) > 1e-6 for line in leaf_lines)


def test_sweep_and_select(workdir, capsys):
    assert train(workdir, "soft-dt", workdir / "soft.json") == 0
    out = workdir / "sw.csv"
    code = cli.run(["sweep", "--model", str(workdir / "soft.json"), "--base", "distance=0,precipitation=0,fog=0,occlusion=0.1,ped_type=adult", "--feature", "distance", "--lo", "0", "--hi", "25", "--steps", "500", "--out", str(out), "--svg"])
    assert code == 0
    assert len(out.read_text().splitlines()) == 501
    assert (workdir / "sw.svg").read_text().lstrip().startswith("<?xml")
    assert train(workdir, "dt", workdir / "dt.json") == 0
    for name in ("soft", "dt"):
        assert cli.run(["evaluate", "--model", str(workdir / f"{name}.json"), "--data", str(workdir / "eval.csv"), "--out-report", str(workdir / f"r_{name}.csv")]) == 0
    capsys.readouterr()
    assert cli.run(["select", "--reports", f"{workdir / 'r_soft.csv'},{workdir / 'r_dt.csv'}"]) == 0
    assert capsys.readouterr().out.strip() in {"DT", "Soft DT"}


def test_sweep_categorical_is_usage_error(workdir):
    assert train(workdir, "dt", workdir / "dt.json") == 0
    code = cli.run(["sweep", "--model", str(workdir / "dt.json"), "--base", "distance=0,precipitation=0,fog=0,occlusion=0.1,ped_type=adult", "--feature", "ped_type", "--lo", "0", "--hi", "1", "--steps", "5", "--out", str(workdir / "x.csv")])
    assert code == 1


def test_byte_identical_reruns(workdir):
    for approach in ("rf", "fuzzy-dt"):
        a, b = workdir / f"{approach}_a.json", workdir / f"{approach}_b.json"
        assert train(workdir, approach, a, "--seed", "9") == 0
        assert train(workdir, approach, b, "--seed", "9") == 0
        assert a.read_bytes() == b.read_bytes()
        for p in (a, b):
            assert cli.run(["evaluate", "--model", str(p), "--data", str(workdir / "eval.csv"), "--out-report", str(p.with_suffix(".csv"))]) == 0
        assert a.with_suffix(".csv").read_bytes() == b.with_suffix(".csv").read_bytes()


@pytest.mark.parametrize(
    "argv,code",
    [
        ([], 1),
        (["train", "--approach", "boost"], 1),
        (["gen-data", "--mode", "uniform", "--n", "10", "--bogus"], 1),
        (["gen-data", "--mode", "uniform", "--n", "0", "--out", "x", "--schema-out", "y"], 1),
        (["evaluate", "--model", "/nonexistent/m.json", "--data", "d.csv", "--out-report", "r.csv"], 2),
    ],
)
def test_exit_codes(argv, code, capsys):
    assert cli.run(argv) == code
    assert "error:" in capsys.readouterr().err


def test_bad_hyper_and_data_errors(workdir, tmp_path):
    assert train(workdir, "dt", tmp_path / "m.json", "--hyper", "depth=3") == 1
    assert train(workdir, "dt", tmp_path / "m.json", "--hyper", "max_depth=zero") == 1
    (tmp_path / "bad.json").write_text("{not json")
    assert cli.run(["predict", "--model", str(tmp_path / "bad.json"), "--point", "distance=1"]) == 2
    assert train(workdir, "dt", tmp_path / "m.json") == 0
    point = "distance=1,precipitation=0,fog=0,occlusion=0,ped_type=truck"
    assert cli.run(["predict", "--model", str(tmp_path / "m.json"), "--point", point]) == 2


def test_internal_error(monkeypatch, tmp_path):
    def boom(cfg):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "generate", boom)
    assert cli.run(["gen-data", "--mode", "uniform", "--n", "5", "--out", str(tmp_path / "a.csv"), "--schema-out", str(tmp_path / "s.json")]) == 3


def test_small_study(tmp_path, capsys):
    out = tmp_path / "study"
    assert cli.run(["study", "--train-n", "1500", "--cal-n", "500", "--eval-n", "500", "--seed", "3", "--out-dir", str(out)]) == 0
    rows = [line.split() for line in (out / "table.txt").read_text().splitlines()[1:]]
    assert len(rows) == 6
    assert len({r[-4] for r in rows}) == 1  # var column
    for name in ("sweep_distance.png", "sweep_distance.svg", "softness.csv", "selection.txt", "table.csv"):
        assert (out / name).stat().st_size > 0
    assert len(list((out / "sweeps").glob("*.csv"))) == 6
    assert "best:" in capsys.readouterr().out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "softwrap", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "format 1" in r.stdout
