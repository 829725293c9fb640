import csv
import json

import pytest

from rferns import persist
from rferns.cli import main


@pytest.fixture
def iris_csv(tmp_path):
    out = tmp_path / "iris.csv"
    assert main(["gen", "gauss", "--seed", "0", "--out", str(out)]) == 0
    return out


def test_gen_writes_data_and_truth(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["gen", "gauss", "--shadows", "1000", "--out", str(out)]) == 0
    header = out.read_text().splitlines()[0].split(",")
    assert len(header) == 1005 and header[-1] == "class"
    truth = json.loads((tmp_path / "g.truth.json").read_text())
    assert truth["relevant"] == ["F1", "F2", "F3", "F4"]


def test_gen_madelon_columns(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["gen", "madelon", "--w", "480", "--n", "50", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()[0].split(",")) == 501


def test_gen_is_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["gen", "rnd3", "--seed", "4", "--features", "30", "--out", str(tmp_path / f"{name}.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.truth.json").read_bytes() == (tmp_path / "b.truth.json").read_bytes()


def test_train_roundtrip_and_summary(tmp_path, iris_csv, capsys):
    model = tmp_path / "model.json"
    argv = ["train", "--data", str(iris_csv), "-D", "5", "-K", "1000", "--out", str(model)]
    assert main(argv) == 0
    line = capsys.readouterr().out
    for key in ("N=150", "M=4", "C=3", "D=5", "K=1000", "oob_error="):
        assert key in line
    assert float(line.split("oob_error=")[1]) <= 0.10
    assert persist.dumps(persist.load(model)) == model.read_text()
    first = model.read_bytes()
    assert main(argv) == 0
    assert model.read_bytes() == first


def test_train_threads_do_not_change_model(tmp_path, iris_csv):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["train", "--data", str(iris_csv), "-K", "300", "--out", str(a)]) == 0
    assert main(["train", "--data", str(iris_csv), "-K", "300", "--threads", "8", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_missing_label_exit_2(tmp_path, iris_csv, capsys):
    code = main(["train", "--data", str(iris_csv), "--label", "species", "--out", str(tmp_path / "m.json")])
    assert code == 2
    assert "species" in capsys.readouterr().err


def test_missing_file_exit_1(tmp_path):
    assert main(["train", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "m.json")]) == 1


def test_usage_errors(tmp_path, iris_csv):
    with pytest.raises(SystemExit) as e:
        main(["train", "--data", str(iris_csv), "-K", "3", "--scans", "3", "--out", "x"])
    assert e.value.code == 2
    assert main(["train", "--data", str(iris_csv), "-K", "0", "--out", str(tmp_path / "m")]) == 2
    assert main(["train", "--data", str(iris_csv), "--threads", "0", "--out", str(tmp_path / "m")]) == 2


def test_select_iri2(tmp_path, capsys):
    data = tmp_path / "iri2.csv"
    assert main(["gen", "iri2", "--out", str(data)]) == 0
    out = tmp_path / "rep"
    assert main(["select", "--data", str(data), "-D", "7", "--scans", "1000", "--out", str(out)]) == 0
    doc = json.loads((tmp_path / "rep.json").read_text())
    chosen = {a["name"] for a in doc["attributes"] if a["selected"]}
    assert {"F1", "F2", "F3", "F4"} <= chosen
    assert len(chosen) <= 9
    assert (tmp_path / "rep.csv").exists()
    assert "F1" in capsys.readouterr().out


def test_select_low_scans_warns(tmp_path, capsys):
    data = tmp_path / "iri.csv"
    assert main(["gen", "iri", "--out", str(data)]) == 0
    assert main(["select", "--data", str(data), "--scans", "10", "--out", str(tmp_path / "r")]) == 0
    assert "warning" in capsys.readouterr().err


def test_select_csv_only(tmp_path, iris_csv):
    assert main(["select", "--data", str(iris_csv), "--scans", "50", "--format", "csv",
                 "--shadow-mode", "original", "--out", str(tmp_path / "r")]) == 0
    assert (tmp_path / "r.csv").exists()
    assert not (tmp_path / "r.json").exists()


def test_boruta_noise_confirms_nothing(tmp_path, capsys):
    confirmed = 0
    for seed in range(5):
        data = tmp_path / f"n{seed}.csv"
        assert main(["gen", "rnd", "--features", "60", "--seed", str(seed), "--out", str(data)]) == 0
        assert main(["boruta", "--data", str(data), "--max-iter", "30", "--scans", "50", "--seed", str(seed),
                     "--out", str(tmp_path / f"b{seed}")]) == 0
        rows = list(csv.DictReader(open(tmp_path / f"b{seed}.csv")))
        confirmed += sum(r["status"] == "Confirmed" for r in rows)
    assert confirmed <= 1
    assert "Confirmed=" in capsys.readouterr().out


def test_boruta_finds_gaussian_features(tmp_path, capsys):
    data = tmp_path / "g.csv"
    assert main(["gen", "gauss", "--shadows", "40", "--out", str(data)]) == 0
    assert main(["boruta", "--data", str(data), "--max-iter", "30", "--scans", "100",
                 "--out", str(tmp_path / "b"), "--format", "json"]) == 0
    doc = json.loads((tmp_path / "b.json").read_text())
    status = {f["name"]: f["status"] for f in doc["features"]}
    assert all(status[f"F{i}"] == "Confirmed" for i in range(1, 5))
    assert "Confirmed=" in capsys.readouterr().out


def test_boruta_one_iteration_all_tentative(tmp_path, iris_csv, capsys):
    assert main(["boruta", "--data", str(iris_csv), "--max-iter", "1", "--scans", "20",
                 "--out", str(tmp_path / "b")]) == 0
    assert "Confirmed=0 Rejected=0 Tentative=4" in capsys.readouterr().out


def test_bench_noise_and_determinism(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / f"{name}.csv"
        argv = ["bench", "rnd", "--features", "100", "--grid", "D=3,5", "--scans", "30",
                "--repeats", "2", "--no-runtime", "--out", str(out)]
        assert main(argv) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    rows = list(csv.DictReader(open(tmp_path / "a.csv")))
    assert len(rows) == 4 and all(r["fn"] == "0" for r in rows)
    assert list(rows[0]) == ["problem", "D", "scans", "K", "seed", "fp", "fn", "runtime_s"]


def test_bench_madelon_sweep(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["bench", "madelon", "--n", "600", "--w-list", "10,50", "--grid", "D=7",
                 "--scans", "300", "--repeats", "1", "--out", str(out), "--format", "both"]) == 0
    rows = list(csv.DictReader(open(out)))
    assert [r["problem"] for r in rows] == ["mad10", "mad50"]
    assert (tmp_path / "m.json").exists()
