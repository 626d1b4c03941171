import csv
import json

import numpy as np
import pytest

from bvpgaf import container
from bvpgaf.cli import main
from bvpgaf.config import load_config
from bvpgaf.errors import ParameterError
from bvpgaf.nn import load_weights


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config_hash=")
    return list(csv.DictReader(lines[1:]))


def test_segment(tmp_path, capsys):
    assert main(["segment", "--out", str(tmp_path)]) == 0
    assert "228 windows, effective length 0.25" in capsys.readouterr().out
    rows = read_csv(tmp_path / "segment_summary.csv")
    assert rows[0]["windows"] == "228" and rows[0]["A"] == "57"
    tensors, meta = container.load(tmp_path / "windows_p512_j128.bvpt")
    assert dict(tensors)["windows"].shape == (228, 512)
    assert meta["window_len"] == 512 and len(meta["groups"]) == 228
    again = tmp_path / "again"
    assert main(["segment", "--out", str(again)]) == 0
    assert (again / "windows_p512_j128.bvpt").read_bytes() == (tmp_path / "windows_p512_j128.bvpt").read_bytes()


def test_window_flags_and_config(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('seed = 3\n[input]\nduration_s = 30.0\n[windowing]\nspecs = [[128, 64]]\n')
    out = tmp_path / "o"
    assert main(["segment", "--config", str(cfg), "--out", str(out), "--window", "256", "--stride", "128"]) == 0
    rows = read_csv(out / "segment_summary.csv")
    assert [(r["window_len"], r["stride"], r["windows"]) for r in rows] == [("256", "128", str(4 * 14))]


def test_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[windowing]\nsizes = [1]\n")
    with pytest.raises(ParameterError, match="windowing.sizes"):
        load_config(cfg)
    assert main(["segment", "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_config_hash_ignores_out_and_jobs():
    a = load_config(None, {"out": "x", "train": {"jobs": 4}})
    b = load_config(None, {"out": "y"})
    assert a.hash() == b.hash() != load_config(None, {"seed": 1}).hash()


def _write_bvp(path, values, rate=32.0):
    path.write_text("0.0\n%r\n" % rate + "\n".join(f"{v:.9g}" for v in values) + "\n")


def test_manifest_input_and_degenerate_row(tmp_path):
    rng = np.random.default_rng(0)
    lines = ["path,participant,condition,experience"]
    for i, c in enumerate("ABCD"):
        values = np.full(400, 1.0) if c == "C" else rng.standard_normal(400)
        _write_bvp(tmp_path / f"{c}.csv", values)
        lines.append(f"{c}.csv,P{i},{c},1")
    (tmp_path / "m.csv").write_text("\n".join(lines) + "\n")
    out = tmp_path / "out"
    code = main(["stationarity", "--manifest", str(tmp_path / "m.csv"), "--out", str(out)])
    assert code == 2
    rows = {r["condition"]: r for r in read_csv(out / "stationarity.csv")}
    assert rows["C"]["status"] == "degenerate"
    assert [rows[c]["classification"] for c in "ABD"] == ["stationary"] * 3
    errors = json.loads((out / "errors.json").read_text())["errors"]
    assert [e["where"] for e in errors] == ["stationarity C"]
    table = read_csv(out / "stationarity_table.csv")
    assert [r["test"] for r in table] == ["ADF", "KPSS"]


def test_bad_bvp_file_is_fatal(tmp_path, capsys):
    (tmp_path / "a.csv").write_text("0\n64\n1\noops\n")
    (tmp_path / "m.csv").write_text("path,participant,condition,experience\na.csv,P1,A,0\n")
    assert main(["segment", "--manifest", str(tmp_path / "m.csv"), "--out", str(tmp_path / "o")]) == 1
    assert "line 4" in capsys.readouterr().err


def test_anova_outputs(tmp_path):
    assert main(["anova", "--out", str(tmp_path)]) == 0
    feats = {r["feature"]: r for r in read_csv(tmp_path / "anova_features.csv")}
    assert feats["PS"]["ordering"] == "B>A>C>D" and feats["PS"]["method"] == "welch"
    assert feats["PI"]["significant"] == "false"
    exp = read_csv(tmp_path / "anova_experience.csv")
    assert len(exp) == 20
    assert (tmp_path / "main_effects.svg").read_text().startswith("<?xml")


def test_anova_missing_condition(tmp_path, capsys):
    rows = ["participant,condition,experience,feature,score"]
    rows += [f"P{i},{c},0,PS,{i}" for c in "ABC" for i in range(3)]
    (tmp_path / "s.csv").write_text("\n".join(rows) + "\n")
    assert main(["anova", "--scores", str(tmp_path / "s.csv"), "--out", str(tmp_path / "o")]) == 1
    assert "condition D" in capsys.readouterr().err


def test_anova_identical_scores(tmp_path):
    rows = ["participant,condition,experience,feature,score"]
    rows += [f"P{i},{c},{i % 2},AM,3" for c in "ABCD" for i in range(6)]
    (tmp_path / "s.csv").write_text("\n".join(rows) + "\n")
    assert main(["anova", "--scores", str(tmp_path / "s.csv"), "--out", str(tmp_path / "o")]) == 0
    feats = read_csv(tmp_path / "o" / "anova_features.csv")
    assert [(r["feature"], r["anova_p"], r["variance_p"]) for r in feats] == [("AM", "1", "1")]
    assert {r["anova_p"] for r in read_csv(tmp_path / "o" / "anova_experience.csv")} == {"1"}


def test_encode(tmp_path):
    assert main(["encode", "--out", str(tmp_path), "--window", "200", "--stride", "100"]) == 0
    tensors, meta = container.load(tmp_path / "gaf_gadf_p200_j100.bvpt")
    images = dict(tensors)["images"]
    assert images.shape == (4 * 75, 64, 64) and meta["paa_size"] == 64
    np.testing.assert_allclose(images, -np.transpose(images, (0, 2, 1)), atol=1e-15)
    assert (tmp_path / "gaf_gadf_p200_j100.svg").exists()


def test_train_sweep_from_archives(tmp_path):
    seg = tmp_path / "seg"
    assert main(["segment", "--out", str(seg), "--window", "256", "--stride", "128"]) == 0
    out = tmp_path / "sweep"
    argv = ["train-sweep", "--archives", str(seg), "--out", str(out), "--epochs", "2",
            "--window", "256", "--stride", "128", "--window", "512", "--stride", "128", "--variant", "raw1d"]
    assert main(argv) == 2  # the 512/128 archive does not exist
    rows = read_csv(out / "sweep_summary.csv")
    assert len(rows) == 1 and rows[0]["status"] == "ok" and rows[0]["samples"] == "236"
    assert 0.0 <= float(rows[0]["test_accuracy"]) <= 1.0
    curves = read_csv(out / "curves_raw1d_p256_j128.csv")
    assert [r["epoch"] for r in curves] == ["1", "2"]
    model = load_weights(out / "model_raw1d_p256_j128.bvpt")
    assert model.config.input_size == 256
    assert "archive p512_j128" in (out / "errors.json").read_text()


@pytest.mark.filterwarnings("ignore::UserWarning")
def test_empty_window_set_is_fatal(tmp_path, capsys):
    code = main(["segment", "--out", str(tmp_path), "--window", "9000", "--stride", "1"])
    assert code == 1


def test_mismatched_window_flags(tmp_path):
    assert main(["segment", "--out", str(tmp_path), "--window", "256"]) == 1
