import json

import pytest

from cellfree.cli import main
from cellfree.config import load_config
from cellfree.results import CDF_HEADER, SAMPLES_HEADER, cdf_csv, emit_cdf_csv
from cellfree.harness import Variant, run_experiment
from cellfree.power import PowerPolicy

SMALL = ["--set", "deployment.area_side=1000", "--set", "deployment.focus_side=400",
         "--set", "deployment.n_aps=100", "--set", "deployment.n_ues=25",
         "--set", "deployment.n_aps_focus=16", "--set", "deployment.n_ues_focus=4",
         "--set", "deployment.n_per_side=2", "--set", "experiment.n_snapshots=4"]


def test_run_writes_outputs(tmp_path, capsys):
    code = main(["run", "--out", str(tmp_path), "--set", "power.alpha=-0.5", *SMALL])
    assert code == 0
    samples = (tmp_path / "run_samples.csv").read_text().splitlines()
    assert samples[0] == SAMPLES_HEADER
    assert len(samples) == 1 + 3 * 4 * 4
    cdf = (tmp_path / "run_cdf.csv").read_text().splitlines()
    assert cdf[0] == CDF_HEADER
    summary = json.loads((tmp_path / "run_summary.json").read_text())
    assert summary["config"]["power"]["alpha"] == -0.5
    assert "wrote" in capsys.readouterr().out


def test_bad_value_exit_code(tmp_path, capsys):
    assert main(["run", "--out", str(tmp_path), "--set", "power.alpha=banana"]) == 1
    assert "power.alpha" in capsys.readouterr().err
    assert not any(tmp_path.iterdir())


def test_unknown_key_and_missing_file(tmp_path, capsys):
    assert main(["run", "--set", "power.gamma=1"]) == 1
    assert "power.gamma" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "none.cfg")]) == 1
    assert "none.cfg" in capsys.readouterr().err


def test_runtime_error_exit_code(tmp_path):
    assert main(["run", "--out", str(tmp_path), *SMALL, "--set", "association.n_select=500",
                 "--quiet"]) == 2


def test_print_config_round_trip(tmp_path, capsys):
    assert main(["print-config", "--set", "power.alpha=-0.75", "--seed", "17"]) == 0
    text = capsys.readouterr().out
    path = tmp_path / "echo.cfg"
    path.write_text(text)
    again = load_config(path)
    assert again.power.alpha == -0.75 and again.experiment.master_seed == 17
    assert again.dumps() == text


def test_sweep_alpha_cli(tmp_path, capsys):
    assert main(["sweep-alpha", "--out", str(tmp_path), *SMALL,
                 "--set", "experiment.alpha_grid=-0.5,0"]) == 0
    lines = (tmp_path / "sweep_alpha.csv").read_text().splitlines()
    assert lines[0] == "alpha,se_95_likely,median_se"
    assert [line.split(",")[0] for line in lines[1:]] == ["-0.5", "0.0"]


def test_compare_modes_cli(tmp_path):
    assert main(["compare-modes", "--out", str(tmp_path), *SMALL, "--quiet"]) == 0
    summary = json.loads((tmp_path / "compare_modes_summary.json").read_text())
    assert list(summary["variants"]) == ["canonical/gamma/-0.5", "proposed/gamma/-0.5",
                                         "comp_jt/gamma/-0.5"]


def test_workers_env(tmp_path, monkeypatch):
    monkeypatch.setenv("CELLFREE_SIM_WORKERS", "zero")
    assert main(["run", "--out", str(tmp_path), *SMALL]) == 1
    monkeypatch.setenv("CELLFREE_SIM_WORKERS", "2")
    assert main(["run", "--out", str(tmp_path), *SMALL, "--quiet"]) == 0


def test_validate_oracle_cli(capsys):
    assert main(["validate-oracle", "--set", "oracle.n_realizations=200000"]) == 0
    out = capsys.readouterr().out
    assert "8/8 terms within 3 standard errors" in out


def test_cdf_rows_grouped_and_sorted(small_config):
    result = run_experiment(small_config, [Variant("proposed", PowerPolicy()),
                                           Variant("comp_jt", PowerPolicy())])
    rows = [line.split(",") for line in cdf_csv(result).splitlines()[1:]]
    blocks = {}
    for variant, metric, value, cdf in rows:
        blocks.setdefault((variant, metric), []).append((float(value), float(cdf)))
    assert list(blocks) == [("proposed/gamma/-0.5", "per_user_se"), ("proposed/gamma/-0.5", "min_se"),
                            ("comp_jt/gamma/-0.5", "per_user_se"), ("comp_jt/gamma/-0.5", "min_se")]
    for pts in blocks.values():
        values = [v for v, _ in pts]
        assert values == sorted(values)
        n = len(pts)
        assert [c for _, c in pts] == [(i + 1) / n for i in range(n)]


def test_cdf_of_four_values(small_config, tmp_path):
    result = run_experiment(small_config, [Variant("proposed", PowerPolicy())])
    s = result["proposed/gamma/-0.5"]
    s.se = s.se[:4] * 0 + [1.0, 2.0, 3.0, 4.0]
    text = cdf_csv(result).splitlines()
    assert [line.split(",")[3] for line in text[1:5]] == ["0.25", "0.5", "0.75", "1.0"]


def test_empty_variant_leaves_no_file(small_config, tmp_path):
    result = run_experiment(small_config, [Variant("proposed", PowerPolicy())])
    result["proposed/gamma/-0.5"].se = result["proposed/gamma/-0.5"].se[:0]
    target = tmp_path / "cdf.csv"
    with pytest.raises(ValueError):
        emit_cdf_csv(result, target)
    assert not target.exists()
    assert list(tmp_path.iterdir()) == []
