"""
Tests for configuration handling, experiment runners, persistence and the CLI
"""
import json

import numpy as np
import pandas as pd
import pytest

from src.cli import main
from src.simulation.experiments import (
    RECONSTRUCTION_COLUMNS, ExperimentRunner, benchmark_engines, bit_budget, build_config, load_config_file,
    make_graph, parse_int_list, run_bandwidth_sweep, run_bitdepth_scaling, run_comparison, run_halftone,
    selftest, trial_seed_value,
)
from src.simulation.outputs import plot_table, save_result
from src.utils.exceptions import ConfigurationError


def _config(experiment, tmp_path, **overrides):
    values = {"graph": "ring", "n": 64, "r": "4,8", "bits": "1,2", "trials": 2, "seed": 5, "out": tmp_path}
    values.update(overrides)
    return build_config(experiment, overrides=values)


def test_parse_int_list():
    assert parse_int_list("15:55:10") == [15, 25, 35, 45, 55]
    assert parse_int_list("1,2, 4") == [1, 2, 4]
    assert parse_int_list([3, "5:7"]) == [3, 5, 6, 7]
    assert parse_int_list(8) == [8]
    with pytest.raises(ConfigurationError):
        parse_int_list("1:x")
    with pytest.raises(ConfigurationError):
        parse_int_list("5:1:0")


def test_config_precedence(tmp_path):
    config_file = tmp_path / "exp.yaml"
    config_file.write_text("graph: grid\nn: 100\nr: 5:15:5\ntrials: 3\ntiming: true\n")
    cfg = build_config("sweep", config_file, {"trials": 7, "timing": None})
    assert cfg.graphs == ["grid"]
    assert cfg.n == 100
    assert cfg.bandwidths == [5, 10, 15]
    assert cfg.trials == 7
    assert cfg.timing is True
    assert cfg.bits == [1, 2, 4]


def test_config_file_rejects_unknown_key(tmp_path):
    config_file = tmp_path / "bad.yaml"
    config_file.write_text("bandwidth: 10\n")
    with pytest.raises(ConfigurationError, match="bandwidth"):
        load_config_file(config_file)


def test_config_validation(tmp_path):
    with pytest.raises(ConfigurationError):
        _config("sweep", tmp_path, r="0,4")
    with pytest.raises(ConfigurationError):
        _config("sweep", tmp_path, graph="torus")
    with pytest.raises(ConfigurationError):
        _config("sweep", tmp_path, engine="turbo")
    with pytest.raises(ConfigurationError, match="bits"):
        _config("sweep", tmp_path, bits="4,17")
    assert _config("sweep", tmp_path, bits="16").bits == [16]


def test_make_graph_families(tmp_path):
    assert make_graph("grid", n=36)[0].name == "grid-6x6"
    assert make_graph("grid", grid_shape=(3, 5))[0].n == 15
    with pytest.raises(ConfigurationError):
        make_graph("grid", n=40)
    graph, cloud = make_graph("swissroll", n=50, k=5)
    assert cloud is not None and len(cloud) == graph.n == 50
    with pytest.raises(ConfigurationError):
        make_graph("edgelist")


def test_trial_seed_value_is_stable():
    assert trial_seed_value(0, "ring-64", 4, 1, 0) == trial_seed_value(0, "ring-64", 4, 1, 0)
    assert trial_seed_value(0, "ring-64", 4, 1, 0) != trial_seed_value(0, "ring-64", 4, 1, 1)


def test_bit_budget():
    assert bit_budget(900) == 4
    assert bit_budget(16) == 2


def test_sweep_rows_and_bound(tmp_path):
    result = ExperimentRunner(_config("sweep", tmp_path)).run()
    rows = result.rows
    assert list(rows.columns) == ["graph", "n", "r", "bits", "trial", "trial_seed", "rel_error", "qe",
                                  "signal_norm", "bound_explicit", "bound_thm31", "incoherence"]
    assert len(rows) == 2 * 2 * 2
    assert np.all(rows["rel_error"] * rows["signal_norm"] <= rows["bound_explicit"] + 1e-12)
    assert list(result.summary.columns) == ["graph", "r", "bits", "trials", "mean_rel_error",
                                            "mean_bound_explicit_rel", "bound_thm31"]
    assert np.all(result.summary["trials"] == 2)


def test_sweep_skips_too_large_bandwidth(tmp_path, caplog):
    result = ExperimentRunner(_config("sweep", tmp_path, r="4,64", bits="2", trials=1)).run()
    assert set(result.rows["r"]) == {4}
    assert "Skipping r=64" in caplog.text


def test_timing_columns_opt_in(tmp_path):
    result = ExperimentRunner(_config("bitdepth", tmp_path, r="4", trials=1, timing=True)).run()
    assert result.rows.columns[-1] == "runtime_ms"


def test_results_independent_of_workers(tmp_path):
    serial = ExperimentRunner(_config("sweep", tmp_path, workers=1)).run()
    threaded = ExperimentRunner(_config("sweep", tmp_path, workers=3)).run()
    pd.testing.assert_frame_equal(serial.rows, threaded.rows)


def test_bitdepth_summary(tmp_path):
    result = ExperimentRunner(_config("bitdepth", tmp_path, r="8", bits="1:4", trials=3)).run()
    summary = result.summary
    assert list(summary.columns) == ["graph", "r", "bits", "trials", "mean_rel_error",
                                     "reference_2_pow_minus_b", "bound_explicit"]
    assert list(summary["reference_2_pow_minus_b"]) == [0.5, 0.25, 0.125, 0.0625]
    ratios = summary["bound_explicit"].to_numpy()[1:-1] / summary["bound_explicit"].to_numpy()[2:]
    assert ratios == pytest.approx([7 / 3, 15 / 7])


def test_compare_uses_budget_and_labels(tmp_path):
    result = ExperimentRunner(_config("compare", tmp_path, bits=None, trials=2)).run()
    assert set(result.rows["bits"]) == {bit_budget(64)}
    assert set(result.rows["method"]) == {"SSNS", "SSS-R (sketch)"}
    assert list(result.summary.columns) == ["graph", "r", "bits", "method", "mean_rel_error", "bound_eq5",
                                            "bound_eq6", "bound_explicit_rel", "bound_to_error_ratio"]


def test_compare_omits_sssr_for_one_bit(tmp_path):
    result = ExperimentRunner(_config("compare", tmp_path, bits="1", trials=1)).run()
    assert set(result.rows["method"]) == {"SSNS"}


def test_halftone_exports(tmp_path):
    cfg = _config("halftone", tmp_path, graph="mesh", n=300, r="10,20", bits="1")
    result = ExperimentRunner(cfg).run()
    assert sorted(result.exports) == sorted(
        f"halftone_{m}_r{r}" for m in ("msq", "sdw", "ssns", "ssns_fq") for r in (10, 20))
    ssns = result.exports["halftone_ssns_r20"]
    assert len(ssns) == 300
    assert set(ssns["value"]) <= {-1.0, 1.0}
    assert set(ssns["display"]) <= {0.0, 1.0}
    totals = result.summary.groupby("method")["proxy_error"].sum()
    assert totals["SSNS"] < totals["MSQ"]


def test_halftone_reconstruction_export(tmp_path):
    cfg = _config("halftone", tmp_path, graph="mesh", n=300, r="20", bits="1")
    runner = ExperimentRunner(cfg)
    result = runner.run()
    recon = result.exports["halftone_ssns_fq"]
    assert list(recon.columns) == RECONSTRUCTION_COLUMNS
    assert recon["vertex"].tolist() == list(range(300))
    assert np.array_equal(recon["abs_error"], np.abs(recon["f"] - recon["fq"]))

    X = runner.basis("mesh", 20).vectors
    q = result.exports["halftone_ssns"]["value"].to_numpy()
    assert np.allclose(recon["fq"], X @ (X.T @ q), atol=1e-10)
    assert recon["f"].min() == -1.0 and recon["f"].max() == 1.0

    save_result(result, cfg)
    written = pd.read_csv(tmp_path / "halftone_ssns_fq.csv")
    assert len(written) == 300
    assert list(written.columns) == RECONSTRUCTION_COLUMNS



def test_halftone_needs_coordinates(tmp_path):
    with pytest.raises(ConfigurationError):
        ExperimentRunner(_config("halftone", tmp_path, graph="ring", bits="1")).run()


def test_saved_files_are_byte_identical(tmp_path):
    outputs = []
    for run in ("a", "b"):
        cfg = _config("sweep", tmp_path / run, trials=1)
        save_result(ExperimentRunner(cfg).run(), cfg)
        outputs.append([(tmp_path / run / name).read_bytes() for name in ("sweep.csv", "sweep_summary.csv")])
    assert outputs[0] == outputs[1]

    meta = json.loads((tmp_path / "a" / "sweep.meta.json").read_text())
    assert meta["config"]["seed"] == 5
    assert "numpy" in meta["versions"]
    assert meta["files"] == ["sweep.csv", "sweep_summary.csv"]


def test_float_format_has_17_digits(tmp_path):
    cfg = _config("sweep", tmp_path, r="4", bits="2", trials=1)
    result = ExperimentRunner(cfg).run()
    save_result(result, cfg)
    written = pd.read_csv(tmp_path / "sweep.csv", float_precision="round_trip")
    assert written["rel_error"].iloc[0] == result.rows["rel_error"].iloc[0]


def test_plot_svg_is_deterministic(tmp_path):
    cfg = _config("sweep", tmp_path, trials=1)
    save_result(ExperimentRunner(cfg).run(), cfg)
    first = plot_table(tmp_path / "sweep_summary.csv", tmp_path / "one.svg").read_bytes()
    second = plot_table(tmp_path / "sweep_summary.csv", tmp_path / "two.svg").read_bytes()
    assert first == second
    assert b"<svg" in first


def test_selftest_passes():
    checks = selftest(n=64, seed=0)
    assert checks
    assert all(check.passed for check in checks), [c for c in checks if not c.passed]


def test_benchmark_engines_shape():
    timings = benchmark_engines(n=80, r_values=[4, 8], repeats=1, seed=0)
    assert list(timings["r"]) == [4, 8]
    assert np.all(timings[["reference_ms", "fast_ms"]].to_numpy() > 0)


def test_cli_sweep_and_plot(tmp_path, capsys):
    code = main(["sweep", "--graph", "ring", "--n", "48", "--r", "4", "--bits", "2", "--trials", "1",
                 "--out", str(tmp_path), "--quiet"])
    assert code == 0
    assert (tmp_path / "sweep.csv").exists()
    assert (tmp_path / "sweep.meta.json").exists()
    assert main(["plot", str(tmp_path / "sweep_summary.csv"), "--quiet"]) == 0
    assert (tmp_path / "sweep_summary.svg").exists()


def test_cli_reports_configuration_errors(tmp_path):
    assert main(["sweep", "--graph", "grid", "--n", "40", "--out", str(tmp_path), "--quiet"]) == 2


def test_cli_selftest(capsys):
    assert main(["selftest", "--n", "64", "--quiet"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_module_level_runners(tmp_path):
    sweep = run_bandwidth_sweep(_config("sweep", tmp_path, r="4", bits="2", trials=1))
    assert sweep.name == "sweep" and len(sweep.rows) == 1
    assert run_bitdepth_scaling(_config("bitdepth", tmp_path, r="4", bits="1,2", trials=1)).name == "bitdepth"
    assert run_comparison(_config("compare", tmp_path, r="4", bits="2", trials=1)).name == "compare"
    halftone = run_halftone(_config("halftone", tmp_path, graph="swissroll", n=120, r="8", bits="1"))
    assert sorted(halftone.exports) == ["halftone_msq", "halftone_sdw", "halftone_ssns", "halftone_ssns_fq"]
