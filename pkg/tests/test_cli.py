"""CLI contract: configs, exit codes, artifacts, determinism, plot data."""

import json
import subprocess
import sys

import pytest

from semicascade import cli, systems


def _base_config(out_dir):
    return {
        "schema": cli.CONFIG_SCHEMA,
        "system": {"family": "circle_rotation", "params": {"alpha": systems.GOLDEN}},
        "partition": {"cells_per_axis": 16, "samples_per_cell": 3},
        "analyses": list(cli.ANALYSES),
        "horizons": {"orbit_n": 512, "schedule_lengths": [64, 128, 256, 512],
                     "proximality_horizon": 128, "covering_horizon": 64},
        "banks": {"test_functions": 8, "grid_size": 128},
        "options": {"max_period": 2, "proximality_points": 36,
                    "tameness_k_max": 4, "tameness_strategy": "fixed",
                    "covering_eps": [0.5, 0.1], "kernel_rounds": 32,
                    "convergence_probe": 0.3, "limit_probe_count": 8},
        "seed": 0,
        "output_dir": str(out_dir),
    }


def _write_config(tmp_path, config, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return str(path)


@pytest.fixture(scope="module")
def finished_run(tmp_path_factory):
    """One full run shared by the artifact, determinism and plotdata tests."""
    tmp_path = tmp_path_factory.mktemp("clirun")
    out_dir = tmp_path / "out"
    cfg = _base_config(out_dir)
    code = cli.main(["run", _write_config(tmp_path, cfg)])
    assert code == 0
    report = json.loads((out_dir / "report.json").read_text())
    return tmp_path, out_dir, cfg, report


# ---------------------------------------------------------------------------
# run


def test_run_writes_report_and_side_tables(finished_run, capsys):
    _, out_dir, _, report = finished_run
    assert report["schema"] == cli.REPORT_SCHEMA
    assert set(report["results"]) == set(cli.ANALYSES)
    assert report["system_description"].startswith("circle_rotation(")
    assert len(report["verdict_lines"]) >= len(cli.ANALYSES)
    for name in ("convergence_defects.csv", "measure_0.csv", "tameness.csv",
                 "covering.csv"):
        assert (out_dir / name).exists(), name
    header = (out_dir / "convergence_defects.csv").read_text().splitlines()[0]
    assert header == "n,defect"
    ## every analysis result carries its context triple
    for entry in report["results"].values():
        assert set(entry["context"]) == {"resolution", "horizon", "tolerance"}


def test_run_prints_verdict_lines(tmp_path, capsys):
    cfg = _base_config(tmp_path / "out")
    cfg["analyses"] = ["convergence", "unique_minimal_set"]
    code = cli.main(["run", _write_config(tmp_path, cfg)])
    out = capsys.readouterr().out
    assert code == 0
    assert "schedule convergence: converged" in out
    assert "unique minimal set per orbit closure: true" in out
    assert "consistent" in out
    assert "report written to" in out


def test_run_deterministic_except_timestamp(finished_run, tmp_path):
    _, _, cfg, report = finished_run
    out2 = tmp_path / "out2"
    cfg2 = dict(cfg, output_dir=str(out2))
    code = cli.main(["run", _write_config(tmp_path, cfg2, "config2.json")])
    assert code == 0
    first = json.loads(json.dumps(report))
    second = json.loads((out2 / "report.json").read_text())
    assert first["timestamp"] != "" and second["timestamp"] != ""
    del first["timestamp"], second["timestamp"]
    first["config"]["output_dir"] = second["config"]["output_dir"] = ""
    assert json.dumps(first, sort_keys=True) == json.dumps(second, sort_keys=True)


def test_output_dir_env_override(tmp_path, monkeypatch):
    cfg = _base_config(tmp_path / "ignored")
    cfg["analyses"] = ["measures"]
    forced = tmp_path / "forced"
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(forced))
    code = cli.main(["run", _write_config(tmp_path, cfg)])
    assert code == 0
    assert (forced / "report.json").exists()
    assert not (tmp_path / "ignored").exists()


# ---------------------------------------------------------------------------
# config rejection (exit 2, message names the field)


def _expect_config_error(tmp_path, capsys, cfg, fragment):
    code = cli.main(["run", _write_config(tmp_path, cfg)])
    err = capsys.readouterr().err
    assert code == 2
    assert err.startswith("error:")
    assert fragment in err, err


def test_rejects_missing_file(tmp_path, capsys):
    code = cli.main(["run", str(tmp_path / "absent.json")])
    err = capsys.readouterr().err
    assert code == 2 and "does not exist" in err


def test_rejects_invalid_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code = cli.main(["run", str(path)])
    err = capsys.readouterr().err
    assert code == 2 and "not valid JSON" in err


def test_rejects_wrong_schema(tmp_path, capsys):
    cfg = _base_config(tmp_path)
    cfg["schema"] = "something-else"
    _expect_config_error(tmp_path, capsys, cfg, "config field schema")


def test_rejects_unknown_top_level_key(tmp_path, capsys):
    cfg = _base_config(tmp_path)
    cfg["bogus"] = 1
    _expect_config_error(tmp_path, capsys, cfg, "(top level).bogus is not recognized")


def test_rejects_bad_partition(tmp_path, capsys):
    cfg = _base_config(tmp_path)
    cfg["partition"] = {"samples_per_cell": 3}
    _expect_config_error(tmp_path, capsys, cfg,
                         "config field partition.cells_per_axis")


def test_rejects_unknown_analysis(tmp_path, capsys):
    cfg = _base_config(tmp_path)
    cfg["analyses"] = ["convergence", "mystery"]
    _expect_config_error(tmp_path, capsys, cfg, "unknown analysis 'mystery'")


def test_rejects_unknown_family(tmp_path, capsys):
    cfg = _base_config(tmp_path)
    cfg["system"] = {"family": "horseshoe", "params": {}}
    _expect_config_error(tmp_path, capsys, cfg, "system.family has unknown value")


def test_rejects_missing_required_param(tmp_path, capsys):
    cfg = _base_config(tmp_path)
    cfg["system"] = {"family": "circle_rotation", "params": {}}
    _expect_config_error(tmp_path, capsys, cfg, "system.params.alpha is required")


def test_rejects_out_of_range_param(tmp_path, capsys):
    cfg = _base_config(tmp_path)
    cfg["system"] = {"family": "north_south", "params": {"kappa": 2.0}}
    _expect_config_error(tmp_path, capsys, cfg, "system.params is invalid")


def test_rejects_probe_dimension_mismatch(tmp_path, capsys):
    cfg = _base_config(tmp_path)
    cfg["options"]["convergence_probe"] = [0.3, 0.4]
    _expect_config_error(tmp_path, capsys, cfg, "options.convergence_probe")


def test_rejects_single_schedule(tmp_path, capsys):
    cfg = _base_config(tmp_path)
    cfg["horizons"]["schedule_lengths"] = [64]
    _expect_config_error(tmp_path, capsys, cfg, "horizons.schedule_lengths")


def test_budget_exhaustion_exits_3(tmp_path, capsys):
    cfg = _base_config(tmp_path / "out")
    cfg["system"] = {"family": "toral_automorphism",
                     "params": {"m11": 2, "m12": 1, "m21": 1, "m22": 1}}
    cfg["partition"] = {"cells_per_axis": 8192, "samples_per_cell": 5}
    cfg["options"]["convergence_probe"] = [0.3, 0.4]
    code = cli.main(["run", _write_config(tmp_path, cfg)])
    err = capsys.readouterr().err
    assert code == 3
    assert err.startswith("error:")


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# systems catalog


def test_systems_subcommand(capsys):
    assert cli.main(["systems"]) == 0
    catalog = json.loads(capsys.readouterr().out)
    assert [entry["family"] for entry in catalog] == list(systems.FAMILIES)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "semicascade", "systems"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)


# ---------------------------------------------------------------------------
# plotdata


@pytest.mark.parametrize("analysis,header", [
    ("convergence", "n,defect"),
    ("tameness", "K,defect"),
    ("covering", "horizon,epsilon,count"),
    ("measures", "measure,class_id,index"),
    ("limit_measures", "probe,ergodic,mass_in_class"),
    ("proximality", "defect,n_two_step_triples,n_violations"),
    ("unique_minimal_set", "verdict,graph_verdict,backend"),
    ("kernel_projection", "residual_vq,residual_idem,rounds"),
])
def test_plotdata_per_analysis(finished_run, tmp_path, analysis, header):
    _, out_dir, _, _ = finished_run
    code = cli.main(["plotdata", str(out_dir / "report.json"), analysis,
                     "--output-dir", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / ("plot_%s.csv" % analysis)).read_text().splitlines()
    assert lines[0] == header
    assert len(lines) >= 2


def test_plotdata_tameness_sorted_numerically(finished_run, tmp_path):
    _, out_dir, _, report = finished_run
    cli.main(["plotdata", str(out_dir / "report.json"), "tameness",
              "--output-dir", str(tmp_path)])
    lines = (tmp_path / "plot_tameness.csv").read_text().splitlines()[1:]
    ks = [int(ln.split(",")[0]) for ln in lines]
    assert ks == sorted(ks)
    assert ks == sorted(int(k) for k in report["results"]["tameness"]["defect_per_k"])


def test_plotdata_missing_analysis(finished_run, tmp_path, capsys):
    _, out_dir, cfg, _ = finished_run
    code = cli.main(["plotdata", str(out_dir / "report.json"), "convergence",
                     "--output-dir", str(tmp_path)])
    capsys.readouterr()
    assert code == 0
    bare = dict(_base_config(tmp_path / "o2"), analyses=["measures"])
    cfgpath = _write_config(tmp_path, bare, "bare.json")
    assert cli.main(["run", cfgpath]) == 0
    capsys.readouterr()
    code = cli.main(["plotdata", str(tmp_path / "o2" / "report.json"),
                     "convergence", "--output-dir", str(tmp_path)])
    err = capsys.readouterr().err
    assert code == 2
    assert "not present in the report" in err


def test_plotdata_missing_report(tmp_path, capsys):
    code = cli.main(["plotdata", str(tmp_path / "nope.json"), "convergence"])
    err = capsys.readouterr().err
    assert code == 2 and "does not exist" in err
