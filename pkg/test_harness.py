"""Experiment files, the registry, replicate execution, reports and the CLI."""

import json
import math
from pathlib import Path

import pytest
from pydantic import ValidationError

from paspectra.cli_wrapper import main as cli_main
from paspectra.config import settings
from paspectra.configurator import ConfigError, load_experiment_config, template_text, write_template
from paspectra.core.experiments import (
    EXPERIMENT_IDS,
    ExperimentConfig,
    discover_builtin_experiments,
    execute_experiment,
    experiment,
    get_all_experiments,
    get_experiment,
    unregister_experiment,
)
from paspectra.reports import config_hash, jsonable, numeric_summary


def write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


# --- experiment files ----------------------------------------------------------------


def test_file_values_and_overrides(tmp_path):
    path = write(
        tmp_path / "exp.conf",
        "# census run\n[experiment]\nexperiment = census\n\n[graph]\nm = 3\nn = 400  # small\neps = none\n",
    )
    cfg = load_experiment_config(path)
    assert (cfg.experiment, cfg.m, cfg.n, cfg.eps) == ("census", 3, 400, None)
    cfg = load_experiment_config(path, {"n": 50, "m": None})
    assert cfg.n == 50 and cfg.m == 3


def test_none_is_a_value_for_normalize(tmp_path):
    path = write(tmp_path / "exp.conf", "experiment = spectrum\nnormalize = none\nsigma = none\n")
    cfg = load_experiment_config(path)
    assert cfg.normalize == "none"
    assert cfg.sigma is None


@pytest.mark.parametrize("name", EXPERIMENT_IDS)
def test_templates_load_as_written(tmp_path, name):
    path = write_template(tmp_path / f"{name}.conf", name)
    cfg = load_experiment_config(path)
    assert cfg.experiment == name
    assert cfg.replicates == 1 and cfg.output_dir is None
    assert "[localize]" in template_text(name)


def test_template_refuses_to_overwrite(tmp_path):
    path = write_template(tmp_path / "exp.conf")
    with pytest.raises(ConfigError, match="overwrite"):
        write_template(path)
    write_template(path, "edge", force=True)
    assert load_experiment_config(path).experiment == "edge"


@pytest.mark.parametrize(
    "text, line, message",
    [
        ("experiment = generate\nm 3\n", 2, "key = value"),
        ("experiment = generate\n\nwidth = 3\n", 3, "unknown key"),
        ("experiment = generate\nm = 2\nm = 3\n", 3, "already set on line 2"),
        ("experiment = generate\nbins = 5\nn = 0\n", 3, "n:"),
        ("experiment = generate\nm = lots\n", 2, "m:"),
    ],
)
def test_config_errors_name_the_line(tmp_path, text, line, message):
    path = write(tmp_path / "bad.conf", text)
    with pytest.raises(ConfigError, match=message) as info:
        load_experiment_config(path)
    assert info.value.line == line
    assert str(info.value).startswith(f"{path}:{line}:")


def test_cross_field_errors_have_no_line(tmp_path):
    path = write(tmp_path / "bad.conf", "experiment = moments\nK = 4\n")
    with pytest.raises(ConfigError, match="needs eps") as info:
        load_experiment_config(path)
    assert info.value.line is None


def test_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        load_experiment_config(Path("/nonexistent/exp.conf"))


def test_config_validation():
    with pytest.raises(ValidationError):
        ExperimentConfig(experiment="moments", eps=0.1, K=14)
    with pytest.raises(ValidationError):
        ExperimentConfig(experiment="verify-prob", n=9)
    with pytest.raises(ValidationError):
        ExperimentConfig(experiment="census", pattern="triangle")
    with pytest.raises(ValidationError):
        ExperimentConfig(experiment="generate", colour="red")
    with pytest.raises(ValidationError):
        ExperimentConfig(experiment="generate", eps=1.0)


# --- hashing and reports -----------------------------------------------------------------


def test_config_hash_ignores_the_output_dir(tmp_path):
    a = ExperimentConfig(experiment="generate", n=100)
    b = ExperimentConfig(experiment="generate", n=100, output_dir=tmp_path)
    c = ExperimentConfig(experiment="generate", n=101)
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(c)
    assert len(config_hash(a)) == 16


def test_jsonable_and_summaries(tmp_path):
    assert jsonable({"x": math.nan, "p": tmp_path / "a.csv", 1: (1.5, math.inf)}) == {
        "x": None,
        "p": "a.csv",
        "1": [1.5, None],
    }
    summary = numeric_summary([{"v": 1.0}, {"v": 3.0}, {"v": None}], ["v", "missing"])
    assert summary["v"]["mean"] == 2.0 and summary["v"]["stderr"] == pytest.approx(1.0)
    assert "missing" not in summary
    assert math.isnan(numeric_summary([{"v": 1.0}], ["v"])["v"]["stderr"])


# --- registry -------------------------------------------------------------------------------


def test_builtin_registry_covers_every_experiment():
    discover_builtin_experiments()
    assert set(get_all_experiments()) == set(EXPERIMENT_IDS)
    assert get_experiment("moments")["replicated"] is False
    assert get_experiment("generate")["replicated"] is True


def test_registry_rejects_unknown_ids():
    with pytest.raises(ValueError):
        experiment("bogus", "not an experiment")
    assert unregister_experiment("bogus") is False


# --- execution ------------------------------------------------------------------------------


def generate_config(out: Path, **extra) -> ExperimentConfig:
    values = {"experiment": "generate", "m": 2, "n": 200, "replicates": 2, "base_seed": 7, "output_dir": out}
    values.update(extra)
    return ExperimentConfig(**values)


async def test_generate_run_writes_artifacts(tmp_path):
    result = await execute_experiment(generate_config(tmp_path), workers=1)
    assert result.exit_code == 0
    assert [r["seed"] for r in result.records] == [7, 8]
    assert (tmp_path / "graph-7.txt").exists() and (tmp_path / "graph-8.txt").exists()
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["schema_version"] == settings.schema_version
    assert report["config_hash"] == config_hash(result.cfg)
    assert report["aggregate"]["passed"] is True
    assert "output_dir" not in report["config"]


async def test_reruns_are_byte_identical(tmp_path):
    first = await execute_experiment(generate_config(tmp_path / "a"), workers=1)
    second = await execute_experiment(generate_config(tmp_path / "b"), workers=1)
    assert first.report_path.read_bytes() == second.report_path.read_bytes()
    assert (tmp_path / "a" / "graph-8.txt").read_bytes() == (tmp_path / "b" / "graph-8.txt").read_bytes()


async def test_worker_count_does_not_change_results(tmp_path):
    serial = await execute_experiment(generate_config(tmp_path / "serial"), workers=1)
    pooled = await execute_experiment(generate_config(tmp_path / "pooled"), workers=2)
    assert serial.report_path.read_bytes() == pooled.report_path.read_bytes()


async def test_failed_replicates_are_recorded(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "dense_eigen_limit", 50)
    cfg = ExperimentConfig(experiment="spectrum", n=100, replicates=2, output_dir=tmp_path)
    result = await execute_experiment(cfg, workers=1)
    assert result.exit_code == 1
    assert not result.records
    assert [f["seed"] for f in result.failures] == [0, 1]
    assert "ValueError" in result.failures[0]["error"]
    assert json.loads(result.report_path.read_text())["exit_code"] == 1


async def test_spectrum_with_truncation(tmp_path):
    cfg = ExperimentConfig(experiment="spectrum", m=3, n=3000, eps=0.1, normalize="binomial", output_dir=tmp_path)
    result = await execute_experiment(cfg, workers=1)
    assert result.exit_code == 0
    record = result.records[0]
    assert record["interval_distance"] <= 0.1 + 1e-12
    assert record["within_eps"]
    assert record["interlacing_bound"] == pytest.approx(0.2)
    assert (tmp_path / "eigenvalues-0.csv").read_text().startswith("# config_hash=")
    assert (tmp_path / "histogram-0.csv").exists()


async def test_small_spectrum_is_gated_by_interlacing(tmp_path):
    cfg = ExperimentConfig(experiment="spectrum", m=3, n=300, eps=0.1, replicates=5, output_dir=tmp_path)
    result = await execute_experiment(cfg, workers=1)
    # at n=300 the distance may sit slightly above eps without failing the run
    assert result.exit_code == 0
    for record in result.records:
        assert record["interval_distance"] <= record["interlacing_bound"] + 1e-12
        assert record["interlacing_bound"] == pytest.approx(0.2)
    assert result.aggregate["within_eps"] == sum(r["within_eps"] for r in result.records)


async def test_moment_table_run(tmp_path):
    cfg = ExperimentConfig(experiment="moments", m=2, eps=0.1, K=6, replicates=5, output_dir=tmp_path)
    result = await execute_experiment(cfg, workers=1)
    assert result.exit_code == 0
    assert len(result.records) == 1
    table = json.loads((tmp_path / "moments.json").read_text())
    assert table["moments"][2] == pytest.approx(2.07797, abs=1e-4)
    assert table["moments"][1] == 0.0


async def test_truncate_compare_run(tmp_path):
    cfg = ExperimentConfig(
        experiment="truncate-compare", m=2, n=400, eps=0.1, K=4, replicates=3, output_dir=tmp_path
    )
    result = await execute_experiment(cfg, workers=1)
    assert result.exit_code == 0
    rows = result.aggregate["table"]
    assert [row["k"] for row in rows] == [1, 2, 3, 4]
    assert rows[1]["theory"] == pytest.approx(2.07797, abs=1e-4)
    lines = (tmp_path / "moment-comparison.csv").read_text().splitlines()
    assert "k,empirical_mean,empirical_stderr,theory,ratio" in lines


async def test_census_run(tmp_path):
    cfg = ExperimentConfig(experiment="census", m=2, n=300, pattern="edge", replicates=2, output_dir=tmp_path)
    result = await execute_experiment(cfg, workers=1)
    assert result.exit_code == 0
    assert result.aggregate["formula"] == "mn"
    assert 0.9 < result.aggregate["ratio"] <= 1.0


async def test_reconstruct_run(tmp_path):
    cfg = ExperimentConfig(
        experiment="reconstruct", m=3, n=300, eps=0.1, K=4, normalize="sqrt-m", gridsize=256, output_dir=tmp_path
    )
    result = await execute_experiment(cfg, workers=1)
    assert result.exit_code == 0
    record = result.records[0]
    assert 0.0 <= record["l1_distance"] <= 2.0
    assert (tmp_path / "density.csv").exists()


async def test_edge_and_localize_runs(tmp_path):
    edge = ExperimentConfig(experiment="edge", m=2, n=1000, K=2, output_dir=tmp_path / "edge")
    result = await execute_experiment(edge, workers=1)
    assert result.exit_code == 0
    assert len(result.records[0]["ratios"]) == 2

    loc = ExperimentConfig(experiment="localize", m=2, n=400, K=2, output_dir=tmp_path / "loc")
    result = await execute_experiment(loc, workers=1)
    assert result.exit_code == 0
    record = result.records[0]
    assert record["weyl_holds"] and record["degree_identity"]
    assert "davis_kahan" in record
    assert (tmp_path / "loc" / record["eigenvectors"]).exists()


# --- CLI -------------------------------------------------------------------------------------


def test_cli_verify_prob(tmp_path):
    with pytest.raises(SystemExit) as info:
        cli_main(["verify-prob", "--n", "5", "--output-dir", str(tmp_path)])
    assert info.value.code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["aggregate"]["passed"] is True
    assert report["records"][0]["mismatches"] == 0


def test_cli_rejects_bad_values(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        cli_main(["moments", "--K", "4", "--output-dir", str(tmp_path)])
    assert info.value.code == 1
    assert "needs eps" in capsys.readouterr().err


def test_cli_config_and_list(tmp_path, capsys):
    path = tmp_path / "exp.conf"
    cli_main(["config", str(path), "--experiment", "census"])
    assert load_experiment_config(path).experiment == "census"
    with pytest.raises(SystemExit) as info:
        cli_main(["config", str(path)])
    assert info.value.code == 1
    cli_main(["list"])
    assert "generate" in capsys.readouterr().out


def test_cli_flags_override_the_file(tmp_path):
    path = write(tmp_path / "exp.conf", "experiment = generate\nn = 5000\nm = 1\n")
    with pytest.raises(SystemExit) as info:
        cli_main(["generate", "--config", str(path), "--n", "60", "--seed", "3", "--output-dir", str(tmp_path / "out")])
    assert info.value.code == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["config"]["n"] == 60 and report["config"]["m"] == 1
    assert report["records"][0]["seed"] == 3


def test_cli_help_names_both_density_models(capsys):
    with pytest.raises(SystemExit) as info:
        cli_main(["reconstruct", "--help"])
    assert info.value.code == 0
    text = " ".join(capsys.readouterr().out.split())
    assert "truncated Taylor series" in text
    assert "cumulant (default)" in text
