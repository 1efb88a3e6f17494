"""Tests for experiment configuration parsing and validation."""

from __future__ import annotations

from pathlib import Path

import pytest
from pydantic import ValidationError

from semiflight import validate


def test_defaults_and_output_paths(tmp_path):
    """Defaults fill in and outputs land in SEMIFLIGHT_OUTPUT_DIR."""

    cfg = validate.ExperimentConfig(experiment="flight")

    assert cfg.alpha == 0.6
    assert cfg.t_grid == [1.0]
    assert cfg.workers == 1
    assert Path(cfg.output_path) == tmp_path / "flight.csv"
    assert Path(cfg.report_path) == tmp_path / "flight.jsonl"


def test_grid_and_integer_coercion():
    """Comma-separated grids and float-style integers are accepted."""

    cfg = validate.ExperimentConfig(experiment="wave_repr", t_grid="0.5, 1, 2", n_paths="1e5")

    assert cfg.experiment == "wave-repr"
    assert cfg.t_grid == [0.5, 1.0, 2.0]
    assert cfg.n_paths == 100_000


@pytest.mark.parametrize(
    "values",
    [
        {"alpha": 0.0},
        {"alpha": 1.2},
        {"theta": -1.0},
        {"eps": 1.0},
        {"t_grid": "1, 0.5"},
        {"t_grid": ""},
        {"seed": -1},
        {"workers": 0},
        {"scale_c": 0.5},
        {"unknown_key": 1},
    ],
)
def test_out_of_domain_values_are_rejected(values):
    """Every numeric field is checked and unknown keys are forbidden."""

    with pytest.raises(ValidationError):
        validate.ExperimentConfig(experiment="flight", **values)


def test_unknown_experiment_and_markov_verify():
    """Experiment names are closed; verify-laws also accepts the Markov case."""

    with pytest.raises(ValidationError):
        validate.ExperimentConfig(experiment="plot")
    cfg = validate.ExperimentConfig(experiment="verify-laws", alpha=1.0)
    assert cfg.alpha == 1.0


def test_parse_config_text_comments_and_dashes():
    """Comments and blank lines are skipped; dashed keys become underscores."""

    text = """
    # run settings
    alpha = 0.7
    t-grid = 1, 2   # two times

    n_paths=50
    """

    assert validate.parse_config_text(text) == {"alpha": "0.7", "t_grid": "1, 2", "n_paths": "50"}
    with pytest.raises(ValueError):
        validate.parse_config_text("alpha 0.7")


def test_parse_overrides_forms():
    """Both `--key value` and `--key=value` are understood."""

    out = validate.parse_overrides(["--n-paths", "10", "--seed=3"])

    assert out == {"n_paths": "10", "seed": "3"}
    with pytest.raises(ValueError):
        validate.parse_overrides(["--seed"])
    with pytest.raises(ValueError):
        validate.parse_overrides(["seed", "3"])


def test_load_config_file_then_overrides(tmp_path):
    """Overrides win over the file and the positional experiment wins over both."""

    path = tmp_path / "run.cfg"
    path.write_text("experiment = limit\nalpha = 0.4\nseed = 9\n", encoding="utf-8")

    cfg = validate.load_config("telegraph", str(path), {"seed": "11"})

    assert cfg.experiment == "telegraph"
    assert cfg.alpha == 0.4
    assert cfg.seed == 11
    with pytest.raises(OSError):
        validate.load_config("flight", str(tmp_path / "missing.cfg"))
