"""
semiflight/validate.py

Validation and typing layer for experiment configuration.

Responsibilities
----------------
- Define the `ExperimentConfig` model that captures every run parameter:
  * `experiment`: one of `EXPERIMENTS`.
  * Process parameters (`alpha`, `theta`, `dimension`), the observation grid
    `t_grid`, Monte Carlo budget (`n_paths`, `seed`, `workers`) and the
    relative truncation `eps` of the subordinator surrogate.
  * Output locations (`output_path`, `report_path`).
- Parse flat `key=value` config files and `--key value` command-line overrides
  into a single mapping before validation.

Conventions
-----------
- Unknown keys are rejected (`extra="forbid"`).
- Dashes and underscores in keys are interchangeable (`t-grid` == `t_grid`).
- `t_grid` may be given as `"0.5, 1, 2"`.
- `alpha = 1` selects the Markov (exponential-wait) model.

Environment Variables
---------------------
SEMIFLIGHT_WORKERS
    Default for `workers`.
SEMIFLIGHT_OUTPUT_DIR
    Directory for default output paths. Defaults to the working directory.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .streams import default_workers

EXPERIMENTS = (
    "flight",
    "limit",
    "scaled",
    "telegraph",
    "wave-repr",
    "verify-laws",
    "symbol-check",
)

Experiment = Literal[
    "flight", "limit", "scaled", "telegraph", "wave-repr", "verify-laws", "symbol-check"
]


class ExperimentConfig(BaseModel):
    """Validated parameters of one run.

    Attributes:
        experiment: Experiment name.
        alpha: Index in (0, 1]; 1 means Markov.
        theta: Scattering rate.
        dimension: Space dimension of flights and limits.
        t_grid: Observation times, positive and strictly increasing.
        n_paths: Monte Carlo paths per observation time.
        seed: 64-bit unsigned seed.
        workers: Worker threads.
        eps: Truncation threshold relative to the passage level, in (0, 1).
        output_path: CSV destination.
        report_path: JSON-lines report destination.
        scale_c: Scale of the rescaled flight.
        tolerance: Node-doubling tolerance of Laplace inversions.
    """

    model_config = ConfigDict(extra="forbid")

    experiment: Experiment
    alpha: float = Field(0.6, gt=0.0, le=1.0)
    theta: float = Field(1.0, gt=0.0)
    dimension: int = Field(1, ge=1)
    t_grid: list[float] = Field(default_factory=lambda: [1.0])
    n_paths: int = Field(10_000, ge=1)
    seed: int = Field(0, ge=0, le=2**64 - 1)
    workers: int = Field(default_factory=default_workers, ge=1)
    eps: float = Field(1e-4, gt=0.0, lt=1.0)
    output_path: str | None = None
    report_path: str | None = None
    scale_c: float = Field(1e4, ge=1.0)
    tolerance: float = Field(1e-8, gt=0.0)

    @field_validator("experiment", mode="before")
    @classmethod
    def normalise_name(cls, v):
        """Accept `wave_repr` style names for the dashed experiments."""
        return v.replace("_", "-") if isinstance(v, str) else v

    @field_validator("t_grid", mode="before")
    @classmethod
    def split_grid(cls, v):
        """Split a comma-separated string into a list of times."""
        if isinstance(v, str):
            return [item.strip() for item in v.split(",") if item.strip()]
        if isinstance(v, (int, float)):
            return [v]
        return v

    @field_validator("t_grid")
    @classmethod
    def check_grid(cls, v: list[float]) -> list[float]:
        if not v:
            raise ValueError("t_grid must not be empty")
        if v[0] <= 0 or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("t_grid must be positive and strictly increasing")
        return v

    @field_validator("n_paths", "seed", "workers", "dimension", mode="before")
    @classmethod
    def integral_strings(cls, v):
        """Allow integral values written as floats, e.g. `1e5`."""
        if isinstance(v, str):
            try:
                f = float(v)
            except ValueError:
                return v
            return int(f) if f.is_integer() and "e" in v.lower() else v
        return v

    @model_validator(mode="after")
    def fill_paths(self) -> ExperimentConfig:
        if self.output_path is None:
            base = Path(os.getenv("SEMIFLIGHT_OUTPUT_DIR", "."))
            self.output_path = str(base / f"{self.experiment}.csv")
        if self.report_path is None:
            self.report_path = str(Path(self.output_path).with_suffix(".jsonl"))
        return self


def normalise_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_")


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat `key=value` text.

    `#` starts a comment, blank lines are ignored, later keys win.

    Raises:
        ValueError: On a non-blank line without `=`.
    """
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[normalise_key(key)] = value.strip()
    return out


def parse_overrides(tokens: list[str]) -> dict[str, str]:
    """Turn `["--key", "value", "--other=value"]` into a mapping.

    Raises:
        ValueError: On a token that is not a `--key` or a key without value.
    """
    out: dict[str, str] = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--"):
            raise ValueError(f"unexpected argument {tok!r}")
        if "=" in tok:
            key, value = tok.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ValueError(f"missing value for {tok}")
            key, value = tok, tokens[i + 1]
            i += 2
        out[normalise_key(key)] = value
    return out


def load_config(
    experiment: str, path: str | None = None, overrides: dict[str, Any] | None = None
) -> ExperimentConfig:
    """Build a validated config from an optional file plus overrides.

    Args:
        experiment: Experiment name (takes precedence over an `experiment` key
            in the file).
        path: Optional `key=value` file.
        overrides: Mapping applied on top of the file.

    Returns:
        ExperimentConfig: The validated configuration.

    Raises:
        OSError: If the file cannot be read.
        ValueError: If the file is malformed.
        pydantic.ValidationError: If a value is out of domain.
    """
    values: dict[str, Any] = {}
    if path:
        values.update(parse_config_text(Path(path).read_text(encoding="utf-8")))
    values.update(overrides or {})
    values["experiment"] = experiment
    return ExperimentConfig(**values)
