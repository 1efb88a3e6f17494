"""Pytest configuration shared across the test suite."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

# Ensure the project root is on sys.path so ``import semiflight`` works when
# running the test suite without installing the package.
ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from semiflight.streams import stream  # noqa: E402


@pytest.fixture
def rng():
    """A fixed counter-based generator so Monte Carlo tests are reproducible."""
    return stream(20240101, 7)


@pytest.fixture(autouse=True)
def _isolate_env(monkeypatch, tmp_path):
    """Keep worker counts and output directories independent of the developer's `.env`."""
    monkeypatch.setenv("SEMIFLIGHT_WORKERS", "1")
    monkeypatch.setenv("SEMIFLIGHT_OUTPUT_DIR", str(tmp_path))
