"""Tests for the mapping of sampler batches onto CSV rows."""

from __future__ import annotations

import numpy as np

from semiflight import transform, transport


def test_columns_pad_to_three_positions():
    """Low dimensions are padded; higher ones extend the header."""

    assert transform.columns(1) == ["sample_id", "t", "x1", "x2", "x3", "n_jumps", "gamma"]
    assert transform.columns(4)[2:6] == ["x1", "x2", "x3", "x4"]


def test_fmt_round_trips_doubles():
    """Serialised floats parse back to the identical double."""

    for value in (0.1 + 0.2, 1e-300, -3.0, 2.0 / 3.0):
        assert float(transform.fmt(value)) == value


def test_to_rows_pads_and_numbers_samples():
    """Missing coordinates are zero and sample ids continue from start_id."""

    rows = transform.to_rows(
        0.5, np.array([[0.25], [-0.125]]), np.array([0, 3]), np.array([0.5, 0.1]), start_id=10
    )

    assert [r["sample_id"] for r in rows] == [10, 11]
    assert rows[0] == {
        "sample_id": 10,
        "t": "0.5",
        "x1": "0.25",
        "x2": "0.0",
        "x3": "0.0",
        "n_jumps": 0,
        "gamma": "0.5",
    }
    assert rows[1]["n_jumps"] == 3


def test_flight_and_limit_rows(rng):
    """Flight rows carry positions and ages; limit rows carry X_inf and gamma_sigma."""

    flights = transport.sample_flight_batch(2, 0.6, 1.0, 1.0, 5, rng)
    rows = transform.flight_rows(flights)
    assert len(rows) == 5
    assert float(rows[2]["x2"]) == flights.position[2, 1]
    assert float(rows[2]["gamma"]) == flights.age[2]

    limits = transport.sample_limit_batch(1, 0.6, 1.0, 1e-3, 4, rng)
    rows = transform.limit_rows(limits, start_id=5)
    assert rows[0]["sample_id"] == 5
    assert float(rows[3]["x1"]) == limits.X_inf[3, 0]
    assert float(rows[3]["gamma"]) == limits.gamma_sigma[3]
