"""
semiflight/transform.py

Column mapping layer from sampler batches to the CSV schema.

Responsibilities
----------------
- Define the sample schema `sample_id,t,x1,...,n_jumps,gamma`, with at least
  three position columns (lower dimensions are zero-padded).
- Provide `flight_rows` and `limit_rows` turning batches into row dicts whose
  floats are already serialised in round-trip-exact form.
"""

from __future__ import annotations

import numpy as np

from .transport import FlightBatch, LimitBatch

# Position columns are padded up to this many coordinates.
MIN_POSITION_COLUMNS = 3


def columns(d: int) -> list[str]:
    """CSV header for dimension ``d``."""
    width = max(d, MIN_POSITION_COLUMNS)
    return ["sample_id", "t", *[f"x{i + 1}" for i in range(width)], "n_jumps", "gamma"]


def fmt(value: float) -> str:
    """Shortest text that parses back to the same double."""
    return repr(float(value))


def to_rows(
    t: float,
    positions: np.ndarray,
    n_jumps: np.ndarray,
    gamma: np.ndarray,
    start_id: int = 0,
) -> list[dict[str, str | int]]:
    """Map per-sample arrays to schema rows.

    Args:
        t: Observation time shared by the rows.
        positions: Shape ``(n, d)``.
        n_jumps: Shape ``(n,)``.
        gamma: Shape ``(n,)``.
        start_id: ``sample_id`` of the first row.
    """
    pos = np.asarray(positions, dtype=float)
    if pos.ndim == 1:
        pos = pos[:, None]
    n, d = pos.shape
    names = columns(d)[2:-2]
    t_text = fmt(t)
    rows = []
    for i in range(n):
        row: dict[str, str | int] = {"sample_id": start_id + i, "t": t_text}
        for j, name in enumerate(names):
            row[name] = fmt(pos[i, j]) if j < d else fmt(0.0)
        row["n_jumps"] = int(n_jumps[i])
        row["gamma"] = fmt(gamma[i])
        rows.append(row)
    return rows


def flight_rows(batch: FlightBatch, start_id: int = 0) -> list[dict[str, str | int]]:
    """Rows of a flight batch; ``gamma`` is the age ``t - tau_N``."""
    return to_rows(batch.t, batch.position, batch.n_jumps, batch.age, start_id)


def limit_rows(batch: LimitBatch, start_id: int = 0) -> list[dict[str, str | int]]:
    """Rows of a limit batch; positions are ``X_inf`` and ``gamma`` is ``t - sigma(L-)``."""
    return to_rows(batch.t, batch.X_inf, batch.n_jumps, batch.gamma_sigma, start_id)
