"""
semiflight/load.py

Output layer for experiment results.

Responsibilities
----------------
- Resolve output locations and create their parent directories.
- Write sample rows and result tables as CSV with pandas.
- Write the verification report as JSON lines (one record per law plus a
  summary line).

Environment Variables
---------------------
SEMIFLIGHT_OUTPUT_DIR
    Default directory for outputs (read by the config layer).
SEMIFLIGHT_WORKERS
    Default worker count (read by the streams layer).

Notes
-----
- CSV files use `\\n` line endings and no index column so repeated runs with
  the same config are byte-identical.
"""

from __future__ import annotations

import sys
from collections.abc import Sequence
from pathlib import Path
from typing import TYPE_CHECKING

import pandas as pd
from dotenv import load_dotenv

if TYPE_CHECKING:
    from .laws import VerificationReport

# Load `.env` for local development so worker counts and output directories
# do not need to be exported manually.
load_dotenv()


def ensure_parent(path: str | Path) -> Path:
    """Create the parent directory of ``path`` and return it as a Path.

    Side Effects:
        Exits the process with status 2 if the directory cannot be created.
    """
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"ERROR: cannot create output directory {target.parent}: {exc}", file=sys.stderr)
        sys.exit(2)
    return target


def write_csv(rows: Sequence[dict], path: str | Path, columns: Sequence[str]) -> int:
    """Write schema rows to ``path``.

    Args:
        rows: Row dicts keyed by column name.
        path: Destination file.
        columns: Column order.

    Returns:
        int: Number of rows written.
    """
    frame = pd.DataFrame(list(rows), columns=list(columns))
    return write_table(frame, path)


def write_table(frame: pd.DataFrame, path: str | Path) -> int:
    """Write a result table to ``path`` and return its row count."""
    target = ensure_parent(path)
    frame.to_csv(target, index=False, lineterminator="\n")
    return len(frame)


def write_report(report: VerificationReport, path: str | Path) -> int:
    """Write ``report`` as JSON lines and return the number of law records."""
    target = ensure_parent(path)
    with open(target, "w", encoding="utf-8", newline="\n") as fh:
        for record in report.records:
            fh.write(record.model_dump_json(by_alias=True) + "\n")
        fh.write(report.summary().model_dump_json(by_alias=True) + "\n")
    return len(report.records)
