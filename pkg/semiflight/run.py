"""
semiflight/run.py

Experiment runner and command-line entry point.

Responsibilities
----------------
- Load and validate an `ExperimentConfig` from a flat config file plus
  `--key value` overrides.
- Dispatch the named experiment, fanning Monte Carlo work out over counter-based
  streams (one per worker rank, offset per observation time).
- Write sample CSVs, result tables and the JSON-lines verification report.

Conventions
-----------
- Outputs depend only on (config, seed, workers).
- Exit status: 0 success, 1 failed law, 2 configuration error, 3 numerical
  non-convergence.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np
import pandas as pd

from . import evolution, laws, levy, semi_markov, transport
from .load import write_csv, write_report, write_table
from .special_fn import ConvergenceError
from .streams import MomentEstimate, fan_out, merge
from .transform import columns, flight_rows, limit_rows
from .validate import ExperimentConfig, load_config, parse_overrides

logger = logging.getLogger(__name__)


def _sample_csv(cfg: ExperimentConfig, draw, to_rows, displacement) -> dict[str, int]:
    """Draw ``n_paths`` samples per grid time and write them as one CSV."""
    rows: list[dict] = []
    violations = 0
    for i, t in enumerate(cfg.t_grid):
        batches = fan_out(
            lambda size, rng, t=t: draw(t, size, rng),
            cfg.n_paths,
            cfg.seed,
            cfg.workers,
            offset=i * laws.STREAM_BLOCK,
        )
        for batch in batches:
            rows.extend(to_rows(batch, len(rows)))
            violations += transport.finite_speed_violations(displacement(batch), t)
        logger.info("t=%g: %d samples", t, cfg.n_paths)
    written = write_csv(rows, cfg.output_path, columns(cfg.dimension))
    return {"rows": written, "speed_violations": violations}


def run_flight(cfg: ExperimentConfig) -> dict[str, int]:
    return _sample_csv(
        cfg,
        lambda t, size, rng: transport.sample_flight_batch(
            cfg.dimension, cfg.alpha, cfg.theta, t, size, rng
        ),
        flight_rows,
        lambda b: b.displacement,
    )


def run_scaled(cfg: ExperimentConfig) -> dict[str, int]:
    return _sample_csv(
        cfg,
        lambda t, size, rng: transport.sample_scaled_flight_batch(
            cfg.dimension, cfg.alpha, cfg.theta, t, cfg.scale_c, size, rng
        ),
        flight_rows,
        lambda b: b.displacement,
    )


def run_limit(cfg: ExperimentConfig) -> dict[str, int]:
    return _sample_csv(
        cfg,
        lambda t, size, rng: transport.sample_limit_batch(
            cfg.dimension, cfg.alpha, t, cfg.eps * t, size, rng
        ),
        limit_rows,
        lambda b: b.X_inf,
    )


def run_telegraph(cfg: ExperimentConfig) -> dict[str, int]:
    """Return probability of the two-state chain against its Mittag-Leffler law."""
    space = semi_markov.telegraph_space(cfg.theta)
    spec = levy.BernsteinSpec.from_alpha(cfg.alpha)
    rows = []
    for i, t in enumerate(cfg.t_grid):
        batches = fan_out(
            lambda size, rng, t=t: semi_markov.simulate_batch(space, spec, 1.0, t, size, rng),
            cfg.n_paths,
            cfg.seed,
            cfg.workers,
            offset=i * laws.STREAM_BLOCK,
        )
        stay = merge(
            MomentEstimate.from_values((b.final_label == 0).astype(float)) for b in batches
        )
        jumps = merge(MomentEstimate.from_values(b.n_jumps) for b in batches)
        rows.append(
            {
                "t": t,
                "p_stay": stay.mean,
                "stderr": stay.stderr,
                "analytic": semi_markov.telegraph_return_probability(cfg.alpha, cfg.theta, t),
                "mean_jumps": jumps.mean,
                "n_paths": stay.count,
            }
        )
    return {"rows": write_table(pd.DataFrame(rows), cfg.output_path)}


def run_wave_repr(cfg: ExperimentConfig) -> dict[str, int]:
    """Direct and occupation-difference estimators of ``E w(int V)``."""
    space = semi_markov.telegraph_space(cfg.theta)
    spec = levy.BernsteinSpec.from_alpha(cfg.alpha)
    action = evolution.Translate(1)
    rows = []
    for i, t in enumerate(cfg.t_grid):
        direct = merge(
            fan_out(
                lambda size, rng, t=t: evolution.estimate_q(
                    action, space, spec, None, t, lambda y, v: laws.wave_profile(y[:, 0]), size, rng
                ),
                cfg.n_paths,
                cfg.seed,
                cfg.workers,
                offset=2 * i * laws.STREAM_BLOCK,
            )
        )
        rep = merge(
            fan_out(
                lambda size, rng, t=t: evolution.estimate_q_wave_repr(
                    spec, cfg.theta, t, laws.wave_profile, size, rng
                ),
                cfg.n_paths,
                cfg.seed,
                cfg.workers,
                offset=(2 * i + 1) * laws.STREAM_BLOCK,
            )
        )
        fd = (
            evolution.telegraph_fd_solve(laws.wave_profile, cfg.theta, t, 0.0)
            if spec.is_markov
            else np.nan
        )
        rows.append(
            {
                "t": t,
                "direct": direct.mean,
                "direct_stderr": direct.stderr,
                "representation": rep.mean,
                "representation_stderr": rep.stderr,
                "finite_difference": fd,
                "n_paths": direct.count,
            }
        )
    return {"rows": write_table(pd.DataFrame(rows), cfg.output_path)}


def run_symbol_check(cfg: ExperimentConfig) -> dict[str, int]:
    """Symbol residual table plus a report of the symbol and eigenfunction checks."""
    table = laws.symbol_residuals(cfg.alpha)
    rows = write_table(table, cfg.output_path)
    report = laws.verify_laws(cfg, laws=(laws.law_symbols,))
    write_report(report, cfg.report_path)
    return {"rows": rows, "laws": len(report.records), "failed": len(report.failed)}


def run_verify_laws(cfg: ExperimentConfig) -> dict[str, int]:
    report = laws.verify_laws(cfg)
    write_report(report, cfg.report_path)
    for rec in report.failed:
        logger.warning("law %d (%s) failed: %s", rec.law_id, rec.case, rec.description)
    return {"laws": len(report.records), "failed": len(report.failed)}


RUNNERS = {
    "flight": run_flight,
    "limit": run_limit,
    "scaled": run_scaled,
    "telegraph": run_telegraph,
    "wave-repr": run_wave_repr,
    "symbol-check": run_symbol_check,
    "verify-laws": run_verify_laws,
}


def run(cfg: ExperimentConfig) -> dict[str, int]:
    """Execute the experiment named by ``cfg`` and return a small stats dict."""
    logger.info(
        "running %s (alpha=%g, theta=%g, d=%d, n_paths=%d, seed=%d, workers=%d)",
        cfg.experiment,
        cfg.alpha,
        cfg.theta,
        cfg.dimension,
        cfg.n_paths,
        cfg.seed,
        cfg.workers,
    )
    return RUNNERS[cfg.experiment](cfg)


def main(argv=None):
    """CLI entry point: ``semiflight <experiment> [--config PATH] [--key value ...]``.

    Args:
        argv: Optional list of CLI arguments (useful for testing).

    Returns:
        int: Exit code.
    """
    parser = argparse.ArgumentParser(prog="semiflight")
    parser.add_argument("experiment", help="One of: " + ", ".join(RUNNERS))
    parser.add_argument("--config", help="Flat key=value config file")
    parser.add_argument("--verbose", action="store_true", help="Log progress at INFO")
    args, extra = parser.parse_known_args(argv)

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    # pydantic's ValidationError is a ValueError.
    try:
        cfg = load_config(args.experiment, args.config, parse_overrides(extra))
    except (ValueError, OSError) as exc:
        print(f"ERROR: invalid configuration: {exc}", file=sys.stderr)
        return 2

    try:
        stats = run(cfg)
    except ConvergenceError as exc:
        print(f"ERROR: numerical non-convergence: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return 2

    print(f"Done. Stats: {stats}")
    return 1 if stats.get("failed") else 0


if __name__ == "__main__":
    # Convert the `main()` return value into a process exit status.
    raise SystemExit(main())
