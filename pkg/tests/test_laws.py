"""Tests for the law evaluators and the verification report."""

from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from semiflight import laws
from semiflight.streams import MomentEstimate
from semiflight.validate import ExperimentConfig


def small_config(**values) -> ExperimentConfig:
    base = {"experiment": "verify-laws", "n_paths": 2000, "seed": 3, "workers": 2}
    base.update(values)
    return ExperimentConfig(**base)


def test_compare_mean_uses_three_standard_errors():
    """The tolerance is three standard errors plus the floor."""

    est = MomentEstimate.from_values(np.array([0.0, 1.0] * 50))

    rec = laws.compare_mean(10, "t=1", "demo", 0.5 + 2 * est.stderr, est)
    assert rec.passed
    assert rec.tolerance == pytest.approx(3 * est.stderr)

    rec = laws.compare_mean(10, "t=1", "demo", 0.5 + 4 * est.stderr, est)
    assert not rec.passed
    assert laws.compare_mean(10, "", "demo", 0.5 + 4 * est.stderr, est, floor=2 * est.stderr).passed


def test_compare_ks_records_distance(rng):
    """KS records carry the distance, the CDF id and the sample count."""

    samples = rng.random(5000)
    rec = laws.compare_ks(1, "", "uniform", samples, stats.uniform.cdf, "uniform(0,1)", 0.05)

    assert rec.passed
    assert rec.ks_distance < 0.05
    assert rec.analytic_cdf_id == "uniform(0,1)"
    assert rec.n_samples == 5000


def test_record_serialises_pass_alias():
    """The `passed` field is written as `pass`."""

    rec = laws.LawRecord(law_id=4, description="d", tolerance=0.0, passed=True)

    assert '"pass":true' in rec.model_dump_json(by_alias=True)


def test_offsets_are_disjoint():
    """Different (law, case) pairs start far enough apart for any realistic worker count."""

    starts = sorted(laws.offset(law, case) for law in range(1, 15) for case in range(10))

    assert len(set(starts)) == len(starts)
    assert min(b - a for a, b in zip(starts, starts[1:])) >= laws.STREAM_BLOCK


def test_finite_speed_law_reads_tally():
    """Law 4 reports every position checked by the other laws."""

    ctx = laws.LawContext(small_config())
    ctx.tally(np.array([[0.5], [1.0]]), 1.0)
    ctx.tally(np.array([[1.5]]), 1.0)

    (rec,) = laws.law_finite_speed(ctx)

    assert rec.n_samples == 3
    assert rec.empirical_value == 1.0
    assert not rec.passed


def test_verify_laws_orders_records_and_summarises():
    """Records are sorted by law id and the summary counts failures."""

    def late(ctx):
        return [laws.LawRecord(law_id=9, description="late", tolerance=1.0, passed=True)]

    def early(ctx):
        return [laws.LawRecord(law_id=2, description="early", tolerance=1.0, passed=False)]

    report = laws.verify_laws(small_config(), laws=(late, early))
    summary = report.summary()

    assert [r.law_id for r in report.records] == [2, 9]
    assert not report.passed
    assert summary.n_laws == 2
    assert summary.n_failed == 1
    assert summary.workers == 2


def test_telegraph_law_estimates(rng):
    """The two-state law returns one record per time with consistent numbers."""

    ctx = laws.LawContext(small_config())
    records = laws.law_telegraph(ctx)

    assert [r.case for r in records] == ["t=0.5", "t=1", "t=2"]
    for rec in records:
        assert rec.law_id == 10
        assert rec.n_samples == 2000
        assert abs(rec.empirical_value - rec.analytic_value) < 5 * rec.stderr


def test_no_scatter_law_tallies_positions():
    """Every sampled flight position enters the finite-speed tally."""

    ctx = laws.LawContext(small_config(dimension=2))
    records = laws.law_no_scatter(ctx)

    assert len(records) == 3
    assert ctx.speed_checks == 3 * 2000
    assert ctx.speed_violations == 0


def test_symbol_law_passes():
    """Symbol residuals and the eigenfunction residual meet their tolerances."""

    ctx = laws.LawContext(small_config())
    symbol, eigen = laws.law_symbols(ctx)

    assert symbol.passed, symbol
    assert eigen.passed, eigen
    table = laws.symbol_residuals(0.6)
    assert list(table.columns) == ["alpha", "lambda", "xi_v", "residual"]
    assert len(table) == 4 * 2 * 3


def test_caputo_residuals_shrink():
    """The eigenfunction residual decreases under refinement."""

    errs = laws.caputo_residuals(0.6, 1.0)

    assert len(errs) == 3
    assert errs[0] > errs[1] > errs[2]


def test_renewal_law_is_consistent():
    """E N(t) matches theta t^alpha / Gamma(1 + alpha) at a small budget."""

    (rec,) = laws.law_renewal(laws.LawContext(small_config()))

    assert rec.law_id == 14
    assert abs(rec.empirical_value - rec.analytic_value) < 5 * rec.stderr


def test_markov_run_skips_stable_laws(caplog):
    """At alpha = 1 the stable-limit laws are left out and named in the log."""

    def markov_only(ctx):
        return [laws.LawRecord(law_id=13, description="markov", tolerance=1.0, passed=True)]

    with caplog.at_level("INFO", logger="semiflight.laws"):
        report = laws.verify_laws(
            small_config(alpha=1.0),
            laws=(laws.law_undershoot, laws.law_self_similarity, markov_only),
        )

    assert [r.law_id for r in report.records] == [13]
    assert report.alpha == 1.0
    assert "law_undershoot" in caplog.text
    assert "law_self_similarity" in caplog.text
    assert laws.law_markov not in laws.STABLE_ONLY


def test_markov_waiting_time_and_symbols():
    """alpha = 1 keeps the waiting-time KS record and checks the eigenfunction at 0.6."""

    ctx = laws.LawContext(small_config(alpha=1.0))

    (ks,) = laws.law_waiting_time(ctx)
    assert ks.law_id == 1
    assert ks.ks_distance < 0.05

    symbol, eigen = laws.law_symbols(ctx)
    assert eigen.case == f"eigenfunction, alpha={laws.MARKOV_EIGEN_ALPHA:g}"
    assert eigen.passed, eigen
    assert symbol.n_samples == len(laws.SYMBOL_ALPHAS) * 2 * 3


def test_scaled_flight_approaches_limit(monkeypatch):
    """The characteristic-function gap to the limit is smaller at the larger scale."""

    monkeypatch.setattr(laws, "CONVERGENCE_SCALES", (1.0, 1e3))
    ctx = laws.LawContext(small_config())

    rec = laws._scaled_convergence(ctx, 2000)

    assert rec.law_id == 6
    assert rec.passed, rec
    assert rec.empirical_value < rec.tolerance
    assert ctx.speed_checks == 3 * 2000
    assert ctx.speed_violations == 0
