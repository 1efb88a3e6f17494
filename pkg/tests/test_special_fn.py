"""Tests for the Mittag-Leffler function, Beta CDFs and Talbot inversion."""

from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from scipy import special

from semiflight import special_fn


def mp_series(alpha: float, x: float, terms: int = 200, dps: int = 80) -> float:
    """Reference value from a long power series in extended precision."""
    with mpmath.workdps(dps):
        xm, am = mpmath.mpf(x), mpmath.mpf(alpha)
        return float(mpmath.fsum(xm**k / mpmath.gamma(1 + am * k) for k in range(terms)))


def test_ml_eval_trivial_points():
    """E_alpha(0) = 1 and E_1(x) = exp(x)."""

    assert special_fn.ml_eval(0.4, 0.0) == 1.0
    assert special_fn.ml_eval(1.0, -2.5) == pytest.approx(math.exp(-2.5), abs=1e-15)


@pytest.mark.parametrize("z", [0.1, 0.5, 1.0, 3.0, 10.0, 50.0])
def test_ml_eval_half_matches_erfcx(z):
    """E_{1/2}(-z) = exp(z^2) erfc(z) across the series and asymptotic routes."""

    assert special_fn.ml_eval(0.5, -z) == pytest.approx(special.erfcx(z), abs=1e-10)


@pytest.mark.parametrize(
    "alpha,x",
    [(0.5, -1.0), (0.3, -0.8), (0.6, -2.0), (0.6, -4.0), (0.9, -5.0), (0.9, -20.0), (0.75, -12.0)],
)
def test_ml_eval_matches_extended_series(alpha, x):
    """Every evaluation route agrees with a 200-term extended-precision series."""

    assert special_fn.ml_eval(alpha, x) == pytest.approx(mp_series(alpha, x), abs=1e-10)


def test_ml_eval_is_completely_monotone_on_grid():
    """Values decrease in |x| and stay in (0, 1]."""

    xs = -np.linspace(0.0, 30.0, 61)
    values = [special_fn.ml_eval(0.7, x) for x in xs]

    assert all(0.0 < v <= 1.0 for v in values)
    assert all(b < a for a, b in zip(values, values[1:]))


def test_ml_eval_domain_errors():
    """alpha outside (0, 1] and positive arguments are rejected."""

    with pytest.raises(ValueError):
        special_fn.ml_eval(0.0, -1.0)
    with pytest.raises(ValueError):
        special_fn.ml_eval(1.5, -1.0)
    with pytest.raises(ValueError):
        special_fn.ml_eval(0.5, 0.1)


def test_ml_eval_rejects_non_positive_expansion(monkeypatch, caplog):
    """A non-positive asymptotic value is logged and replaced by the integral."""

    monkeypatch.setattr(special_fn, "_asymptotic", lambda alpha, x: -1e-3)

    with caplog.at_level("WARNING", logger="semiflight.special_fn"):
        value = special_fn.ml_eval(0.6, -50.0)

    assert value == special_fn._integral(0.6, -50.0)
    assert 0.0 < value < 1.0
    assert "using the integral" in caplog.text


def test_ml_eval_raises_when_no_route_is_positive(monkeypatch):
    """If the integral is not positive either, the value cannot be certified."""

    monkeypatch.setattr(special_fn, "_asymptotic", lambda alpha, x: 0.0)
    monkeypatch.setattr(special_fn, "_integral", lambda alpha, x: 0.0)

    with pytest.raises(special_fn.ConvergenceError):
        special_fn.ml_eval(0.6, -50.0)


def test_ml_survival_elementwise():
    """Arrays map elementwise; scalars come back as floats."""

    t = np.array([0.0, 0.5, 2.0])
    out = special_fn.ml_survival(0.6, 1.5, t)

    assert out.shape == (3,)
    assert out[0] == 1.0
    assert out[2] == pytest.approx(special_fn.ml_eval(0.6, -1.5 * 2.0**0.6))
    assert isinstance(special_fn.ml_survival(1.0, 2.0, 1.0), float)
    assert special_fn.ml_survival(1.0, 2.0, 1.0) == pytest.approx(math.exp(-2.0))
    with pytest.raises(ValueError):
        special_fn.ml_survival(0.6, 0.0, 1.0)
    with pytest.raises(ValueError):
        special_fn.ml_survival(0.6, 1.0, -1.0)


def test_beta_reg_cdf_known_values():
    """Uniform and arcsine CDFs in closed form."""

    x = np.array([0.0, 0.2, 0.5, 0.9, 1.0])

    assert np.allclose(special_fn.beta_reg_cdf(1.0, 1.0, x), x)
    assert np.allclose(
        special_fn.beta_reg_cdf(0.5, 0.5, x), 2.0 / np.pi * np.arcsin(np.sqrt(x)), atol=1e-12
    )
    with pytest.raises(ValueError):
        special_fn.beta_reg_cdf(0.5, 0.5, 1.2)
    with pytest.raises(ValueError):
        special_fn.beta_reg_cdf(0.0, 0.5, 0.5)


def test_talbot_inverts_exponential():
    """1/(lam + 1) inverts to exp(-t)."""

    value = special_fn.talbot_invert(lambda lam: 1 / (lam + 1), 1.0)

    assert value == pytest.approx(math.exp(-1.0), abs=1e-8)


def test_talbot_recovers_mittag_leffler_relaxation():
    """lam^(alpha-1)/(lam^alpha + theta) inverts to E_alpha(-theta t^alpha)."""

    alpha, theta = 0.6, 1.3

    def transform(lam):
        return lam ** (alpha - 1) / (lam**alpha + theta)

    for t in (0.5, 2.0):
        value = special_fn.talbot_invert(transform, t)
        assert value == pytest.approx(special_fn.ml_survival(alpha, theta, t), abs=1e-7)


def test_talbot_reports_disagreement(monkeypatch):
    """Diverging node passes raise ConvergenceError."""

    monkeypatch.setattr(special_fn, "_talbot_pass", lambda F, t, nodes, tmax: float(nodes))

    with pytest.raises(special_fn.ConvergenceError):
        special_fn.talbot_invert(lambda lam: 1 / lam, 1.0)


def test_talbot_config_validation():
    """Too few nodes or a non-positive time are rejected."""

    with pytest.raises(ValueError):
        special_fn.TalbotConfig(node_count=4)
    with pytest.raises(ValueError):
        special_fn.TalbotConfig(time=0.0)
    with pytest.raises(ValueError):
        special_fn.talbot_invert(lambda lam: 1 / lam, 0.0)
