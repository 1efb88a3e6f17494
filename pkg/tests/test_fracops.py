"""Tests for the fractional time and material derivatives on grids."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from semiflight import fracops
from semiflight.special_fn import ml_survival


def test_caputo_of_identity_is_exact():
    """D^alpha t = t^(1-alpha) / Gamma(2-alpha) is reproduced to rounding."""

    alpha, dt = 0.4, 0.01
    f = fracops.GridFn1D(dt, dt * np.arange(101))

    d = fracops.caputo_frac_deriv(f, alpha)

    assert d.t0 == pytest.approx(dt)
    assert d.values.size == 100
    exact = d.times ** (1 - alpha) / math.gamma(2 - alpha)
    assert np.allclose(d.values, exact, rtol=1e-10, atol=1e-12)


def test_caputo_converges_under_refinement():
    """On t^2 the error shrinks as the step is halved."""

    alpha = 0.6
    errors = []
    for dt in (0.02, 0.01, 0.005):
        times = dt * np.arange(int(round(1 / dt)) + 1)
        d = fracops.caputo_frac_deriv(fracops.GridFn1D(dt, times**2), alpha)
        exact = 2 * d.times ** (2 - alpha) / math.gamma(3 - alpha)
        errors.append(np.abs(d.values - exact).max())

    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 1e-3


def test_caputo_mittag_leffler_eigenfunction():
    """D^alpha E_alpha(-theta t^alpha) = -theta E_alpha(-theta t^alpha) away from zero."""

    alpha, theta, dt = 0.5, 1.0, 0.005
    times = dt * np.arange(201)
    f = ml_survival(alpha, theta, times)

    d = fracops.caputo_frac_deriv(fracops.GridFn1D(dt, f), alpha)
    resid = np.abs(d.values + theta * f[1:])[d.times >= 0.25]

    assert resid.max() < 5e-3


def test_caputo_input_validation():
    """Too few points, bad alpha and non-finite data are rejected."""

    with pytest.raises(ValueError):
        fracops.caputo_frac_deriv(fracops.GridFn1D(0.1, np.zeros(3)), 0.5)
    with pytest.raises(ValueError):
        fracops.caputo_frac_deriv(fracops.GridFn1D(0.1, np.zeros(10)), 1.0)
    with pytest.raises(ValueError):
        fracops.GridFn1D(0.1, np.array([0.0, np.nan]))
    with pytest.raises(ValueError):
        fracops.GridFnST(0.0, 0.1, np.zeros((3, 3)))


def transported_grid(v: float, dx: float, dt: float, steps: int) -> fracops.GridFnST:
    """h(x, t) = rho(x + v t) t with a Gaussian rho on [-8, 8]."""
    x = -8.0 + dx * np.arange(int(round(16 / dx)) + 1)
    t = dt * np.arange(steps + 1)
    values = np.exp(-0.5 * (x[:, None] + v * t[None, :]) ** 2) * t[None, :]
    return fracops.GridFnST(dx=dx, dt=dt, values=values, v=v, x0=-8.0)


@pytest.mark.parametrize("v,dx,tol", [(1.0, 0.01, 1e-9), (0.3, 0.01, 5e-4)])
def test_material_derivative_along_characteristics(v, dx, tol):
    """For h = rho(x + v t) phi(t) the operator acts on phi only."""

    alpha, dt = 0.3, 0.01
    h = transported_grid(v, dx, dt, 50)

    out = fracops.frac_material_deriv(h, alpha)

    assert out.values.shape == (h.values.shape[0], 50)
    xs, ts = out.x, out.times
    profile = np.exp(-0.5 * (xs[:, None] + v * ts[None, :]) ** 2)
    exact = profile * ts[None, :] ** (1 - alpha) / math.gamma(2 - alpha)
    inner = np.abs(xs) <= 4.0
    assert np.abs(out.values[inner] - exact[inner]).max() < tol


def test_material_derivative_without_velocity_is_caputo():
    """v = 0 applies the time derivative row by row."""

    dt = 0.02
    t = dt * np.arange(30)
    rows = np.vstack([t, t**2, np.ones_like(t)])
    h = fracops.GridFnST(dx=0.1, dt=dt, values=rows)

    out = fracops.frac_material_deriv(h, 0.5)

    for i in range(3):
        ref = fracops.caputo_frac_deriv(fracops.GridFn1D(dt, rows[i]), 0.5)
        assert np.allclose(out.values[i], ref.values)
    assert np.allclose(out.values[2], 0.0)


def test_material_derivative_boundary_check():
    """Data that does not vanish on the upstream edge is rejected."""

    values = np.ones((20, 10))
    with pytest.raises(fracops.BoundaryError):
        fracops.frac_material_deriv(fracops.GridFnST(0.1, 0.1, values, v=1.0), 0.5)
    with pytest.raises(fracops.BoundaryError):
        fracops.frac_material_deriv(fracops.GridFnST(0.1, 0.1, values, v=-1.0), 0.5)

    # Zero right edge is enough when characteristics read from the right.
    values[-2:] = 0.0
    fracops.frac_material_deriv(fracops.GridFnST(0.1, 0.1, values, v=1.0), 0.5)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("lam", [1.0, 2.0])
@pytest.mark.parametrize("xi_v", [0.0, 1.0, -2.0])
def test_verify_symbol_residuals(alpha, lam, xi_v):
    """The Marchaud integral reproduces (lam + i xi v)^alpha."""

    assert fracops.verify_symbol(alpha, 1.0, xi_v, lam) < 1e-8


def test_verify_symbol_domain():
    """Non-positive Re(lambda) has no convergent integral."""

    with pytest.raises(ValueError):
        fracops.verify_symbol(0.5, 1.0, 1.0, 0.0)


def test_material_derivative_matches_direct_quadrature():
    """For h = rho(x) t the grid operator agrees with adaptive quadrature of its integral."""

    alpha, v, step = 0.4, 1.0, 0.0025
    x = -7.0 + step * np.arange(int(round(14 / step)) + 1)
    t = step * np.arange(101)
    rho = np.exp(-0.5 * x**2)
    h = fracops.GridFnST(dx=step, dt=step, values=rho[:, None] * t[None, :], v=v, x0=-7.0)

    out = fracops.frac_material_deriv(h, alpha)

    c = alpha / math.gamma(1 - alpha)
    nodes = np.random.default_rng(5)
    ix = nodes.choice(np.nonzero(np.abs(out.x) <= 3.0)[0], size=20, replace=False)
    it = nodes.integers(0, out.times.size, size=20)
    for i, n in zip(ix, it):
        xi, tn = float(out.x[i]), float(out.times[n])
        r0 = math.exp(-0.5 * xi * xi)

        def increment_over_s(s, xi=xi, tn=tn, r0=r0):
            if s == 0.0:
                return tn * r0 * v * xi + r0
            moved = math.exp(-0.5 * (xi + v * s) ** 2)
            return -tn * r0 * math.expm1(-v * s * (2 * xi + v * s) / 2) / s + moved

        body, _ = integrate.quad(
            increment_over_s, 0.0, tn, weight="alg", wvar=(-alpha, 0.0), epsabs=1e-12
        )
        tail = tn**-alpha / math.gamma(1 - alpha) * r0 * tn
        assert abs(out.values[i, n] - (c * body + tail)) < 1e-4


def test_operators_are_linear():
    """D(a f + b g) = a D f + b D g for both operators on random data."""

    fuzz = np.random.default_rng(17)
    for _ in range(5):
        a, b = fuzz.normal(size=2)
        f, g = fuzz.normal(size=(2, 40))
        lhs = fracops.caputo_frac_deriv(fracops.GridFn1D(0.05, a * f + b * g), 0.35).values
        rhs = (
            a * fracops.caputo_frac_deriv(fracops.GridFn1D(0.05, f), 0.35).values
            + b * fracops.caputo_frac_deriv(fracops.GridFn1D(0.05, g), 0.35).values
        )
        assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-10)

        p, q = fuzz.normal(size=(2, 30, 12))
        p[:2] = p[-2:] = 0.0
        q[:2] = q[-2:] = 0.0

        def material(values):
            grid = fracops.GridFnST(dx=0.1, dt=0.1, values=values, v=0.7)
            return fracops.frac_material_deriv(grid, 0.6).values

        assert np.allclose(
            material(a * p + b * q), a * material(p) + b * material(q), rtol=1e-10, atol=1e-10
        )


def test_caputo_near_one_is_first_difference():
    """As alpha approaches one the operator approaches the backward difference."""

    dt = 0.01
    times = dt * np.arange(201)
    f = np.sin(times)

    d = fracops.caputo_frac_deriv(fracops.GridFn1D(dt, f), 0.999)

    assert np.abs(d.values - np.diff(f) / dt).max() < 0.01
