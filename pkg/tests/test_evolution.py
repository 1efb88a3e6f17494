"""Tests for random evolutions and the telegraph oracles."""

from __future__ import annotations

import math

import numpy as np
import pytest

from semiflight import evolution, semi_markov
from semiflight.levy import BernsteinSpec


def gaussian_bump(x):
    return np.exp(-2.0 * np.asarray(x, dtype=float) ** 2)


def test_translate_evolution_equals_integrated_velocity(rng):
    """Translations compose to x plus the integral of V."""

    space = semi_markov.sphere_space(2, 2.0)
    path = semi_markov.simulate_path(space, BernsteinSpec.stable(0.7), None, 3.0, rng)
    t = 2.5
    integral = sum(d * path.states[i] for i, d in path.segments(t))

    out = evolution.evolve_point(evolution.Translate(2), path, t, [1.0, -1.0])

    assert np.allclose(out.y, np.array([1.0, -1.0]) + integral)
    assert np.array_equal(out.v_end, path.state_at(t))


def test_rotation_depends_only_on_signed_time(rng):
    """Plane rotations by +-s commute, so only int V matters."""

    space = semi_markov.telegraph_space(3.0)
    path = semi_markov.simulate_path(space, BernsteinSpec.markov(), 1.0, 2.0, rng)
    rot = evolution.Rotate2D()
    t = 2.0
    angle = sum(d * float(path.states[i, 0]) for i, d in path.segments(t))

    out = evolution.evolve_point(rot, path, t, [1.0, 0.0])
    batch = rot.act_batch(np.array([1.0, 0.0]), np.array([[angle]]))

    assert np.allclose(out.y, [math.cos(angle), -math.sin(angle)])
    assert np.allclose(batch[0], out.y)
    with pytest.raises(ValueError):
        rot.act([0.5], 1.0, [1.0, 0.0])


def test_evolve_point_outside_horizon(rng):
    """Times beyond the simulated horizon are rejected."""

    path = semi_markov.simulate_path(
        semi_markov.telegraph_space(1.0), BernsteinSpec.markov(), 1.0, 1.0, rng
    )
    with pytest.raises(ValueError):
        evolution.evolve_point(evolution.Translate(1), path, 2.0, 0.0)


def test_markov_second_moment(rng):
    """E x(t)^2 of the Markov telegraph matches its closed form."""

    theta, t = 1.0, 2.0
    est = evolution.estimate_q(
        evolution.Translate(1),
        semi_markov.telegraph_space(theta),
        BernsteinSpec.markov(),
        None,
        t,
        lambda y, v: y[:, 0] ** 2,
        8000,
        rng,
    )

    assert abs(est.mean - evolution.markov_telegraph_second_moment(theta, t)) < 5 * est.stderr


def test_direct_and_occupation_estimators_agree(rng):
    """E w(int V) equals E (w(gamma) + w(-gamma)) / 2 for the fractional telegraph."""

    spec = BernsteinSpec.stable(0.6)
    t = 1.0
    direct = evolution.estimate_q(
        evolution.Translate(1),
        semi_markov.telegraph_space(1.0),
        spec,
        None,
        t,
        lambda y, v: gaussian_bump(y[:, 0]),
        8000,
        rng,
    )
    rep = evolution.estimate_q_wave_repr(spec, 1.0, t, gaussian_bump, 8000, rng)

    assert abs(direct.mean - rep.mean) < 5 * math.hypot(direct.stderr, rep.stderr)


def test_fd_solver_matches_cosine_mode():
    """A cosine mode decays as exp(-theta t)(cos wt + theta/w sin wt), w^2 = k^2 - theta^2."""

    k, theta, t = 2.0, 0.5, 1.0
    w = math.sqrt(k * k - theta * theta)
    exact = math.exp(-theta * t) * (math.cos(w * t) + theta / w * math.sin(w * t))

    value = evolution.telegraph_fd_solve(lambda x: np.cos(k * x), theta, t, 0.0)

    assert value == pytest.approx(exact, abs=1e-4)
    assert evolution.telegraph_fd_solve(gaussian_bump, theta, 0.0, 0.3) == pytest.approx(
        gaussian_bump(0.3)
    )


def test_fd_solver_matches_markov_monte_carlo(rng):
    """At alpha = 1 the telegraph expectation solves the damped wave equation."""

    theta, t = 1.0, 1.0
    est = evolution.estimate_q(
        evolution.Translate(1),
        semi_markov.telegraph_space(theta),
        BernsteinSpec.markov(),
        None,
        t,
        lambda y, v: gaussian_bump(y[:, 0]),
        8000,
        rng,
    )
    fd = evolution.telegraph_fd_solve(gaussian_bump, theta, t, 0.0)

    assert abs(est.mean - fd) < 5 * est.stderr + 2e-3


def test_fd_solver_validation():
    """Unstable Courant numbers are rejected."""

    with pytest.raises(ValueError):
        evolution.telegraph_fd_solve(gaussian_bump, 1.0, 1.0, 0.0, courant=1.5)
    with pytest.raises(ValueError):
        evolution.telegraph_fd_solve(gaussian_bump, 0.0, 1.0, 0.0)


def test_group_law_holds_for_both_actions():
    """T_v(s) T_v(r) = T_v(s + r) for translations and rotations."""

    fuzz = np.random.default_rng(11)
    shift = evolution.Translate(2)
    rot = evolution.Rotate2D()
    for _ in range(200):
        s, r = fuzz.uniform(0.0, 5.0, size=2)
        x = fuzz.normal(size=2)
        v = fuzz.normal(size=2)
        assert np.allclose(shift.act(v, s + r, x), shift.act(v, s, shift.act(v, r, x)))
        sign = [fuzz.choice([-1.0, 1.0])]
        assert np.allclose(rot.act(sign, s + r, x), rot.act(sign, s, rot.act(sign, r, x)))


def test_estimate_q_is_a_contraction(rng):
    """|q| never exceeds sup |u|, and u = 1 is reproduced exactly."""

    space = semi_markov.telegraph_space(1.0)
    spec = BernsteinSpec.stable(0.6)
    action = evolution.Translate(1)
    for x in (-1.0, 0.0, 0.7, 3.0):
        est = evolution.estimate_q(
            action, space, spec, None, 1.5, lambda y, v: np.cos(y[:, 0]), 500, rng, x
        )
        assert abs(est.mean) <= 1.0

    one = evolution.estimate_q(
        evolution.Rotate2D(), space, spec, 1.0, 1.5, lambda y, v: np.ones(len(y)), 500, rng
    )
    assert one.mean == 1.0
    assert one.stderr == 0.0
