"""
semiflight/evolution.py

Random evolutions driven by semi-Markov paths, evaluated pointwise.

A random evolution applies the group ``T_{v}(s)`` of the current velocity for
the duration of every path segment. Two groups are provided: translations
``x -> x + v s`` and plane rotations. Expectations ``q_v(t) = E^v u(...)`` are
Monte Carlo estimates returned as :class:`~semiflight.streams.MomentEstimate`.

Both groups are abelian and act through ``v s`` only, so the product over a
path depends on the path only through ``int_0^t V(s) ds``. The batch estimator
uses this and never materialises individual paths; :func:`evolve_point` walks
a single path segment by segment.

The module also carries the classical oracles of the two-state (telegraph)
case: an explicit finite-difference solver of the damped wave equation and
the exact second moment of the Markov telegraph position.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .levy import BernsteinSpec
from .semi_markov import SemiMarkovPath, StateSpace, simulate_batch, telegraph_space
from .streams import MomentEstimate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Translate:
    """Translation group ``x -> x + v s`` on ``R^d``."""

    d: int = 1

    @property
    def point_dim(self) -> int:
        return self.d

    def act(self, v, s: float, x) -> np.ndarray:
        return np.asarray(x, dtype=float) + np.asarray(v, dtype=float).reshape(self.d) * s

    def act_batch(self, x, displacement: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float).reshape(1, self.d) + displacement


@dataclass(frozen=True)
class Rotate2D:
    """Plane rotations ``x -> (x1 cos s + v x2 sin s, -v x1 sin s + x2 cos s)``, ``v = +-1``."""

    point_dim = 2

    @staticmethod
    def _rotate(x: np.ndarray, angle) -> np.ndarray:
        c, s = np.cos(angle), np.sin(angle)
        x1, x2 = x[..., 0], x[..., 1]
        return np.stack([x1 * c + x2 * s, -x1 * s + x2 * c], axis=-1)

    def act(self, v, s: float, x) -> np.ndarray:
        sign = float(np.ravel(v)[0])
        if sign not in (1.0, -1.0):
            raise ValueError(f"rotation velocity must be +1 or -1, got {sign}")
        return self._rotate(np.asarray(x, dtype=float), sign * s)

    def act_batch(self, x, displacement: np.ndarray) -> np.ndarray:
        x = np.broadcast_to(np.asarray(x, dtype=float), (displacement.shape[0], 2))
        return self._rotate(x, displacement[:, 0])


GroupAction = Translate | Rotate2D


@dataclass(frozen=True)
class EvaluatedEvolution:
    """Terminal point and velocity of one evolved path."""

    y: np.ndarray
    v_end: np.ndarray


def evolve_point(action: GroupAction, path: SemiMarkovPath, t: float, x) -> EvaluatedEvolution:
    """Apply the evolution of ``path`` on ``[0, t]`` to the point ``x``.

    Segments are applied in path order, the in-progress one last.

    Raises:
        ValueError: If ``t`` lies outside the path horizon.
    """
    y = np.asarray(x, dtype=float).copy()
    last = 0
    for i, dur in path.segments(t):
        y = action.act(path.states[i], dur, y)
        last = i
    return EvaluatedEvolution(y=y, v_end=path.states[last].copy())


def _origin(action: GroupAction, x) -> np.ndarray:
    if x is None:
        return np.zeros(action.point_dim)
    return np.asarray(x, dtype=float).reshape(action.point_dim)


def estimate_q(
    action: GroupAction,
    space: StateSpace,
    spec: BernsteinSpec,
    v0,
    t: float,
    u: Callable[[np.ndarray, np.ndarray], np.ndarray],
    n_paths: int,
    rng: np.random.Generator,
    x=None,
) -> MomentEstimate:
    """Monte Carlo estimate of ``q_v(t) = E^v u(evolved x, V(t))``.

    Args:
        action: Group acting on points.
        space: State space of the velocity chain.
        spec: Driving subordinator.
        v0: Initial state, or ``None`` for the uniform initial law.
        t: Time, >= 0.
        u: Vectorised test function ``u(points (n, p), velocities (n, d)) -> (n,)``;
            must be bounded on the reachable set.
        n_paths: Number of paths.
        rng: Generator.
        x: Starting point (origin by default).
    """
    if n_paths < 1:
        raise ValueError(f"n_paths must be >= 1, got {n_paths}")
    x0 = _origin(action, x)
    batch = simulate_batch(space, spec, v0, t, n_paths, rng)
    y = action.act_batch(x0, batch.displacement)
    values = np.asarray(u(y, batch.final), dtype=float).reshape(n_paths)
    return MomentEstimate.from_values(values)


def estimate_q_wave_repr(
    spec: BernsteinSpec,
    theta: float,
    t: float,
    w_init: Callable[[np.ndarray], np.ndarray],
    n_paths: int,
    rng: np.random.Generator,
    x: float = 0.0,
) -> MomentEstimate:
    """Estimate ``q(t) = E w(gamma_t)`` through the occupation difference.

    ``gamma_t = H_t^{+1} - H_t^{-1}`` is taken from telegraph paths started at
    ``+1`` with the common rate ``theta``; each path contributes the free
    evolution ``(w(x + gamma_t) + w(x - gamma_t)) / 2``.
    """
    if n_paths < 1:
        raise ValueError(f"n_paths must be >= 1, got {n_paths}")
    batch = simulate_batch(telegraph_space(theta), spec, 1.0, t, n_paths, rng)
    gamma = batch.occupation[:, 0] - batch.occupation[:, 1]
    values = 0.5 * (
        np.asarray(w_init(x + gamma), dtype=float) + np.asarray(w_init(x - gamma), dtype=float)
    )
    return MomentEstimate.from_values(values)


def markov_telegraph_second_moment(theta: float, t: float) -> float:
    """``E x(t)^2 = t/theta - (1 - exp(-2 theta t)) / (2 theta^2)`` for the Markov telegraph."""
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    return t / theta + math.expm1(-2.0 * theta * t) / (2.0 * theta**2)


def telegraph_fd_solve(
    w_init: Callable[[np.ndarray], np.ndarray],
    theta: float,
    t: float,
    x,
    dx: float = 2e-3,
    courant: float = 0.5,
):
    """Solve ``q_tt + 2 theta q_t = q_xx``, ``q(., 0) = w``, ``q_t(., 0) = 0`` at time ``t``.

    Explicit centred scheme on a grid wide enough that the zero boundary
    values never reach the query points.

    Args:
        w_init: Initial profile, vectorised.
        theta: Switching rate, > 0.
        t: Time, >= 0.
        x: Query point(s).
        dx: Spatial step.
        courant: ``dt / dx``, in (0, 1].

    Returns:
        float or numpy.ndarray: ``q(x, t)``.
    """
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if not 0.0 < courant <= 1.0:
        raise ValueError(f"courant must lie in (0, 1], got {courant}")
    if not dx > 0:
        raise ValueError(f"dx must be positive, got {dx}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    xq = np.asarray(x, dtype=float)
    if t == 0:
        out = np.asarray(w_init(xq), dtype=float)
        return float(out) if out.ndim == 0 else out

    n_steps = max(1, math.ceil(t / (courant * dx)))
    dt = t / n_steps
    r2 = (dt / dx) ** 2
    # Grid signals travel at most one cell per step.
    reach = n_steps * dx + 10 * dx
    grid = np.arange(xq.min() - reach, xq.max() + reach + 0.5 * dx, dx)

    def lap(q: np.ndarray) -> np.ndarray:
        out = np.zeros_like(q)
        out[1:-1] = q[2:] - 2.0 * q[1:-1] + q[:-2]
        return out

    q_prev = np.asarray(w_init(grid), dtype=float).copy()
    q_prev[[0, -1]] = 0.0
    q_cur = q_prev + 0.5 * r2 * lap(q_prev)
    q_cur[[0, -1]] = 0.0
    damp = theta * dt
    for _ in range(n_steps - 1):
        q_next = (2.0 * q_cur - (1.0 - damp) * q_prev + r2 * lap(q_cur)) / (1.0 + damp)
        q_next[[0, -1]] = 0.0
        q_prev, q_cur = q_cur, q_next

    logger.debug("telegraph_fd_solve: %d steps on %d nodes", n_steps, grid.size)
    out = np.interp(xq, grid, q_cur)
    return float(out) if out.ndim == 0 else out
