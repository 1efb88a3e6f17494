"""
semiflight/semi_markov.py

The semi-Markov velocity chain ``V(t) = W(L(t))``: a jump chain on a finite
state set or on the unit sphere, slowed down by the inverse stable
subordinator.

Responsibilities
----------------
- Describe state spaces (:class:`FiniteSpace`, :class:`SphereSpace`) and the
  standard instances (two-state telegraph, isotropic sphere).
- Generate single paths (:func:`simulate_path`) with their epochs and the
  in-progress segment past the horizon.
- Generate batches of paths in vectorised blocks (:func:`simulate_batch`),
  returning only what the estimators need: jump counts, ages, integrated
  velocity split into completed jumps and the in-flight term, final states and
  occupation times.
- Provide the analytic laws used as oracles: age survival, the mean age
  fraction and the two-state return probability.

Notes
-----
- Waiting times are drawn per segment as ``T_v^(1/alpha) S`` with
  ``T_v ~ Exp(theta_v)``, which is the Mittag-Leffler law with the rate of the
  current state.
- State values are velocity vectors. Finite spaces also keep an integer label
  per state so occupation times can be accumulated.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .levy import BernsteinSpec, renewal_measure, sample_ml_waiting_time
from .special_fn import ml_eval
from .streams import iter_batches, sample_direction

__all__ = [
    "FiniteSpace",
    "SphereSpace",
    "SemiMarkovPath",
    "OccupationRecord",
    "PathBatch",
    "telegraph_space",
    "sphere_space",
    "sample_direction",
    "simulate_path",
    "simulate_batch",
    "occupation",
    "age_survival",
    "mean_age",
    "telegraph_return_probability",
]

logger = logging.getLogger(__name__)

BLOCK_ELEMENTS = 2_000_000
MAX_BLOCK = 2048


# ---------------------------
# State spaces
# ---------------------------
@dataclass(frozen=True, eq=False)
class FiniteSpace:
    """Finite state set with a row-stochastic kernel and per-state rates.

    Attributes:
        states: Velocity of every state, shape ``(k,)`` or ``(k, d)``.
        kernel: Jump kernel ``h``, shape ``(k, k)``, rows sum to one.
        rates: Scattering rate of every state, shape ``(k,)``.
    """

    states: np.ndarray
    kernel: np.ndarray
    rates: np.ndarray
    _cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        kernel = np.asarray(self.kernel, dtype=float)
        rates = np.asarray(self.rates, dtype=float)
        k = states.shape[0]
        if states.ndim not in (1, 2) or k == 0:
            raise ValueError("states must be a non-empty array of shape (k,) or (k, d)")
        if kernel.shape != (k, k):
            raise ValueError(f"kernel must have shape {(k, k)}, got {kernel.shape}")
        if np.any(kernel < 0) or not np.allclose(kernel.sum(axis=1), 1.0, atol=1e-12):
            raise ValueError("kernel rows must be probability vectors")
        if rates.shape != (k,) or np.any(rates <= 0) or not np.all(np.isfinite(rates)):
            raise ValueError("rates must be positive and finite, one per state")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "_cum", np.cumsum(kernel, axis=1))

    @property
    def n_states(self) -> int:
        return int(self.states.shape[0])

    @property
    def dimension(self) -> int:
        return 1 if self.states.ndim == 1 else int(self.states.shape[1])

    @property
    def max_rate(self) -> float:
        return float(self.rates.max())

    def velocity(self, labels) -> np.ndarray:
        return self.states[labels].reshape(np.shape(labels) + (self.dimension,))

    def rate(self, labels) -> np.ndarray:
        return self.rates[labels]

    def index_of(self, v) -> int:
        target = np.asarray(v, dtype=float).reshape(self.dimension)
        flat = self.states.reshape(self.n_states, self.dimension)
        hits = np.nonzero(np.all(flat == target, axis=1))[0]
        if hits.size == 0:
            raise ValueError(f"{v!r} is not a state of this space")
        return int(hits[0])

    def initial(self, v0, n: int, rng: np.random.Generator) -> np.ndarray:
        if v0 is None:
            return rng.integers(0, self.n_states, size=n)
        return np.full(n, self.index_of(v0), dtype=np.int64)

    def successor(self, labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(labels.shape)
        nxt = (u[..., None] >= self._cum[labels]).sum(axis=-1)
        return np.minimum(nxt, self.n_states - 1)

    def block(self, first: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
        out = np.empty((first.shape[0], size), dtype=np.int64)
        out[:, 0] = first
        for j in range(1, size):
            out[:, j] = self.successor(out[:, j - 1], rng)
        return out


@dataclass(frozen=True, eq=False)
class SphereSpace:
    """Unit sphere of ``R^d`` with uniform independent redraws at rate ``theta``."""

    d: int
    theta: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise ValueError(f"theta must be positive and finite, got {self.theta}")

    n_states = None

    @property
    def dimension(self) -> int:
        return self.d

    @property
    def max_rate(self) -> float:
        return float(self.theta)

    def velocity(self, labels) -> np.ndarray:
        return np.asarray(labels, dtype=float)

    def rate(self, labels) -> np.ndarray:
        return np.full(np.shape(labels)[:-1], float(self.theta))

    def initial(self, v0, n: int, rng: np.random.Generator) -> np.ndarray:
        if v0 is None:
            return sample_direction(self.d, n, rng)
        v = np.asarray(v0, dtype=float).reshape(self.d)
        if not math.isclose(float(np.linalg.norm(v)), 1.0, rel_tol=1e-9):
            raise ValueError("v0 must be a unit vector")
        return np.tile(v, (n, 1))

    def successor(self, labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return sample_direction(self.d, labels.shape[0], rng)

    def block(self, first: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
        r = first.shape[0]
        out = np.empty((r, size, self.d))
        out[:, 0] = first
        if size > 1:
            out[:, 1:] = sample_direction(self.d, r * (size - 1), rng).reshape(r, size - 1, self.d)
        return out


StateSpace = FiniteSpace | SphereSpace


def telegraph_space(theta: float, theta_minus: float | None = None) -> FiniteSpace:
    """Two velocities ``+1, -1`` that swap at every epoch."""
    rates = [theta, theta if theta_minus is None else theta_minus]
    return FiniteSpace(np.array([1.0, -1.0]), np.array([[0.0, 1.0], [1.0, 0.0]]), np.array(rates))


def sphere_space(d: int, theta: float) -> SphereSpace:
    return SphereSpace(int(d), float(theta))


# ---------------------------
# Single paths
# ---------------------------
@dataclass(frozen=True, eq=False)
class SemiMarkovPath:
    """One path on ``[0, horizon]``.

    Attributes:
        horizon: Simulated time ``T``.
        epochs: Jump epochs ``tau_1 < ... < tau_N <= T``.
        states: Velocities ``v_1, ..., v_{N+1}``, shape ``(N + 1, d)``;
            ``v_n`` holds on ``[tau_{n-1}, tau_n)``.
        next_epoch: ``tau_{N+1} > T``, end of the in-progress segment.
        labels: Integer state labels for finite spaces, else ``None``.
    """

    horizon: float
    epochs: np.ndarray
    states: np.ndarray
    next_epoch: float
    labels: np.ndarray | None = None

    @property
    def n_jumps(self) -> int:
        return int(self.epochs.size)

    def _check(self, t: float) -> None:
        if not 0.0 <= t <= self.horizon:
            raise ValueError(f"t={t} outside the path horizon [0, {self.horizon}]")

    def count(self, t: float) -> int:
        """``N(t) = max{n : tau_n <= t}``."""
        self._check(t)
        return int(np.searchsorted(self.epochs, t, side="right"))

    def state_at(self, t: float) -> np.ndarray:
        return self.states[self.count(t)]

    def last_epoch(self, t: float) -> float:
        n = self.count(t)
        return 0.0 if n == 0 else float(self.epochs[n - 1])

    def age(self, t: float) -> float:
        """``gamma(t) = t - tau_{N(t)}``."""
        return t - self.last_epoch(t)

    def segments(self, t: float) -> Iterator[tuple[int, float]]:
        """Yield ``(segment index, duration)`` of the path restricted to ``[0, t]``."""
        n = self.count(t)
        start = 0.0
        for i in range(n):
            end = float(self.epochs[i])
            yield i, end - start
            start = end
        yield n, t - start


@dataclass(frozen=True)
class OccupationRecord:
    """Occupation times ``H_t^v`` keyed by state value, and the age ``gamma(t)``."""

    t: float
    times: dict
    age: float


def _state_key(v: np.ndarray):
    flat = np.asarray(v, dtype=float).ravel()
    return float(flat[0]) if flat.size == 1 else tuple(float(x) for x in flat)


def simulate_path(
    space: StateSpace, spec: BernsteinSpec, v0, T: float, rng: np.random.Generator
) -> SemiMarkovPath:
    """Simulate one path of ``V`` on ``[0, T]``.

    Waiting times follow the Mittag-Leffler law with the rate of the current
    state (exponential for the Markov spec); the next state is drawn from the
    kernel (uniformly on the sphere). Construction stops at the first epoch
    past ``T``, whose state is kept as the in-progress segment.

    Args:
        space: State space.
        spec: Driving subordinator.
        v0: Initial state value (``None`` draws it uniformly).
        T: Horizon, > 0.
        rng: Generator.
    """
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")
    label = space.initial(v0, 1, rng)
    epochs: list[float] = []
    labels = [label[0]]
    now = 0.0
    while True:
        wait = sample_ml_waiting_time(spec.alpha, float(space.rate(label)[0]), rng)
        if now + wait > T:
            break
        now += wait
        epochs.append(now)
        label = space.successor(label, rng)
        labels.append(label[0])

    lab = np.asarray(labels)
    return SemiMarkovPath(
        horizon=float(T),
        epochs=np.asarray(epochs, dtype=float),
        states=space.velocity(lab).reshape(len(labels), space.dimension),
        next_epoch=now + wait,
        labels=lab if isinstance(space, FiniteSpace) else None,
    )


def occupation(path: SemiMarkovPath, t: float) -> OccupationRecord:
    """Occupation time of every visited state on ``[0, t]`` and the age at ``t``."""
    path._check(t)
    times: dict = {}
    for i, dur in path.segments(t):
        key = _state_key(path.states[i])
        times[key] = times.get(key, 0.0) + dur
    return OccupationRecord(t=float(t), times=times, age=path.age(t))


# ---------------------------
# Batches
# ---------------------------
@dataclass(frozen=True, eq=False)
class PathBatch:
    """Per-path summaries of ``n`` independent paths at time ``t``.

    Attributes:
        t: Observation time.
        initial: Initial velocities, ``(n, d)``.
        n_jumps: ``N(t)``.
        age: ``gamma(t) = t - tau_{N(t)}``.
        jump_sum: ``sum_{i <= N(t)} J_i v_i``, ``(n, d)``.
        in_flight: ``gamma(t) v_{N(t)+1}``, ``(n, d)``.
        final: ``V(t)``, ``(n, d)``.
        final_label: State label of ``V(t)`` (finite spaces).
        occupation: ``H_t^v`` per state label, ``(n, k)`` (finite spaces).
    """

    t: float
    initial: np.ndarray
    n_jumps: np.ndarray
    age: np.ndarray
    jump_sum: np.ndarray
    in_flight: np.ndarray
    final: np.ndarray
    final_label: np.ndarray | None = None
    occupation: np.ndarray | None = None

    def __len__(self) -> int:
        return int(self.n_jumps.size)

    @property
    def displacement(self) -> np.ndarray:
        """``int_0^t V(s) ds``, summed as jumps first then the in-flight term."""
        return self.jump_sum + self.in_flight


def _batch_chunk(space, spec, v0, t: float, m: int, rng, block: int) -> dict:
    finite = isinstance(space, FiniteSpace)
    d = space.dimension
    first = space.initial(v0, m, rng)
    initial = space.velocity(first).reshape(m, d)

    now = np.zeros(m)
    n_jumps = np.zeros(m, dtype=np.int64)
    jump_sum = np.zeros((m, d))
    age = np.zeros(m)
    in_flight = np.zeros((m, d))
    final = np.zeros((m, d))
    final_label = np.zeros(m, dtype=np.int64) if finite else None
    occ = np.zeros((m, space.n_states)) if finite else None

    current = first
    active = np.arange(m)
    while active.size:
        r = active.size
        labels = space.block(current, block, rng)
        vel = space.velocity(labels)
        waits = sample_ml_waiting_time(spec.alpha, space.rate(labels), rng)
        ends = now[active, None] + np.cumsum(waits, axis=1)

        crossed = ends > t
        hit = crossed.any(axis=1)
        done = np.where(hit, crossed.argmax(axis=1), block)
        complete = np.arange(block)[None, :] < done[:, None]
        full = np.where(complete, waits, 0.0)

        jump_sum[active] += np.einsum("rk,rkd->rd", full, vel)
        n_jumps[active] += done
        if finite:
            for s in range(space.n_states):
                occ[active, s] += np.where(labels == s, full, 0.0).sum(axis=1)

        ih = np.nonzero(hit)[0]
        rows = active[ih]
        k = done[ih]
        start = np.where(k > 0, ends[ih, k - 1], now[rows])
        age[rows] = t - start
        last = labels[ih, k]
        v_last = space.velocity(last).reshape(ih.size, d)
        final[rows] = v_last
        in_flight[rows] = age[rows, None] * v_last
        if finite:
            final_label[rows] = last
            occ[rows, last] += age[rows]

        ic = np.nonzero(~hit)[0]
        cont = active[ic]
        now[cont] = ends[ic, -1]
        current = space.successor(labels[ic, -1], rng)
        active = cont

    return {
        "initial": initial,
        "n_jumps": n_jumps,
        "age": age,
        "jump_sum": jump_sum,
        "in_flight": in_flight,
        "final": final,
        "final_label": final_label,
        "occupation": occ,
    }


def simulate_batch(
    space: StateSpace,
    spec: BernsteinSpec,
    v0,
    t: float,
    n: int,
    rng: np.random.Generator,
) -> PathBatch:
    """Simulate ``n`` independent paths up to time ``t`` in vectorised blocks.

    Each block draws a fixed number of segments for every unfinished path;
    paths that have not reached ``t`` carry their state into the next block.

    Args:
        space: State space.
        spec: Driving subordinator.
        v0: Initial state value, or ``None`` for the uniform initial law.
        t: Observation time, >= 0.
        n: Number of paths.
        rng: Generator.

    Returns:
        PathBatch: Per-path summaries at ``t``.
    """
    if t < 0 or not math.isfinite(t):
        raise ValueError(f"t must be finite and >= 0, got {t}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    d = space.dimension
    expected = space.max_rate * renewal_measure(spec.alpha, t)
    block = int(min(max(1.5 * expected + 8, 8), MAX_BLOCK))
    rows = max(1, BLOCK_ELEMENTS // (block * (d + 3)))
    logger.debug("simulate_batch: t=%g n=%d block=%d rows=%d", t, n, block, rows)

    parts = [_batch_chunk(space, spec, v0, t, size, rng, block) for size in iter_batches(n, rows)]
    if not parts:
        parts = [_batch_chunk(space, spec, v0, t, 0, rng, block)]
    joined = {
        key: (np.concatenate([p[key] for p in parts]) if parts[0][key] is not None else None)
        for key in parts[0]
    }
    return PathBatch(t=float(t), **joined)


# ---------------------------
# Analytic laws
# ---------------------------
def age_survival(alpha: float, theta: float, t: float, z: float) -> float:
    """``P(gamma(t) > z)`` for the renewal process with Mittag-Leffler waits.

    For ``0 <= z < t`` this is ``E_alpha(-theta t^alpha) + int_z^t
    E_alpha(-theta w^alpha) theta (t-w)^(alpha-1) / Gamma(alpha) dw``; the
    survival is 1 below zero and 0 from ``t`` on. ``alpha == 1`` gives
    ``exp(-theta z)`` on ``[0, t)``.
    """
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if z < 0:
        return 1.0
    if z >= t:
        return 0.0
    if alpha == 1.0:
        return math.exp(-theta * z)

    coef = theta / math.gamma(alpha)
    val, err = integrate.quad(
        lambda w: ml_eval(alpha, -theta * w**alpha),
        z,
        t,
        weight="alg",
        wvar=(0.0, alpha - 1.0),
        epsabs=1e-11,
    )
    return ml_eval(alpha, -theta * t**alpha) + coef * val


def mean_age(alpha: float, theta: float, t: float) -> float:
    """``E gamma(t) / t``, the integral of :func:`age_survival` over ``[0, t]`` divided by ``t``.

    Tends to ``1 - alpha`` as ``t`` grows, from above for ``alpha < 1``;
    ``alpha == 1`` gives ``(1 - exp(-theta t)) / (theta t)``.
    """
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if alpha == 1.0:
        return -math.expm1(-theta * t) / (theta * t)

    val, err = integrate.quad(
        lambda w: w * ml_eval(alpha, -theta * w**alpha),
        0.0,
        t,
        weight="alg",
        wvar=(0.0, alpha - 1.0),
        epsabs=1e-11,
        limit=200,
    )
    return ml_eval(alpha, -theta * t**alpha) + theta / (math.gamma(alpha) * t) * val


def telegraph_return_probability(alpha: float, theta: float, t: float) -> float:
    """``P^{+1}(V(t) = +1) = (1 + E_alpha(-2 theta t^alpha)) / 2`` for the telegraph space."""
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return 0.5 * (1.0 + ml_eval(alpha, -2.0 * theta * t**alpha))
