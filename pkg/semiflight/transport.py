"""
semiflight/transport.py

The d-dimensional semi-Markov flight, its rescaling and the superdiffusive
limit, with the statistics used to check their laws.

Responsibilities
----------------
- Flight ``X(t) = x0 + sum J_i v_i + (t - tau_N) v_{N+1}`` on the isotropic
  sphere space, single sample and batch (:func:`sample_flight`,
  :func:`sample_flight_batch`) and its rescaled form (:func:`sample_scaled_flight`).
- Limit ``X_inf(t) = A(L(t)-) + (t - sigma(L(t)-)) U`` built from coupled
  passages of the subordinator (:func:`sample_limit`).
- Empirical characteristic functions and their largest gap over a set of
  frequencies, the Fourier-Laplace symbol ``psi`` and its Talbot inversion,
  mean-square-displacement curves with log-log fits.

Notes
-----
- Finite speed ``|X - x0| <= t`` holds pathwise; :func:`finite_speed_violations`
  counts breaches with a relative slack of 1e-12 for rounding of unit vectors.
- Limit-process comparisons use ``theta = 1``.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import stats

from .levy import BernsteinSpec, sample_coupled_passage_batch
from .semi_markov import PathBatch, simulate_batch, simulate_path, sphere_space
from .special_fn import ConvergenceError, TalbotConfig, talbot_invert
from .streams import MomentEstimate

logger = logging.getLogger(__name__)

SPEED_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class FlightSample:
    """One flight observed at ``t``.

    ``position = x0 + jump_sum + in_flight``, summed in that order.
    """

    t: float
    position: np.ndarray
    jump_sum: np.ndarray
    in_flight: np.ndarray
    n_jumps: int


@dataclass(frozen=True, eq=False)
class FlightBatch:
    """``n`` flights observed at ``t``; vector fields have shape ``(n, d)``."""

    t: float
    x0: np.ndarray
    position: np.ndarray
    jump_sum: np.ndarray
    in_flight: np.ndarray
    n_jumps: np.ndarray
    age: np.ndarray

    def __len__(self) -> int:
        return int(self.n_jumps.size)

    @property
    def displacement(self) -> np.ndarray:
        return self.position - self.x0


@dataclass(frozen=True, eq=False)
class LimitSample:
    """``X_inf = M + gamma_sigma U``, ``M = A(L(t)-)``, ``gamma_sigma = t - sigma(L(t)-)``."""

    t: float
    M: np.ndarray
    gamma_sigma: float
    U: np.ndarray
    X_inf: np.ndarray


@dataclass(frozen=True, eq=False)
class LimitBatch:
    """``n`` limit samples; ``M``, ``U`` and ``X_inf`` have shape ``(n, d)``."""

    t: float
    M: np.ndarray
    gamma_sigma: np.ndarray
    U: np.ndarray
    X_inf: np.ndarray
    n_jumps: np.ndarray
    creeping_rate: float

    def __len__(self) -> int:
        return int(self.gamma_sigma.size)


@dataclass(frozen=True)
class CharFnEstimate:
    """Empirical ``E exp(i xi . x)`` with the standard errors of both parts."""

    xi: tuple[float, ...]
    t: float | None
    estimate: complex
    stderr: float
    stderr_re: float
    stderr_im: float
    n_samples: int


@dataclass(frozen=True)
class MSDCurve:
    """Mean square displacement per time and the fitted log-log line."""

    points: list[tuple[float, float, float]]
    slope: float
    intercept: float
    r_squared: float


# ---------------------------
# Flights
# ---------------------------
def _start(d: int, x0) -> np.ndarray:
    if x0 is None:
        return np.zeros(d)
    return np.asarray(x0, dtype=float).reshape(d)


def _flight_from_paths(batch: PathBatch, x0: np.ndarray, scale: float = 1.0) -> FlightBatch:
    jump_sum = scale * batch.jump_sum
    in_flight = scale * batch.in_flight
    return FlightBatch(
        t=batch.t * scale,
        x0=x0,
        position=x0[None, :] + jump_sum + in_flight,
        jump_sum=jump_sum,
        in_flight=in_flight,
        n_jumps=batch.n_jumps,
        age=scale * batch.age,
    )


def sample_flight_batch(
    d: int, alpha: float, theta: float, t: float, n: int, rng: np.random.Generator, x0=None
) -> FlightBatch:
    """Vectorised :func:`sample_flight` with a uniform initial direction."""
    start = _start(d, x0)
    space = sphere_space(d, theta)
    batch = simulate_batch(space, BernsteinSpec.from_alpha(alpha), None, t, n, rng)
    return _flight_from_paths(batch, start)


def sample_flight(
    d: int, alpha: float, theta: float, t: float, x0, rng: np.random.Generator
) -> FlightSample:
    """One flight at time ``t`` from ``x0`` with a uniform initial direction.

    Without scattering (``n_jumps == 0``) the particle sits on the sphere of
    radius ``t`` around ``x0``.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    start = _start(d, x0)
    if t == 0:
        zero = np.zeros(d)
        return FlightSample(0.0, start.copy(), zero, zero.copy(), 0)

    path = simulate_path(sphere_space(d, theta), BernsteinSpec.from_alpha(alpha), None, t, rng)
    n = path.n_jumps
    jump_sum = np.zeros(d)
    start_t = 0.0
    for i in range(n):
        jump_sum = jump_sum + (path.epochs[i] - start_t) * path.states[i]
        start_t = float(path.epochs[i])
    in_flight = (t - start_t) * path.states[n]
    return FlightSample(float(t), start + jump_sum + in_flight, jump_sum, in_flight, n)


def sample_scaled_flight_batch(
    d: int, alpha: float, theta: float, t: float, c: float, n: int, rng: np.random.Generator
) -> FlightBatch:
    """``c^(-1/alpha)`` times a flight observed at ``c^(1/alpha) t`` (from the origin)."""
    if not c >= 1:
        raise ValueError(f"scale c must be >= 1, got {c}")
    stretch = c ** (1.0 / alpha)
    space = sphere_space(d, theta)
    batch = simulate_batch(space, BernsteinSpec.from_alpha(alpha), None, stretch * t, n, rng)
    scaled = _flight_from_paths(batch, np.zeros(d), 1.0 / stretch)
    # Report the unscaled observation time exactly.
    return FlightBatch(
        t=float(t),
        x0=scaled.x0,
        position=scaled.position,
        jump_sum=scaled.jump_sum,
        in_flight=scaled.in_flight,
        n_jumps=scaled.n_jumps,
        age=scaled.age,
    )


def sample_scaled_flight(
    d: int, alpha: float, theta: float, t: float, c: float, rng: np.random.Generator
) -> FlightSample:
    """Single-sample form of :func:`sample_scaled_flight_batch`."""
    b = sample_scaled_flight_batch(d, alpha, theta, t, c, 1, rng)
    return FlightSample(
        t=float(t),
        position=b.position[0],
        jump_sum=b.jump_sum[0],
        in_flight=b.in_flight[0],
        n_jumps=int(b.n_jumps[0]),
    )


# ---------------------------
# Limit process
# ---------------------------
def sample_limit_batch(
    d: int,
    alpha: float,
    t: float,
    eps: float,
    n: int,
    rng: np.random.Generator,
    gaussian_correction: bool = True,
) -> LimitBatch:
    """Vectorised :func:`sample_limit`; ``eps`` is the absolute truncation."""
    p = sample_coupled_passage_batch(alpha, d, t, eps, n, rng, gaussian_correction)
    gamma_sigma = t - p.undershoot
    x_inf = p.a_minus + gamma_sigma[:, None] * p.direction
    return LimitBatch(
        t=float(t),
        M=p.a_minus,
        gamma_sigma=gamma_sigma,
        U=p.direction,
        X_inf=x_inf,
        n_jumps=p.n_jumps,
        creeping_rate=p.creeping_rate,
    )


def sample_limit(
    d: int, alpha: float, t: float, eps: float, rng: np.random.Generator
) -> LimitSample:
    """One sample of the superdiffusive limit at time ``t``.

    ``U`` is the direction of the jump that carries the subordinator over
    ``t``, uniform and independent of ``M``.
    """
    b = sample_limit_batch(d, alpha, t, eps, 1, rng)
    return LimitSample(
        t=float(t),
        M=b.M[0],
        gamma_sigma=float(b.gamma_sigma[0]),
        U=b.U[0],
        X_inf=b.X_inf[0],
    )


def finite_speed_violations(displacements: np.ndarray, t: float) -> int:
    """Number of rows with ``|x - x0| > t (1 + 1e-12)``."""
    disp = np.asarray(displacements, dtype=float)
    if disp.ndim == 1:
        disp = disp[:, None]
    norms = np.linalg.norm(disp, axis=1)
    return int(np.count_nonzero(norms > t * (1.0 + SPEED_SLACK)))


# ---------------------------
# Characteristic functions and symbols
# ---------------------------
def empirical_charfn(samples, xi, t: float | None = None) -> CharFnEstimate:
    """Mean of ``exp(i xi . x)`` over the rows of ``samples``.

    Raises:
        ValueError: If ``samples`` is empty.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] == 0:
        raise ValueError("empirical_charfn needs at least one sample")
    xi_vec = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi_vec.size != x.shape[1]:
        raise ValueError(f"xi has {xi_vec.size} components, samples have {x.shape[1]}")
    phase = x @ xi_vec
    re = MomentEstimate.from_values(np.cos(phase))
    im = MomentEstimate.from_values(np.sin(phase))
    return CharFnEstimate(
        xi=tuple(float(v) for v in xi_vec),
        t=t,
        estimate=complex(re.mean, im.mean),
        stderr=math.hypot(re.stderr, im.stderr),
        stderr_re=re.stderr,
        stderr_im=im.stderr,
        n_samples=re.count,
    )


def charfn_discrepancy(samples, reference, frequencies: Sequence[float]) -> float:
    """Largest gap between two empirical characteristic functions.

    Frequencies are scalars applied along every axis, ``xi = f (1, ..., 1)``.
    """
    x = np.asarray(samples, dtype=float)
    d = 1 if x.ndim == 1 else x.shape[1]
    gaps = [
        abs(
            empirical_charfn(x, np.full(d, f)).estimate
            - empirical_charfn(reference, np.full(d, f)).estimate
        )
        for f in frequencies
    ]
    return float(max(gaps))


def _psi_1d(alpha, xi, lam):
    # Plain arithmetic so mpmath numbers pass through unchanged.
    return ((lam - 1j * xi) ** alpha + (lam + 1j * xi) ** alpha) / 2


def psi_symbol(d: int, alpha: float, xi, lam) -> complex:
    """``psi(xi, lam) = int (lam - i xi . v)^alpha mu(dv)`` over the unit sphere.

    ``d == 1`` uses the closed form; ``d >= 2`` integrates over the polar
    angle, ``int_0^pi (lam - i |xi| cos phi)^alpha sin^(d-2) phi dphi`` divided
    by its value at ``alpha = 0``, with Gauss-Legendre quadrature.

    Raises:
        ValueError: If ``Re(lam) <= 0``.
        ConvergenceError: If the quadrature error estimate exceeds 1e-12.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    lam_c = complex(lam)
    if not lam_c.real > 0:
        raise ValueError(f"Re(lambda) must be positive, got {lam}")
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    if d == 1:
        return complex(_psi_1d(alpha, float(xi_arr[0]), lam_c))

    r = float(np.linalg.norm(xi_arr))
    with mpmath.workdps(30):
        lam_m = mpmath.mpc(lam_c)
        weight = d - 2

        def integrand(phi):
            return (lam_m - 1j * r * mpmath.cos(phi)) ** alpha * mpmath.sin(phi) ** weight

        val, err = mpmath.quad(
            integrand, [0, mpmath.pi / 2, mpmath.pi], method="gauss-legendre", error=True
        )
        half = mpmath.mpf(1) / 2
        norm = mpmath.sqrt(mpmath.pi) * mpmath.gamma((d - 1) * half) / mpmath.gamma(d * half)
        if err > 1e-12 * max(1, abs(val)):
            raise ConvergenceError(f"sphere quadrature error {float(err):.2e} for psi")
        return complex(val / norm)


def fourier_laplace_M(alpha: float, xi: float, t: float, cfg: TalbotConfig | None = None) -> float:
    """``E exp(i xi M(t))`` for ``d = 1`` by Talbot inversion of ``lam^(alpha-1) / psi(xi, lam)``.

    The value is real by symmetry of ``M``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")

    def transform(lam):
        return lam ** (alpha - 1) / _psi_1d(alpha, xi, lam)

    return talbot_invert(transform, t, cfg)


def markov_msd(d: int, theta: float, t: float) -> float:
    """``E|X(t) - x0|^2 = 2 (t/theta - (1 - exp(-theta t)) / theta^2)`` for the Markov flight.

    The velocity autocorrelation ``exp(-theta u)`` does not depend on ``d``.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    return 2.0 * (t / theta + math.expm1(-theta * t) / theta**2)


def msd_curve(
    sampler: Callable[[float, int, np.random.Generator], np.ndarray],
    t_grid: Sequence[float],
    n_paths: int,
    rng: np.random.Generator,
) -> MSDCurve:
    """Second moments of ``sampler(t, n, rng)`` displacements over ``t_grid``.

    The slope and intercept are those of the least-squares line through
    ``(log t, log E|x|^2)``.
    """
    grid = [float(t) for t in t_grid]
    if len(grid) < 2:
        raise ValueError("t_grid needs at least two times")
    if any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] <= 0:
        raise ValueError("t_grid must be positive and strictly increasing")

    points = []
    for t in grid:
        disp = np.asarray(sampler(t, n_paths, rng), dtype=float)
        if disp.ndim == 1:
            disp = disp[:, None]
        est = MomentEstimate.from_values(np.sum(disp * disp, axis=1))
        points.append((t, est.mean, est.stderr))

    fit = stats.linregress(np.log(grid), np.log([p[1] for p in points]))
    return MSDCurve(
        points=points,
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue**2),
    )


def superdiffusion_constant(
    alpha: float, d: int, n: int, eps: float, rng: np.random.Generator
) -> tuple[float, float, MomentEstimate]:
    """Estimate ``K = E|M(1)|^2 + (1 - alpha)(2 - alpha)/2``.

    Returns:
        tuple: ``(K, stderr of K, estimate of E|M(1)|^2)``.
    """
    b = sample_limit_batch(d, alpha, 1.0, eps, n, rng)
    m2 = MomentEstimate.from_values(np.sum(b.M * b.M, axis=1))
    k = m2.mean + (1.0 - alpha) * (2.0 - alpha) / 2.0
    logger.info("superdiffusion constant: K=%.5f +- %.5f (n=%d)", k, m2.stderr, n)
    return k, m2.stderr, m2
