"""
semiflight/special_fn.py

Special functions behind every analytic reference value in the package.

Responsibilities
----------------
- Evaluate the one-parameter Mittag-Leffler function on the completely
  monotone branch (``0 < alpha <= 1``, ``x <= 0``) to an absolute accuracy of
  1e-10, and the waiting-time survival ``E_alpha(-theta t^alpha)`` built on it.
- Expose the regularised incomplete Beta function used as the analytic CDF of
  the generalised arcsine laws.
- Invert Laplace transforms numerically on the fixed Talbot contour, with a
  node-doubling check that reports non-convergence.

Conventions
-----------
- Domain violations raise ``ValueError``; numerical failures raise
  :class:`ConvergenceError`.
- Functions documented as elementwise accept numpy arrays and return arrays
  of the broadcast shape (plain floats for scalar input).

Notes
-----
- Mittag-Leffler evaluation picks one of four routes depending on how fast the
  power series grows (roughly ``exp(|x|^(1/alpha))``):
    1. double-precision series with ``math.fsum`` when the growth is small;
    2. the same series in extended precision (mpmath) for the rest of
       ``|x| <= 5``;
    3. the large-argument expansion ``-sum x^-k / Gamma(1 - alpha k)``
       truncated at its smallest term, when that term is below 1e-13;
    4. otherwise the Laplace integral representation over the spectral
       density, evaluated with QUADPACK.
- Talbot inversion runs in mpmath at a precision equal to the node count, so
  the transform must accept mpmath complex numbers (plain arithmetic and
  ``**`` do).
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate, special

logger = logging.getLogger(__name__)

# Largest log-term growth handled by the double-precision series; beyond this
# cancellation would cost more than ~1e-12 absolute accuracy.
DOUBLE_SERIES_GROWTH = 8.0
# Series region of the argument (|x| <= SERIES_LIMIT).
SERIES_LIMIT = 5.0
# Above this growth the extended-precision series is not attempted.
MP_SERIES_GROWTH = 60.0
# Smallest asymptotic term accepted as an error bound.
ASYMPTOTIC_TOL = 1e-13
# Absolute error target of the integral representation.
INTEGRAL_TOL = 1e-13
MAX_TERMS = 20_000


class ConvergenceError(RuntimeError):
    """Raised when a numerical routine cannot certify its accuracy."""


@dataclass(frozen=True)
class MLParams:
    """Validated arguments of the Mittag-Leffler function.

    Attributes:
        alpha: Index in (0, 1].
        x: Argument, <= 0 (completely monotone branch only).
    """

    alpha: float
    x: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.x <= 0.0:
            raise ValueError(f"x must be <= 0, got {self.x}")


@dataclass(frozen=True)
class TalbotConfig:
    """Settings of the fixed-Talbot inversion.

    Attributes:
        node_count: Number of contour nodes M of the coarse pass (>= 8); the
            check pass uses 2M.
        time: Optional contour scaling time (defaults to the requested time).
        tolerance: Absolute disagreement allowed between the M and 2M passes.
    """

    node_count: int = 32
    time: float | None = None
    tolerance: float = 1e-8

    def __post_init__(self):
        if self.node_count < 8:
            raise ValueError(f"node_count must be >= 8, got {self.node_count}")
        if self.time is not None and not self.time > 0:
            raise ValueError(f"time must be positive, got {self.time}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")


# ---------------------------
# Mittag-Leffler function
# ---------------------------
def _series_double(alpha: float, x: float) -> float:
    s = -x
    log_s = math.log(s)
    terms = [1.0]
    peaked = False
    prev = 1.0
    for k in range(1, MAX_TERMS):
        mag = math.exp(k * log_s - math.lgamma(1.0 + alpha * k))
        terms.append(-mag if k % 2 else mag)
        if mag < prev:
            peaked = True
        prev = mag
        if peaked and mag < 1e-18:
            return math.fsum(terms)
    raise ConvergenceError(f"ML series did not converge for alpha={alpha}, x={x}")


def _series_mp(alpha: float, x: float, growth: float) -> float:
    # Extra digits cover the cancellation of terms as large as exp(growth).
    dps = 20 + int(growth / math.log(10)) + 5
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        am = mpmath.mpf(alpha)
        total = mpmath.mpf(1)
        tiny = mpmath.mpf(10) ** (-(dps - 2))
        prev = mpmath.mpf(1)
        peaked = False
        for k in range(1, MAX_TERMS):
            term = xm**k / mpmath.gamma(1 + am * k)
            total += term
            mag = abs(term)
            if mag < prev:
                peaked = True
            prev = mag
            if peaked and mag < tiny:
                return float(total)
    raise ConvergenceError(f"extended ML series did not converge for alpha={alpha}, x={x}")


def _asymptotic(alpha: float, x: float) -> float | None:
    """Large-argument expansion truncated at its smallest non-zero term.

    Returns None when the smallest term exceeds :data:`ASYMPTOTIC_TOL`.
    """
    s = -x
    terms: list[float] = []
    smallest = math.inf
    for k in range(1, 400):
        r = float(special.rgamma(1.0 - alpha * k))
        if r == 0.0:
            # 1/Gamma vanishes at the poles; the term is exactly zero.
            continue
        term = -((-1.0 / s) ** k) * r
        mag = abs(term)
        if mag > smallest:
            break
        smallest = mag
        terms.append(term)
        if mag < 1e-17:
            break
    if smallest > ASYMPTOTIC_TOL:
        return None
    return math.fsum(terms)


def _integral(alpha: float, x: float) -> float:
    s = -x
    inv = 1.0 / alpha
    cos_ap = math.cos(alpha * math.pi)

    def integrand(u: float) -> float:
        return math.exp(-((u * s) ** inv)) / (u * u + 2.0 * u * cos_ap + 1.0)

    # Past u = 50^alpha / s the exponential factor is below e^-50.
    knee = 1.0 / s
    upper = 50.0**alpha / s
    val, err = integrate.quad(
        integrand, 0.0, upper, points=[knee], epsabs=INTEGRAL_TOL, epsrel=1e-12, limit=400
    )
    if err > 1e-11:
        raise ConvergenceError(f"ML integral error {err:.2e} for alpha={alpha}, x={x}")
    return math.sin(alpha * math.pi) / (alpha * math.pi) * val


def ml_eval(alpha: float, x: float) -> float:
    """Evaluate the Mittag-Leffler function ``sum_k x^k / Gamma(1 + alpha k)``.

    Args:
        alpha: Index in (0, 1].
        x: Argument, <= 0.

    Returns:
        float: ``E_alpha(x)`` in (0, 1], absolute error <= 1e-10.

    Raises:
        ValueError: If ``alpha`` is outside (0, 1] or ``x > 0``.
        ConvergenceError: If no evaluation route certifies the accuracy.
    """
    params = MLParams(float(alpha), float(x))
    alpha, x = params.alpha, params.x
    if x == 0.0:
        return 1.0
    if alpha == 1.0:
        return math.exp(x)

    s = -x
    growth = s ** (1.0 / alpha)
    if growth <= DOUBLE_SERIES_GROWTH:
        return _series_double(alpha, x)
    if s <= SERIES_LIMIT and growth <= MP_SERIES_GROWTH:
        return _series_mp(alpha, x, growth)

    value = _asymptotic(alpha, x)
    if value is not None and not value > 0.0:
        logger.warning(
            "asymptotic expansion gave %.3e for alpha=%g, x=%g; using the integral",
            value,
            alpha,
            x,
        )
        value = None
    if value is None:
        value = _integral(alpha, x)
    if not value > 0.0:
        raise ConvergenceError(
            f"non-positive Mittag-Leffler value {value!r} at alpha={alpha}, x={x}"
        )
    return min(value, 1.0)


def ml_survival(alpha: float, theta: float, t):
    """Waiting-time survival ``P(J > t) = E_alpha(-theta t^alpha)`` (elementwise).

    Args:
        alpha: Index in (0, 1]; ``alpha == 1`` gives ``exp(-theta t)``.
        theta: Rate, > 0.
        t: Time(s), >= 0. Scalar or array.

    Returns:
        float or numpy.ndarray: Survival probabilities.
    """
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(~np.isfinite(t_arr)):
        raise ValueError("t must be finite and >= 0")
    MLParams(float(alpha), 0.0)

    if alpha == 1.0:
        out = np.exp(-theta * t_arr)
    else:
        flat = t_arr.ravel()
        out = np.fromiter(
            (ml_eval(alpha, -theta * ti**alpha) for ti in flat), dtype=float, count=flat.size
        ).reshape(t_arr.shape)
    return float(out) if out.ndim == 0 else out


# ---------------------------
# Beta laws
# ---------------------------
def beta_reg_cdf(a: float, b: float, x):
    """Regularised incomplete Beta ``I_x(a, b)`` (elementwise in ``x``).

    Args:
        a: First shape, > 0.
        b: Second shape, > 0.
        x: Point(s) in [0, 1].

    Returns:
        float or numpy.ndarray: ``I_x(a, b)``.
    """
    if not (a > 0 and b > 0):
        raise ValueError(f"shapes must be positive, got a={a}, b={b}")
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr < 0) | (x_arr > 1)) or np.any(np.isnan(x_arr)):
        raise ValueError("x must lie in [0, 1]")
    out = special.betainc(a, b, x_arr)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------
# Laplace inversion
# ---------------------------
def _talbot_pass(F: Callable, t: float, nodes: int, tmax: float) -> float:
    val = mpmath.invertlaplace(F, t, method="talbot", degree=nodes, tmax=tmax)
    return float(mpmath.re(val))


def talbot_invert(F: Callable, t: float, cfg: TalbotConfig | None = None) -> float:
    """Invert a Laplace transform at ``t`` on the fixed Talbot contour.

    Two passes are made, with ``cfg.node_count`` and twice as many nodes; the
    finer value is returned when both agree within ``cfg.tolerance``.

    Args:
        F: Transform ``lambda -> F(lambda)``, analytic to the right of a
            vertical line and evaluable on mpmath complex numbers.
        t: Time, > 0.
        cfg: Inversion settings.

    Returns:
        float: Approximation of the inverse transform at ``t``.

    Raises:
        ValueError: If ``t <= 0``.
        ConvergenceError: If the two passes disagree.
    """
    cfg = cfg or TalbotConfig()
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    tmax = cfg.time if cfg.time is not None else t

    coarse = _talbot_pass(F, t, cfg.node_count, tmax)
    fine = _talbot_pass(F, t, 2 * cfg.node_count, tmax)
    logger.debug("talbot t=%g: M=%d -> %.3e, 2M -> %.3e", t, cfg.node_count, coarse, fine)
    if not math.isfinite(fine) or abs(fine - coarse) > cfg.tolerance:
        raise ConvergenceError(
            f"Talbot passes disagree at t={t}: {coarse!r} vs {fine!r} "
            f"(tolerance {cfg.tolerance})"
        )
    return fine
