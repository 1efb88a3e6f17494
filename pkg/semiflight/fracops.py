"""
semiflight/fracops.py

Grid evaluation of the fractional time derivative and of the fractional
material derivative ``(d_t - v d_x)^alpha``, and a quadrature check of their
Fourier-Laplace symbol ``(lam + i xi v)^alpha``.

Both operators are evaluated by one product-integration kernel. At time
``t_n`` the increment ``g(s) = h(x, t_n) - h(x + v s, t_n - s)`` is sampled at
the grid lags ``s_m = m dt``, interpolated linearly on every cell and
integrated exactly against ``alpha s^(-alpha-1) / Gamma(1 - alpha) ds``. The
tail beyond ``t_n`` contributes ``nu(t_n) (h(x, t_n) - h(x + v t_n, 0))`` with
``nu(t) = t^-alpha / Gamma(1 - alpha)``. The time derivative is the case
``v = 0``; it reproduces ``f(t) = t`` exactly.

Off-grid spatial lookups along ``x + v s`` interpolate linearly and read zero
outside the box, so the data must vanish on the upstream edge
(:class:`BoundaryError` otherwise). Output grids start at ``t = dt``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .special_fn import ConvergenceError

logger = logging.getLogger(__name__)

# Cells on each spatial edge that must hold negligible values.
EDGE_CELLS = 2
EDGE_TOL = 1e-10
MIN_POINTS = 4


class BoundaryError(ValueError):
    """Grid data does not vanish where characteristics leave the box."""


@dataclass(frozen=True, eq=False)
class GridFn1D:
    """Samples of ``f`` at ``t0 + k dt``, ``k = 0, 1, ...``."""

    dt: float
    values: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if values.ndim != 1 or not np.all(np.isfinite(values)):
            raise ValueError("values must be a finite 1-D array")
        object.__setattr__(self, "values", values)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)


@dataclass(frozen=True, eq=False)
class GridFnST:
    """Samples of ``h(x, t)`` on ``(x0 + i dx, t0 + n dt)``; ``values`` has shape ``(nx, nt)``."""

    dx: float
    dt: float
    values: np.ndarray
    v: float = 0.0
    x0: float = 0.0
    t0: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if not (self.dx > 0 and self.dt > 0):
            raise ValueError("dx and dt must be positive")
        if values.ndim != 2 or not np.all(np.isfinite(values)):
            raise ValueError("values must be a finite 2-D array (nx, nt)")
        object.__setattr__(self, "values", values)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.values.shape[0])

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.shape[1])


def _cell_weights(alpha: float, dt: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Weights ``a_k``, ``b_k`` of the cell ``[k dt, (k+1) dt]`` on its left and right node."""
    c = alpha / math.gamma(1.0 - alpha)
    k = np.arange(n, dtype=float)
    lo = k * dt
    hi = (k + 1.0) * dt
    a = np.zeros(n)
    b = np.empty(n)
    b[0] = c * dt**-alpha / (1.0 - alpha)
    if n > 1:
        lo1, hi1 = lo[1:], hi[1:]
        i0 = (lo1**-alpha - hi1**-alpha) / alpha
        i1 = (hi1 ** (1.0 - alpha) - lo1 ** (1.0 - alpha)) / (1.0 - alpha)
        a[1:] = c * (hi1 * i0 - i1) / dt
        b[1:] = c * (i1 - lo1 * i0) / dt
    return a, b


def _shift(h: np.ndarray, cells: float) -> np.ndarray:
    """``h`` read at ``x + cells dx`` (row axis), linear, zero outside."""
    if cells == 0.0:
        return h
    nx = h.shape[0]
    j = math.floor(cells)
    frac = cells - j
    idx = np.arange(nx) + j
    out = np.zeros_like(h)
    ok = (idx >= 0) & (idx < nx)
    out[ok] += (1.0 - frac) * h[idx[ok]]
    if frac:
        nxt = idx + 1
        ok = (nxt >= 0) & (nxt < nx)
        out[ok] += frac * h[nxt[ok]]
    return out


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def _product_integration(h: np.ndarray, alpha: float, dt: float, cells_per_dt: float) -> np.ndarray:
    """Apply the kernel to ``h`` of shape ``(nx, N + 1)``; returns ``(nx, N)`` at ``t_1..t_N``."""
    steps = h.shape[1] - 1
    a, b = _cell_weights(alpha, dt, steps)
    out = np.zeros((h.shape[0], steps))
    for m in range(1, steps + 1):
        lagged = _shift(h, m * cells_per_dt)
        # Contribution of lag m to every t_n with n >= m.
        w = np.full(steps - m + 1, b[m - 1] + (a[m] if m < steps else 0.0))
        w[0] = b[m - 1]
        out[:, m - 1 :] += w[None, :] * (h[:, m:] - lagged[:, : steps - m + 1])

    tn = dt * np.arange(1, steps + 1)
    tail = tn**-alpha / math.gamma(1.0 - alpha)
    start = h[:, :1]
    for n in range(1, steps + 1):
        origin = _shift(start, n * cells_per_dt)[:, 0]
        out[:, n - 1] += tail[n - 1] * (h[:, n] - origin)
    return out


def caputo_frac_deriv(f: GridFn1D, alpha: float) -> GridFn1D:
    """Fractional time derivative of ``f`` at ``t_1, ..., t_N``.

    Evaluates ``int_0^t (f(t) - f(t-s)) nu(ds) + nu(t) (f(t) - f(0))``; the
    local error is of order ``dt^(2-alpha)`` for smooth ``f``.

    Raises:
        ValueError: If ``f`` has fewer than four points or ``alpha`` is not in (0, 1).
    """
    _check_alpha(alpha)
    if f.values.size < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} grid points, got {f.values.size}")
    out = _product_integration(f.values[None, :], alpha, f.dt, 0.0)[0]
    return GridFn1D(dt=f.dt, values=out, t0=f.t0 + f.dt)


def frac_material_deriv(h: GridFnST, alpha: float, v: float | None = None) -> GridFnST:
    """Fractional material derivative ``(d_t - v d_x)^alpha h`` at ``t_1, ..., t_N``.

    Evaluates ``int_0^t (h(x, t) - h(x + v s, t - s)) nu(ds) + nu(t) (h(x, t)
    - h(x + v t, 0))`` on every spatial node.

    Args:
        h: Space-time grid data.
        alpha: Index in (0, 1).
        v: Velocity; defaults to ``h.v``.

    Raises:
        BoundaryError: If ``h`` does not vanish on the edge the characteristics
            read from.
    """
    _check_alpha(alpha)
    v = h.v if v is None else float(v)
    if h.values.shape[1] < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} time levels, got {h.values.shape[1]}")
    if v != 0.0:
        edge = h.values[-EDGE_CELLS:] if v > 0 else h.values[:EDGE_CELLS]
        scale = max(1.0, float(np.abs(h.values).max()))
        if float(np.abs(edge).max()) > EDGE_TOL * scale:
            side = "right" if v > 0 else "left"
            raise BoundaryError(f"h does not vanish on the {side} edge of the box")

    out = _product_integration(h.values, alpha, h.dt, v * h.dt / h.dx)
    logger.debug("frac_material_deriv: grid %s, v=%g", h.values.shape, v)
    return GridFnST(dx=h.dx, dt=h.dt, values=out, v=v, x0=h.x0, t0=h.t0 + h.dt)


def verify_symbol(alpha: float, v: float, xi: float, lam) -> float:
    """Residual ``|int_0^inf (1 - exp(-s z)) nu(ds) - z^alpha|`` with ``z = lam + i xi v``.

    ``[0, 1]`` is integrated with the algebraic weight ``s^-alpha`` and
    ``[1, inf)`` with the Fourier weights, both by QUADPACK.

    Raises:
        ValueError: If ``Re(lam) <= 0``.
        ConvergenceError: If a quadrature error estimate exceeds 1e-10.
    """
    _check_alpha(alpha)
    z = complex(lam) + 1j * xi * v
    if not complex(lam).real > 0:
        raise ValueError(f"Re(lambda) must be positive, got {lam}")
    decay, omega = z.real, z.imag

    def near(s: float) -> complex:
        # (1 - e^{-sz}) / s, continuous at 0.
        return z if s == 0.0 else -np.expm1(-s * z) / s

    errs = []

    def quad(fn, *args, **kwargs) -> float:
        val, err = integrate.quad(fn, *args, epsabs=1e-14, epsrel=1e-12, limit=200, **kwargs)
        errs.append(err)
        return val

    head = complex(
        quad(lambda s: near(s).real, 0.0, 1.0, weight="alg", wvar=(-alpha, 0.0)),
        quad(lambda s: near(s).imag, 0.0, 1.0, weight="alg", wvar=(-alpha, 0.0)),
    )

    def envelope(s: float) -> float:
        return math.exp(-decay * s) * s ** (-alpha - 1.0)

    if omega == 0.0:
        far = quad(envelope, 1.0, np.inf)
    else:
        freq = abs(omega)
        far = complex(
            quad(envelope, 1.0, np.inf, weight="cos", wvar=freq),
            -math.copysign(1.0, omega) * quad(envelope, 1.0, np.inf, weight="sin", wvar=freq),
        )
    tail = 1.0 / alpha - far

    if max(errs) > 1e-10:
        raise ConvergenceError(f"symbol quadrature error {max(errs):.2e}")
    c = alpha / special.gamma(1.0 - alpha)
    return float(abs(c * (head + tail) - z**alpha))
