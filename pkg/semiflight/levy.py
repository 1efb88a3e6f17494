"""
semiflight/levy.py

Sampling machinery for the alpha-stable subordinator, its inverse (the random
clock of the semi-Markov chain), first-passage triples and the coupled
jump-displacement process.

Responsibilities
----------------
- Draw one-sided stable variables with Laplace exponent ``lambda^alpha``
  (Kanter / Chambers-Mallows-Stuck transformation, exact).
- Draw Mittag-Leffler waiting times through the self-similarity of the
  subordinator: ``J = T^(1/alpha) S`` with ``T ~ Exp(theta)``.
- Simulate first passage of the subordinator over a level with a truncated
  compound-Poisson surrogate plus small-jump drift, flagging creeping.
- Attach a uniform direction to every jump to obtain the coupled process
  ``(A, sigma)`` used by the superdiffusive limit.

Notes
-----
- Jumps larger than ``eps`` are simulated exactly: rate
  ``eps^-alpha / Gamma(1 - alpha)``, Pareto sizes ``eps U^(-1/alpha)``.
  Jumps below ``eps`` are replaced by the drift
  ``alpha eps^(1-alpha) / ((1-alpha) Gamma(1-alpha))``, which is exact in mean.
- The optional Gaussian small-jump correction of ``A`` is clipped to the norm
  of the sigma-mass carried by the drift, so ``|A(L-)| <= sigma(L-)`` holds on
  every sample.
- All samplers are vectorised and page through large requests in chunks; the
  single-sample forms call the batch forms with ``n = 1``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import special

from .streams import iter_batches, sample_direction

logger = logging.getLogger(__name__)

# Upper bound on floats held by one vectorised block.
BLOCK_ELEMENTS = 2_000_000


@dataclass(frozen=True)
class BernsteinSpec:
    """Laplace exponent of the driving subordinator.

    ``kind == "stable"`` means ``f(lambda) = lambda^alpha`` with Levy tail
    ``s^-alpha / Gamma(1 - alpha)``; ``kind == "markov"`` means ``f(lambda) =
    lambda`` (no time change).

    Attributes:
        kind: ``"stable"`` or ``"markov"``.
        alpha: Stability index; strictly inside (0, 1) for stable, 1 for Markov.
    """

    kind: Literal["stable", "markov"] = "markov"
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind == "stable":
            if not 0.0 < self.alpha < 1.0:
                raise ValueError(f"stable alpha must lie in (0, 1), got {self.alpha}")
        elif self.kind == "markov":
            if self.alpha != 1.0:
                raise ValueError("Markov spec has alpha == 1")
        else:
            raise ValueError(f"unknown Bernstein kind {self.kind!r}")

    @classmethod
    def stable(cls, alpha: float) -> BernsteinSpec:
        return cls("stable", float(alpha))

    @classmethod
    def markov(cls) -> BernsteinSpec:
        return cls("markov", 1.0)

    @classmethod
    def from_alpha(cls, alpha: float) -> BernsteinSpec:
        """Stable spec for ``alpha < 1``, Markov spec for ``alpha == 1``."""
        return cls.markov() if alpha == 1.0 else cls.stable(alpha)

    @property
    def is_markov(self) -> bool:
        return self.kind == "markov"

    def laplace_exponent(self, lam):
        return np.asarray(lam, dtype=float) ** self.alpha

    def levy_tail(self, s):
        """Tail ``nu((s, inf)) = s^-alpha / Gamma(1 - alpha)`` (stable only)."""
        if self.is_markov:
            raise ValueError("Markov spec has no Levy measure")
        return np.asarray(s, dtype=float) ** (-self.alpha) / special.gamma(1.0 - self.alpha)


@dataclass(frozen=True)
class PassageSample:
    """First passage of the subordinator over ``level``.

    ``undershoot = sigma(L-)`` and ``overshoot = sigma(L)``; both equal the
    level when the drift surrogate crossed it (``creeping``).
    """

    level: float
    passage_time: float
    undershoot: float
    overshoot: float
    creeping: bool


@dataclass(frozen=True)
class CoupledPassageSample(PassageSample):
    """Passage data plus the displacement ``A(L-)`` and the passage direction.

    Attributes:
        a_minus: ``A(L-)``, shape ``(d,)``.
        direction: Direction of the jump that crosses the level (a fresh
            uniform direction for creeping samples).
        n_jumps: Retained jumps strictly before the passage.
        jump_log: ``(size, direction)`` pairs of those jumps when recorded.
    """

    a_minus: np.ndarray | None = None
    direction: np.ndarray | None = None
    n_jumps: int = 0
    jump_log: tuple[tuple[float, tuple[float, ...]], ...] | None = None


@dataclass(frozen=True)
class PassageBatch:
    """Vectorised passage data for ``n`` independent samples at one level."""

    level: float
    passage_time: np.ndarray
    undershoot: np.ndarray
    overshoot: np.ndarray
    creeping: np.ndarray
    n_jumps: np.ndarray
    a_minus: np.ndarray | None = None
    direction: np.ndarray | None = None

    def __len__(self) -> int:
        return int(self.passage_time.size)

    @property
    def creeping_rate(self) -> float:
        return float(np.mean(self.creeping)) if len(self) else 0.0


# ---------------------------
# Stable and Mittag-Leffler variables
# ---------------------------
def _check_stable_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def sample_stable(alpha: float, rng: np.random.Generator, size=None):
    """Draw ``sigma(1)`` of the stable subordinator, ``E exp(-lam S) = exp(-lam^alpha)``.

    Uses Kanter's representation
    ``S = sin(alpha U) / sin(U)^(1/alpha) * (sin((1-alpha) U) / E)^((1-alpha)/alpha)``
    with ``U ~ Unif(0, pi)`` and ``E ~ Exp(1)``.

    Args:
        alpha: Index in (0, 1).
        rng: Generator.
        size: Output shape; ``None`` returns a float.
    """
    _check_stable_alpha(alpha)
    u = np.pi * (1.0 - rng.random(size))  # (0, pi]
    e = rng.standard_exponential(size)
    s = (
        np.sin(alpha * u)
        / np.sin(u) ** (1.0 / alpha)
        * (np.sin((1.0 - alpha) * u) / e) ** ((1.0 - alpha) / alpha)
    )
    return float(s) if size is None else s


def sample_ml_waiting_time(alpha: float, theta, rng: np.random.Generator, size=None):
    """Draw waiting times with survival ``E_alpha(-theta t^alpha)``.

    ``alpha == 1`` gives ``Exp(theta)``. ``theta`` may be an array of
    per-wait rates, in which case ``size`` defaults to its shape.
    """
    theta_arr = np.asarray(theta, dtype=float)
    if np.any(theta_arr <= 0):
        raise ValueError("theta must be positive")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    shape = size if size is not None else (theta_arr.shape or None)

    t = rng.standard_exponential(shape) / theta_arr
    if alpha == 1.0:
        out = t
    else:
        out = t ** (1.0 / alpha) * sample_stable(alpha, rng, () if shape is None else shape)
    return float(out) if shape is None else out


# ---------------------------
# Renewal quantities
# ---------------------------
def renewal_density(alpha: float, w: float) -> float:
    """Renewal density ``w^(alpha-1) / Gamma(alpha)`` of the stable subordinator.

    ``alpha == 1`` returns 1 (Poisson renewal).
    """
    if not w > 0:
        raise ValueError(f"w must be positive, got {w}")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if alpha == 1.0:
        return 1.0
    return w ** (alpha - 1.0) / math.gamma(alpha)


def renewal_measure(alpha: float, t: float) -> float:
    """``E L(t) = t^alpha / Gamma(1 + alpha)``, the integrated renewal density."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    return t**alpha / math.gamma(1.0 + alpha)


def stable_constant_B(alpha: float, d: int) -> float:
    """``B = cos(pi alpha / 2) * int |v . e1|^alpha mu(dv)`` over the unit sphere.

    The spherical moment equals ``Gamma(d/2) Gamma((alpha+1)/2) /
    (sqrt(pi) Gamma((d+alpha)/2))``; ``d == 1`` gives ``B = cos(pi alpha / 2)``.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    moment = math.exp(
        math.lgamma(d / 2.0)
        + math.lgamma((alpha + 1.0) / 2.0)
        - 0.5 * math.log(math.pi)
        - math.lgamma((d + alpha) / 2.0)
    )
    return math.cos(math.pi * alpha / 2.0) * moment


# ---------------------------
# Truncated compound-Poisson surrogate
# ---------------------------
@dataclass(frozen=True)
class _Truncation:
    alpha: float
    eps: float
    rate: float
    drift: float
    gauss_rate: float

    @classmethod
    def build(cls, alpha: float, eps: float, d: int = 1) -> _Truncation:
        g1 = math.gamma(1.0 - alpha)
        return cls(
            alpha=alpha,
            eps=eps,
            rate=eps**-alpha / g1,
            drift=alpha * eps ** (1.0 - alpha) / ((1.0 - alpha) * g1),
            gauss_rate=alpha * eps ** (2.0 - alpha) / (d * (2.0 - alpha) * g1),
        )

    def jump_sizes(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.eps * (1.0 - rng.random(size)) ** (-1.0 / self.alpha)


def _check_passage(alpha: float, t: float, eps: float) -> None:
    _check_stable_alpha(alpha)
    if not t > 0:
        raise ValueError(f"level t must be positive, got {t}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if eps >= t:
        raise ValueError(f"eps must be smaller than the level (eps={eps}, t={t})")


def _clip_gaussian(g: np.ndarray, bound: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(g, axis=1)
    scale = np.ones_like(norms)
    over = norms > bound
    scale[over] = bound[over] / norms[over]
    return g * scale[:, None]


def _passage_chunk(tr: _Truncation, t: float, m: int, d: int, rng, block: int) -> dict:
    """Simulate ``m`` passages over ``t``; ``d == 0`` skips displacements."""
    t0 = np.zeros(m)
    s0 = np.zeros(m)
    a0 = np.zeros((m, d))
    cnt = np.zeros(m, dtype=np.int64)

    out_l = np.empty(m)
    out_under = np.empty(m)
    out_over = np.empty(m)
    out_creep = np.zeros(m, dtype=bool)
    out_a = np.zeros((m, d))
    out_u = np.zeros((m, d))

    active = np.arange(m)
    while active.size:
        k_rows = active.size
        dt = rng.standard_exponential((k_rows, block)) / tr.rate
        s = tr.jump_sizes(rng, (k_rows, block))
        epochs = t0[active, None] + np.cumsum(dt, axis=1)
        s_plus = s0[active, None] + np.cumsum(tr.drift * dt + s, axis=1)
        s_minus = s_plus - s
        if d:
            v = sample_direction(d, k_rows * block, rng).reshape(k_rows, block, d)
            a_plus = a0[active, None, :] + np.cumsum(s[..., None] * v, axis=1)

        crossed = s_plus > t
        hit = crossed.any(axis=1)
        first = crossed.argmax(axis=1)

        idx = np.nonzero(hit)[0]
        rows = active[idx]
        k = first[idx]
        has_prev = k > 0
        prev_t = np.where(has_prev, epochs[idx, k - 1], t0[rows])
        prev_s = np.where(has_prev, s_plus[idx, k - 1], s0[rows])
        under = s_minus[idx, k]
        creep = under >= t

        out_l[rows] = np.where(creep, prev_t + (t - prev_s) / tr.drift, epochs[idx, k])
        out_under[rows] = np.where(creep, t, under)
        out_over[rows] = np.where(creep, t, s_plus[idx, k])
        out_creep[rows] = creep
        cnt[rows] += k
        if d:
            out_a[rows] = np.where(has_prev[:, None], a_plus[idx, k - 1], a0[rows])
            u = v[idx, k]
            n_creep = int(creep.sum())
            if n_creep:
                u[creep] = sample_direction(d, n_creep, rng)
            out_u[rows] = u

        rest = np.nonzero(~hit)[0]
        cont = active[rest]
        t0[cont] = epochs[rest, -1]
        s0[cont] = s_plus[rest, -1]
        cnt[cont] += block
        if d:
            a0[cont] = a_plus[rest, -1]
        active = cont

    return {
        "passage_time": out_l,
        "undershoot": out_under,
        "overshoot": out_over,
        "creeping": out_creep,
        "n_jumps": cnt,
        "a_minus": out_a,
        "direction": out_u,
    }


def _block_plan(tr: _Truncation, t: float, d: int) -> tuple[int, int]:
    """Events per block and rows per chunk for passages over ``t``."""
    mean_events = (t / tr.eps) ** tr.alpha / (
        math.gamma(1.0 + tr.alpha) * math.gamma(1.0 - tr.alpha)
    )
    block = int(min(max(mean_events + 16, 16), 1024))
    rows = max(1, BLOCK_ELEMENTS // (block * max(d, 1) * 4))
    return block, rows


def _passage_batch(
    alpha: float, t: float, eps: float, n: int, rng, d: int, gaussian_correction: bool
) -> PassageBatch:
    _check_passage(alpha, t, eps)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    tr = _Truncation.build(alpha, eps, max(d, 1))
    block, rows = _block_plan(tr, t, d)

    parts = [_passage_chunk(tr, t, size, d, rng, block) for size in iter_batches(n, rows)]
    if parts:
        joined = {key: np.concatenate([p[key] for p in parts]) for key in parts[0]}
    else:
        joined = _passage_chunk(tr, t, 0, d, rng, block)

    a_minus = joined["a_minus"]
    if d and gaussian_correction and n:
        big_l = joined["passage_time"]
        g = rng.standard_normal((n, d)) * np.sqrt(tr.gauss_rate * big_l)[:, None]
        a_minus = a_minus + _clip_gaussian(g, tr.drift * big_l)

    batch = PassageBatch(
        level=t,
        passage_time=joined["passage_time"],
        undershoot=joined["undershoot"],
        overshoot=joined["overshoot"],
        creeping=joined["creeping"],
        n_jumps=joined["n_jumps"],
        a_minus=a_minus if d else None,
        direction=joined["direction"] if d else None,
    )
    logger.debug(
        "passage batch: alpha=%g t=%g eps=%g n=%d creeping=%.4f",
        alpha, t, eps, n, batch.creeping_rate,
    )
    return batch


def sample_passage_batch(
    spec: BernsteinSpec, t: float, eps: float, n: int, rng: np.random.Generator
) -> PassageBatch:
    """Vectorised :func:`sample_passage` for ``n`` independent samples.

    For the Markov spec ``L(t) = t`` and no subordinator is simulated.
    """
    if spec.is_markov:
        if not t > 0:
            raise ValueError(f"level t must be positive, got {t}")
        full = np.full(n, float(t))
        return PassageBatch(
            level=t,
            passage_time=full,
            undershoot=full.copy(),
            overshoot=full.copy(),
            creeping=np.zeros(n, dtype=bool),
            n_jumps=np.zeros(n, dtype=np.int64),
        )
    return _passage_batch(spec.alpha, t, eps, n, rng, d=0, gaussian_correction=False)


def sample_passage(
    spec: BernsteinSpec, t: float, eps: float, rng: np.random.Generator
) -> PassageSample:
    """First passage of the subordinator over level ``t``.

    Args:
        spec: Driving subordinator.
        t: Level, > 0.
        eps: Absolute truncation threshold, ``0 < eps < t``.
        rng: Generator.

    Raises:
        ValueError: If ``eps >= t`` or a parameter is out of domain.
    """
    b = sample_passage_batch(spec, t, eps, 1, rng)
    return PassageSample(
        level=float(t),
        passage_time=float(b.passage_time[0]),
        undershoot=float(b.undershoot[0]),
        overshoot=float(b.overshoot[0]),
        creeping=bool(b.creeping[0]),
    )


def sample_coupled_passage_batch(
    alpha: float,
    d: int,
    t: float,
    eps: float,
    n: int,
    rng: np.random.Generator,
    gaussian_correction: bool = True,
) -> PassageBatch:
    """Vectorised :func:`sample_coupled_passage`; ``a_minus`` and ``direction`` are ``(n, d)``."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return _passage_batch(alpha, t, eps, n, rng, d=d, gaussian_correction=gaussian_correction)


def sample_coupled_passage(
    alpha: float,
    d: int,
    t: float,
    eps: float,
    gaussian_correction: bool,
    rng: np.random.Generator,
) -> CoupledPassageSample:
    """Passage of the coupled process ``(A, sigma)`` over level ``t``.

    Each retained jump of size ``s`` moves ``A`` by ``s v`` with ``v``
    uniform on the sphere; ``a_minus`` sums the displacements strictly before
    the passage.
    """
    b = sample_coupled_passage_batch(alpha, d, t, eps, 1, rng, gaussian_correction)
    return CoupledPassageSample(
        level=float(t),
        passage_time=float(b.passage_time[0]),
        undershoot=float(b.undershoot[0]),
        overshoot=float(b.overshoot[0]),
        creeping=bool(b.creeping[0]),
        a_minus=b.a_minus[0].copy(),
        direction=b.direction[0].copy(),
        n_jumps=int(b.n_jumps[0]),
    )


def sample_coupled_at(
    alpha: float,
    d: int,
    s: float,
    eps: float,
    n: int,
    rng: np.random.Generator,
    gaussian_correction: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``(A(s), sigma(s))`` at a fixed operational time ``s``.

    Returns:
        tuple: ``A`` of shape ``(n, d)`` and ``sigma`` of shape ``(n,)``.
    """
    _check_stable_alpha(alpha)
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    tr = _Truncation.build(alpha, eps, d)
    mean = tr.rate * s
    rows = max(1, int(BLOCK_ELEMENTS / max(mean * (d + 2), 1.0)))

    a_parts, sig_parts = [], []
    for size in iter_batches(n, rows):
        counts = rng.poisson(mean, size)
        total = int(counts.sum())
        owner = np.repeat(np.arange(size), counts)
        sizes = tr.jump_sizes(rng, total)
        dirs = sample_direction(d, total, rng)
        sigma = tr.drift * s + np.bincount(owner, weights=sizes, minlength=size)
        a = np.column_stack(
            [np.bincount(owner, weights=sizes * dirs[:, j], minlength=size) for j in range(d)]
        )
        if gaussian_correction:
            g = rng.standard_normal((size, d)) * math.sqrt(tr.gauss_rate * s)
            a = a + _clip_gaussian(g, np.full(size, tr.drift * s))
        a_parts.append(a)
        sig_parts.append(sigma)

    if not a_parts:
        return np.empty((0, d)), np.empty(0)
    return np.concatenate(a_parts), np.concatenate(sig_parts)
