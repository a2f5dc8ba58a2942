"""Multifractional Brownian motion: covariance kernel and exact path sampling.

The covariance of a standard mBm with Hurst function h is

    R(t, s) = D(h(t), h(s)) * (t**q + s**q - |t - s|**q),   q = h(t) + h(s)

with D(h, h) = 1/2 so that R(t, t) = t**(2 h(t)).  Paths are drawn exactly by
a Cholesky factor of the covariance matrix on the requested grid.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from .errors import DomainError, IllConditionedKernelError
from .hurst import HurstFunction, evaluate

__all__ = [
    "CovarianceKernel",
    "PathGrid",
    "d_factor",
    "covariance",
    "covariance_matrix",
    "marginal_std",
    "cholesky_factor",
    "sample_paths",
    "block_generator",
    "map_blocks",
    "BLOCK_SIZE",
    "JITTER_LEVELS",
]

#: paths per RNG block; results never depend on how blocks map to workers
BLOCK_SIZE = 8192
JITTER_LEVELS = (0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8)


def d_factor(h1, h2):
    """Normalization D(h1, h2) of the mBm covariance; equals 1/2 on the diagonal."""
    a = np.asarray(h1, dtype=float)
    b = np.asarray(h2, dtype=float)
    if np.any((a <= 0) | (a >= 1) | (b <= 0) | (b >= 1)):
        raise DomainError("Hurst arguments of D must lie in (0, 1)")
    s = a + b
    num = np.sqrt(gamma(2 * a + 1) * gamma(2 * b + 1) * np.sin(np.pi * a) * np.sin(np.pi * b))
    out = num / (2.0 * gamma(s + 1) * np.sin(0.5 * np.pi * s))
    out = np.where(a == b, 0.5, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CovarianceKernel:
    h: HurstFunction

    def __call__(self, t, s):
        return covariance(self, t, s)


@dataclass(frozen=True)
class PathGrid:
    """Strictly increasing positive sample times with a path count and seed."""

    times: tuple[float, ...]
    n_paths: int
    seed: int = 0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise DomainError("path grid needs at least one time point")
        if t[0] <= 0 or np.any(np.diff(t) <= 0):
            raise DomainError("grid times must be > 0 and strictly increasing")
        if self.n_paths < 0:
            raise DomainError("n_paths must be >= 0")
        object.__setattr__(self, "times", tuple(t.tolist()))


def covariance(k: CovarianceKernel, t, s):
    """E[W_h(t) W_h(s)]; broadcasts over array arguments."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(t < 0) or np.any(s < 0):
        raise DomainError("covariance times must be >= 0")
    # canonical argument order makes R(t, s) == R(s, t) bit for bit
    lo, hi = np.minimum(t, s), np.maximum(t, s)
    h_lo = np.asarray(evaluate(k.h, lo))
    h_hi = np.asarray(evaluate(k.h, hi))
    q = h_lo + h_hi
    body = lo**q + hi**q - (hi - lo) ** q
    out = d_factor(h_lo, h_hi) * body
    out = np.where(lo == hi, lo ** (2.0 * h_lo), out)
    out = np.where(lo == 0.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def covariance_matrix(k: CovarianceKernel, times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    return covariance(k, t[:, None], t[None, :])


def marginal_std(k: CovarianceKernel, t):
    """Standard deviation t**h(t) of W_h(t)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("time must be >= 0")
    out = t_arr ** np.asarray(evaluate(k.h, t_arr))
    return float(out) if out.ndim == 0 else out


def cholesky_factor(k: CovarianceKernel, times) -> np.ndarray:
    """Lower Cholesky factor of the grid covariance, escalating diagonal jitter.

    Jitter is scaled by the mean diagonal variance and never exceeds 1e-8 of
    it; past that an :class:`IllConditionedKernelError` is raised.
    """
    times = np.asarray(times, dtype=float)
    cov = covariance_matrix(k, times)
    scale = float(np.mean(np.diag(cov))) or 1.0
    eye = np.eye(len(times))
    for jitter in JITTER_LEVELS:
        try:
            return np.linalg.cholesky(cov + jitter * scale * eye)
        except np.linalg.LinAlgError:
            continue
    min_eig = float(np.linalg.eigvalsh(cov).min())
    raise IllConditionedKernelError(times.tolist(), min_eig, JITTER_LEVELS[-1])


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Independent stream for one block of paths, derived from (seed, block)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(block)]))


def _blocks(n_paths: int):
    return [(b, b * BLOCK_SIZE, min(n_paths, (b + 1) * BLOCK_SIZE))
            for b in range(math.ceil(n_paths / BLOCK_SIZE))]


def map_blocks(fn, n_paths: int, threads: int = 1):
    """Apply ``fn(block_index, n)`` to every block, in block order."""
    blocks = _blocks(n_paths)
    if threads <= 1 or len(blocks) <= 1:
        return [fn(b, hi - lo) for b, lo, hi in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda blk: fn(blk[0], blk[2] - blk[1]), blocks))


def sample_paths(k: CovarianceKernel, grid: PathGrid, threads: int = 1) -> np.ndarray:
    """Draw ``grid.n_paths`` mBm paths on ``grid.times``.

    Returns an array of shape ``(n_paths, len(times))``.  Output is a function
    of the seed alone; ``threads`` only changes wall-clock time.
    """
    n_times = len(grid.times)
    if grid.n_paths == 0:
        return np.empty((0, n_times))
    chol = cholesky_factor(k, grid.times)

    def draw(block, n):
        z = block_generator(grid.seed, block).standard_normal((n, n_times))
        return z @ chol.T

    return np.concatenate(map_blocks(draw, grid.n_paths, threads), axis=0)
