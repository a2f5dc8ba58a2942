"""Monte Carlo oracle for the multifractional log-price dynamics.

Each path integrates

    dx_t = -sigma**2 theta(t) dt + sigma dW_h(t)

on the uniform grid t_k = k T / n_steps.  The mBm increments come from one
joint Cholesky draw over the whole grid, so their cross-step correlation is
exact; the drift integral uses step midpoints, which also keeps t = 0 (where
ln t is singular) out of the evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .hurst import HurstFunction, drift_factor
from .mbm import CovarianceKernel, block_generator, cholesky_factor, map_blocks

__all__ = [
    "MarketParams",
    "McConfig",
    "McEstimate",
    "simulate_terminal_log_price",
    "mc_call_price",
    "mc_moments",
]


@dataclass(frozen=True)
class MarketParams:
    """Spot, drift, volatility and risk-free rate, all annualized."""

    S0: float
    mu: float = 0.0
    r: float = 0.0
    sigma: float = 0.2

    def __post_init__(self):
        if not self.S0 > 0:
            raise DomainError(f"S0 must be > 0, got {self.S0}")
        if not self.sigma >= 0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class McConfig:
    market: MarketParams
    h: HurstFunction
    T: float
    n_paths: int = 100_000
    n_steps: int = 128
    seed: int = 0
    threads: int = field(default=1, compare=False)

    def __post_init__(self):
        if self.n_paths < 1 or self.n_steps < 1:
            raise DomainError("n_paths and n_steps must be >= 1")
        if not self.T > 0:
            raise DomainError(f"maturity must be > 0, got {self.T}")

    @property
    def times(self) -> np.ndarray:
        return self.T * np.arange(1, self.n_steps + 1) / self.n_steps


@dataclass(frozen=True)
class McEstimate:
    value: float
    standard_error: float
    n_paths: int

    def within(self, target: float, n_se: float = 4.0) -> bool:
        return abs(self.value - target) <= n_se * self.standard_error

    def to_dict(self) -> dict:
        return {"value": self.value, "standard_error": self.standard_error, "n_paths": self.n_paths}


def _mean_estimate(samples: np.ndarray) -> McEstimate:
    n = samples.size
    se = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return McEstimate(float(np.mean(samples)), se, n)


def simulate_terminal_log_price(cfg: McConfig) -> np.ndarray:
    """Sample ``cfg.n_paths`` values of x_T, starting from x0 = ln S0."""
    m = cfg.market
    times = cfg.times
    dt = cfg.T / cfg.n_steps
    mids = times - 0.5 * dt
    drift = m.sigma**2 * float(np.sum(drift_factor(cfg.h, mids))) * dt
    x0 = math.log(m.S0)
    chol = cholesky_factor(CovarianceKernel(cfg.h), times)

    def block(b, n):
        z = block_generator(cfg.seed, b).standard_normal((n, cfg.n_steps))
        w = z @ chol.T
        dw = np.diff(w, axis=1, prepend=0.0)
        return x0 - drift + m.sigma * np.sum(dw, axis=1)

    return np.concatenate(map_blocks(block, cfg.n_paths, cfg.threads))


def mc_call_price(cfg: McConfig, K: float, x_T: np.ndarray | None = None) -> McEstimate:
    """Actuarial premium E[(exp(-mu T) S_T - exp(-r T) K)^+].

    Since exp(-mu T) S_T = exp(x_T) the estimate does not depend on mu.
    ``x_T`` may be passed to reuse an earlier simulation of ``cfg``.
    """
    if K < 0:
        raise DomainError("strike must be >= 0")
    if x_T is None:
        x_T = simulate_terminal_log_price(cfg)
    payoff = np.maximum(np.exp(x_T) - math.exp(-cfg.market.r * cfg.T) * K, 0.0)
    return _mean_estimate(payoff)


def mc_moments(cfg: McConfig, x_T: np.ndarray | None = None) -> dict[str, McEstimate]:
    """Sample mean and variance of S_T = exp(x_T + mu T), with standard errors."""
    if x_T is None:
        x_T = simulate_terminal_log_price(cfg)
    s = np.exp(x_T + cfg.market.mu * cfg.T)
    n = s.size
    mean = _mean_estimate(s)
    centred = s - mean.value
    var = float(np.sum(centred**2) / (n - 1)) if n > 1 else math.nan
    m4 = float(np.mean(centred**4))
    var_se = math.sqrt(max(m4 - var * var, 0.0) / n) if n > 1 else math.nan
    return {"mean_S_T": mean, "var_S_T": McEstimate(var, var_se, n)}
