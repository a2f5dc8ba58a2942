"""European call prices under multifractional, fractional and classical Black-Scholes.

The Hurst function enters the premium only through the effective variance
v = sigma**2 T**(2 h(T)):

    C = S0 N(d1) - K exp(-r T) N(d2),
    d1 = (ln(S0/K) + r T + v/2) / sqrt(v),   d2 = d1 - sqrt(v).

Prices are actuarial (physical-measure) premiums, so the asset drift mu
cancels and is not an input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DomainError
from .hurst import HurstFunction, time_change

__all__ = [
    "PricingInput",
    "PricingResult",
    "call_price",
    "call_prices",
    "d_values",
    "classical_bs_price",
    "fractional_bs_price",
    "MIN_MATURITY",
]

#: maturities below this (years) are priced at intrinsic value
MIN_MATURITY = 1e-12


@dataclass(frozen=True)
class PricingInput:
    S0: float
    K: float
    r: float
    sigma: float
    T: float
    h: HurstFunction

    def __post_init__(self):
        _validate(self.S0, self.K, self.sigma, self.T)


@dataclass(frozen=True)
class PricingResult:
    price: float
    d1: float
    d2: float
    effective_variance: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "price": self.price,
            "d1": self.d1,
            "d2": self.d2,
            "effective_variance": self.effective_variance,
            "degenerate_flag": self.degenerate,
        }


def _validate(S0, K, sigma, T):
    if not (S0 > 0 and K > 0 and sigma > 0 and T >= 0):
        raise DomainError(f"need S0 > 0, K > 0, sigma > 0, T >= 0 (got S0={S0}, K={K}, sigma={sigma}, T={T})")


def _gaussian_call(S0, K, r, T, v):
    sd = np.sqrt(v)
    d1 = (np.log(S0 / K) + r * T + 0.5 * v) / sd
    d2 = d1 - sd
    disc_k = K * np.exp(-r * T)
    price = S0 * ndtr(d1) - disc_k * ndtr(d2)
    # cancellation can leave the result an ulp outside the no-arbitrage band
    price = np.clip(price, np.maximum(S0 - disc_k, 0.0), S0)
    return price, d1, d2


def d_values(inp: PricingInput) -> tuple[float, float]:
    if inp.T <= 0:
        raise DomainError("d1, d2 need T > 0")
    v = inp.sigma**2 * time_change(inp.h, inp.T)
    sd = math.sqrt(v)
    d1 = (math.log(inp.S0 / inp.K) + inp.r * inp.T + 0.5 * v) / sd
    return d1, d1 - sd


def call_price(inp: PricingInput) -> PricingResult:
    """Premium of a European call with Hurst function ``inp.h``.

    For T below :data:`MIN_MATURITY` the intrinsic value max(S0 - K, 0) is
    returned with ``degenerate=True`` and infinite/NaN d-values.
    """
    if inp.T < MIN_MATURITY:
        d = math.copysign(math.inf, inp.S0 - inp.K) if inp.S0 != inp.K else math.nan
        return PricingResult(max(inp.S0 - inp.K, 0.0), d, d, 0.0, degenerate=True)
    v = inp.sigma**2 * time_change(inp.h, inp.T)
    price, d1, d2 = _gaussian_call(inp.S0, inp.K, inp.r, inp.T, v)
    return PricingResult(float(price), float(d1), float(d2), float(v))


def call_prices(S0: float, K, r: float, sigma: float, T, h: HurstFunction) -> np.ndarray:
    """Vectorized :func:`call_price` over arrays of strikes and maturities (T > 0)."""
    K = np.asarray(K, dtype=float)
    T = np.asarray(T, dtype=float)
    if np.any(K <= 0) or np.any(T < MIN_MATURITY) or not (S0 > 0 and sigma > 0):
        raise DomainError("call_prices needs S0, K, sigma > 0 and T >= MIN_MATURITY")
    v = sigma * sigma * np.asarray(time_change(h, T))
    return _gaussian_call(S0, K, r, T, v)[0]


def _norm_cdf(x: float) -> float:
    # erfc keeps full relative accuracy in the lower tail
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def classical_bs_price(S0: float, K: float, r: float, sigma: float, T: float) -> float:
    """Textbook Black-Scholes call, written independently of :func:`call_price`."""
    _validate(S0, K, sigma, T)
    if T < MIN_MATURITY:
        return max(S0 - K, 0.0)
    vol = sigma * math.sqrt(T)
    d1 = (math.log(S0 / K) + (r + 0.5 * sigma * sigma) * T) / vol
    d2 = d1 - vol
    return S0 * _norm_cdf(d1) - K * math.exp(-r * T) * _norm_cdf(d2)


def fractional_bs_price(S0: float, K: float, r: float, sigma: float, H: float, T: float) -> float:
    """Fractional Black-Scholes call with constant Hurst exponent H."""
    if not 0 < H < 1:
        raise DomainError(f"H must lie in (0, 1), got {H}")
    _validate(S0, K, sigma, T)
    if T < MIN_MATURITY:
        return max(S0 - K, 0.0)
    return float(_gaussian_call(S0, K, r, T, sigma**2 * T ** (2.0 * H))[0])
