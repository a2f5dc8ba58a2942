"""Transition density of the detrended log-price x_t = ln S_t - mu t.

Under the time change v(t) = sigma**2 * t**(2 h(t)) the density is Gaussian
with mean x0 - v/2 and variance v.  :func:`fpe_residual` checks numerically
that it solves

    dP/dt = sigma**2 theta(t) (dP/dx + d2P/dx2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError
from .hurst import HurstFunction, drift_factor, time_change

__all__ = [
    "DensityParams",
    "effective_variance",
    "pdf",
    "mean_price",
    "variance_price",
    "quadrature_moments",
    "fpe_residual",
]


@dataclass(frozen=True)
class DensityParams:
    x0: float
    sigma: float
    h: HurstFunction

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")


def effective_variance(sigma: float, h: HurstFunction, t):
    """sigma**2 * t**(2 h(t)), the log-price variance at time t."""
    return sigma * sigma * time_change(h, t)


def pdf(p: DensityParams, x, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise DomainError("pdf needs t > 0; the t = 0 law is a point mass at x0")
    v = effective_variance(p.sigma, p.h, t_arr)
    z = np.asarray(x, dtype=float) - p.x0 + 0.5 * v
    out = np.exp(-z * z / (2.0 * v)) / np.sqrt(2.0 * np.pi * v)
    return float(out) if out.ndim == 0 else out


def mean_price(S0: float, mu: float, T: float) -> float:
    if S0 <= 0 or T < 0:
        raise DomainError("need S0 > 0 and T >= 0")
    return S0 * math.exp(mu * T)


def variance_price(S0: float, mu: float, sigma: float, h: HurstFunction, T: float) -> float:
    """Variance of S_T: S0**2 exp(2 mu T) (exp(sigma**2 T**(2h(T))) - 1)."""
    if S0 <= 0 or T < 0 or sigma <= 0:
        raise DomainError("need S0 > 0, T >= 0 and sigma > 0")
    return S0 * S0 * math.exp(2.0 * mu * T) * math.expm1(effective_variance(sigma, h, T))


def quadrature_moments(p: DensityParams, mu: float, T: float, width: float = 12.0):
    """Mean and variance of S_T = exp(x_T + mu T) by adaptive quadrature of :func:`pdf`.

    Integrates over +-``width`` standard deviations around the density mean.
    Returns ``(mass, mean, variance)``.
    """
    v = effective_variance(p.sigma, p.h, T)
    sd = math.sqrt(v)
    centre = p.x0 - 0.5 * v
    lo, hi = centre - width * sd, centre + width * sd
    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=200)
    mass = integrate.quad(lambda x: pdf(p, x, T), lo, hi, **opts)[0]
    m1 = integrate.quad(lambda x: math.exp(x + mu * T) * pdf(p, x, T), lo, hi, **opts)[0]
    m2 = integrate.quad(lambda x: math.exp(2 * (x + mu * T)) * pdf(p, x, T), lo, hi, **opts)[0]
    return mass, m1, m2 - m1 * m1


def fpe_residual(p: DensityParams, x, t, dx: float = 1e-4, dt: float = 1e-4):
    """dP/dt - sigma**2 theta(t) (dP/dx + d2P/dx2) by central differences.

    Tends to zero as O(dx**2 + dt**2) when the closed-form density solves the
    Fokker-Planck equation.
    """
    t_arr = np.asarray(t, dtype=float)
    if dx <= 0 or dt <= 0:
        raise DomainError("finite-difference steps must be positive")
    if np.any(t_arr <= dt):
        raise DomainError("need t > dt")
    x = np.asarray(x, dtype=float)
    p_t = (pdf(p, x, t_arr + dt) - pdf(p, x, t_arr - dt)) / (2.0 * dt)
    up, mid, down = pdf(p, x + dx, t_arr), pdf(p, x, t_arr), pdf(p, x - dx, t_arr)
    p_x = (up - down) / (2.0 * dx)
    p_xx = (up - 2.0 * mid + down) / (dx * dx)
    out = p_t - p.sigma**2 * drift_factor(p.h, t_arr) * (p_x + p_xx)
    return float(out) if np.ndim(out) == 0 else out
