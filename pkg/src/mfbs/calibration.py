"""Least-squares calibration of the three nested call-pricing models.

Models, from richest to simplest:

* ``MultifractionalSpec`` -- sinusoidal h(t) = A cos(2 pi f t + B) + C, plus sigma
* ``FractionalSpec`` -- constant H, plus sigma
* ``ClassicalSpec`` -- sigma only (H = 1/2)

Each is fitted by Nelder-Mead on an unconstrained reparametrization of its
box (sigmoid maps), from a warm start plus Sobol quasi-random starts.
Because each model nests the next, :func:`compare_models` warm-starts every
model at the optimum of the one below it, which makes the MSE ordering
multifractional <= fractional <= classical hold by construction.
"""

from __future__ import annotations

import functools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logit
from scipy.stats import qmc

from .errors import CalibrationError, DomainError
from .hurst import THIRTY_DAY_FREQUENCY, ConstantHurst, HurstFunction, SinusoidalHurst
from .pricer import call_prices

log = logging.getLogger(__name__)

__all__ = [
    "DAYS_PER_YEAR",
    "OptionQuote",
    "QuoteSet",
    "ModelSpec",
    "MultifractionalSpec",
    "FractionalSpec",
    "ClassicalSpec",
    "CalibrationConfig",
    "CalibrationResult",
    "MODEL_KINDS",
    "objective",
    "calibrate",
    "compare_models",
    "generate_synthetic_quotes",
]

DAYS_PER_YEAR = 252


# --------------------------------------------------------------------- quotes

@dataclass(frozen=True)
class OptionQuote:
    maturity_days: int
    strike: float
    mid_price: float

    def __post_init__(self):
        if int(self.maturity_days) != self.maturity_days or self.maturity_days <= 0:
            raise DomainError(f"maturity_days must be a positive integer, got {self.maturity_days}")
        if not self.strike > 0:
            raise DomainError(f"strike must be > 0, got {self.strike}")
        if not self.mid_price > 0:
            raise DomainError(f"mid_price must be > 0, got {self.mid_price}")
        object.__setattr__(self, "maturity_days", int(self.maturity_days))

    @property
    def T(self) -> float:
        return self.maturity_days / DAYS_PER_YEAR


@dataclass(frozen=True)
class QuoteSet:
    """Option quotes sharing one spot and one risk-free rate, sorted by maturity."""

    quotes: tuple[OptionQuote, ...]
    spot: float
    rate: float

    def __post_init__(self):
        if not self.quotes:
            raise DomainError("quote set is empty")
        if not self.spot > 0:
            raise DomainError(f"spot must be > 0, got {self.spot}")
        ordered = tuple(sorted(self.quotes, key=lambda q: (q.maturity_days, q.strike)))
        keys = [(q.maturity_days, q.strike) for q in ordered]
        if len(set(keys)) != len(keys):
            raise DomainError("duplicate (maturity_days, strike) quotes")
        object.__setattr__(self, "quotes", ordered)

    def __len__(self):
        return len(self.quotes)

    @functools.cached_property
    def maturities(self) -> np.ndarray:
        return np.array([q.T for q in self.quotes])

    @functools.cached_property
    def strikes(self) -> np.ndarray:
        return np.array([q.strike for q in self.quotes])

    @functools.cached_property
    def mids(self) -> np.ndarray:
        return np.array([q.mid_price for q in self.quotes])


# --------------------------------------------------------------------- models

class ModelSpec:
    kind: str
    n_params: int
    sigma: float

    def hurst(self) -> HurstFunction:
        raise NotImplementedError

    def prices(self, q: QuoteSet) -> np.ndarray:
        return call_prices(q.spot, q.strikes, q.rate, self.sigma, q.maturities, self.hurst())

    def params(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class MultifractionalSpec(ModelSpec):
    A: float
    B: float
    C: float
    sigma: float
    frequency: float = THIRTY_DAY_FREQUENCY
    lower: float = 0.05
    upper: float = 0.95
    kind = "multifractional"
    n_params = 4

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")
        self.hurst()

    def hurst(self) -> SinusoidalHurst:
        return SinusoidalHurst(self.A, self.B, self.C, self.frequency, self.lower, self.upper)

    def canonical(self) -> MultifractionalSpec:
        """Same h(t) with A >= 0 and B in [0, 2 pi)."""
        a, b = self.A, self.B
        if a < 0:
            a, b = -a, b + math.pi
        return replace(self, A=a, B=b % (2 * math.pi))

    def params(self):
        return {"A": self.A, "B": self.B, "C": self.C, "sigma": self.sigma, "frequency": self.frequency}


@dataclass(frozen=True)
class FractionalSpec(ModelSpec):
    H: float
    sigma: float
    kind = "fractional"
    n_params = 2

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")
        self.hurst()

    def hurst(self) -> ConstantHurst:
        return ConstantHurst(self.H)

    def params(self):
        return {"H": self.H, "sigma": self.sigma}


@dataclass(frozen=True)
class ClassicalSpec(ModelSpec):
    sigma: float
    kind = "classical"
    n_params = 1

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")

    def hurst(self) -> ConstantHurst:
        return ConstantHurst(0.5)

    def params(self):
        return {"sigma": self.sigma}


MODEL_KINDS = ("multifractional", "fractional", "classical")


@dataclass(frozen=True)
class CalibrationConfig:
    restarts: int = 16
    max_iter: int = 2000
    tol: float = 1e-10
    seed: int = 0
    frequency: float = THIRTY_DAY_FREQUENCY
    hurst_bounds: tuple[float, float] = (0.05, 0.95)
    sigma_bounds: tuple[float, float] = (1e-4, 5.0)
    polish_rounds: int = 3
    threads: int = field(default=1, compare=False)

    def __post_init__(self):
        lo, hi = self.hurst_bounds
        if not 0 < lo < hi < 1:
            raise DomainError(f"hurst_bounds must satisfy 0 < l < m < 1, got {self.hurst_bounds}")
        slo, shi = self.sigma_bounds
        if not 0 < slo < shi:
            raise DomainError(f"invalid sigma_bounds {self.sigma_bounds}")
        if self.restarts < 1 or self.max_iter < 1 or not self.tol > 0:
            raise DomainError("restarts and max_iter must be >= 1 and tol > 0")


@dataclass(frozen=True)
class CalibrationResult:
    spec: ModelSpec
    mse: float
    model_prices: tuple[float, ...]
    iterations: int
    restarts: int
    converged: bool

    @property
    def kind(self) -> str:
        return self.spec.kind

    def to_dict(self) -> dict:
        return {
            "model": self.kind,
            "params": self.spec.params(),
            "mse": self.mse,
            "model_prices": list(self.model_prices),
            "iterations": self.iterations,
            "restarts": self.restarts,
            "converged": self.converged,
        }


def objective(spec: ModelSpec, q: QuoteSet) -> float:
    """Mean squared difference between model prices and quoted mids."""
    resid = spec.prices(q) - q.mids
    return float(np.mean(resid * resid))


# ------------------------------------------------------- box reparametrization

def _to_unit(x, lo, hi):
    return logit(np.clip((x - lo) / (hi - lo), 1e-12, 1 - 1e-12))


def _from_unit(u, lo, hi):
    return lo + (hi - lo) * expit(u)


class _Transform:
    """Maps an unconstrained vector to a model spec and back."""

    def __init__(self, kind: str, cfg: CalibrationConfig):
        if kind not in MODEL_KINDS:
            raise DomainError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
        self.kind = kind
        self.cfg = cfg
        self.l, self.m = cfg.hurst_bounds
        self.s_lo, self.s_hi = cfg.sigma_bounds

    @property
    def dim(self) -> int:
        return {"multifractional": 4, "fractional": 2, "classical": 1}[self.kind]

    def spec(self, u) -> ModelSpec:
        sigma = float(_from_unit(u[-1], self.s_lo, self.s_hi))
        if self.kind == "classical":
            return ClassicalSpec(sigma)
        if self.kind == "fractional":
            return FractionalSpec(float(_from_unit(u[0], self.l, self.m)), sigma)
        c = float(_from_unit(u[2], self.l, self.m))
        a_max = min(c - self.l, self.m - c)
        a = a_max * math.tanh(u[0])
        return MultifractionalSpec(a, float(u[1]), c, sigma, self.cfg.frequency, self.l, self.m)

    def unit(self, spec: ModelSpec) -> np.ndarray:
        us = _to_unit(spec.sigma, self.s_lo, self.s_hi)
        if self.kind == "classical":
            return np.array([us])
        if self.kind == "fractional":
            return np.array([_to_unit(spec.H, self.l, self.m), us])
        c = spec.C
        a_max = min(c - self.l, self.m - c)
        ratio = np.clip(spec.A / a_max, -1 + 1e-12, 1 - 1e-12) if a_max > 0 else 0.0
        return np.array([math.atanh(ratio), spec.B, _to_unit(c, self.l, self.m), us])

    def box_points(self, n: int, seed: int) -> np.ndarray:
        """``n`` scrambled Sobol starts spread over the parameter box."""
        m = max(0, math.ceil(math.log2(n)))
        sob = qmc.Sobol(self.dim, scramble=True, seed=seed).random_base2(m)[:n]
        sob = np.clip(sob, 0.02, 0.98)
        pts = np.empty_like(sob)
        pts[:, -1] = _to_unit(np.exp(np.log(self.s_lo) + sob[:, -1] * np.log(self.s_hi / self.s_lo)),
                              self.s_lo, self.s_hi)
        if self.kind == "fractional":
            pts[:, 0] = logit(sob[:, 0])
        elif self.kind == "multifractional":
            pts[:, 0] = np.arctanh(2 * sob[:, 0] - 1)
            pts[:, 1] = 2 * math.pi * sob[:, 1]
            pts[:, 2] = logit(sob[:, 2])
        return pts


def _run_simplex(fun, x0, cfg: CalibrationConfig):
    res = minimize(fun, x0, method="Nelder-Mead",
                   options={"maxiter": cfg.max_iter, "maxfev": 2 * cfg.max_iter,
                            "fatol": cfg.tol, "xatol": 1e-9, "adaptive": len(x0) > 2})
    iters = res.nit
    for _ in range(cfg.polish_rounds):
        # a fresh simplex around the incumbent escapes premature collapse
        again = minimize(fun, res.x, method="Nelder-Mead",
                         options={"maxiter": cfg.max_iter, "maxfev": 2 * cfg.max_iter,
                                  "fatol": cfg.tol, "xatol": 1e-9, "adaptive": len(x0) > 2})
        iters += again.nit
        improved = res.fun - again.fun
        if again.fun <= res.fun:
            res = again
        if improved <= cfg.tol:
            break
    return res, iters


def calibrate(q: QuoteSet, model_kind: str, config: CalibrationConfig | None = None,
              warm_start: ModelSpec | None = None) -> CalibrationResult:
    """Fit ``model_kind`` to the quotes by minimizing the mean squared pricing error.

    Starts are the (optional) warm start followed by ``config.restarts`` Sobol
    points.  The best run wins; ties go to the earlier start.  If no start
    converges, :class:`CalibrationError` is raised with the best result
    attached as ``.best``.
    """
    cfg = config or CalibrationConfig()
    tr = _Transform(model_kind, cfg)

    def fun(u):
        return objective(tr.spec(u), q)

    starts = []
    if warm_start is not None:
        starts.append(tr.unit(warm_start))
    starts.extend(tr.box_points(cfg.restarts, cfg.seed))

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            runs = list(pool.map(lambda x0: _run_simplex(fun, x0, cfg), starts))
    else:
        runs = [_run_simplex(fun, x0, cfg) for x0 in starts]

    best_idx = min(range(len(runs)), key=lambda i: (runs[i][0].fun, i))
    best, _ = runs[best_idx]
    spec = tr.spec(best.x)
    mse = objective(spec, q)
    if warm_start is not None:
        warm_mse = objective(warm_start, q)
        if warm_mse < mse:
            spec, mse = _embed(warm_start, model_kind, cfg), warm_mse
    if isinstance(spec, MultifractionalSpec):
        spec = spec.canonical()
    result = CalibrationResult(
        spec=spec,
        mse=mse,
        model_prices=tuple(spec.prices(q).tolist()),
        iterations=sum(it for _, it in runs),
        restarts=len(runs),
        converged=any(r.success for r, _ in runs),
    )
    if not result.converged:
        raise CalibrationError(f"no {model_kind} restart converged (best mse {mse:.6g})", best=result)
    return result


def _embed(spec: ModelSpec, kind: str, cfg: CalibrationConfig) -> ModelSpec:
    """Express a nested-model spec in the parameters of ``kind``."""
    if spec.kind == kind:
        return spec
    if kind == "fractional":
        return FractionalSpec(0.5, spec.sigma)
    H = spec.H if isinstance(spec, FractionalSpec) else 0.5
    l, m = cfg.hurst_bounds
    return MultifractionalSpec(0.0, 0.0, H, spec.sigma, cfg.frequency, l, m)


def _rank_key(tol):
    def cmp(a, b):
        if abs(a.mse - b.mse) <= tol:
            return a.spec.n_params - b.spec.n_params
        return -1 if a.mse < b.mse else 1
    return functools.cmp_to_key(cmp)


def compare_models(q: QuoteSet, config: CalibrationConfig | None = None,
                   tie_tol: float = 1e-9) -> list[CalibrationResult]:
    """Calibrate classical, fractional and multifractional models; rank by MSE.

    The fractional fit is warm-started at the classical optimum and the
    multifractional fit at the fractional one.  A model whose calibration
    fails contributes its best-so-far (unconverged) result.  MSEs within
    ``tie_tol`` rank the model with fewer parameters first.
    """
    cfg = config or CalibrationConfig()
    results = []
    warm = None
    for kind in ("classical", "fractional", "multifractional"):
        if warm is not None:
            warm = _embed(warm, kind, cfg)
        try:
            res = calibrate(q, kind, cfg, warm_start=warm)
        except CalibrationError as exc:
            log.warning("%s", exc)
            if exc.best is None:
                continue
            res = exc.best
        results.append(res)
        warm = res.spec
    return sorted(results, key=_rank_key(tie_tol))


def generate_synthetic_quotes(spec: ModelSpec, S0: float, r: float, maturities_days,
                              noise_std: float = 0.0, strike: float | None = None,
                              seed: int = 0) -> QuoteSet:
    """Quotes priced by ``spec`` plus seeded Gaussian noise on the mid.

    ``strike`` defaults to the spot (at-the-money).  Noisy mids are floored at
    1e-8 to keep every quote valid.
    """
    if noise_std < 0:
        raise DomainError("noise_std must be >= 0")
    days = [int(d) for d in maturities_days]
    K = S0 if strike is None else strike
    T = np.array(days, dtype=float) / DAYS_PER_YEAR
    prices = call_prices(S0, np.full(len(days), K), r, spec.sigma, T, spec.hurst())
    if noise_std > 0:
        prices = prices + np.random.default_rng(seed).normal(0.0, noise_std, len(days))
    prices = np.maximum(prices, 1e-8)
    quotes = tuple(OptionQuote(d, K, float(p)) for d, p in zip(days, prices))
    return QuoteSet(quotes, S0, r)
