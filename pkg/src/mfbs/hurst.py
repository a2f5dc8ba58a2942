"""Time-deterministic Hurst functions h(t) and the functionals built on them.

Three variants are provided:

* :class:`ConstantHurst` -- h(t) = H (fractional / classical Brownian case)
* :class:`SinusoidalHurst` -- h(t) = A cos(2 pi f t + B) + C
* :class:`TabulatedHurst` -- piecewise-linear through (t_i, h_i) knots

The module-level functions :func:`evaluate`, :func:`derivative`,
:func:`time_change` and :func:`drift_factor` accept a scalar or an array of
times and return the same shape (a ``float`` for scalar input).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, ParseError, SingularPointError, EmptyInputError

__all__ = [
    "HurstFunction",
    "ConstantHurst",
    "SinusoidalHurst",
    "TabulatedHurst",
    "THIRTY_DAY_FREQUENCY",
    "evaluate",
    "derivative",
    "time_change",
    "drift_factor",
    "load_table",
]

#: cycles per year of a 30-trading-day period under the 252-day convention
THIRTY_DAY_FREQUENCY = 252.0 / 30.0


def _as_times(t):
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"time must be >= 0, got {t!r}")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


class HurstFunction:
    """Base class. Subclasses implement ``_value`` and ``_slope`` on arrays."""

    lower: float
    upper: float

    def _value(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _slope(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _range(self) -> tuple[float, float]:
        raise NotImplementedError

    def _check_bounds(self):
        lo, hi = self._range()
        lower = lo if self.lower is None else float(self.lower)
        upper = hi if self.upper is None else float(self.upper)
        if not (0.0 < lower <= upper < 1.0):
            raise DomainError(f"bounds must satisfy 0 < l <= m < 1, got [{lower}, {upper}]")
        if lo < lower or hi > upper:
            raise DomainError(
                f"h(t) ranges over [{lo:.6g}, {hi:.6g}], outside bounds [{lower}, {upper}]"
            )
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def __call__(self, t):
        return evaluate(self, t)


@dataclass(frozen=True)
class ConstantHurst(HurstFunction):
    H: float
    lower: float | None = None
    upper: float | None = None

    def __post_init__(self):
        if not (0.0 < self.H < 1.0):
            raise DomainError(f"H must lie in (0, 1), got {self.H}")
        self._check_bounds()

    def _range(self):
        return self.H, self.H

    def _value(self, t):
        return np.full_like(t, self.H)

    def _slope(self, t):
        return np.zeros_like(t)


@dataclass(frozen=True)
class SinusoidalHurst(HurstFunction):
    """h(t) = amplitude * cos(2 pi frequency t + phase) + level.

    ``frequency`` is in cycles per year and defaults to a 30-trading-day
    period.
    """

    amplitude: float
    phase: float
    level: float
    frequency: float = THIRTY_DAY_FREQUENCY
    lower: float | None = None
    upper: float | None = None

    def __post_init__(self):
        if not all(map(math.isfinite, (self.amplitude, self.phase, self.level, self.frequency))):
            raise DomainError("sinusoid parameters must be finite")
        self._check_bounds()

    def _range(self):
        a = abs(self.amplitude)
        return self.level - a, self.level + a

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.frequency

    def _value(self, t):
        return self.amplitude * np.cos(self.omega * t + self.phase) + self.level

    def _slope(self, t):
        return -self.omega * self.amplitude * np.sin(self.omega * t + self.phase)


@dataclass(frozen=True)
class TabulatedHurst(HurstFunction):
    """Linear interpolation through knots, flat outside the knot range.

    The derivative is only defined strictly inside the knot range: between
    knots it is the segment slope, and at an interior knot the central
    difference over its two neighbours.
    """

    times: tuple[float, ...]
    values: tuple[float, ...]
    lower: float | None = None
    upper: float | None = None
    _t: np.ndarray = field(init=False, repr=False, compare=False)
    _h: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        h = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != h.shape or t.size < 2:
            raise DomainError("need at least two (t, h) knots of matching length")
        if np.any(t < 0) or np.any(np.diff(t) <= 0):
            raise DomainError("knot times must be non-negative and strictly increasing")
        if not np.all(np.isfinite(h)):
            raise DomainError("knot values must be finite")
        object.__setattr__(self, "times", tuple(t.tolist()))
        object.__setattr__(self, "values", tuple(h.tolist()))
        object.__setattr__(self, "_t", t)
        object.__setattr__(self, "_h", h)
        self._check_bounds()

    def _range(self):
        return float(self._h.min()), float(self._h.max())

    def _value(self, t):
        return np.interp(t, self._t, self._h)

    def _slope(self, t):
        knots = self._t
        if np.any(t <= knots[0]) or np.any(t >= knots[-1]):
            raise DomainError(
                f"tabulated derivative needs t strictly inside [{knots[0]}, {knots[-1]}]"
            )
        seg = np.diff(self._h) / np.diff(knots)
        idx = np.searchsorted(knots, t, side="right") - 1
        out = seg[idx]
        at_knot = knots[idx] == t
        if np.any(at_knot):
            i = idx[at_knot]
            out = out.copy()
            out[at_knot] = (self._h[i + 1] - self._h[i - 1]) / (knots[i + 1] - knots[i - 1])
        return out


def evaluate(h: HurstFunction, t):
    """Return h(t); raises :class:`DomainError` for negative t."""
    arr = _as_times(t)
    return _out(h._value(arr), t)


def derivative(h: HurstFunction, t):
    """Return h'(t) in 1/years."""
    arr = _as_times(t)
    return _out(np.asarray(h._slope(np.atleast_1d(arr))).reshape(arr.shape), t)


def time_change(h: HurstFunction, t):
    """Return tau(t) = t**(2 h(t)), the sigma-free variance clock."""
    arr = _as_times(t)
    return _out(arr ** (2.0 * h._value(arr)), t)


def drift_factor(h: HurstFunction, t):
    """Return theta(t) = t**(2h-1) * (h'(t) t ln t + h(t)).

    theta is half the derivative of :func:`time_change`.  At t = 0 the
    t ln t term is taken at its limit 0, so theta(0) is 0 when h(0) > 1/2,
    h(0) when h(0) = 1/2, and diverges (``SingularPointError``) when
    h(0) < 1/2.
    """
    arr = np.atleast_1d(_as_times(t))
    hv = h._value(arr)
    out = np.empty_like(arr)
    pos = arr > 0
    if np.any(pos):
        tp = arr[pos]
        hp = hv[pos]
        slope = np.asarray(h._slope(tp))
        out[pos] = tp ** (2.0 * hp - 1.0) * (slope * tp * np.log(tp) + hp)
    zero = ~pos
    if np.any(zero):
        h0 = hv[zero]
        if np.any(h0 < 0.5):
            raise SingularPointError(f"drift factor diverges at t = 0 since h(0) = {h0.min()} < 1/2")
        out[zero] = np.where(h0 == 0.5, h0, 0.0)
    return _out(out.reshape(np.shape(t)), t)


def load_table(path) -> TabulatedHurst:
    """Read a two-column CSV ``t_years,h`` (header optional) into a TabulatedHurst."""
    path = Path(path)
    times, values = [], []
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1 and row[0].strip().lower() in ("t_years", "t"):
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 columns, got {len(row)}", line=lineno)
            try:
                times.append(float(row[0]))
                values.append(float(row[1]))
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
    if not times:
        raise EmptyInputError(f"{path} contains no Hurst knots")
    return TabulatedHurst(tuple(times), tuple(values))
