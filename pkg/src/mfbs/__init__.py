"""Multifractional Black-Scholes: Hurst functions, mBm simulation, closed-form
call pricing and least-squares calibration."""

__version__ = "0.1.0"

from .errors import (
    CalibrationError,
    DomainError,
    EmptyInputError,
    IllConditionedKernelError,
    NumericalError,
    ParseError,
    SingularPointError,
)
from .hurst import (
    THIRTY_DAY_FREQUENCY,
    ConstantHurst,
    HurstFunction,
    SinusoidalHurst,
    TabulatedHurst,
    derivative,
    drift_factor,
    evaluate,
    time_change,
)
from .pricer import (
    PricingInput,
    PricingResult,
    call_price,
    classical_bs_price,
    d_values,
    fractional_bs_price,
)
