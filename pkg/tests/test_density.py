import math

import numpy as np
import pytest
from scipy import integrate

from mfbs.density import (
    DensityParams,
    effective_variance,
    fpe_residual,
    mean_price,
    pdf,
    quadrature_moments,
    variance_price,
)
from mfbs.errors import DomainError
from mfbs.hurst import ConstantHurst, SinusoidalHurst, TabulatedHurst


def _random_configs(rng, n):
    for i in range(n):
        kind = i % 3
        if kind == 0:
            h = ConstantHurst(rng.uniform(0.1, 0.9))
        elif kind == 1:
            c = rng.uniform(0.3, 0.7)
            h = SinusoidalHurst(rng.uniform(-0.2, 0.2), rng.uniform(0, 6.28), c, rng.uniform(0.5, 10))
        else:
            h = TabulatedHurst((0.0, 1.0, 3.0), tuple(rng.uniform(0.2, 0.8, 3)))
        yield DensityParams(rng.normal(0, 1), rng.uniform(0.05, 0.8), h), rng.uniform(0.05, 3.0)


class TestPdf:
    def test_brownian_value(self):
        # N(-0.02, 0.04) density at 0.1, mpmath
        p = DensityParams(0.0, 0.2, ConstantHurst(0.5))
        assert pdf(p, 0.1, 1.0) == pytest.approx(1.66612301445899818, rel=1e-13)

    def test_mode(self, sinusoid):
        p = DensityParams(0.3, 0.25, sinusoid)
        t = 0.7
        v = effective_variance(0.25, sinusoid, t)
        peak = pdf(p, 0.3 - v / 2, t)
        assert peak == pytest.approx(1 / math.sqrt(2 * math.pi * v), rel=1e-14)
        assert pdf(p, 0.3 - v / 2 + 1e-3, t) < peak
        assert pdf(p, 0.3 - v / 2 - 1e-3, t) < peak

    def test_normalization(self, rng):
        for p, t in _random_configs(rng, 50):
            sd = math.sqrt(effective_variance(p.sigma, p.h, t))
            mass, _ = integrate.quad(lambda x: pdf(p, x, t), p.x0 - 12 * sd, p.x0 + 12 * sd,
                                     epsabs=1e-12, epsrel=1e-12, limit=200)
            assert mass == pytest.approx(1.0, abs=1e-8)

    def test_classical_variance(self):
        h = ConstantHurst(0.5)
        for t in (0.1, 1.0, 3.7):
            assert effective_variance(0.3, h, t) == pytest.approx(0.09 * t, rel=1e-15)

    @pytest.mark.parametrize("t", [0.0, -1.0])
    def test_nonpositive_time(self, sinusoid, t):
        with pytest.raises(DomainError):
            pdf(DensityParams(0.0, 0.2, sinusoid), 0.0, t)

    def test_sigma_positive(self, sinusoid):
        with pytest.raises(DomainError):
            DensityParams(0.0, 0.0, sinusoid)


class TestMoments:
    def test_mean_examples(self):
        assert mean_price(100, 0.0, 3.0) == 100
        assert mean_price(3970.99, 0.045013, 0.0) == 3970.99
        assert mean_price(100, 0.05, 2.0) == pytest.approx(110.517091807564762, rel=1e-14)

    def test_variance_examples(self):
        assert variance_price(5.0, 0.1, 0.2, ConstantHurst(0.7), 0.0) == 0.0
        assert variance_price(1, 0, 0.2, ConstantHurst(0.5), 1.0) == pytest.approx(
            0.0408107741923882268, rel=1e-13)
        assert variance_price(1, 0, 0.2, ConstantHurst(0.7), 4.0) == pytest.approx(
            0.321247254514651241, rel=1e-13)

    def test_variance_scales_with_spot_squared(self, sinusoid):
        a = variance_price(1.0, 0.03, 0.2, sinusoid, 0.8)
        b = variance_price(50.0, 0.03, 0.2, sinusoid, 0.8)
        assert b == pytest.approx(2500 * a, rel=1e-14)

    def test_quadrature_matches_closed_form(self, rng):
        for p, t in _random_configs(rng, 12):
            mu = rng.uniform(-0.1, 0.2)
            S0 = math.exp(p.x0)
            mass, m1, var = quadrature_moments(p, mu, t)
            assert mass == pytest.approx(1.0, abs=1e-8)
            assert m1 == pytest.approx(mean_price(S0, mu, t), rel=1e-6)
            assert var == pytest.approx(variance_price(S0, mu, p.sigma, p.h, t), rel=1e-6)


class TestFokkerPlanck:
    def test_heat_equation(self):
        p = DensityParams(0.0, 0.2, ConstantHurst(0.5))
        assert abs(fpe_residual(p, 0.0, 1.0, 1e-4, 1e-4)) < 1e-5

    def test_sinusoid_grid(self, sinusoid):
        p = DensityParams(0.0, 0.2, sinusoid)
        x, t = np.meshgrid([-0.3, 0.0, 0.2], [0.5, 1.0, 1.7])
        assert np.abs(fpe_residual(p, x, t, 1e-4, 1e-4)).max() < 1e-4

    def test_second_order(self, sinusoid):
        p = DensityParams(0.0, 0.2, sinusoid)
        x, t = np.meshgrid([-0.3, 0.0, 0.2], [0.5, 1.0, 1.7])
        r1 = np.abs(fpe_residual(p, x, t, 1e-2, 1e-2)).max()
        r2 = np.abs(fpe_residual(p, x, t, 5e-3, 5e-3)).max()
        r3 = np.abs(fpe_residual(p, x, t, 2.5e-3, 2.5e-3)).max()
        assert 3.5 < r1 / r2 < 4.5
        assert 3.5 < r2 / r3 < 4.5

    def test_wrong_density_is_detected(self, sinusoid, monkeypatch):
        # a density without the drift shift must not satisfy the equation
        import mfbs.density as dens

        real = dens.pdf

        def unshifted(p, x, t):
            v = dens.effective_variance(p.sigma, p.h, t)
            return real(p, np.asarray(x) - 0.5 * v, t)

        monkeypatch.setattr(dens, "pdf", unshifted)
        p = DensityParams(0.0, 0.2, sinusoid)
        assert abs(dens.fpe_residual(p, 0.1, 1.0)) > 1e-2

    def test_needs_t_above_step(self, sinusoid):
        with pytest.raises(DomainError):
            fpe_residual(DensityParams(0.0, 0.2, sinusoid), 0.0, 1e-5, 1e-4, 1e-4)
