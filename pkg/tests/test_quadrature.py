import numpy as np
import pytest

from plasmonqe.quadrature import (
    ConvergenceError,
    DivergenceError,
    QuadConfig,
    integrate_finite,
    integrate_inverse_sqrt_endpoint,
    integrate_semi_infinite,
)


class TestFinite:
    def test_constant(self):
        res = integrate_finite(lambda x: np.ones_like(x), 0.0, 1.0)
        assert res.value == pytest.approx(1.0, abs=1e-12)
        assert res.evaluations > 0

    def test_complex_exponential(self):
        res = integrate_finite(lambda x: np.exp(1j * x), 0.0, np.pi)
        assert res.value == pytest.approx(2.0j, abs=1e-10)

    def test_cubic(self):
        res = integrate_finite(lambda x: x**3, 0.0, 1.0)
        assert res.value == pytest.approx(0.25, abs=1e-12)

    def test_rejects_bad_interval(self):
        with pytest.raises(ValueError):
            integrate_finite(lambda x: x, 1.0, 0.0)

    def test_convergence_error_carries_best_estimate(self):
        cfg = QuadConfig(rel_tol=1e-14, abs_tol=1e-300, max_subdivisions=3)
        with pytest.raises(ConvergenceError) as info:
            integrate_finite(lambda x: np.cos(50.0 * x) / np.sqrt(np.abs(x - 0.3) + 1e-9), 0.0, 1.0, cfg)
        best = info.value.best
        assert best.error_estimate > 0
        assert np.isfinite(best.value.real)


class TestInverseSqrtEndpoint:
    def test_s_cubed_weight(self):
        # Int_0^1 s^3/sqrt(1-s^2) ds = 2/3
        res = integrate_inverse_sqrt_endpoint(
            lambda s: s**3 / np.sqrt((1.0 - s) * (1.0 + s)), 0.0, 1.0, "upper"
        )
        assert res.value == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_arcsine(self):
        res = integrate_inverse_sqrt_endpoint(
            lambda s: 1.0 / np.sqrt((1.0 - s) * (1.0 + s)), 0.0, 1.0, "upper"
        )
        assert res.value == pytest.approx(np.pi / 2.0, abs=1e-10)

    def test_linear_weight(self):
        res = integrate_inverse_sqrt_endpoint(
            lambda s: s / np.sqrt((1.0 - s) * (1.0 + s)), 0.0, 1.0, "upper"
        )
        assert res.value == pytest.approx(1.0, abs=1e-12)

    def test_lower_end(self):
        # Int_1^2 1/sqrt(s - 1) ds = 2
        res = integrate_inverse_sqrt_endpoint(
            lambda s: 1.0 / np.sqrt(s - 1.0), 1.0, 2.0, "lower"
        )
        assert res.value == pytest.approx(2.0, abs=1e-10)

    def test_bad_end_name(self):
        with pytest.raises(ValueError):
            integrate_inverse_sqrt_endpoint(lambda s: s, 0.0, 1.0, "left")


class TestSemiInfinite:
    def test_plain_exponential(self):
        res = integrate_semi_infinite(lambda x: np.exp(-x), 0.0, 1.0)
        assert res.value == pytest.approx(1.0, abs=1e-10)

    def test_damped_oscillation(self):
        # Laplace transform of cos(10 x) at s = 1: 1/(1 + 100)
        res = integrate_semi_infinite(lambda x: np.exp(-x) * np.cos(10.0 * x), 0.0, 1.0)
        assert res.value == pytest.approx(1.0 / 101.0, abs=1e-10)

    def test_gaussian_moment(self):
        res = integrate_semi_infinite(lambda x: x * np.exp(-(x**2)), 0.0, 1.0)
        assert res.value == pytest.approx(0.5, abs=1e-10)

    def test_divergence_detected(self):
        with pytest.raises(DivergenceError):
            integrate_semi_infinite(lambda x: 1.0 / (1.0 + x), 0.0, 1.0)


class TestProperties:
    def test_linearity(self):
        rng = np.random.default_rng(11)
        f = lambda x: np.exp(1j * 3.0 * x) * x**2
        g = lambda x: np.cos(2.0 * x) + 0.5j * x
        intf = integrate_finite(f, 0.0, 2.0).value
        intg = integrate_finite(g, 0.0, 2.0).value
        for _ in range(10):
            a = complex(rng.normal(), rng.normal())
            b = complex(rng.normal(), rng.normal())
            combo = integrate_finite(lambda x: a * f(x) + b * g(x), 0.0, 2.0).value
            assert combo == pytest.approx(a * intf + b * intg, abs=1e-9)

    def test_subdivision_invariance(self):
        cfg = QuadConfig(rel_tol=1e-10)
        f = lambda x: np.sin(7.0 * x) * np.exp(-0.3 * x) + 1j * x
        whole = integrate_finite(f, 0.0, 3.0, cfg).value
        rng = np.random.default_rng(3)
        for _ in range(8):
            c = rng.uniform(0.2, 2.8)
            split = (
                integrate_finite(f, 0.0, c, cfg).value
                + integrate_finite(f, c, 3.0, cfg).value
            )
            assert abs(split - whole) <= 10 * cfg.rel_tol * abs(whole) + 1e-12

    def test_error_estimate_bounds_truth_on_polynomials(self):
        # exact values from the power rule; the embedded rule integrates
        # these degrees exactly, so any nonnegative estimate must bound the
        # (tiny) true error
        rng = np.random.default_rng(5)
        for deg in range(0, 13):
            coeffs = rng.normal(size=deg + 1)
            poly = np.polynomial.Polynomial(coeffs)
            res = integrate_finite(lambda x: poly(x), -1.0, 2.0)
            exact = poly.integ()(2.0) - poly.integ()(-1.0)
            true_err = abs(res.value - exact)
            assert true_err <= res.error_estimate + 1e-10 * max(1.0, abs(exact))
