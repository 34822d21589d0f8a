import numpy as np
import pytest

from ghselect.special import _UK_COEFFS, bessel_k_ratio, log_bessel_k

from oracles import log_bessel_k_half_integer, log_bessel_k_quadrature


def rel_log_err(a, b):
    return abs(a - b) / max(1.0, abs(b))


class TestClosedForms:
    def test_half_integer_k_half(self):
        # K_{1/2}(x) = sqrt(pi/(2x)) e^-x
        expect = np.log(np.sqrt(np.pi / 4.0) * np.exp(-2.0))
        assert log_bessel_k(0.5, 2.0) == pytest.approx(expect, abs=1e-12)
        assert np.exp(log_bessel_k(0.5, 2.0)) == pytest.approx(0.11993777196806146, rel=1e-12)

    def test_symmetry_example(self):
        assert log_bessel_k(-3.7, 1.3) == pytest.approx(log_bessel_k(3.7, 1.3), abs=1e-12)

    def test_k_one_at_one_frozen(self):
        # quadrature oracle value, frozen
        assert log_bessel_k(1.0, 1.0) == pytest.approx(-0.5076519482107523, abs=1e-11)
        assert np.exp(log_bessel_k(1.0, 1.0)) == pytest.approx(0.6019072302, rel=1e-9)

    @pytest.mark.parametrize("m,x", [(0, 0.7), (1, 2.3), (3, 0.37), (7, 11.0), (12, 0.05)])
    def test_half_integer_family(self, m, x):
        assert rel_log_err(log_bessel_k(m + 0.5, x), log_bessel_k_half_integer(m, x)) < 1e-12


class TestRatio:
    def test_symmetric_orders(self):
        # K_{1/2} = K_{-1/2}
        assert bessel_k_ratio(-0.5, 3.0) == pytest.approx(1.0, abs=1e-12)

    def test_three_halves(self):
        # K_{3/2}/K_{1/2} = 1 + 1/x
        assert bessel_k_ratio(0.5, 2.0) == pytest.approx(1.5, rel=1e-12)

    def test_quadrature_oracle_frozen(self):
        assert bessel_k_ratio(2.0, 0.5) == pytest.approx(8.21939084113142, rel=1e-10)

    def test_positive_on_grid(self):
        rng = np.random.default_rng(5)
        for nu in rng.uniform(-40, 40, 12):
            x = 10 ** rng.uniform(-5, 3)
            assert bessel_k_ratio(nu, x) > 0.0


class TestAgainstQuadratureOracle:
    @pytest.mark.parametrize("nu", [-59.0, -30.1, -7.3, -0.5, 0.0, 0.25, 1.0, 4.6, 29.9, 30.0, 44.4, 60.0])
    @pytest.mark.parametrize("x", [1e-6, 1e-3, 0.5, 2.0, 35.0, 1e4])
    def test_grid(self, nu, x):
        assert rel_log_err(log_bessel_k(nu, x), log_bessel_k_quadrature(nu, x)) < 1e-10


class TestProperties:
    def test_symmetry_property(self):
        rng = np.random.default_rng(0)
        for _ in range(40):
            nu = rng.uniform(0, 60)
            x = 10 ** rng.uniform(-6, 4)
            assert abs(log_bessel_k(nu, x) - log_bessel_k(-nu, x)) <= 1e-12

    def test_recurrence(self):
        # K_{v+1} = K_{v-1} + (2v/x) K_v, checked multiplicatively
        rng = np.random.default_rng(1)
        for _ in range(60):
            nu = rng.uniform(-20, 20)
            x = 10 ** rng.uniform(-2, 3)
            lk_m = log_bessel_k(nu - 1.0, x)
            lk = log_bessel_k(nu, x)
            lk_p = log_bessel_k(nu + 1.0, x)
            rhs = np.logaddexp(lk_m, np.log(2.0 * abs(nu) / x) + lk) if nu > 0 else None
            if nu > 0.05:  # avoid the cancellation-free but trivial band around 0
                assert abs(lk_p - rhs) < 1e-9 * max(1.0, abs(rhs))

    def test_monotone_decreasing_in_x(self):
        xs = np.logspace(-6, 4, 200)
        for nu in (-17.3, 0.0, 2.5, 41.0):
            vals = log_bessel_k(nu, xs)
            assert np.all(np.diff(vals) < 0.0)

    def test_vector_matches_scalar(self):
        xs = np.array([1e-6, 0.02, 1.0, 250.0, 1e4])
        vec = log_bessel_k(-55.5, xs)
        for x, v in zip(xs, vec):
            assert v == pytest.approx(log_bessel_k(-55.5, float(x)), abs=1e-13)


class TestDomainErrors:
    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            log_bessel_k(1.0, 0.0)
        with pytest.raises(ValueError):
            log_bessel_k(1.0, np.array([1.0, -2.0]))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            log_bessel_k(np.inf, 1.0)
        with pytest.raises(ValueError):
            log_bessel_k(1.0, np.nan)
        with pytest.raises(ValueError):
            bessel_k_ratio(0.5, -1.0)


class TestAsymptoticCoefficients:
    def test_first_polynomials(self):
        # u_1 = (3t - 5t^3)/24, u_2 = (81 t^2 - 462 t^4 + 385 t^6)/1152
        np.testing.assert_allclose(_UK_COEFFS[1][:4], [0, 3 / 24, 0, -5 / 24], atol=1e-15)
        np.testing.assert_allclose(
            _UK_COEFFS[2][:7], [0, 0, 81 / 1152, 0, -462 / 1152, 0, 385 / 1152], atol=1e-14
        )
