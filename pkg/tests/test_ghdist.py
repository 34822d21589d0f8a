import numpy as np
import pytest
from scipy.integrate import quad

from ghselect.ghdist import (
    Dataset,
    GHParams,
    gh_log_density,
    gh_log_likelihood,
    gh_sample,
    mahalanobis,
    read_dataset,
    write_dataset,
)
from ghselect.gig import GIGParams
from ghselect.harness import dgm_params

from oracles import gh_mixture_logpdf, gig_pdf_callable, gig_quadrature


def unit_det_spd(rng, d):
    a = rng.normal(size=(d, d))
    s = a @ a.T + d * np.eye(d)
    return s / np.linalg.det(s) ** (1.0 / d)


class TestGHParams:
    def test_requires_unit_determinant(self):
        with pytest.raises(ValueError):
            GHParams(np.zeros(2), 2.0 * np.eye(2), np.zeros(2), -1.0, 1.0, 1.0)

    def test_requires_spd(self):
        bad = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(ValueError):
            GHParams(np.zeros(2), bad, np.zeros(2), -1.0, 1.0, 1.0)

    def test_mixing_domain_follows_gig_rules(self):
        GHParams(np.zeros(2), np.eye(2), np.zeros(2), -1.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            GHParams(np.zeros(2), np.eye(2), np.zeros(2), 1.0, 1.0, 0.0)

    def test_cached_factor(self):
        rng = np.random.default_rng(0)
        sig = unit_det_spd(rng, 3)
        theta = GHParams(np.zeros(3), sig, np.zeros(3), -1.0, 1.0, 1.0)
        np.testing.assert_allclose(theta.chol @ theta.chol.T, sig, atol=1e-12)


class TestMahalanobis:
    def test_zero_at_center(self):
        assert mahalanobis(np.array([1.0, 2.0]), np.array([1.0, 2.0]), np.eye(2)) == 0.0

    def test_identity_case(self):
        assert mahalanobis(np.array([3.0, 4.0]), np.zeros(2), np.eye(2)) == pytest.approx(25.0)

    def test_matches_explicit_inverse(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(3, 3))
        sig = a @ a.T + 3 * np.eye(3)
        x = rng.normal(size=3)
        mu = rng.normal(size=3)
        expect = float((x - mu) @ np.linalg.inv(sig) @ (x - mu))
        assert mahalanobis(x, mu, sig) == pytest.approx(expect, rel=1e-10)

    def test_non_spd_rejected(self):
        with pytest.raises(ValueError):
            mahalanobis(np.zeros(2), np.zeros(2), -np.eye(2))


class TestLogDensity:
    def test_frozen_d1_oracle(self):
        theta = GHParams(np.zeros(1), np.eye(1), np.zeros(1), -0.5, 1.0, 1.0)
        assert gh_log_density(np.zeros(1), theta) == pytest.approx(-0.6523818340601525, abs=1e-9)

    def test_symmetry_when_unskewed(self):
        theta = GHParams(np.array([0.4, -1.0]), np.eye(2), np.zeros(2), -1.0, 2.0, 3.0)
        t = np.array([0.7, 0.3])
        assert gh_log_density(theta.mu + t, theta) == pytest.approx(
            gh_log_density(theta.mu - t, theta), abs=1e-12
        )

    def test_d1_normalisation(self):
        theta = GHParams(np.zeros(1), np.eye(1), np.array([0.3]), 1.0, 0.5, 2.0)
        total, _ = quad(lambda x: np.exp(gh_log_density(np.array([x]), theta)), -np.inf, np.inf, limit=400)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_matches_mixture_oracle(self):
        rng = np.random.default_rng(8)
        sig = unit_det_spd(rng, 2)
        theta = GHParams(np.array([0.1, -0.2]), sig, np.array([0.4, -0.1]), 0.8, 1.3, 0.9)
        for _ in range(4):
            x = rng.normal(size=2) * 1.5
            expect = gh_mixture_logpdf(x, theta.mu, sig, theta.gamma,
                                       gig_pdf_callable(theta.lam, theta.chi, theta.psi))
            assert gh_log_density(x, theta) == pytest.approx(expect, rel=1e-9, abs=1e-9)

    def test_boundary_rejected(self):
        theta = GHParams(np.zeros(2), np.eye(2), np.zeros(2), -1.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            gh_log_density(np.zeros(2), theta)


class TestLogLikelihood:
    def test_single_row(self):
        theta = dgm_params("SGH")
        x = np.array([0.2, -0.1])
        assert gh_log_likelihood(Dataset(x[None, :]), theta) == pytest.approx(
            gh_log_density(x, theta)
        )

    def test_duplicated_dataset(self):
        theta = dgm_params("SGH")
        rows = np.random.default_rng(0).normal(size=(50, 2))
        single = gh_log_likelihood(Dataset(rows), theta)
        double = gh_log_likelihood(Dataset(np.vstack([rows, rows])), theta)
        assert double == pytest.approx(2.0 * single, rel=1e-12)

    def test_truth_beats_perturbed_mostly(self):
        theta = dgm_params("SGH")
        wins = 0
        for rep in range(20):
            rng = np.random.default_rng(100 + rep)
            data = gh_sample(theta, 1000, rng)
            worse = theta.replace(mu=theta.mu + 0.4, psi=theta.psi * 2.5)
            if gh_log_likelihood(data, theta) > gh_log_likelihood(data, worse):
                wins += 1
        assert wins >= 19

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            gh_log_likelihood(Dataset(np.empty((0, 2))), dgm_params("SGH"))


class TestSampling:
    def test_empty(self):
        assert gh_sample(dgm_params("SGH"), 0, np.random.default_rng(0)).n == 0

    def test_gaussian_limit_variance(self):
        # near-Gaussian shape: per-coordinate variance close to -chi/(2 lam) = 2.5
        theta = dgm_params("N")
        data = gh_sample(theta, 200000, np.random.default_rng(1))
        var = data.rows.var(axis=0)
        se = np.sqrt(2.0 / data.n) * 2.5  # var of sample variance for ~N(0, 2.5)
        assert np.all(np.abs(var - 2.5) < 4.0 * se + 0.05)

    def test_mean_variance_mixture_moments(self):
        theta = dgm_params("St")
        n = 400000
        data = gh_sample(theta, n, np.random.default_rng(2))
        ew = gig_quadrature(theta.lam, theta.chi, theta.psi, lambda w: w)
        ew2 = gig_quadrature(theta.lam, theta.chi, theta.psi, lambda w: w * w)
        var_w = ew2 - ew**2
        mean_expect = theta.mu + ew * theta.gamma
        cov_expect = ew * theta.sigma + var_w * np.outer(theta.gamma, theta.gamma)
        mean_err = np.abs(data.rows.mean(axis=0) - mean_expect)
        mc_se = data.rows.std(axis=0) / np.sqrt(n)
        assert np.all(mean_err < 4.0 * mc_se)
        emp_cov = np.cov(data.rows, rowvar=False)
        # rough MC standard error for covariance entries of a heavy-tailed sample
        for i in range(2):
            for j in range(2):
                prod = data.rows[:, i] * data.rows[:, j]
                se_ij = prod.std() / np.sqrt(n)
                assert abs(emp_cov[i, j] - cov_expect[i, j]) < 4.0 * se_ij + 0.02

    def test_deterministic(self):
        theta = dgm_params("t")
        a = gh_sample(theta, 50, np.random.default_rng(5)).rows
        b = gh_sample(theta, 50, np.random.default_rng(5)).rows
        np.testing.assert_array_equal(a, b)


class TestDatasetIO:
    def test_roundtrip(self, tmp_path):
        rows = np.random.default_rng(0).normal(size=(20, 3))
        path = tmp_path / "data.csv"
        write_dataset(Dataset(rows), path)
        back = read_dataset(path)
        np.testing.assert_allclose(back.rows, rows, atol=1e-12)

    def test_roundtrip_with_header(self, tmp_path):
        rows = np.random.default_rng(1).normal(size=(5, 2))
        path = tmp_path / "data.csv"
        write_dataset(Dataset(rows), path, header=True)
        assert path.read_text().splitlines()[0] == "x0,x1"
        back = read_dataset(path, header=True)
        np.testing.assert_allclose(back.rows, rows, atol=1e-12)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            Dataset(np.array([[1.0, np.inf]]))
