"""Generalised hyperbolic density, sampling, and dataset handling.

The d-variate generalised hyperbolic (GH) distribution is the normal
mean-variance mixture ``X = mu + W*gamma + sqrt(W)*U`` with
``W ~ GIG(lam, chi, psi)`` and ``U ~ N(0, sigma)``.  The scale matrix
carries the identifiability constraint ``det(sigma) = 1``: overall scale
lives in the mixing parameters.

All density work happens in log space through ``log_bessel_k``; no
unscaled Bessel value is ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .gig import GIGParams, gig_sample
from .special import log_bessel_k

__all__ = [
    "GHParams",
    "Dataset",
    "mahalanobis",
    "gh_log_density",
    "gh_sample",
    "gh_log_likelihood",
    "read_dataset",
    "write_dataset",
]

_LOG_2PI = np.log(2.0 * np.pi)
_DET_TOL = 1e-8


@dataclass(frozen=True)
class GHParams:
    """Full GH parameter set: location, unit-determinant scale matrix,
    skewness vector, and the three mixing parameters.

    The triangular factor of ``sigma`` and the derived quantities every
    density evaluation needs are computed once at construction; the
    instance is immutable.
    """

    mu: np.ndarray
    sigma: np.ndarray
    gamma: np.ndarray
    lam: float
    chi: float
    psi: float
    chol: np.ndarray = field(init=False, repr=False, compare=False)
    sigma_inv_gamma: np.ndarray = field(init=False, repr=False, compare=False)
    rho: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        d = mu.size
        if sigma.shape != (d, d) or gamma.shape != (d,):
            raise ValueError("inconsistent parameter dimensions")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma)) and np.all(np.isfinite(gamma))):
            raise ValueError("GH parameters must be finite")
        if not np.allclose(sigma, sigma.T, rtol=0.0, atol=1e-10):
            raise ValueError("scale matrix must be symmetric")
        try:
            chol = np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError as exc:
            raise ValueError("scale matrix must be positive definite") from exc
        det = np.prod(np.diag(chol)) ** 2
        if abs(det - 1.0) > _DET_TOL * max(1.0, det):
            raise ValueError(f"scale matrix must have unit determinant, got {det!r}")
        # mixing-parameter domain mirrors the GIG rules (boundaries allowed
        # for sampling; density evaluation additionally requires interior)
        GIGParams(self.lam, self.chi, self.psi)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "chi", float(self.chi))
        object.__setattr__(self, "psi", float(self.psi))
        object.__setattr__(self, "chol", chol)
        siginv_gamma = cho_solve((chol, True), gamma)
        object.__setattr__(self, "sigma_inv_gamma", siginv_gamma)
        object.__setattr__(self, "rho", float(gamma @ siginv_gamma))

    @property
    def d(self) -> int:
        return self.mu.size

    @property
    def interior(self) -> bool:
        return self.chi > 0.0 and self.psi > 0.0

    def replace(self, **kwargs) -> "GHParams":
        fields = {k: getattr(self, k) for k in ("mu", "sigma", "gamma", "lam", "chi", "psi")}
        fields.update(kwargs)
        return GHParams(**fields)

    def to_dict(self) -> dict:
        return {
            "mu": self.mu.tolist(),
            "sigma": self.sigma.tolist(),
            "gamma": self.gamma.tolist(),
            "lam": self.lam,
            "chi": self.chi,
            "psi": self.psi,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GHParams":
        return cls(
            mu=np.asarray(doc["mu"], dtype=float),
            sigma=np.asarray(doc["sigma"], dtype=float),
            gamma=np.asarray(doc["gamma"], dtype=float),
            lam=float(doc["lam"]),
            chi=float(doc["chi"]),
            psi=float(doc["psi"]),
        )


@dataclass(frozen=True)
class Dataset:
    """n x d data matrix, one observation per row."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if rows.size and not np.all(np.isfinite(rows)):
            raise ValueError("dataset entries must be finite")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]


def as_dataset(data) -> Dataset:
    return data if isinstance(data, Dataset) else Dataset(np.asarray(data, dtype=float))


def read_dataset(path, header: bool = False) -> Dataset:
    """Read comma-separated rows, one observation per line."""
    rows = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    return Dataset(rows)


def write_dataset(data: Dataset, path, header: bool = False) -> None:
    """Write in the same comma-separated layout the reader accepts."""
    data = as_dataset(data)
    head = ",".join(f"x{j}" for j in range(data.d)) if header else ""
    np.savetxt(path, data.rows, delimiter=",", header=head, comments="")


def mahalanobis(x, mu, sigma) -> float:
    """Squared Mahalanobis distance (x-mu)' sigma^-1 (x-mu), computed
    through a triangular factorisation; no explicit inverse is formed."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise ValueError("sigma must be positive definite") from exc
    z = solve_triangular(chol, x - mu, lower=True)
    return float(z @ z)


def _mahalanobis_rows(X: np.ndarray, mu: np.ndarray, chol: np.ndarray) -> np.ndarray:
    z = solve_triangular(chol, (X - mu).T, lower=True)
    return np.einsum("ij,ij->j", z, z)


def _logpdf_from_parts(lin, delta, rho, lam, chi, psi, d, log_det):
    """GH log density given precomputed quadratic/linear forms.

    ``lin`` is (x-mu)' sigma^-1 gamma per row, ``delta`` the squared
    Mahalanobis distances, ``rho`` = gamma' sigma^-1 gamma.  The first
    Bessel argument is floored away from zero: an observation exactly at
    the location with a vanishing first concentration is an integrable
    cusp whose unbounded density terms would otherwise poison the
    likelihood.
    """
    a = np.maximum(chi + delta, 1e-12)
    b = psi + rho
    half_order = 0.5 * (lam - 0.5 * d)
    return (
        lin
        - 0.5 * d * _LOG_2PI
        - 0.5 * log_det
        + 0.5 * lam * (np.log(psi) - np.log(chi))
        - log_bessel_k(lam, np.sqrt(chi * psi))
        + half_order * (np.log(a) - np.log(b))
        + log_bessel_k(lam - 0.5 * d, np.sqrt(a * b))
    )


def gh_log_density(x, theta: GHParams):
    """Log density at one point or at each row of a matrix.

    Requires interior mixing parameters (chi > 0 and psi > 0); the
    boundary limits have their own closed forms and are evaluated by
    the model taxonomy, never through this function.
    """
    if not theta.interior:
        raise ValueError("GH density requires chi > 0 and psi > 0")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != theta.d:
        raise ValueError("dimension mismatch between data and parameters")
    delta = _mahalanobis_rows(X, theta.mu, theta.chol)
    lin = (X - theta.mu) @ theta.sigma_inv_gamma
    log_det = 2.0 * np.sum(np.log(np.diag(theta.chol)))
    out = _logpdf_from_parts(lin, delta, theta.rho, theta.lam, theta.chi, theta.psi, theta.d, log_det)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite GH log density")
    return float(out[0]) if single else out


def gh_log_likelihood(data, theta: GHParams) -> float:
    """Sum of the log density over all rows of the dataset."""
    data = as_dataset(data)
    if data.n == 0:
        raise ValueError("empty dataset")
    return float(np.sum(gh_log_density(data.rows, theta)))


def gh_sample(theta: GHParams, n: int, rng: np.random.Generator) -> Dataset:
    """Generate ``n`` rows through the hierarchical representation:
    draw ``w`` from the mixing distribution, then a Gaussian with mean
    ``mu + w*gamma`` and covariance ``w*sigma``."""
    if n == 0:
        return Dataset(np.empty((0, theta.d)))
    w = gig_sample(GIGParams(theta.lam, theta.chi, theta.psi), n, rng)
    z = rng.standard_normal((n, theta.d))
    u = z @ theta.chol.T
    rows = theta.mu + w[:, None] * theta.gamma + np.sqrt(w)[:, None] * u
    return Dataset(rows)
