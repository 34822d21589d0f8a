"""Independent numerical oracles used by the test suite.

Everything here is deliberately implemented from first principles
(adaptive quadrature, explicit elementary formulas, brute-force
optimisation) and shares no code path with the package internals it
checks.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import gammaln


def _log_cosh(y: float) -> float:
    y = abs(y)
    return y + math.log1p(math.exp(-2.0 * y)) - math.log(2.0)


def log_bessel_k_quadrature(order: float, x: float) -> float:
    """log K_order(x) from the integral representation
    K_v(x) = int_0^inf exp(-x cosh t) cosh(v t) dt, evaluated in log
    scale with the peak factored out."""
    nu = abs(float(order))
    x = float(x)

    def phi(t: float) -> float:
        return -x * math.cosh(t) + _log_cosh(nu * t)

    def dphi(t: float) -> float:
        return -x * math.sinh(t) + nu * math.tanh(nu * t)

    # peak of the integrand; at t=0 when the decay dominates immediately
    t_hi = math.asinh(max(nu / x, 1.0)) + 5.0
    if dphi(1e-12) <= 0.0:
        t_star = 0.0
    else:
        t_star = brentq(dphi, 1e-12, t_hi, xtol=1e-14, rtol=1e-15)
    m = phi(t_star)

    # find an upper limit where the integrand is negligible
    upper = max(t_star + 1.0, 1.0)
    while phi(upper) - m > -60.0:
        upper += max(1.0, 0.5 * upper)

    val, _ = quad(
        lambda t: math.exp(phi(t) - m),
        0.0,
        upper,
        points=[t_star],
        limit=400,
        epsabs=1e-300,
        epsrel=1e-13,
    )
    return m + math.log(val)


def log_bessel_k_half_integer(m: int, x: float) -> float:
    """log K_{m+1/2}(x) from the closed-form finite sum, m >= 0."""
    x = float(x)
    terms = [
        gammaln(m + k + 1) - gammaln(k + 1) - gammaln(m - k + 1) - k * math.log(2.0 * x)
        for k in range(m + 1)
    ]
    hi = max(terms)
    s = sum(math.exp(t - hi) for t in terms)
    return 0.5 * math.log(math.pi / (2.0 * x)) - x + hi + math.log(s)


def gig_quadrature(lam: float, chi: float, psi: float, f=None) -> float:
    """Integral of f(w) * gig_pdf(w) over (0, inf) by adaptive
    quadrature; f defaults to 1 (normalisation check).  Uses its own
    log-pdf assembly with the quadrature Bessel constant."""
    log_norm = (
        (lam / 2.0) * (math.log(psi) - math.log(chi))
        - math.log(2.0)
        - log_bessel_k_quadrature(lam, math.sqrt(chi * psi))
    )

    def integrand(w: float) -> float:
        lp = log_norm + (lam - 1.0) * math.log(w) - 0.5 * (psi * w + chi / w)
        v = math.exp(lp)
        return v * f(w) if f is not None else v

    mode = ((lam - 1.0) + math.sqrt((lam - 1.0) ** 2 + chi * psi)) / psi
    lo, _ = quad(integrand, 0.0, mode, limit=400, epsrel=1e-12)
    hi, _ = quad(integrand, mode, np.inf, limit=400, epsrel=1e-12)
    return lo + hi


def gig_cdf_on_sorted(ws: np.ndarray, lam: float, chi: float, psi: float) -> np.ndarray:
    """CDF of the generalised inverse Gaussian evaluated at an ascending
    grid, via fixed-order Gauss-Legendre panels between the points."""
    log_norm = (
        (lam / 2.0) * (math.log(psi) - math.log(chi))
        - math.log(2.0)
        - log_bessel_k_quadrature(lam, math.sqrt(chi * psi))
    )

    def pdf(w):
        return np.exp(log_norm + (lam - 1.0) * np.log(w) - 0.5 * (psi * w + chi / w))

    nodes, weights = np.polynomial.legendre.leggauss(12)
    lo = np.concatenate([[max(ws[0] * 1e-8, 1e-300)], ws[:-1]])
    hi = ws
    mid = 0.5 * (hi + lo)
    half = 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    panel = (half[:, None] * weights[None, :] * pdf(pts)).sum(axis=1)
    # mass below the first grid point
    head, _ = quad(lambda w: float(pdf(w)), 0.0, float(lo[0]), limit=200)
    return head + np.cumsum(panel)


def gh_mixture_logpdf(x, mu, sigma, gamma, mixing_pdf) -> float:
    """GH-type log density at a single point from the mean-variance
    mixture representation, integrating the conditional Gaussian
    against an arbitrary mixing density."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    d = x.size
    sinv = np.linalg.inv(sigma)
    _, logdet = np.linalg.slogdet(sigma)
    diff = x - mu
    delta = float(diff @ sinv @ diff)
    lin = float(diff @ sinv @ gamma)
    rho = float(gamma @ sinv @ gamma)

    def integrand(logw: float) -> float:
        w = math.exp(logw)
        lg = (
            -0.5 * d * math.log(2.0 * math.pi * w)
            - 0.5 * logdet
            - 0.5 * delta / w
            + lin
            - 0.5 * rho * w
        )
        fw = mixing_pdf(w)
        return math.exp(lg) * fw * w  # * w: Jacobian of log substitution

    val, _ = quad(integrand, -60.0, 60.0, limit=800, epsrel=1e-12)
    return math.log(val)


def invgamma_pdf(a: float, scale: float):
    def pdf(w: float) -> float:
        if w <= 0.0:
            return 0.0
        return math.exp(a * math.log(scale) - gammaln(a) - (a + 1.0) * math.log(w) - scale / w)

    return pdf


def gamma_pdf(shape: float, rate: float):
    def pdf(w: float) -> float:
        if w <= 0.0:
            return 0.0
        return math.exp(shape * math.log(rate) - gammaln(shape) + (shape - 1.0) * math.log(w) - rate * w)

    return pdf


def gig_pdf_callable(lam: float, chi: float, psi: float):
    log_norm = (
        (lam / 2.0) * (math.log(psi) - math.log(chi))
        - math.log(2.0)
        - log_bessel_k_quadrature(lam, math.sqrt(chi * psi))
    )

    def pdf(w: float) -> float:
        if w <= 0.0:
            return 0.0
        return math.exp(log_norm + (lam - 1.0) * math.log(w) - 0.5 * (psi * w + chi / w))

    return pdf


def nig_logpdf_explicit(x, mu, sigma, gamma, chi, psi) -> float:
    """Normal-inverse Gaussian log density (index -1/2) written purely
    with elementary functions through the half-integer Bessel forms."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    d = x.size
    sinv = np.linalg.inv(sigma)
    _, logdet = np.linalg.slogdet(sigma)
    diff = x - mu
    delta = float(diff @ sinv @ diff)
    lin = float(diff @ sinv @ gamma)
    rho = float(gamma @ sinv @ gamma)
    a = chi + delta
    b = psi + rho
    s = math.sqrt(a * b)
    lam = -0.5
    # |lam - d/2| = (d+1)/2: half-integer for even d, integer for odd d
    if d % 2 == 0:
        log_k_num = log_bessel_k_half_integer(d // 2, s)
    else:
        log_k_num = log_bessel_k_quadrature((d + 1) / 2.0, s)
    # K_{-1/2}(z) = sqrt(pi/(2z)) e^-z
    z0 = math.sqrt(chi * psi)
    log_k_den = 0.5 * math.log(math.pi / (2.0 * z0)) - z0
    return (
        lin
        - 0.5 * d * math.log(2.0 * math.pi)
        - 0.5 * logdet
        + 0.5 * lam * (math.log(psi) - math.log(chi))
        - log_k_den
        + 0.5 * (lam - d / 2.0) * (math.log(a) - math.log(b))
        + log_k_num
    )
