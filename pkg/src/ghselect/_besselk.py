"""Elementwise kernel for log K_nu(x) at moderate orders (|nu| < 30).

Temme's series below x = 2 and a Steed-style continued fraction above
it produce K at the fractional order mu in [-1/2, 1/2) together with
K at mu+1; a rescaled forward recurrence lifts the pair to the target
order.  Everything returns in log scale so that tiny arguments at
moderate orders never overflow.

Compiled with numba when it is available; a numpy fallback built on
``scipy.special.kve`` plus a log-space recurrence covers environments
without a JIT.  Both paths are validated against quadrature and
arbitrary-precision references in the test suite.
"""

from __future__ import annotations

import math

import numpy as np

_EPS = 1e-17
_MAXIT = 4000
_LN2 = math.log(2.0)
_EULER = 0.5772156649015329
# Taylor coefficients of 1/Gamma(1+z)
_C1 = 0.5772156649015329
_C2 = -0.6558780715202538
_C3 = -0.0420026350340952
_C4 = 0.1665386113822915
_C5 = -0.0421977345555443
_C6 = -0.0096219715278770
_C7 = 0.0072189432466630


def _recip_gamma_pair(mu: float):
    """1/Gamma(1+mu), 1/Gamma(1-mu) and the Temme combinations
    gam1 = (1/G(1-mu) - 1/G(1+mu))/(2 mu), gam2 = their mean."""
    if abs(mu) < 1e-3:
        mu2 = mu * mu
        gampl = 1.0 + mu * (_C1 + mu * (_C2 + mu * (_C3 + mu * (_C4 + mu * _C5))))
        gammi = 1.0 - mu * (_C1 - mu * (_C2 - mu * (_C3 - mu * (_C4 - mu * _C5))))
        gam1 = -(_C1 + mu2 * (_C3 + mu2 * (_C5 + mu2 * _C7)))
        gam2 = 1.0 + mu2 * (_C2 + mu2 * (_C4 + mu2 * _C6))
    else:
        gampl = 1.0 / math.gamma(1.0 + mu)
        gammi = 1.0 / math.gamma(1.0 - mu)
        gam1 = (gammi - gampl) / (2.0 * mu)
        gam2 = 0.5 * (gammi + gampl)
    return gam1, gam2, gampl, gammi


def _log_k_elem(nu: float, x: float) -> float:
    """log K_nu(x) for nu >= 0, x > 0 (scalar)."""
    if x < 1e-170:
        if nu > 1e-6:
            return math.lgamma(nu) - _LN2 + nu * (_LN2 - math.log(x))
        return math.log(-math.log(0.5 * x) - _EULER)

    n = int(nu + 0.5)
    mu = nu - n
    mu2 = mu * mu
    log_off = 0.0

    if x <= 2.0:
        # Temme's series
        x2 = 0.5 * x
        pimu = math.pi * mu
        fact = pimu / math.sin(pimu) if abs(pimu) > 1e-15 else 1.0
        d = -math.log(x2)
        e = mu * d
        fact2 = math.sinh(e) / e if abs(e) > 1e-15 else 1.0
        gam1, gam2, gampl, gammi = _recip_gamma_pair(mu)
        ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
        ssum = ff
        ee = math.exp(e)
        p = 0.5 * ee / gampl
        q = 0.5 / (ee * gammi)
        c = 1.0
        d2 = x2 * x2
        sum1 = p
        for i in range(1, _MAXIT):
            ff = (i * ff + p + q) / (i * i - mu2)
            c *= d2 / i
            p /= i - mu
            q /= i + mu
            del_ = c * ff
            ssum += del_
            del1 = c * (p - i * ff)
            sum1 += del1
            if abs(del_) < abs(ssum) * _EPS:
                break
        v0 = ssum
        v1 = sum1 * (2.0 / x)
    else:
        # Steed-style continued fraction
        b = 2.0 * (1.0 + x)
        d = 1.0 / b
        h = d
        delh = d
        q1 = 0.0
        q2 = 1.0
        a1 = 0.25 - mu2
        q = a1
        c = a1
        a = -a1
        s = 1.0 + q * delh
        for i in range(2, _MAXIT):
            a -= 2.0 * (i - 1)
            c = -a * c / i
            qnew = (q1 - b * q2) / a
            q1 = q2
            q2 = qnew
            q += c * qnew
            b += 2.0
            d = 1.0 / (b + a * d)
            delh = (b * d - 1.0) * delh
            h += delh
            dels = q * delh
            s += dels
            if abs(dels / s) < _EPS:
                break
        h = a1 * h
        v0 = math.sqrt(math.pi / (2.0 * x)) / s
        v1 = v0 * (mu + x + 0.5 - h) / x
        log_off = -x

    if n == 0:
        return math.log(v0) + log_off
    for j in range(1, n):
        v0, v1 = v1, v0 + (2.0 * (mu + j) / x) * v1
        if v1 > 1e270:
            v0 *= 1e-270
            v1 *= 1e-270
            log_off += 270.0 * math.log(10.0)
    return math.log(v1) + log_off


def _log_k_loop(nu: float, xs: np.ndarray, out: np.ndarray) -> None:
    for i in range(xs.size):
        out[i] = _log_k_elem(nu, xs[i])


try:  # pragma: no cover - exercised implicitly everywhere
    import numba

    _recip_gamma_pair = numba.njit(cache=True, fastmath=True)(_recip_gamma_pair)
    _log_k_elem = numba.njit(cache=True, fastmath=True)(_log_k_elem)
    _log_k_loop = numba.njit(cache=True, fastmath=True)(_log_k_loop)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def log_k_small_order(nu: float, x: np.ndarray) -> np.ndarray:
    """log K_nu over an array of arguments, 0 <= nu < ~30."""
    out = np.empty(x.size)
    _log_k_loop(nu, x.ravel(), out)
    return out.reshape(x.shape)
