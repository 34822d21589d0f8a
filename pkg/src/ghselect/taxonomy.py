"""The sixteen named members of the GH family: classification of a
fitted parameter set from its active constraints, and conversion to the
conventional parametrisations of the special and limiting cases.

Constraint tags
---------------
``gamma=0``          skewness removed (symmetric model)
``lambda=-1/2``      index pinned for the normal-inverse Gaussian branch
``lambda=1``         index pinned for the Laplace / hyperbolic-marginals branch
``lambda=(d+1)/2``   index pinned for the hyperbolic distribution
``psi->0``           inverse-gamma mixing limit (t family)
``chi->0``           gamma mixing limit (variance-gamma family)
``chi->inf``, ``lambda->-inf``   joint Gaussian limit (with scale -chi/(2 lam))

Patterns outside the named sixteen are representable but never labeled;
they fall back to GH (or SGH when only the symmetry constraint is
active), with the full tag set preserved on the label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

from .ghdist import GHParams, gh_log_density
from .special import log_bessel_k

__all__ = [
    "MODEL_NAMES",
    "ModelLabel",
    "ClassificationError",
    "classify",
    "to_conventional",
    "normal_log_density",
    "student_t_log_density",
    "skew_t_log_density",
    "vg_log_density",
]

MODEL_NAMES = (
    "N", "t", "C", "L", "SGH", "St", "VG", "AL",
    "NIG", "H", "HUM", "SNIG", "SVG", "SH", "SC", "GH",
)

_LOG_2PI = np.log(2.0 * np.pi)

TAG_GAMMA0 = "gamma=0"
TAG_LAM_NIG = "lambda=-1/2"
TAG_LAM_ONE = "lambda=1"
TAG_LAM_HYP = "lambda=(d+1)/2"
TAG_PSI0 = "psi->0"
TAG_CHI0 = "chi->0"
TAG_CHI_INF = "chi->inf"
TAG_LAM_NINF = "lambda->-inf"

_ALL_TAGS = {
    TAG_GAMMA0, TAG_LAM_NIG, TAG_LAM_ONE, TAG_LAM_HYP,
    TAG_PSI0, TAG_CHI0, TAG_CHI_INF, TAG_LAM_NINF,
}


class ClassificationError(ValueError):
    pass


@dataclass(frozen=True)
class ModelLabel:
    name: str
    active_constraints: frozenset
    conventional_params: dict

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "active_constraints": sorted(self.active_constraints),
            "conventional_params": self.conventional_params,
        }


def _check_tags(snapped) -> frozenset:
    tags = frozenset(snapped)
    unknown = tags - _ALL_TAGS
    if unknown:
        raise ClassificationError(f"unknown constraint tags: {sorted(unknown)}")
    if TAG_CHI0 in tags and TAG_CHI_INF in tags:
        raise ClassificationError("inconsistent constraints: chi->0 and chi->inf")
    lam_tags = tags & {TAG_LAM_NIG, TAG_LAM_ONE, TAG_LAM_HYP, TAG_LAM_NINF}
    if len(lam_tags) > 1:
        raise ClassificationError(f"inconsistent index constraints: {sorted(lam_tags)}")
    return tags


def _name_from_tags(tags: frozenset, lam: float) -> str:
    symmetric = TAG_GAMMA0 in tags
    rest = tags - {TAG_GAMMA0}
    if rest == {TAG_LAM_NINF, TAG_CHI_INF, TAG_PSI0} and symmetric:
        return "N"
    if TAG_LAM_NIG in tags:
        if rest == {TAG_LAM_NIG, TAG_PSI0}:
            return "C" if symmetric else "SC"
        if rest == {TAG_LAM_NIG}:
            return "SNIG" if symmetric else "NIG"
        return "SGH" if symmetric else "GH"
    if TAG_LAM_ONE in tags:
        if rest == {TAG_LAM_ONE, TAG_CHI0}:
            return "L" if symmetric else "AL"
        if rest == {TAG_LAM_ONE}:
            return "HUM"
        return "SGH" if symmetric else "GH"
    if TAG_LAM_HYP in tags:
        if rest == {TAG_LAM_HYP}:
            return "SH" if symmetric else "H"
        return "SGH" if symmetric else "GH"
    if TAG_PSI0 in tags and lam < 0.0:
        # chi->inf / lambda->-inf without the full Gaussian pattern stay in
        # the free-index t family: the index is unconstrained below zero
        if TAG_CHI0 in rest:
            return "SGH" if symmetric else "GH"
        return "t" if symmetric else "St"
    if TAG_CHI0 in tags and lam > 0.0 and TAG_PSI0 not in tags:
        return "SVG" if symmetric else "VG"
    return "SGH" if symmetric else "GH"


def classify(theta: GHParams, snapped, d: int | None = None) -> ModelLabel:
    """Map a fitted parameter set and its active-constraint tags to one
    of the sixteen named models, with conventional parameters attached.

    Raises ``ClassificationError`` on contradictory tag sets; patterns
    the taxonomy leaves unnamed fall back to GH / SGH.
    """
    d = theta.d if d is None else d
    tags = _check_tags(snapped)
    name = _name_from_tags(tags, theta.lam)
    return ModelLabel(name, tags, to_conventional(name, theta))


def to_conventional(name: str, theta: GHParams) -> dict:
    """Conventional-parametrisation record for a named model.

    Limiting models rescale by the mixing-limit factor: -chi/(2 lam) for
    the inverse-gamma branch, psi/(2 lam) for the gamma branch.  Models
    without a conventional closed form pass the parameters through
    unchanged, tagged native.
    """
    if name not in MODEL_NAMES:
        raise ValueError(f"unknown model name {name!r}")
    mu = theta.mu.tolist()
    if name == "N":
        c = -theta.chi / (2.0 * theta.lam)
        return {"form": "normal", "mu": mu, "cov": (c * theta.sigma).tolist(), "scale_factor": c}
    if name in ("St", "t", "C", "SC"):
        c = -theta.chi / (2.0 * theta.lam)
        rec = {
            "form": "skew-t" if name in ("St", "SC") else "t",
            "mu": mu,
            "scale": (c * theta.sigma).tolist(),
            "df": -2.0 * theta.lam,
        }
        rec["skew"] = (c * theta.gamma).tolist() if name in ("St", "SC") else np.zeros(theta.d).tolist()
        return rec
    if name in ("VG", "AL", "SVG", "L"):
        # unit-mean gamma mixing: scale multiplier 2 lam / psi
        c = 2.0 * theta.lam / theta.psi
        rec = {
            "form": "variance-gamma" if name in ("VG", "SVG") else "asymmetric-laplace",
            "mu": mu,
            "scale": (c * theta.sigma).tolist(),
            "shape": theta.lam,
        }
        rec["skew"] = (c * theta.gamma).tolist() if name in ("VG", "AL") else np.zeros(theta.d).tolist()
        return rec
    if name == "NIG":
        return {
            "form": "nig",
            "mu": mu,
            "scale": theta.sigma.tolist(),
            "skew": theta.gamma.tolist(),
            "chi": theta.chi,
            "psi": theta.psi,
        }
    return {"form": "native", **theta.to_dict()}


def _quad_forms(X, mu, scale, skew=None):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    mu = np.asarray(mu, dtype=float)
    scale = np.atleast_2d(np.asarray(scale, dtype=float))
    chol = np.linalg.cholesky(scale)
    diff = (X - mu).T
    z = solve_triangular(chol, diff, lower=True)
    delta = np.einsum("ij,ij->j", z, z)
    log_det = 2.0 * np.sum(np.log(np.diag(chol)))
    if skew is None:
        return delta, log_det, None, 0.0
    skew = np.asarray(skew, dtype=float)
    w = solve_triangular(chol, skew, lower=True)
    lin = z.T @ w
    rho = float(w @ w)
    return delta, log_det, lin, rho


def normal_log_density(X, mu, cov):
    """Multivariate normal log density, one value per row."""
    delta, log_det, _, _ = _quad_forms(X, mu, cov)
    d = np.asarray(mu).size
    return -0.5 * (d * _LOG_2PI + log_det + delta)


def student_t_log_density(X, mu, scale, df):
    """Classical multivariate t log density."""
    delta, log_det, _, _ = _quad_forms(X, mu, scale)
    d = np.asarray(mu).size
    return (
        gammaln(0.5 * (df + d))
        - gammaln(0.5 * df)
        - 0.5 * d * np.log(df * np.pi)
        - 0.5 * log_det
        - 0.5 * (df + d) * np.log1p(delta / df)
    )


def skew_t_log_density(X, mu, scale, skew, df):
    """Skew-t log density in the mixture parametrisation: inverse-gamma
    mixing with both shape and rate df/2, skewness entering the
    conditional mean linearly.  Requires a nonzero skew vector."""
    delta, log_det, lin, rho = _quad_forms(X, mu, scale, skew)
    if rho <= 0.0:
        return student_t_log_density(X, mu, scale, df)
    d = np.asarray(mu).size
    a = 0.5 * df
    order = a + 0.5 * d
    arg = np.sqrt((delta + df) * rho)
    return (
        lin
        - 0.5 * d * _LOG_2PI
        - 0.5 * log_det
        + a * np.log(a)
        - gammaln(a)
        + np.log(2.0)
        - 0.5 * order * (np.log(delta + df) - np.log(rho))
        + log_bessel_k(order, arg)
    )


def vg_log_density(X, mu, scale, skew, shape):
    """Variance-gamma log density: gamma mixing with equal shape and
    rate, skewness entering the conditional mean linearly."""
    skew = np.zeros(np.asarray(mu).size) if skew is None else skew
    delta, log_det, lin, rho = _quad_forms(X, mu, scale, skew)
    d = np.asarray(mu).size
    b = rho + 2.0 * shape
    order = shape - 0.5 * d
    arg = np.sqrt(delta * b)
    return (
        lin
        - 0.5 * d * _LOG_2PI
        - 0.5 * log_det
        + shape * np.log(shape)
        - gammaln(shape)
        + np.log(2.0)
        + 0.5 * order * (np.log(delta) - np.log(b))
        + log_bessel_k(order, arg)
    )


def conventional_log_density(label: ModelLabel, X):
    """Log density of the conventional form attached to a label; native
    records evaluate the GH density itself."""
    rec = label.conventional_params
    form = rec["form"]
    if form == "normal":
        return normal_log_density(X, rec["mu"], rec["cov"])
    if form == "t":
        return student_t_log_density(X, rec["mu"], rec["scale"], rec["df"])
    if form == "skew-t":
        return skew_t_log_density(X, rec["mu"], rec["scale"], rec["skew"], rec["df"])
    if form in ("variance-gamma", "asymmetric-laplace"):
        return vg_log_density(X, rec["mu"], rec["scale"], rec["skew"], rec["shape"])
    if form == "nig":
        theta = GHParams(
            mu=np.asarray(rec["mu"]), sigma=np.asarray(rec["scale"]),
            gamma=np.asarray(rec["skew"]), lam=-0.5, chi=rec["chi"], psi=rec["psi"],
        )
        return gh_log_density(X, theta)
    theta = GHParams.from_dict({k: rec[k] for k in ("mu", "sigma", "gamma", "lam", "chi", "psi")})
    return gh_log_density(X, theta)
