"""Penalty functions for simultaneous estimation and model selection.

Three building blocks and two composites:

* ``mc_lasso`` shrinks a scalar toward the nearest of several target
  values (only the smallest absolute deviation contributes),
* ``hier_lasso_pair`` lets a child constraint activate only once its
  parent constraint is active,
* ``penalty_full72`` combines per-parameter multiple-choice terms and
  can activate any combination of the elementary constraints,
* ``penalty_hier16`` nests the constraints hierarchically so that only
  the sixteen interpretable members of the GH family are reachable.

Both composites act on the shape block (gamma, lam, chi, psi) only;
location and scale are never penalised.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "PenaltyKind",
    "PenaltySpec",
    "ShapeParams",
    "mc_lasso",
    "hier_lasso_pair",
    "penalty_full72",
    "penalty_hier16",
    "penalty_value",
]


class PenaltyKind(Enum):
    NONE = "none"
    FULL72 = "full72"
    HIER16 = "hier16"


@dataclass(frozen=True)
class PenaltySpec:
    """Which composite penalty to apply, and its weight h >= 0."""

    kind: PenaltyKind
    h: float = 0.0

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", PenaltyKind(self.kind))
        if not np.isfinite(self.h) or self.h < 0.0:
            raise ValueError("penalty weight h must be a finite nonnegative number")


@dataclass(frozen=True)
class ShapeParams:
    """The penalised parameter block: skewness vector, index, and the
    two mixing concentrations."""

    gamma: np.ndarray
    lam: float
    chi: float
    psi: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", np.atleast_1d(np.asarray(self.gamma, dtype=float)))

    @property
    def d(self) -> int:
        return self.gamma.size


def mc_lasso(theta: float, targets, h: float) -> float:
    """h times the distance from theta to the nearest target value."""
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    if targets.size == 0:
        raise ValueError("target list must be nonempty")
    if h < 0.0:
        raise ValueError("h must be nonnegative")
    return float(h * np.min(np.abs(theta - targets)))


def hier_lasso_pair(theta_c: float, theta_d: float, h: float) -> float:
    """h [ |theta_d| + max(|theta_c|, |theta_d|) / 2 ]: the constraint on
    theta_c can fully activate only once theta_d is already zero."""
    if h < 0.0:
        raise ValueError("h must be nonnegative")
    return float(h * (abs(theta_d) + 0.5 * max(abs(theta_c), abs(theta_d))))


def _lambda_candidates(lam: float, d: int) -> list[float]:
    cands = [abs(lam - (d + 1) / 2.0), abs(lam + 0.5), abs(lam - 1.0)]
    if lam < 0.0:
        cands.append(abs(1.0 / lam))
    return cands


def penalty_full72(s: ShapeParams, h: float, d: int) -> float:
    """Unrestricted composite: independent multiple-choice terms for the
    index, the concentrations and the skewness norm.  Any of the
    elementary constraints can activate in any combination."""
    if h == 0.0:
        return 0.0
    lam_term = min(_lambda_candidates(s.lam, d))
    chi_term = min(abs(s.chi), abs(1.0 / s.chi)) if s.chi != 0.0 else 0.0
    gam_term = float(np.linalg.norm(s.gamma))
    return float(h * (lam_term + chi_term + abs(s.psi) + gam_term))


def penalty_hier16(s: ShapeParams, h: float, d: int) -> float:
    """Hierarchical composite restricting the reachable constraint
    patterns to the sixteen named members of the GH family.

    The index splits the penalty into two regimes; in each, the minimum
    runs over the alternative nested routes and the max operators tie
    child constraints to their parents.
    """
    if h == 0.0:
        return 0.0
    g = float(np.linalg.norm(s.gamma)) / np.sqrt(d)
    lam, chi, psi = s.lam, s.chi, s.psi
    total = g
    if lam <= 0.0:
        with np.errstate(divide="ignore"):
            inv_lam = np.inf if lam == 0.0 else abs(1.0 / lam)
            inv_chi = np.inf if chi == 0.0 else abs(1.0 / chi)
        a1 = abs(lam + 0.5) + 0.5 * max(abs(lam + 0.5), abs(psi))
        a2 = abs(psi) + 0.5 * max(abs(lam + 0.5), abs(psi))
        a3 = 0.25 * max(g, inv_lam, abs(psi), inv_chi)
        total += min(a1, a2, a3)
    else:
        b1 = abs(lam - (d + 1) / 2.0)
        b2 = abs(chi) + 0.5 * max(abs(lam - 1.0), abs(chi))
        b3 = 0.5 * max(g, abs(lam - 1.0))
        total += min(b1, b2, b3)
    return float(h * total)


def penalty_value(spec: PenaltySpec, s: ShapeParams, d: int) -> float:
    """Dispatch on the penalty kind; identically zero for kind NONE and
    for h = 0, with no arithmetic performed in either case."""
    if spec.kind is PenaltyKind.NONE or spec.h == 0.0:
        return 0.0
    if spec.kind is PenaltyKind.FULL72:
        return penalty_full72(s, spec.h, d)
    return penalty_hier16(s, spec.h, d)
