"""Derivative-free and quasi-Newton maximisation used by the numeric
conditional-maximisation step, plus the unconstrained reparametrisation
of the shape block.

Both optimizers maximise a black-box objective that may return ``-inf``
(or ``nan``) to reject a point.  Every evaluation is tracked, so the
returned point is never worse than the starting point even when the
underlying search fails; a failed search is reported through the
``converged`` flag rather than an exception.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import minimize

from .penalty import ShapeParams

__all__ = [
    "ObjectiveSpec",
    "OptimResult",
    "nelder_mead",
    "bfgs_numeric",
    "best_of",
    "shape_to_vector",
    "vector_to_shape",
]


@dataclass
class ObjectiveSpec:
    """A function of a real vector to maximise, with an evaluation
    budget and a tolerance.  ``eval`` returns a finite value or ``-inf``
    / ``nan`` to signal a rejected point."""

    dim: int
    eval: Callable[[np.ndarray], float]
    max_evals: int = 2000
    tol: float = 1e-8
    simplex_scale: float = 0.1

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.max_evals < 1:
            raise ValueError("max_evals must be positive")
        if self.simplex_scale <= 0.0:
            raise ValueError("simplex_scale must be positive")


class OptimResult(NamedTuple):
    x: np.ndarray
    value: float
    converged: bool
    n_evals: int
    method: str


class _Budget(Exception):
    pass


class _Tracker:
    """Negates the objective for scipy, counts evaluations, records the
    best finite point seen, and enforces the evaluation budget."""

    def __init__(self, obj: ObjectiveSpec, start: np.ndarray, f_start: float):
        self.obj = obj
        self.count = 1
        self.best_x = np.array(start, dtype=float)
        self.best_f = f_start

    def __call__(self, x: np.ndarray) -> float:
        if self.count >= self.obj.max_evals:
            raise _Budget()
        self.count += 1
        v = self.obj.eval(np.asarray(x, dtype=float))
        if np.isfinite(v) and v > self.best_f:
            self.best_f = float(v)
            self.best_x = np.array(x, dtype=float)
        return -v if np.isfinite(v) else np.inf


def _check_start(obj: ObjectiveSpec, start) -> tuple[np.ndarray, float]:
    start = np.atleast_1d(np.asarray(start, dtype=float))
    if start.shape != (obj.dim,):
        raise ValueError("start point has wrong dimension")
    if not np.all(np.isfinite(start)):
        raise ValueError("start point must be finite")
    f0 = obj.eval(start)
    if not np.isfinite(f0):
        raise ValueError("objective is not finite at the start point")
    return start, float(f0)


def nelder_mead(obj: ObjectiveSpec, start) -> OptimResult:
    """Simplex search with the standard reflection/expansion/contraction/
    shrink coefficients (1, 2, 0.5, 0.5) and initial edge lengths
    simplex_scale * (1 + |start_j|), simplex_scale defaulting to 0.1."""
    start, f0 = _check_start(obj, start)
    tracker = _Tracker(obj, start, f0)
    simplex = np.tile(start, (obj.dim + 1, 1))
    for j in range(obj.dim):
        simplex[j + 1, j] += obj.simplex_scale * (1.0 + abs(start[j]))
    converged = False
    try:
        res = minimize(
            tracker,
            start,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": obj.tol,
                "fatol": max(obj.tol, 1e-11 * (1.0 + abs(f0))),
                "maxfev": obj.max_evals,
                "maxiter": 10 * obj.max_evals,
            },
        )
        converged = bool(res.success)
    except _Budget:
        pass
    return OptimResult(tracker.best_x, tracker.best_f, converged, tracker.count, "nelder-mead")


def _central_diff_grad(f: Callable[[np.ndarray], float], x: np.ndarray) -> np.ndarray:
    g = np.empty_like(x)
    for j in range(x.size):
        step = 1e-6 * (1.0 + abs(x[j]))
        e = np.zeros_like(x)
        e[j] = step
        g[j] = (f(x + e) - f(x - e)) / (2.0 * step)
    return g


def bfgs_numeric(obj: ObjectiveSpec, start) -> OptimResult:
    """Quasi-Newton ascent with central-difference gradients, step
    1e-6 * (1 + |x_j|) per coordinate."""
    start, f0 = _check_start(obj, start)
    tracker = _Tracker(obj, start, f0)

    def grad(x):
        g = _central_diff_grad(tracker, np.asarray(x, dtype=float))
        if not np.all(np.isfinite(g)):
            return np.full_like(g, np.nan)
        return g

    converged = False
    try:
        with np.errstate(invalid="ignore", over="ignore"):
            res = minimize(
                tracker,
                start,
                method="BFGS",
                jac=grad,
                options={"gtol": obj.tol, "maxiter": max(1, obj.max_evals // (2 * obj.dim + 1))},
            )
        converged = bool(res.success)
    except _Budget:
        pass
    return OptimResult(tracker.best_x, tracker.best_f, converged, tracker.count, "bfgs")


def best_of(obj: ObjectiveSpec, start) -> OptimResult:
    """Run both optimizers from the same start and keep the higher
    value.  If one raises, the other's result is used; if both raise,
    the error carries both diagnostics."""
    results, errors = [], []
    for runner in (nelder_mead, bfgs_numeric):
        try:
            results.append(runner(obj, start))
        except Exception as exc:  # noqa: BLE001 - diagnostics are re-raised below
            errors.append(f"{runner.__name__}: {exc}")
    if not results:
        raise RuntimeError("both optimizers failed: " + "; ".join(errors))
    return max(results, key=lambda r: r.value)


def shape_to_vector(s: ShapeParams) -> np.ndarray:
    """Map the shape block to an unconstrained vector: gamma and the
    index pass through, the concentrations go through log."""
    if s.chi <= 0.0 or s.psi <= 0.0:
        raise ValueError("log transform requires chi > 0 and psi > 0")
    return np.concatenate([s.gamma, [s.lam, np.log(s.chi), np.log(s.psi)]])


def vector_to_shape(v: np.ndarray, d: int) -> ShapeParams:
    """Inverse of ``shape_to_vector``; the exp guarantees chi, psi > 0."""
    v = np.asarray(v, dtype=float)
    if v.shape != (d + 3,):
        raise ValueError("vector has wrong dimension")
    return ShapeParams(gamma=v[:d].copy(), lam=float(v[d]), chi=float(np.exp(v[d + 1])), psi=float(np.exp(v[d + 2])))
