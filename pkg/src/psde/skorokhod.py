"""Fixed-point solver for the coupled running-max / running-min system.

Given a driving path a on a grid, the running maximum M and running minimum I
of the perturbed path x = a + alpha*M + beta*I solve the coupled identities

    (1-alpha) * M_k = max_{j<=k} (a_j + beta * I_j)
    (beta-1)  * I_k = max_{j<=k} (-a_j - alpha * M_j)

Eliminating I gives a self-map of M whose sup-norm contraction factor is
|rho| = |alpha*beta| / ((1-alpha)(1-beta)) < 1, so plain iteration converges
geometrically.  All maxima are taken over grid indices; ties resolve to the
earliest index (running maxima of arrays do this naturally).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergenceError
from .params import PerturbationParams

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 200


@dataclass(frozen=True)
class DrivingPath:
    """Uniform time grid and driving-path values, a_0 = seed value x."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.shape != values.shape or times.ndim != 1:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if len(times) >= 2 and not np.all(np.diff(times) > 0.0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("driving-path values must be finite")


@dataclass(frozen=True)
class MaxMinSolution:
    """Converged (M, I) pair with iteration diagnostics."""

    m_path: np.ndarray
    i_path: np.ndarray
    iterations: int
    residual: float

    def perturbed_path(self, a: DrivingPath, params: PerturbationParams) -> np.ndarray:
        """Reconstruct x = a + alpha*M + beta*I."""
        return a.values + params.alpha * self.m_path + params.beta * self.i_path


def _sweep(av: np.ndarray, m: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    # One Gauss-Seidel sweep of the M self-map: the inner running max is the
    # (beta-1)*I candidate built from the current M iterate.
    inner = np.maximum.accumulate(-av - alpha * m)
    return np.maximum.accumulate(av + beta / (beta - 1.0) * inner) / (1.0 - alpha)


def solve_max_min(
    a: DrivingPath,
    params: PerturbationParams,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    m_init: np.ndarray | None = None,
) -> MaxMinSolution:
    """Iterate the M self-map to sup-norm tolerance ``tol``.

    Starts from M == a_0 (constant) unless a warm start ``m_init`` is given.
    After M converges, I is recovered from the (beta-1)*I identity with the
    final M.  Raises :class:`NoConvergenceError` when the residual is still
    above ``tol`` after ``max_iter`` sweeps.
    """
    if tol <= 0.0:
        raise ValueError("tol must be > 0")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    av = a.values
    alpha, beta = params.alpha, params.beta
    m = np.full_like(av, av[0]) if m_init is None else np.asarray(m_init, dtype=float).copy()
    history = []
    for iterations in range(1, max_iter + 1):
        m_next = _sweep(av, m, alpha, beta)
        residual = float(np.max(np.abs(m_next - m)))
        history.append(residual)
        m = m_next
        if residual <= tol:
            break
    else:
        raise NoConvergenceError(
            f"max/min fixed point above tol={tol} after {max_iter} sweeps "
            f"(last residual {history[-1]:.3e})",
            history,
        )
    i = np.maximum.accumulate(-av - alpha * m) / (beta - 1.0)
    return MaxMinSolution(m_path=m, i_path=i, iterations=iterations, residual=residual)


def contraction_rate(
    a: DrivingPath,
    params: PerturbationParams,
    n_sweeps: int,
) -> np.ndarray:
    """Successive sup-norm update ratios of the M iteration.

    Returns r_m = ||M^(m+1) - M^(m)|| / ||M^(m) - M^(m-1)||, dropping terms
    whose denominator has fallen into floating-point noise.  Degenerate case
    alpha*beta == 0 converges exactly in one sweep: an empty array is
    returned.
    """
    if n_sweeps < 2:
        raise ValueError("n_sweeps must be >= 2")
    if params.alpha * params.beta == 0.0:
        return np.empty(0)
    av = a.values
    m = np.full_like(av, av[0])
    deltas = []
    for _ in range(n_sweeps):
        m_next = _sweep(av, m, params.alpha, params.beta)
        deltas.append(float(np.max(np.abs(m_next - m))))
        m = m_next
    scale = max(1.0, float(np.max(np.abs(m))))
    floor = 1e3 * np.finfo(float).eps * scale
    ratios = [
        deltas[k] / deltas[k - 1]
        for k in range(1, len(deltas))
        if deltas[k - 1] > floor
    ]
    return np.asarray(ratios)
