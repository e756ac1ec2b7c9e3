"""Validity domain of the shape parameters and closed-form regularity constants.

The pair (alpha, beta) weights the running maximum and running minimum of the
process.  Well-posedness requires alpha < 1, beta < 1 and |rho| < 1 with

    rho = alpha*beta / ((1-alpha)*(1-beta)),

which together force alpha + beta < 1.  This module also evaluates the
constants of the additive-noise regularity analysis: the oscillation constant
C(t, alpha, beta, b), the smooth-density horizon t0, and the lower bound on
the squared H-norm of the first variation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import BoundVacuousWarning, ParameterRejection

# alpha^2 + beta^2 must stay strictly below this for a positive horizon t0.
SMOOTHNESS_THRESHOLD = (3.0 - 2.0 * math.sqrt(2.0)) / 12.0

# Domain boundaries are compared with strict floating-point inequalities;
# values within this distance of a boundary are not meaningfully classified.
BOUNDARY_RESOLUTION = 1e-12

# Rejection guard on the rho boundary: rounding in rho's quotient can move a
# pair sitting exactly on |rho| = 1 (e.g. beta = (alpha-1)/(2*alpha-1) with a
# non-representable beta) a couple of ulps inside the domain.  Pairs within
# this relative distance of the boundary are rejected; the guard only ever
# refuses boundary-hugging configurations, never accepts invalid ones.
RHO_BOUNDARY_GUARD = 1e-12

# Consistency slack for C(t0) < 1: the horizon is defined exactly by
# C(t0) = 1, so the evaluated constant sits within ulps of 1.
C_AT_T0_SLACK = 1e-9


@dataclass(frozen=True)
class PerturbationParams:
    """An accepted shape-parameter pair with its compound parameter rho."""

    alpha: float
    beta: float
    rho: float


@dataclass(frozen=True)
class SmoothnessConstants:
    """Smooth-density horizon and the oscillation constant evaluated there.

    ``t0_unbounded`` is set when the drift-derivative bound is zero, in which
    case no finite horizon constrains smoothness and ``t0`` is +inf.
    """

    c_of_t: float
    t0: float
    threshold_ok: bool
    t0_unbounded: bool = False


def rho_of(alpha: float, beta: float) -> float:
    """Compound parameter rho = alpha*beta/((1-alpha)(1-beta))."""
    return alpha * beta / ((1.0 - alpha) * (1.0 - beta))


def validate_params(alpha: float, beta: float) -> PerturbationParams:
    """Accept (alpha, beta) or raise :class:`ParameterRejection`.

    The three conditions are checked in order: alpha < 1, beta < 1,
    |rho| < 1.  Boundary equalities are rejected, with the
    :data:`RHO_BOUNDARY_GUARD` absorbing quotient rounding on the rho curve.
    """
    alpha = float(alpha)
    beta = float(beta)
    if not math.isfinite(alpha) or alpha >= 1.0:
        raise ParameterRejection("REJECT_ALPHA", f"alpha={alpha!r} must be a finite real < 1")
    if not math.isfinite(beta) or beta >= 1.0:
        raise ParameterRejection("REJECT_BETA", f"beta={beta!r} must be a finite real < 1")
    rho = rho_of(alpha, beta)
    if not math.isfinite(rho) or abs(rho) >= 1.0 - RHO_BOUNDARY_GUARD:
        raise ParameterRejection(
            "REJECT_RHO",
            f"rho={rho!r} for (alpha={alpha}, beta={beta}) must satisfy |rho| < 1",
        )
    return PerturbationParams(alpha=alpha, beta=beta, rho=rho)


def smoothness_constant(t: float, alpha: float, beta: float, b_prime_sup: float) -> float:
    """Oscillation constant C(t, alpha, beta, b).

    C = 3*(||b'||^2 t + 4(alpha^2+beta^2)) + 2*sqrt(3*(||b'||^2 t + 4(alpha^2+beta^2))).
    Monotone non-decreasing in t, |alpha|, |beta| and ||b'||.
    """
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    if b_prime_sup < 0.0:
        raise ValueError(f"b_prime_sup must be >= 0, got {b_prime_sup}")
    arg = 3.0 * (b_prime_sup**2 * t + 4.0 * (alpha**2 + beta**2))
    return arg + 2.0 * math.sqrt(arg)


def smooth_density_horizon(alpha: float, beta: float, b_prime_sup: float) -> SmoothnessConstants:
    """Horizon t0 below which the additive-noise density is smooth.

        t0 = (1/||b'||^2) * ((sqrt(2)-1)^2/3 - 4*(alpha^2+beta^2))

    t0 > 0 exactly when alpha^2 + beta^2 < (3-2*sqrt(2))/12 (``threshold_ok``).
    A non-positive t0 is reported as is, with ``threshold_ok`` False, so a
    caller can explain why a smoothness experiment is refused.  When
    b_prime_sup == 0 there is no finite horizon: t0 is reported as +inf
    (threshold satisfied) or 0 (threshold violated) with ``t0_unbounded``.
    """
    if b_prime_sup < 0.0:
        raise ValueError(f"b_prime_sup must be >= 0, got {b_prime_sup}")
    s2 = alpha**2 + beta**2
    threshold_ok = s2 < SMOOTHNESS_THRESHOLD
    numerator = (math.sqrt(2.0) - 1.0) ** 2 / 3.0 - 4.0 * s2
    if b_prime_sup == 0.0:
        t0 = math.inf if threshold_ok else 0.0
        c = smoothness_constant(0.0, alpha, beta, 0.0)
        return SmoothnessConstants(c_of_t=c, t0=t0, threshold_ok=threshold_ok, t0_unbounded=True)
    t0 = numerator / b_prime_sup**2
    c = smoothness_constant(max(t0, 0.0), alpha, beta, b_prime_sup)
    return SmoothnessConstants(c_of_t=c, t0=t0, threshold_ok=threshold_ok)


def hnorm_lower_bound(
    s: float,
    t: float,
    sigma_const: float,
    alpha: float,
    beta: float,
    b_prime_sup: float,
) -> float:
    """Additive-noise lower bound on ||DX_s||_H^2 for 0 < s <= t.

        (1 - C(t, alpha, beta, b)) * sigma^2 * s^2
        -------------------------------------------
        2 * (1 + 3*||b'||^2 s^2 + 3*(alpha^2+beta^2))

    When C(t) >= 1 the bound is vacuous: a flagged 0.0 is returned (with a
    :class:`BoundVacuousWarning`), never an exception.
    """
    if not 0.0 < s <= t:
        raise ValueError(f"need 0 < s <= t, got s={s}, t={t}")
    c = smoothness_constant(t, alpha, beta, b_prime_sup)
    if c >= 1.0:
        warnings.warn(
            f"C(t={t}) = {c} >= 1: H-norm lower bound is vacuous",
            BoundVacuousWarning,
            stacklevel=2,
        )
        return 0.0
    denom = 2.0 * (1.0 + 3.0 * b_prime_sup**2 * s**2 + 3.0 * (alpha**2 + beta**2))
    return (1.0 - c) * sigma_const**2 * s**2 / denom


def hnorm_running_max_lower_bound(
    t: float, sigma_const: float, alpha: float, beta: float, b_prime_sup: float
) -> float:
    """Lower bound on max_{s<=t} ||DX_s||_H^2 for the additive-noise model.

        sigma^2 * t / (2 * (1 + 3*(t^2 ||b'||^2 + alpha^2 + beta^2)))
    """
    if t <= 0.0:
        raise ValueError(f"t must be > 0, got {t}")
    denom = 2.0 * (1.0 + 3.0 * (t**2 * b_prime_sup**2 + alpha**2 + beta**2))
    return sigma_const**2 * t / denom
