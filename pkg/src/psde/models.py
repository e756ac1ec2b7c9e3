"""Coefficient models: drift b and diffusion sigma with declared bounds.

Coefficients come from a small registry of named analytic families (constant,
affine-clipped, sinusoidal, logistic) plus tabulated functions with monotone
interpolation.  Each family supplies exact derivative functions and its bound
constants, so the declared bounds are verifiable rather than guessed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

BOUND_CHECK_POINTS = 10_000
_BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class Coefficient:
    """A scalar coefficient function with derivative and bound constants."""

    f: Callable[[np.ndarray], np.ndarray]
    f_prime: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    prime_sup: float
    inf_abs: float
    spec: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CoefficientModel:
    """Drift/diffusion pair for the perturbed diffusion.

    The bound fields are declarations; :meth:`check_bounds` spot-checks them
    on a uniform grid over the simulation range.
    """

    b: Callable[[np.ndarray], np.ndarray]
    sigma: Callable[[np.ndarray], np.ndarray]
    b_prime: Callable[[np.ndarray], np.ndarray]
    sigma_prime: Callable[[np.ndarray], np.ndarray]
    lipschitz_k: float
    b_prime_sup: float
    sigma_prime_sup: float
    sigma_inf: float
    name: str = "custom"
    spec: dict = field(default_factory=dict)

    def check_bounds(self, lo: float, hi: float, n: int = BOUND_CHECK_POINTS) -> None:
        """Verify |b'| <= b_prime_sup, |sigma'| <= sigma_prime_sup and
        |sigma| >= sigma_inf on an n-point grid over [lo, hi]."""
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("bound-check range must be finite")
        grid = np.linspace(lo, hi, n)
        bp = np.max(np.abs(np.asarray(self.b_prime(grid), dtype=float)))
        sp = np.max(np.abs(np.asarray(self.sigma_prime(grid), dtype=float)))
        si = np.min(np.abs(np.asarray(self.sigma(grid), dtype=float)))
        tol = _BOUND_SLACK
        if bp > self.b_prime_sup + tol:
            raise ValueError(
                f"model {self.name!r}: |b'| reaches {bp} > declared {self.b_prime_sup}"
            )
        if sp > self.sigma_prime_sup + tol:
            raise ValueError(
                f"model {self.name!r}: |sigma'| reaches {sp} > declared {self.sigma_prime_sup}"
            )
        if si < self.sigma_inf - tol:
            raise ValueError(
                f"model {self.name!r}: |sigma| falls to {si} < declared {self.sigma_inf}"
            )

    def describe(self) -> dict:
        """JSON-serializable description used in artifact fingerprints."""
        return {
            "name": self.name,
            "spec": self.spec,
            "lipschitz_k": self.lipschitz_k,
            "b_prime_sup": self.b_prime_sup,
            "sigma_prime_sup": self.sigma_prime_sup,
            "sigma_inf": self.sigma_inf,
        }


def constant(value: float) -> Coefficient:
    value = float(value)

    def f(x):
        return np.full(np.shape(np.asarray(x)), value)

    def f_prime(x):
        return np.zeros(np.shape(np.asarray(x)))

    return Coefficient(f, f_prime, 0.0, 0.0, abs(value), {"kind": "constant", "value": value})


def affine_clipped(slope: float, intercept: float, lo: float, hi: float) -> Coefficient:
    """f(x) = clip(slope*x + intercept, lo, hi): Lipschitz with bounded range."""
    if not lo < hi:
        raise ValueError("need lo < hi")
    slope, intercept = float(slope), float(intercept)

    def f(x):
        return np.clip(slope * np.asarray(x, dtype=float) + intercept, lo, hi)

    def f_prime(x):
        raw = slope * np.asarray(x, dtype=float) + intercept
        return slope * ((raw > lo) & (raw < hi))

    inf_abs = 0.0 if lo <= 0.0 <= hi else min(abs(lo), abs(hi))
    return Coefficient(
        f,
        f_prime,
        abs(slope),
        abs(slope),
        inf_abs,
        {"kind": "affine_clipped", "slope": slope, "intercept": intercept, "lo": lo, "hi": hi},
    )


def sinusoidal(offset: float, amplitude: float, frequency: float = 1.0, phase: float = 0.0) -> Coefficient:
    """f(x) = offset + amplitude*sin(frequency*x + phase)."""
    offset, amplitude, frequency, phase = map(float, (offset, amplitude, frequency, phase))

    def f(x):
        return offset + amplitude * np.sin(frequency * np.asarray(x, dtype=float) + phase)

    def f_prime(x):
        return amplitude * frequency * np.cos(frequency * np.asarray(x, dtype=float) + phase)

    lip = abs(amplitude * frequency)
    inf_abs = max(abs(offset) - abs(amplitude), 0.0)
    return Coefficient(
        f,
        f_prime,
        lip,
        lip,
        inf_abs,
        {
            "kind": "sinusoidal",
            "offset": offset,
            "amplitude": amplitude,
            "frequency": frequency,
            "phase": phase,
        },
    )


def logistic(lo: float, hi: float, rate: float, center: float = 0.0) -> Coefficient:
    """Smooth monotone ramp from lo to hi with slope rate*(hi-lo)/4 at center."""
    lo, hi, rate, center = map(float, (lo, hi, rate, center))

    def f(x):
        z = rate * (np.asarray(x, dtype=float) - center)
        return lo + (hi - lo) / (1.0 + np.exp(-z))

    def f_prime(x):
        z = rate * (np.asarray(x, dtype=float) - center)
        s = 1.0 / (1.0 + np.exp(-z))
        return (hi - lo) * rate * s * (1.0 - s)

    lip = abs((hi - lo) * rate) / 4.0
    span = sorted((lo, hi))
    inf_abs = 0.0 if span[0] <= 0.0 <= span[1] else min(abs(lo), abs(hi))
    return Coefficient(
        f,
        f_prime,
        lip,
        lip,
        inf_abs,
        {"kind": "logistic", "lo": lo, "hi": hi, "rate": rate, "center": center},
    )


def tabulated(xs, ys) -> Coefficient:
    """Monotone (PCHIP) interpolation of a coefficient table.

    Outside the table range the function is clamped to its end values, which
    keeps it Lipschitz with derivative zero there.  Bound constants are
    sampled on a fine grid over the table range.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.shape != ys.shape or len(xs) < 2:
        raise ValueError("need two equal-length 1-d arrays with >= 2 points")
    if not np.all(np.diff(xs) > 0):
        raise ValueError("table abscissae must be strictly increasing")
    interp = PchipInterpolator(xs, ys, extrapolate=False)
    dinterp = interp.derivative()
    x_lo, x_hi = float(xs[0]), float(xs[-1])
    y_lo, y_hi = float(ys[0]), float(ys[-1])

    def f(x):
        x = np.asarray(x, dtype=float)
        out = interp(np.clip(x, x_lo, x_hi))
        return np.where(x < x_lo, y_lo, np.where(x > x_hi, y_hi, out))

    def f_prime(x):
        x = np.asarray(x, dtype=float)
        inside = (x >= x_lo) & (x <= x_hi)
        out = np.where(inside, dinterp(np.clip(x, x_lo, x_hi)), 0.0)
        return out

    grid = np.linspace(x_lo, x_hi, BOUND_CHECK_POINTS)
    dvals = np.abs(dinterp(grid))
    prime_sup = float(np.max(dvals))
    inf_abs = float(np.min(np.abs(interp(grid))))
    return Coefficient(
        f,
        f_prime,
        prime_sup,
        prime_sup,
        inf_abs,
        {"kind": "tabulated", "xs": xs.tolist(), "ys": ys.tolist()},
    )


_KINDS = {
    "constant": constant,
    "affine_clipped": affine_clipped,
    "sinusoidal": sinusoidal,
    "logistic": logistic,
    "tabulated": tabulated,
}


def coefficient_from_spec(spec: dict) -> Coefficient:
    """Build a coefficient from a registry spec dict (key ``kind`` + params)."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in _KINDS:
        raise ValueError(f"unknown coefficient kind {kind!r}; known: {sorted(_KINDS)}")
    return _KINDS[kind](**spec)


def make_model(b: Coefficient, sigma: Coefficient, name: str = "custom") -> CoefficientModel:
    return CoefficientModel(
        b=b.f,
        sigma=sigma.f,
        b_prime=b.f_prime,
        sigma_prime=sigma.f_prime,
        lipschitz_k=max(b.lipschitz, sigma.lipschitz),
        b_prime_sup=b.prime_sup,
        sigma_prime_sup=sigma.prime_sup,
        sigma_inf=sigma.inf_abs,
        name=name,
        spec={"b": b.spec, "sigma": sigma.spec},
    )


def named_model(name: str) -> CoefficientModel:
    """Built-in coefficient sets used by the CLI, demos and tests."""
    presets = {
        # driftless unit diffusion: X is a perturbed Brownian motion
        "unit": (constant(0.0), constant(1.0)),
        # bounded smooth drift with ||b'|| = 1, additive noise
        "additive-sine": (sinusoidal(0.0, 1.0), constant(1.0)),
        # smooth drift and diffusion, inf sigma = 0.5
        "smooth-generic": (sinusoidal(0.0, 0.5, 1.0, math.pi / 2.0), sinusoidal(1.0, 0.5)),
        # driftless multiplicative noise, inf sigma = 1
        "multiplicative-sine": (constant(0.0), sinusoidal(2.0, 1.0)),
    }
    if name not in presets:
        raise ValueError(f"unknown model preset {name!r}; known: {sorted(presets)}")
    b, sigma = presets[name]
    return make_model(b, sigma, name=name)
