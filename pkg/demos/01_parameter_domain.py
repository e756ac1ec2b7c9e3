"""Tour of the shape-parameter domain and its closed-form constants.

The pair (alpha, beta) is admissible when alpha < 1, beta < 1 and
|rho| = |alpha*beta| / ((1-alpha)(1-beta)) < 1.  The admissible region is an
infinite wedge bounded by the line beta = 1 - alpha (rho = +1) and the two
branches of the hyperbola beta = (alpha-1)/(2*alpha-1) (rho = -1).
"""

import numpy as np

import psde

print("Sample pairs across the domain:")
for alpha, beta in [(0.0, 0.0), (0.6, 0.3), (-2.0, 0.5), (0.5, 0.5), (-2.0, 0.6), (1.0, 0.2)]:
    try:
        p = psde.validate_params(alpha, beta)
        print(f"  ({alpha:+.2f}, {beta:+.2f})  accepted   rho = {p.rho:+.4f}")
    except psde.ParameterRejection as exc:
        print(f"  ({alpha:+.2f}, {beta:+.2f})  rejected   {exc.code}")

print("\nASCII view of the region (x = accepted):")
betas = np.linspace(1.4, -1.4, 15)
alphas = np.linspace(-1.4, 1.4, 29)
for b in betas:
    row = ""
    for a in alphas:
        try:
            psde.validate_params(round(float(a), 6), round(float(b), 6))
            row += "x"
        except psde.ParameterRejection:
            row += "."
    print("  " + row)

print("\nSmoothness constants for the additive-noise analysis (||b'|| = 1):")
for alpha, beta in [(0.0, 0.0), (0.05, 0.05), (0.1, 0.1)]:
    h = psde.smooth_density_horizon(alpha, beta, 1.0)
    status = "smooth density on (0, t0)" if h.threshold_ok else "outside the threshold"
    print(
        f"  alpha=beta={alpha:< 5} t0 = {h.t0:+.6f}  "
        f"alpha^2+beta^2 < (3-2*sqrt(2))/12: {h.threshold_ok}  -> {status}"
    )

print("\nOscillation constant C(t, 0.05, 0.05, b) grows with t and hits 1 at t0:")
h = psde.smooth_density_horizon(0.05, 0.05, 1.0)
for t in np.linspace(h.t0 / 4.0, h.t0, 4):
    print(f"  C({t:.5f}) = {psde.smoothness_constant(t, 0.05, 0.05, 1.0):.6f}")

print("\nH-norm lower bound at s = t = 0.01 (sigma = 1):")
print(f"  {psde.hnorm_lower_bound(0.01, 0.01, 1.0, 0.05, 0.05, 1.0):.4e}")
