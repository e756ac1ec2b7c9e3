"""Reducing multiplicative noise to additive noise with the transform G.

G(y) integrates 1/sigma from the initial value; it is strictly increasing,
so running maxima and minima commute with it exactly.  Y = G(X) then solves
the additive-noise perturbed equation with drift
b_tilde = b/sigma - sigma'/2 (composed with G^{-1}) on the same driver, and
the two discrete simulations drift apart only through quadrature error that
shrinks as the grid refines.
"""

import numpy as np

import psde
from psde.simulate import SimConfig

model = psde.named_model("multiplicative-sine")  # sigma = 2 + sin(x), b = 0
params = psde.validate_params(0.3, -0.2)
cfg = SimConfig(x0_seed_value=0.5, horizon=1.0, n_steps=250, rng_seed=11)

x0 = cfg.x0_seed_value / (1.0 - params.alpha - params.beta)
transform = psde.build_transform(model, x0, x0 - 8.0, x0 + 8.0)

ys = np.linspace(x0 - 6.0, x0 + 6.0, 7)
print("Transform tabulation (anchored so G(X_0) = 0):")
for y in ys:
    print(f"  G({y:+.3f}) = {transform.g(float(y)):+.5f}")
print(f"round trip |G^-1(G(y)) - y|: "
      f"{np.max(np.abs(transform.g_inv(transform.g(ys)) - ys)):.2e}")

path = psde.simulate_per_step(model, params, cfg)
gx = transform.g(path.x)
print(f"\ncommutation: max_k G(x_k) == G(max_k x_k): "
      f"{float(np.max(gx)) == transform.g(float(np.max(path.x)))}")

print("\nPathwise reduction |G(X) - Y| under grid refinement (shared driver):")
report = psde.pathwise_reduction_check(model, params, cfg, n_refinements=3)
for lv in report.levels:
    print(f"  n = {lv.n_steps:5d} (dt = {lv.dt:.5f})  sup gap = {lv.sup_discrepancy:.4e}")

print("\nsigma = 1 control: the transform is a pure shift and the gap is roundoff")
flat = psde.pathwise_reduction_check(
    psde.named_model("additive-sine"), params,
    SimConfig(x0_seed_value=0.5, horizon=1.0, n_steps=200, rng_seed=2),
    n_refinements=1,
)
print(f"  sup gap = {flat.levels[0].sup_discrepancy:.2e}")
