import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import psde
from psde import ParameterRejection


def test_accepts_unperturbed():
    p = psde.validate_params(0.0, 0.0)
    assert p.rho == 0.0


def test_accepts_negative_alpha():
    p = psde.validate_params(-2.0, 0.5)
    assert p.rho == pytest.approx(-2.0 / 3.0, abs=1e-15)


def test_rejects_rho_plus_one():
    # alpha + beta = 1 forces alpha*beta = (1-alpha)(1-beta)
    with pytest.raises(ParameterRejection) as exc:
        psde.validate_params(0.5, 0.5)
    assert exc.value.code == "REJECT_RHO"


def test_rejects_rho_minus_one():
    # the curve beta = (alpha-1)/(2*alpha-1)
    with pytest.raises(ParameterRejection) as exc:
        psde.validate_params(-2.0, 0.6)
    assert exc.value.code == "REJECT_RHO"


@pytest.mark.parametrize("alpha,beta,code", [
    (1.0, 0.3, "REJECT_ALPHA"),
    (1.5, 0.0, "REJECT_ALPHA"),
    (0.3, 1.0, "REJECT_BETA"),
    (float("nan"), 0.0, "REJECT_ALPHA"),
    (0.0, float("inf"), "REJECT_BETA"),
])
def test_boundary_and_nonfinite_rejections(alpha, beta, code):
    with pytest.raises(ParameterRejection) as exc:
        psde.validate_params(alpha, beta)
    assert exc.value.code == code


def test_rho_symmetric_under_swap():
    for a, b in [(0.4, -0.7), (-2.0, 0.5), (0.6, 0.3)]:
        assert psde.validate_params(a, b).rho == psde.validate_params(b, a).rho


@settings(max_examples=300, deadline=None)
@given(
    alpha=st.floats(min_value=-5.0, max_value=0.999),
    beta=st.floats(min_value=-5.0, max_value=0.999),
)
def test_accepted_pairs_satisfy_alpha_plus_beta_below_one(alpha, beta):
    try:
        p = psde.validate_params(alpha, beta)
    except ParameterRejection:
        return
    assert p.alpha + p.beta < 1.0


def test_smoothness_constant_values():
    assert psde.smoothness_constant(1.0, 0.0, 0.0, 0.0) == 0.0
    assert psde.smoothness_constant(1.0, 0.0, 0.0, 1.0) == pytest.approx(
        3.0 + 2.0 * math.sqrt(3.0), abs=1e-14
    )
    # 3*(0.01 + 0.02) + 2*sqrt(0.09)
    assert psde.smoothness_constant(0.01, 0.05, 0.05, 1.0) == pytest.approx(0.69, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    t=st.floats(min_value=0.0, max_value=10.0),
    dt=st.floats(min_value=0.0, max_value=1.0),
    alpha=st.floats(min_value=-0.9, max_value=0.9),
    beta=st.floats(min_value=-0.9, max_value=0.9),
    k=st.floats(min_value=0.0, max_value=5.0),
)
def test_smoothness_constant_monotone(t, dt, alpha, beta, k):
    base = psde.smoothness_constant(t, alpha, beta, k)
    assert base >= 0.0
    assert psde.smoothness_constant(t + dt, alpha, beta, k) >= base
    assert psde.smoothness_constant(t, alpha * 1.1, beta, k) >= base
    assert psde.smoothness_constant(t, alpha, beta * 1.1, k) >= base
    assert psde.smoothness_constant(t, alpha, beta, k * 1.1) >= base


def test_horizon_unperturbed():
    h = psde.smooth_density_horizon(0.0, 0.0, 1.0)
    assert h.threshold_ok
    assert h.t0 == pytest.approx((3.0 - 2.0 * math.sqrt(2.0)) / 3.0, abs=1e-15)
    assert h.t0 == pytest.approx(0.057191, abs=1e-6)


def test_horizon_negative_above_threshold():
    # alpha^2 + beta^2 = 0.02 > (3-2*sqrt(2))/12 ~ 0.0142976
    h = psde.smooth_density_horizon(0.1, 0.1, 1.0)
    assert not h.threshold_ok
    assert h.t0 == pytest.approx((3.0 - 2.0 * math.sqrt(2.0)) / 3.0 - 0.08, abs=1e-12)
    assert h.t0 < 0.0


def test_horizon_threshold_flip():
    s = psde.SMOOTHNESS_THRESHOLD
    below = psde.smooth_density_horizon(math.sqrt(s * (1.0 - 1e-9)), 0.0, 1.0)
    above = psde.smooth_density_horizon(math.sqrt(s * (1.0 + 1e-9)), 0.0, 1.0)
    assert below.threshold_ok and below.t0 > 0.0
    assert not above.threshold_ok and above.t0 <= 0.0


def test_horizon_zero_drift_bound_flagged():
    h = psde.smooth_density_horizon(0.05, 0.05, 0.0)
    assert h.t0_unbounded
    assert h.t0 == math.inf and h.threshold_ok
    h2 = psde.smooth_density_horizon(0.3, 0.3, 0.0)
    assert h2.t0_unbounded
    assert h2.t0 == 0.0 and not h2.threshold_ok


def test_c_at_t0_consistency_random():
    rng = np.random.default_rng(0)
    checked = 0
    while checked < 200:
        alpha, beta = rng.uniform(-0.12, 0.12, size=2)
        k = rng.uniform(0.1, 3.0)
        h = psde.smooth_density_horizon(alpha, beta, k)
        if not h.threshold_ok:
            continue
        assert psde.smoothness_constant(h.t0, alpha, beta, k) < 1.0 + 1e-9
        checked += 1


def test_hnorm_lower_bound_values():
    # unperturbed driftless: (1-0) * sigma^2 s^2 / 2
    assert psde.hnorm_lower_bound(1.0, 1.0, 1.0, 0.0, 0.0, 0.0) == pytest.approx(0.5, abs=1e-15)
    assert psde.hnorm_lower_bound(0.5, 0.5, 2.0, 0.0, 0.0, 0.0) == pytest.approx(0.5, abs=1e-15)
    # chained from C(0.01, 0.05, 0.05, 1) = 0.69
    want = 0.31 * 1e-4 / (2.0 * (1.0 + 3.0 * 1e-4 + 3.0 * 0.005))
    got = psde.hnorm_lower_bound(0.01, 0.01, 1.0, 0.05, 0.05, 1.0)
    assert got == pytest.approx(want, rel=1e-10)
    assert got > 0.0


def test_hnorm_lower_bound_vacuous_is_flagged_zero():
    # C(t) >= 1 for large t: flagged zero, not an exception
    with pytest.warns(psde.BoundVacuousWarning):
        assert psde.hnorm_lower_bound(1.0, 1.0, 1.0, 0.0, 0.0, 2.0) == 0.0


def test_running_max_lower_bound_value():
    want = 0.01 / (2.0 * (1.0 + 3.0 * (1e-4 + 0.005)))
    got = psde.hnorm_running_max_lower_bound(0.01, 1.0, 0.05, 0.05, 1.0)
    assert got == pytest.approx(want, rel=1e-12)
