import math

import numpy as np
import pytest

from gafhole.asymptotics import PreconditionError, radial_analysis
from gafhole.certificates import (
    ConditioningError,
    SearchExhausted,
    conditional_draws,
    conditional_hole_check,
    covariance_logdet,
    omega_event,
    omega_log_prob,
    omega_thresholds,
    unit_vandermonde_logdet,
    vandermonde_mean_square,
    vandermonde_search,
    volume_bound_audit,
)
from gafhole.estimators import estimate_naive
from gafhole.models import constant_only, explicit_table, gamma_power
from gafhole.sampler import draw_batch, truncation_plan
from gafhole.stats import clopper_pearson

from oracles import covariance_logdet_qr, log_a_gamma, omega_oracle, volume_bound, volume_exact

HALF = gamma_power(0.5)
DEG1 = explicit_table([0.0, 0.0])
TABLE_02 = explicit_table([0.0, -math.inf, 0.0])


# ---------------------------------------------------------------- omega

def test_omega_table_components():
    cert = omega_log_prob(TABLE_02, 2.0, 4.0)
    assert cert.components["i"] == pytest.approx(-16 * math.sqrt(2), rel=1e-15)
    assert all(math.isfinite(v) for v in cert.components.values())
    assert cert.log_prob < 0
    assert cert.log_prob == pytest.approx(math.fsum(cert.components.values()), rel=1e-15)


def test_omega_c0_zero():
    cert = omega_log_prob(HALF, 3.0, 0.0)
    assert cert.components["i"] == 0.0
    assert cert.log_prob == pytest.approx(
        cert.components["ii"] + cert.components["iii"] + cert.components["iv"], rel=1e-15)


def test_omega_margin_band_at_eight():
    cert = omega_log_prob(HALF, 8.0, 4.0)
    assert 0 <= cert.margin <= 10 * math.sqrt(cert.m) * math.log(cert.m)


def test_omega_degenerate():
    with pytest.raises(PreconditionError):
        omega_log_prob(constant_only(), 2.0)


@pytest.mark.parametrize("mdl,la,r", [
    (HALF, lambda n: log_a_gamma(n), 1.5),
    (HALF, lambda n: log_a_gamma(n), 3.0),
    (TABLE_02, lambda n: 0 if n in (0, 2) else -math.inf, 2.0),
])
def test_omega_against_mp_oracle(mdl, la, r):
    cert = omega_log_prob(mdl, r, 4.0)
    assert cert.log_prob == pytest.approx(omega_oracle(la, r, 4.0, n_max=300), rel=1e-10)


def test_omega_frequency_matches_exact_probability():
    """Untilted frequency of the event agrees with exp(log_prob) where it is not rare."""
    mdl = explicit_table([0.0, 0.0])
    r, C0 = 1.3, 0.6
    cert = omega_log_prob(mdl, r, C0)
    assert abs(cert.log_prob) <= 12
    plan = truncation_plan(mdl, r)
    lower0, upper2 = omega_thresholds(mdl, r, C0, plan.K)
    xi, _ = draw_batch(plan, 4, 0, 200_000)
    hits = int(omega_event(xi, lower0, upper2).sum())
    lo, hi = clopper_pearson(hits, xi.shape[0], 0.99)
    assert lo <= math.exp(cert.log_prob) <= hi


def test_conditional_draws_respect_event():
    lower0, upper2 = omega_thresholds(HALF, 3.0, 4.0, 40)
    xi = conditional_draws(lower0, upper2, 1, 0, 5000)
    assert omega_event(xi, lower0, upper2).all()


@pytest.mark.parametrize("r,trials", [(3.0, 1000), (8.0, 100)])
def test_conditional_hole_check(r, trials):
    out = conditional_hole_check(HALF, r, trials, 5)
    assert out["fraction"] == 1.0 and out["ambiguous"] == 0


def test_conditional_hole_check_large_c0():
    out = conditional_hole_check(HALF, 3.0, 300, 5, C0=20.0)
    assert out["fraction"] == 1.0


def test_omega_below_hole_probability():
    for log_a1 in (0.0, 0.3):
        mdl = explicit_table([0.0, log_a1, -0.4])
        for r in (1.0, 1.2, 1.5):
            cert = omega_log_prob(mdl, r, 4.0)
            rep = estimate_naive(mdl, r, 50_000, 13)
            assert math.exp(cert.log_prob) <= rep.p_hat + (rep.ci[1] - rep.ci[0])


# ---------------------------------------------------------- vandermonde

def test_vandermonde_single_point():
    pc = vandermonde_search(2.0, [], 10, 0)
    assert pc.success and pc.log_absdet_unit == 0.0 and pc.tries_used == 0


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_vandermonde_mean_square_law(n):
    mean, se = vandermonde_mean_square(list(range(1, n)), 100_000, n)
    assert abs(mean - math.factorial(n)) <= 3 * se


def test_vandermonde_mean_square_gapped_exponents():
    mean, se = vandermonde_mean_square([2, 5], 100_000, 1)
    assert abs(mean - 6) <= 3 * se


def test_vandermonde_search_power_set():
    ra = radial_analysis(HALF, 1.9)
    exps = [int(j) for j in ra.power_set if j > 0]
    assert len(exps) + 1 == 8
    pc = vandermonde_search(1.9, exps, 100, 0)
    assert pc.success and pc.tries_used <= 100
    assert pc.log_absdet == pytest.approx(pc.log_absdet_unit + sum(exps) * math.log(1.9))


def test_vandermonde_random_path():
    # exponents {0, 3, 4} collide mod 3, so the equispaced path is skipped
    pc = vandermonde_search(1.0, [3, 4], 100, 3)
    assert pc.method == "random" and pc.success


def test_vandermonde_exhausted_carries_best():
    with pytest.raises(SearchExhausted) as info:
        vandermonde_search(1.0, [1, 2, 3, 4, 5, 6, 40], max_tries=0)
    assert info.value.best is None
    with pytest.raises(ValueError):
        vandermonde_search(1.0, [2, 1])


def test_unit_logdet_matches_numpy():
    ang = np.array([0.1, 1.3, 2.9])
    U = np.exp(1j * np.outer(ang, [0, 1, 3]))
    assert unit_vandermonde_logdet(ang, [1, 3]) == pytest.approx(math.log(abs(np.linalg.det(U))))


# ----------------------------------------------------------- covariance

def test_covariance_constant_only():
    au = covariance_logdet(constant_only(), 2.0, [2.0 + 0j])
    assert au.log_det_sigma == pytest.approx(0.0, abs=1e-15) and au.S == 0.0


def test_covariance_degree_one_scalar():
    au = covariance_logdet(DEG1, 3.0, [3.0 + 0j])
    assert au.log_det_sigma == pytest.approx(math.log(10.0), rel=1e-14)
    assert au.log_det_sigma >= au.S == pytest.approx(2 * math.log(3.0))


def test_covariance_matches_qr_oracle_and_bound():
    ra = radial_analysis(HALF, 1.9)
    exps = [int(j) for j in ra.power_set if j > 0]
    pc = vandermonde_search(1.9, exps, 100, 0)
    au = covariance_logdet(HALF, 1.9, pc.points)
    ref = covariance_logdet_qr(HALF.log_weights(1.9, au.K), pc.angles)
    assert au.log_det_sigma == pytest.approx(ref, rel=1e-9)
    assert au.margin >= -1e-6 * max(1.0, abs(au.S))


def test_covariance_projection_reduces_det():
    ra = radial_analysis(HALF, 2.5)
    exps = [int(j) for j in ra.power_set if j > 0]
    pc = vandermonde_search(2.5, exps, 100, 0)
    full = covariance_logdet(HALF, 2.5, pc.points)
    proj = covariance_logdet(HALF, 2.5, pc.points, columns=ra.power_set)
    assert proj.log_det_sigma <= full.log_det_sigma + 1e-9


def test_covariance_points_off_circle():
    with pytest.raises(ValueError):
        covariance_logdet(HALF, 2.0, [1.0 + 0j, 2.0 + 0j])


def test_covariance_singular_configuration():
    with pytest.raises(ConditioningError):
        covariance_logdet(DEG1, 1.0, [1.0 + 0j, 1j, -1.0 + 0j])


# --------------------------------------------------------------- volume

def test_volume_boundary_exact():
    out = volume_bound_audit(1, 1.0, math.e, 0, 0)
    assert out["mc_volume"] == 1.0 and out["bound"] == pytest.approx(1.0) and out["pass"]


def test_volume_precondition():
    with pytest.raises(ValueError):
        volume_bound_audit(4, 1.0, 2.0, 10, 0)


def test_volume_four_against_exact_and_bound():
    out = volume_bound_audit(4, 1.0, 3.0, 1_000_000, 2)
    exact = volume_exact(4, 1.0, 3.0)
    assert out["ci"][0] <= exact <= out["ci"][1]
    assert out["bound"] == pytest.approx(volume_bound(4, 1.0, 3.0), rel=1e-14)
    assert out["bound"] == pytest.approx(62.1536338776137, rel=1e-12)
    assert out["pass"]


def test_volume_two():
    out = volume_bound_audit(2, 1.0, 10.0, 1_000_000, 4)
    assert out["bound"] == pytest.approx(21.2075924419136, rel=1e-12)
    assert out["ci"][0] <= volume_exact(2, 1.0, 10.0) <= out["ci"][1]
    assert out["pass"]
