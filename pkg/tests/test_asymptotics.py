import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gafhole.asymptotics import (
    PreconditionError,
    exceptional_scan,
    is_normal,
    log_coeff,
    log_weight,
    power_set_delta,
    radial_analysis,
    s_growth_audit,
    s_lower_audit,
)
from gafhole.models import (
    constant_only,
    explicit_table,
    gamma_power,
    lacunary_gamma,
    model_from_dict,
    model_to_dict,
)

from oracles import log_a_gamma, radial_oracle

HALF = gamma_power(0.5)
TABLE_02 = explicit_table([0.0, -math.inf, 0.0])
LACUNARY = lacunary_gamma(base=2)


# --------------------------------------------------------------- models

def test_log_coeff_examples():
    assert log_coeff(HALF, 0) == 0.0
    assert log_coeff(HALF, 4) == pytest.approx(-1.5890269151739728, rel=1e-14)
    assert log_coeff(LACUNARY, 3) == -math.inf
    assert log_coeff(LACUNARY, 4) == pytest.approx(-math.lgamma(5))


def test_log_coeff_negative_index():
    with pytest.raises(ValueError):
        log_coeff(HALF, -1)


def test_explicit_table_needs_unit_constant():
    with pytest.raises(ValueError):
        explicit_table([0.5, 0.0])


def test_model_roundtrip():
    for mdl in (HALF, TABLE_02, LACUNARY, lacunary_gamma([3, 5]), constant_only()):
        assert model_from_dict(model_to_dict(mdl)) == mdl


def test_model_from_dict_names_field():
    with pytest.raises(ValueError, match="model.alpha"):
        model_from_dict({"kind": "gamma-power"})


# ---------------------------------------------------------- log_weight

def test_log_weight_examples():
    assert log_weight(HALF, 0, 3.7) == 0.0
    assert log_weight(HALF, 2, 1.5) == pytest.approx(0.464356625936356, rel=1e-12)
    # the 40-digit oracle gives 9 log 1.5 - lgamma(10)/2
    w9 = log_weight(HALF, 9, 1.5)
    assert w9 == pytest.approx(-2.75172776706726, rel=1e-12)
    assert 9 not in radial_analysis(HALF, 1.5).power_set


# ------------------------------------------------------ radial_analysis

def test_radial_analysis_gamma_half():
    ra = radial_analysis(HALF, 1.5)
    assert list(ra.power_set) == [0, 1, 2, 3, 4]
    assert (ra.n_count, ra.m_mass) == (5, 10)
    assert ra.s_weight == pytest.approx(2.44634168202734, rel=1e-12)


@pytest.mark.parametrize("r,S,n,m", [(1.8, 7.65733649096091, 7, 21),
                                     (2.0, 13.7471293015773, 9, 36),
                                     (10.0, 17602.6966361599, 269, 36046)])
def test_radial_analysis_against_mp_oracle(r, S, n, m):
    ra = radial_analysis(HALF, r)
    assert ra.s_weight == pytest.approx(S, rel=1e-12)
    assert (ra.n_count, ra.m_mass) == (n, m)


def test_radial_analysis_constant_only():
    ra = radial_analysis(constant_only(), 7.0)
    assert list(ra.power_set) == [0]
    assert (ra.n_count, ra.m_mass, ra.s_weight, ra.delta) == (1, 0, 0.0, None)
    assert ra.record()["delta"] is None


def test_radial_analysis_table():
    ra = radial_analysis(TABLE_02, 2.0)
    assert list(ra.power_set) == [0, 2]
    assert ra.m_mass == 2
    assert ra.s_weight == pytest.approx(4 * math.log(2), rel=1e-15)


def test_s_leading_order_at_ten():
    S = radial_analysis(HALF, 10.0).s_weight
    assert 0.95 <= 4 * S / (math.e ** 2 * 1e4) <= 1.0


# ------------------------------------------------------------ normality

def test_normality_literal_constants():
    # with the 3/4 and 5/4 windows, 1/sqrt(n!) becomes normal only near r = 13.1
    assert is_normal(HALF, 5.0).status == "exceptional"
    assert is_normal(HALF, 13.0).status == "exceptional"
    for r in (14.0, 15.0, 20.0):
        rec = is_normal(HALF, r)
        assert rec.status == "normal"
        assert rec.m_inner > rec.inner_bound and rec.m_outer < rec.outer_bound


def test_normality_lacunary_jump():
    # index 2^k enters N(r) where k log r = lgamma(2^k + 1); scan a delta window there
    k = 4
    r_entry = math.exp(math.lgamma(2 ** k + 1) / 2 ** k)
    rec = is_normal(LACUNARY, r_entry * 1.0001)
    assert rec.status == "exceptional"
    assert rec.m_inner <= rec.inner_bound


def test_normality_degenerate():
    assert is_normal(constant_only(), 3.0).status == "degenerate"


def test_scan_regular_model_clean_range():
    res = exceptional_scan(HALF, 14.0, 30.0)
    assert res.intervals == [] and res.log_measure == 0.0


def test_scan_regular_model_small_radii_flagged():
    res = exceptional_scan(HALF, 2.0, 10.0)
    assert len(res.intervals) == 1
    assert res.log_measure == pytest.approx(math.log(5.0))


def test_scan_lacunary_flags_entry_radii():
    res = exceptional_scan(LACUNARY, 2.0, 64.0)
    assert res.intervals
    entries = [math.exp(math.lgamma(2 ** k + 1) / 2 ** k) for k in range(1, 6)]
    covered = [any(lo <= e <= hi for lo, hi in res.intervals) for e in entries if 2 <= e < 64]
    assert all(covered)


def test_scan_constant_only_degenerate_measure():
    res = exceptional_scan(constant_only(), 2.0, 4.0)
    assert set(res.status) == {"degenerate"}
    assert res.log_measure == pytest.approx(math.log(2.0), rel=1e-14)
    assert exceptional_scan(constant_only(), 2.0, 4.0, flag_degenerate=False).intervals == []


def test_scan_grid_step_bounded_by_delta():
    res = exceptional_scan(HALF, 3.0, 6.0)
    for a, b in zip(res.grid[:-2], res.grid[1:-1]):
        d = radial_analysis(HALF, a).delta
        assert math.log(b / a) <= min(d / 4, 0.25) + 1e-12


def test_scan_empty_grid():
    with pytest.raises(ValueError):
        exceptional_scan(HALF, 5.0, 5.0)
    with pytest.raises(ValueError):
        exceptional_scan(HALF, 0.5, 5.0)


# --------------------------------------------------------------- audits

def test_s_lower_audit_normal_radius():
    out = s_lower_audit(HALF, 14.0)
    assert out["pass"] and out["status"] == "normal"


@pytest.mark.parametrize("mdl,r", [(HALF, 5.0), (HALF, 10.0), (gamma_power(1.0), 6.0)])
def test_s_lower_audit_values_at_non_normal_radii(mdl, r):
    # these radii are not normal, so the strict audit refuses them;
    # the inequality is still evaluated without the precondition
    with pytest.raises(PreconditionError):
        s_lower_audit(mdl, r)
    assert s_lower_audit(mdl, r, strict=False)["pass"]


def test_s_growth_audit_examples():
    assert s_growth_audit(HALF, 5.0, 0.1)["pass"]
    assert s_growth_audit(TABLE_02, 2.0, 0.25)["pass"]
    out = s_growth_audit(HALF, 1.5, 1e-9)
    assert out["S_inner"] == pytest.approx(out["S"], abs=1e-7)


def test_s_growth_audit_gamma_range():
    for g in (0.0, 0.5, -0.1):
        with pytest.raises(ValueError):
            s_growth_audit(HALF, 5.0, g)


# ----------------------------------------------------------- properties

models = st.one_of(
    st.floats(0.2, 2.0).map(gamma_power),
    st.integers(2, 4).map(lambda b: lacunary_gamma(base=b)),
    st.lists(st.one_of(st.floats(-6.0, 3.0), st.just(-math.inf)), min_size=1, max_size=12)
      .map(lambda v: explicit_table([0.0] + v)),
    st.just(constant_only()),
)


@settings(max_examples=150, deadline=None)
@given(models, st.floats(1.0, 12.0), st.floats(0.0, 1.0))
def test_monotone_in_radius(mdl, r, frac):
    r_small = 1.0 + frac * (r - 1.0)
    big, small = radial_analysis(mdl, r, False), radial_analysis(mdl, r_small, False)
    assert set(small.power_set) <= set(big.power_set)
    assert small.s_weight <= big.s_weight + 1e-12
    assert small.m_mass <= big.m_mass and small.n_count <= big.n_count
    assert big.s_weight >= 0


@settings(max_examples=150, deadline=None)
@given(models, st.floats(1.0, 12.0))
def test_mass_lower_bound(mdl, r):
    ra = radial_analysis(mdl, r, False)
    n = ra.n_count
    assert ra.m_mass >= n * (n - 1) // 2


def _set_agrees(w, d, got):
    """{n : w_n - n d >= 0} equals ``got`` up to indices that are float ties."""
    n = np.arange(w.size)
    shifted = np.where(n == 0, 0.0, w - n * d)
    direct = set(np.flatnonzero(shifted >= 0))
    for k in direct ^ set(got):
        assert abs(shifted[k]) < 1e-9, k


@settings(max_examples=100, deadline=None)
@given(models, st.floats(1.0, 12.0), st.floats(0.01, 1.0))
def test_shifted_power_set_identity(mdl, r, d):
    """N_{-d}(r) = {n : b_n(r) >= d} coincides with N(r e^{-d})."""
    w = radial_analysis(mdl, r, False).weights
    _set_agrees(w, d, power_set_delta(mdl, r, -d))


@settings(max_examples=100, deadline=None)
@given(models, st.floats(1.0, 12.0), st.floats(0.01, 1.0))
def test_widened_power_set_identity(mdl, r, d):
    """N_d(r) = {n : b_n(r) >= -d} coincides with N(r e^{d})."""
    w = radial_analysis(mdl, r * math.exp(d), False).weights
    n = np.arange(w.size)
    # weights at r, restricted to the window scanned at r e^d
    w_r = np.where(np.isfinite(w), w - n * d, -np.inf)
    _set_agrees(w_r, -d, power_set_delta(mdl, r, d))


@settings(max_examples=1000, deadline=None)
@given(models, st.floats(2.05, 12.0), st.floats(1e-4, 0.499))
def test_growth_lemma_property(mdl, r, gamma):
    assert s_growth_audit(mdl, r, gamma)["pass"]


@settings(max_examples=60, deadline=None)
@given(st.floats(0.3, 1.5), st.floats(1.2, 6.0))
def test_s_matches_mp_oracle(alpha, r):
    S, N, m = radial_oracle(lambda n: log_a_gamma(n, alpha), r)
    ra = radial_analysis(gamma_power(alpha), r, False)
    assert ra.s_weight == pytest.approx(S, rel=1e-10, abs=1e-10)
    assert list(ra.power_set) == N and ra.m_mass == m
