"""Monte Carlo estimates of the hole probability P(f has no zeros in |z| < r).

Two estimators share the same counter-based coefficient streams:

* ``estimate_naive`` counts holes among untilted draws and reports an
  exact (Clopper-Pearson) interval;
* ``estimate_importance`` rescales each coordinate ``xi_n -> sigma_n xi_n``
  following the dominant-constant-term scenario (big |xi_0|, all other
  coefficients pushed below the size of their class) and reweights by the
  likelihood ratio.

Ambiguous contour scans (|f| too close to zero on the circle) are counted
as not-hole, so the point estimate is biased downward by at most the
reported ambiguous fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import PreconditionError, RadialAnalysis, omega_classes, radial_analysis
from .models import CoefficientModel
from .rng import chunked_map
from .sampler import TruncationPlan, draw_batch, truncation_plan
from .stats import clopper_pearson, log_scale_interval
from .zeros import classify_batch

__all__ = [
    "TiltSchedule",
    "EstimatorReport",
    "tilt_schedule",
    "estimate_naive",
    "estimate_importance",
    "summarize",
]

CHUNK = 1 << 15
LEVEL = 0.99


@dataclass(frozen=True)
class TiltSchedule:
    r: float
    C0: float
    scales: np.ndarray = field(repr=False)
    classes: np.ndarray = field(repr=False)  # 0: const, 1: power set, 2: delta-band, 3: untouched

    @property
    def K(self) -> int:
        return self.scales.size - 1


@dataclass(frozen=True)
class EstimatorReport:
    method: str
    model_id: str
    r: float
    seed: int
    trials: int
    hole_hits: int
    ambiguous_count: int
    weight_sum: float
    weight_sq_sum: float
    p_hat: float
    ci: tuple[float, float]
    p_H_hat: float
    ess: float
    log_p_hat: float
    K: int

    @property
    def ambiguous_fraction(self) -> float:
        return self.ambiguous_count / self.trials

    def record(self) -> dict:
        return {
            "method": self.method,
            "trials": self.trials,
            "hole_hits": self.hole_hits,
            "ambiguous": self.ambiguous_count,
            "p_hat": self.p_hat,
            "ci_lo": self.ci[0],
            "ci_hi": self.ci[1],
            "p_H_hat": self.p_H_hat,
            "ess": self.ess,
            "K": self.K,
        }


def tilt_schedule(model: CoefficientModel, r: float, C0: float = 4.0,
                  K: int | None = None) -> TiltSchedule:
    """Per-coordinate scales of the importance proposal.

    sigma_0 = max(1, C0 m^(1/4)); on N(r)\\{0} sigma_n = min(1, e^(-w_n)/sqrt(m));
    on N~_delta(r)\\N(r) sigma_n = min(1, 1/sqrt(m)); 1 elsewhere.
    """
    ra = radial_analysis(model, r, with_status=False)
    if ra.m_mass < 1:
        raise PreconditionError("tilt schedule needs m(r) >= 1 (degenerate radius)")
    if K is None:
        K = truncation_plan(model, r).K
    m = ra.m_mass
    w = model.log_weights(r, K)
    classes = omega_classes(model, r, K, ra)
    scales = np.ones(K + 1)
    scales[0] = max(1.0, C0 * m ** 0.25)
    sel = classes == 1
    scales[sel] = np.minimum(1.0, np.exp(-w[sel]) / math.sqrt(m))
    scales[classes == 2] = min(1.0, 1.0 / math.sqrt(m))
    return TiltSchedule(r, C0, scales, classes)


def _run(plan: TruncationPlan, r: float, trials: int, seed: int, scales, workers: int):
    def chunk(start, count):
        xi, lw = draw_batch(plan, seed, start, count, scales)
        hole, amb = classify_batch(xi, plan, r)
        return hole, amb, lw

    parts = chunked_map(chunk, trials, CHUNK, workers)
    hole = np.concatenate([p[0] for p in parts])
    amb = np.concatenate([p[1] for p in parts])
    lw = np.concatenate([p[2] for p in parts])
    return hole, amb, lw


def _scaled_sums(logs: np.ndarray):
    """(L, sum e^(x-L), sum e^(2(x-L))) with exact summation; L = -inf if empty."""
    if logs.size == 0:
        return -math.inf, 0.0, 0.0
    L = float(logs.max())
    e = np.exp(logs - L)
    return L, math.fsum(e), math.fsum(e * e)


def estimate_naive(model: CoefficientModel, r: float, trials: int, seed: int,
                   eps_tail: float = 1e-10, eps_fail: float = 1e-12,
                   workers: int = 1) -> EstimatorReport:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    plan = truncation_plan(model, r, eps_tail, eps_fail)
    hole, amb, _ = _run(plan, r, trials, seed, None, workers)
    hits = int(hole.sum())
    p = hits / trials
    return EstimatorReport(
        method="naive", model_id=model.model_id, r=r, seed=seed, trials=trials,
        hole_hits=hits, ambiguous_count=int(amb.sum()),
        weight_sum=float(hits), weight_sq_sum=float(hits),
        p_hat=p, ci=clopper_pearson(hits, trials, LEVEL),
        p_H_hat=-math.log(p) if p > 0 else math.inf,
        ess=float(trials), log_p_hat=math.log(p) if p > 0 else -math.inf, K=plan.K,
    )


def estimate_importance(model: CoefficientModel, r: float, trials: int, seed: int,
                        schedule: TiltSchedule | None = None, C0: float = 4.0,
                        self_normalized: bool = False, eps_tail: float = 1e-10,
                        eps_fail: float = 1e-12, workers: int = 1) -> EstimatorReport:
    """Weighted hole frequency under the tilted proposal.

    The default is the unbiased form ``mean(w_i 1_hole)``; with
    ``self_normalized`` the weighted frequency is divided by ``mean(w_i)``.
    The interval is Clopper-Pearson when all weights equal one and a
    normal approximation on log p otherwise.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    plan = truncation_plan(model, r, eps_tail, eps_fail)
    if schedule is None:
        schedule = tilt_schedule(model, r, C0, plan.K)
    if schedule.K != plan.K:
        raise ValueError(f"schedule covers K={schedule.K} but the plan needs K={plan.K}")
    hole, amb, lw = _run(plan, r, trials, seed, schedule.scales, workers)
    hits = int(hole.sum())

    L_all, a_all, b_all = _scaled_sums(lw)
    ess = a_all * a_all / b_all
    L, A, B = _scaled_sums(lw[hole])
    if hits == 0:
        p, log_p, wsum, wsq = 0.0, -math.inf, 0.0, 0.0
    else:
        denom_log = L_all + math.log(a_all) if self_normalized else math.log(trials)
        log_p = L + math.log(A) - denom_log
        # direct ratio when representable, so unit weights reproduce hits/trials exactly
        if L > -700 and (not self_normalized or L_all > -700):
            denom = math.exp(L_all) * a_all if self_normalized else trials
            p = math.exp(L) * A / denom
        else:
            p = math.exp(log_p)
        wsum, wsq = math.exp(L) * A, math.exp(2 * L) * B

    if ess >= trials:
        ci = clopper_pearson(hits, trials, LEVEL)
    elif hits == 0:
        ci = (0.0, clopper_pearson(0, trials, LEVEL)[1])
    else:
        mean_y = A / trials
        var_y = max(B / trials - mean_y * mean_y, 0.0) * trials / max(trials - 1, 1)
        rel_se = math.sqrt(var_y / trials) / mean_y
        ci = log_scale_interval(p, rel_se * p, LEVEL)
        # the interval is clipped to [0, 1]; keep the reported point inside it
        ci = (min(ci[0], min(p, 1.0)), ci[1])
    return EstimatorReport(
        method="importance-sn" if self_normalized else "importance",
        model_id=model.model_id, r=r, seed=seed, trials=trials, hole_hits=hits,
        ambiguous_count=int(amb.sum()), weight_sum=wsum, weight_sq_sum=wsq,
        p_hat=min(p, 1.0), ci=ci, p_H_hat=-log_p, ess=ess, log_p_hat=log_p, K=plan.K,
    )


def summarize(report: EstimatorReport, analysis: RadialAnalysis, C_band: float = 10.0) -> dict:
    """Compare -log P_hat with S(r) and the bands S - C n log S, S + C sqrt(m) log m."""
    if not math.isclose(report.r, analysis.r):
        raise ValueError("report and analysis refer to different radii")
    S, n, m = analysis.s_weight, analysis.n_count, analysis.m_mass
    lo_term = C_band * n * math.log(S) if S > 0 else 0.0
    hi_term = C_band * math.sqrt(m) * math.log(m) if m > 0 else 0.0
    band_lo, band_hi = S - lo_term, S + hi_term
    ratio = report.p_H_hat / S if S > 0 else None
    return {
        "p_H_hat": report.p_H_hat,
        "S": S,
        "ratio": ratio,
        "band_lo": band_lo,
        "band_hi": band_hi,
        "inside": band_lo <= report.p_H_hat <= band_hi,
    }
