"""Statistical diagnostics on realized functions.

* ``gaussian_law_check``: tail and small-ball frequencies of a single
  standard complex Gaussian against their exact laws;
* ``max_modulus_deviation``: frequencies of unusually large or small
  log M(r) against the bounds exp(-S^2) and exp(-S n);
* ``log_derivative_stats``: the angular log-derivative of |f| on a circle
  for draws that have a hole at a (larger) radius.
"""

from __future__ import annotations

import math

import numpy as np

from .asymptotics import radial_analysis
from .models import CoefficientModel
from .rng import chunked_map, complex_normals, uniforms
from .sampler import circle_values, draw_batch, truncation_plan
from .stats import clopper_pearson
from .zeros import classify_batch

__all__ = ["gaussian_law_check", "max_modulus_deviation", "log_derivative_stats"]

LEVEL = 0.99


def gaussian_law_check(trials: int, seed: int, level: float = LEVEL) -> dict:
    """Empirical P(|xi| >= 1) and P(|xi| <= 1/2) for standard complex Gaussians.

    Exact values: P(|xi| >= 1) = e^-1 and P(|xi| <= 1/2) = 1 - e^(-1/4),
    which lies in the bracket [1/8, 1/4].
    """
    xi = complex_normals(uniforms(seed, "gaussian-law", 0, trials, 2))[:, 0]
    mod = np.abs(xi)
    big = int((mod >= 1).sum())
    small = int((mod <= 0.5).sum())
    big_ci = clopper_pearson(big, trials, level)
    return {
        "trials": trials,
        "seed": seed,
        "p_ge_1": big / trials,
        "p_ge_1_ci": big_ci,
        "p_ge_1_exact": math.exp(-1.0),
        "p_ge_1_pass": big_ci[0] <= math.exp(-1.0) <= big_ci[1],
        "p_le_half": small / trials,
        "p_le_half_exact": -math.expm1(-0.25),
        "p_le_half_pass": 0.125 <= small / trials <= 0.25,
    }


def max_modulus_deviation(model: CoefficientModel, r: float, trials: int, seed: int,
                          eps_tail: float = 1e-10, eps_fail: float = 1e-12,
                          grid_size: int | None = None, workers: int = 1,
                          level: float = LEVEL) -> dict:
    """Frequencies of {log M(r) >= 3 S(r)} and {log M(r) <= -S(r)}.

    A frequency is consistent with its bound when the lower end of its
    exact binomial interval does not exceed the bound.
    """
    ra = radial_analysis(model, r)
    S, n_r = ra.s_weight, ra.n_count
    plan = truncation_plan(model, r, eps_tail, eps_fail)
    need = 8 * (ra.max_index + 1)
    G = grid_size if grid_size is not None else need
    if G < need:
        raise ValueError(f"grid_size must be at least {need}")
    w = plan.weights(r)

    def chunk(start, count):
        xi, _ = draw_batch(plan, seed, start, count)
        vals, scale = circle_values(xi, w, G)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(vals).max(axis=1)) + scale

    logM = np.concatenate(chunked_map(chunk, trials, 1 << 12, workers))
    hi_hits = int((logM >= 3 * S).sum())
    lo_hits = int((logM <= -S).sum())
    hi_ci = clopper_pearson(hi_hits, trials, level)
    lo_ci = clopper_pearson(lo_hits, trials, level)
    # log of the bounds; exp underflows for any sizeable S
    log_hi_bound = -S * S
    log_lo_bound = -S * n_r
    return {
        "r": r,
        "trials": trials,
        "seed": seed,
        "S": S,
        "n": n_r,
        "status": ra.normal_status,
        "log_M_mean": math.fsum(logM) / trials,
        "log_M_min": float(logM.min()),
        "log_M_max": float(logM.max()),
        "freq_high": hi_hits / trials,
        "freq_high_ci": hi_ci,
        "log_bound_high": log_hi_bound,
        "pass_high": hi_ci[0] <= math.exp(log_hi_bound),
        "freq_low": lo_hits / trials,
        "freq_low_ci": lo_ci,
        "log_bound_low": log_lo_bound,
        "pass_low": lo_ci[0] <= math.exp(log_lo_bound),
    }


def log_derivative_stats(model: CoefficientModel, r: float, rho: float, trials: int,
                         seed: int, grid_size: int = 1024, eps_tail: float = 1e-10,
                         eps_fail: float = 1e-12, workers: int = 1) -> dict:
    """max_phi |d/dphi log|f(rho e^{i phi})|| over draws with a hole of radius r.

    Draws are untilted and kept when the hole test at ``r`` passes
    (rejection sampling), so only small ``r`` is practical. ``rho`` must
    not exceed ``r``, which keeps the circle zero-free for accepted draws.
    """
    if not 0 < rho <= r:
        raise ValueError("need 0 < rho <= r")
    plan = truncation_plan(model, r, eps_tail, eps_fail)
    w = plan.weights(rho)
    nn = np.arange(plan.K + 1)

    def chunk(start, count):
        xi, _ = draw_batch(plan, seed, start, count)
        hole, _ = classify_batch(xi, plan, r)
        xi = xi[hole]
        if not xi.size:
            return np.empty(0)
        f, _ = circle_values(xi, w, grid_size)
        zf, _ = circle_values(xi * nn, w, grid_size)
        return np.abs((zf / f).imag).max(axis=1)

    prof = np.concatenate(chunked_map(chunk, trials, 1 << 12, workers))
    out = {"r": r, "rho": rho, "trials": trials, "seed": seed, "accepted": int(prof.size)}
    if prof.size:
        out.update({
            "mean": math.fsum(prof) / prof.size,
            "median": float(np.median(prof)),
            "q90": float(np.quantile(prof, 0.9)),
            "max": float(prof.max()),
            "finite": bool(np.isfinite(prof).all()),
        })
    return out
