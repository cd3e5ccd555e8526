"""Deterministic radial functionals of a coefficient model.

For a radius r the weight of index n is ``w_n(r) = log(a_n r^n)``. The
"power set" N(r) collects indices with non-negative weight, and

    S(r) = 2 * sum_{n in N(r)} w_n(r),   m(r) = sum_{n in N(r)} n,
    n(r) = #N(r),                        delta(r) = m(r)^(-1/4).

A radius is *normal* when ``m(r e^-delta) > 3/4 m(r)`` and
``m(r e^delta) < 5/4 m(r)``; *degenerate* when m(r) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .models import CoefficientModel

__all__ = [
    "RadialAnalysis",
    "NormalityRecord",
    "ScanResult",
    "PreconditionError",
    "log_coeff",
    "log_weight",
    "radial_analysis",
    "power_set_delta",
    "omega_classes",
    "is_normal",
    "exceptional_scan",
    "s_lower_audit",
    "s_growth_audit",
]

NORMAL, EXCEPTIONAL, DEGENERATE = "normal", "exceptional", "degenerate"


class PreconditionError(ValueError):
    """An operation was called outside the regime where it is defined."""


@dataclass(frozen=True)
class RadialAnalysis:
    r: float
    weights: np.ndarray  # w_n(r) for n = 0..scan_limit
    power_set: np.ndarray
    n_count: int
    m_mass: int
    s_weight: float
    delta: float | None
    normal_status: str | None = None

    @property
    def max_index(self) -> int:
        return int(self.power_set.max())

    def record(self) -> dict:
        return {
            "r": self.r,
            "n": self.n_count,
            "m": self.m_mass,
            "S": self.s_weight,
            "delta": self.delta,
            "status": self.normal_status,
        }


@dataclass(frozen=True)
class NormalityRecord:
    status: str
    m: int
    delta: float | None
    m_inner: int | None  # m(r e^-delta)
    m_outer: int | None  # m(r e^+delta)
    inner_bound: float | None  # 3/4 m(r)
    outer_bound: float | None  # 5/4 m(r)


def log_coeff(model: CoefficientModel, n: int) -> float:
    if n < 0:
        raise ValueError(f"negative coefficient index {n}")
    return model.log_a(int(n))


def log_weight(model: CoefficientModel, n: int, r: float) -> float:
    la = log_coeff(model, n)
    if n == 0:
        return 0.0
    if la == -math.inf:
        return -math.inf
    return la + n * math.log(r)


def _analysis(model: CoefficientModel, r: float) -> RadialAnalysis:
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    limit = model.cutoff_hint(r)
    w = model.log_weights(r, limit)
    # the hint must leave a strictly negative envelope at the scan end
    if not model.finite_support and limit > 0 and w[limit] >= 0:
        raise RuntimeError("support scan exhausted: envelope did not turn negative")
    idx = np.flatnonzero(w >= 0)
    m = int(idx.sum())
    S = float(2.0 * math.fsum(w[idx]))
    delta = m ** -0.25 if m >= 1 else None
    return RadialAnalysis(r, w, idx, int(idx.size), m, S, delta)


def radial_analysis(model: CoefficientModel, r: float, with_status: bool = True) -> RadialAnalysis:
    """All radial functionals at ``r``; ``with_status`` also runs the normality test."""
    ra = _analysis(model, r)
    if not with_status:
        return ra
    status = is_normal(model, r, _ra=ra).status
    return RadialAnalysis(ra.r, ra.weights, ra.power_set, ra.n_count, ra.m_mass,
                          ra.s_weight, ra.delta, status)


def power_set_delta(model: CoefficientModel, r: float, delta: float) -> np.ndarray:
    """N_delta(r) = {n : b_n(r) >= -delta}, with b_0 = 0.

    Uses ``b_n(r) + delta = b_n(r e^delta)``, so ``N_delta(r) = N(r e^delta)``
    (and ``N_{-delta}(r) = N(r e^{-delta})``).
    """
    return _analysis(model, r * math.exp(delta)).power_set


def omega_classes(model: CoefficientModel, r: float, K: int,
                  ra: RadialAnalysis | None = None) -> np.ndarray:
    """Label indices 0..K by class of the dominant-constant-term event.

    0 for n = 0, 1 for N(r)\\{0}, 2 for N~_delta(r)\\N(r) where
    N~_delta(r) = N_delta(r) ∪ {n < sqrt(m)}, and 3 for everything else.
    """
    ra = ra if ra is not None else _analysis(model, r)
    if ra.m_mass < 1:
        raise PreconditionError("index classes need m(r) >= 1")
    n = np.arange(K + 1)
    in_N = np.isin(n, ra.power_set)
    band = np.isin(n, power_set_delta(model, r, ra.delta)) | (n < math.sqrt(ra.m_mass))
    classes = np.full(K + 1, 3)
    classes[band & ~in_N] = 2
    classes[in_N] = 1
    classes[0] = 0
    return classes


def is_normal(model: CoefficientModel, r: float, _ra: RadialAnalysis | None = None) -> NormalityRecord:
    ra = _ra if _ra is not None else _analysis(model, r)
    m = ra.m_mass
    if m == 0:
        return NormalityRecord(DEGENERATE, 0, None, None, None, None, None)
    d = ra.delta
    m_in = _analysis(model, r * math.exp(-d)).m_mass
    m_out = _analysis(model, r * math.exp(d)).m_mass
    ok = m_in > 0.75 * m and m_out < 1.25 * m
    return NormalityRecord(NORMAL if ok else EXCEPTIONAL, m, d, m_in, m_out, 0.75 * m, 1.25 * m)


@dataclass(frozen=True)
class ScanResult:
    grid: np.ndarray
    status: list
    intervals: list  # [(lo, hi), ...] maximal flagged runs
    log_measure: float  # sum of log(hi/lo) over intervals


def default_step(model: CoefficientModel, r: float) -> float:
    """Log-step of the scan grid: min(delta/4, 1/4), or 1/4 at degenerate radii."""
    m = _analysis(model, r).m_mass
    if m == 0:
        return 0.25
    return min(m ** -0.25 / 4.0, 0.25)


def exceptional_scan(model: CoefficientModel, r_min: float, r_max: float,
                     step_rule: Callable[[CoefficientModel, float], float] = default_step,
                     flag_degenerate: bool = True) -> ScanResult:
    """Flag non-normal radii on a geometric grid over ``[r_min, r_max]``.

    Each grid point owns the cell up to the next point; flagged cells are
    merged into maximal intervals and their logarithmic lengths summed.
    Degenerate points count as flagged unless ``flag_degenerate`` is off.
    """
    if not (1 <= r_min < r_max):
        raise ValueError("exceptional_scan needs 1 <= r_min < r_max (empty grid)")
    grid = [r_min]
    while grid[-1] < r_max:
        h = step_rule(model, grid[-1])
        if not h > 0:
            raise ValueError("step_rule must return a positive log-step")
        grid.append(min(grid[-1] * math.exp(h), r_max))
    grid = np.asarray(grid)
    status = [is_normal(model, float(r)).status for r in grid[:-1]]
    flags = [s == EXCEPTIONAL or (flag_degenerate and s == DEGENERATE) for s in status]
    intervals = []
    i = 0
    while i < len(flags):
        if flags[i]:
            j = i
            while j + 1 < len(flags) and flags[j + 1]:
                j += 1
            intervals.append((float(grid[i]), float(grid[j + 1])))
            i = j + 1
        else:
            i += 1
    measure = math.fsum(math.log(hi / lo) for lo, hi in intervals)
    return ScanResult(grid, status, intervals, measure)


def s_lower_audit(model: CoefficientModel, r: float, strict: bool = True) -> dict:
    """Check S(r) >= (3/2) m(r)^(3/4) at a normal radius.

    The inequality is only claimed at normal radii, so ``strict`` refuses
    anything else; ``strict=False`` evaluates it regardless.
    """
    ra = _analysis(model, r)
    norm = is_normal(model, r, _ra=ra)
    if strict and norm.status != NORMAL:
        raise PreconditionError(f"r={r} is {norm.status}, lower audit requires a normal radius")
    bound = 1.5 * ra.m_mass ** 0.75
    weak = ra.n_count ** 1.5
    return {
        "r": r,
        "S": ra.s_weight,
        "bound": bound,
        "pass": ra.s_weight >= bound,
        "n_pow": weak,
        "ratio_n": ra.s_weight / weak,
        "status": norm.status,
    }


def s_growth_audit(model: CoefficientModel, r: float, gamma: float) -> dict:
    """Check S((1-gamma) r) >= S(r) - 4 gamma m(r) for gamma in (0, 1/2)."""
    if not 0 < gamma < 0.5:
        raise ValueError(f"gamma must lie in (0, 1/2), got {gamma}")
    r_in = (1 - gamma) * r
    outer = _analysis(model, r)
    inner = _analysis(model, r_in)
    slack = 4 * gamma * outer.m_mass
    return {
        "r": r,
        "gamma": gamma,
        "S": outer.s_weight,
        "S_inner": inner.s_weight,
        "slack": slack,
        "pass": inner.s_weight >= outer.s_weight - slack,
    }
