"""Interval estimates for Monte Carlo frequencies."""

from __future__ import annotations

import math

from scipy.stats import beta, norm

__all__ = ["clopper_pearson", "z_value"]


def z_value(level: float) -> float:
    return float(norm.ppf(0.5 + level / 2.0))


def clopper_pearson(successes: int, trials: int, level: float = 0.99) -> tuple[float, float]:
    """Exact two-sided binomial interval."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    a = 1.0 - level
    lo = 0.0 if successes == 0 else float(beta.ppf(a / 2, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(beta.ppf(1 - a / 2, successes + 1, trials - successes))
    return lo, hi


def covers(ci: tuple[float, float], value: float) -> bool:
    return ci[0] <= value <= ci[1]


def log_scale_interval(p: float, se: float, level: float = 0.99) -> tuple[float, float]:
    """Normal-approximation interval for p built on log p (delta method)."""
    if p <= 0:
        return 0.0, 0.0
    half = z_value(level) * se / p
    return p * math.exp(-half), min(1.0, p * math.exp(half))
