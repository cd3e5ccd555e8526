"""Random coefficient draws, truncation plans and scaled evaluation of f.

Realizations are ``f(z) = sum_n xi_n a_n z^n`` truncated at an index K
chosen so that, with probability at least ``1 - eps_fail``, the neglected
tail is below ``eps_tail`` in sup-norm on the closed disk of radius r.
Evaluation always factors out ``exp(max_n w_n(|z|))`` so that very large
weights never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .asymptotics import radial_analysis
from .models import CoefficientModel
from .rng import complex_normals, uniforms

__all__ = [
    "TruncationPlan",
    "SampleDraw",
    "PlanError",
    "ZeroOnContour",
    "truncation_plan",
    "draw",
    "draw_batch",
    "tilt_log_weight",
    "evaluate",
    "circle_values",
    "max_modulus",
    "log_deriv_profile",
]

# tail sums are carried until terms fall this far (in log) below eps_tail
_TAIL_DEPTH = 80.0
_MAX_K = 200_000


class PlanError(RuntimeError):
    """Truncation plan construction failed."""


class ZeroOnContour(ArithmeticError):
    """f vanishes (numerically) at a sampled contour point."""


@dataclass(frozen=True)
class TruncationPlan:
    r: float
    K: int
    eps_tail: float
    eps_fail: float
    # tau[j - 1] is the threshold for index K + j; empty for finite support
    tau: np.ndarray = field(repr=False)
    log_tail_sum: float  # log of sum_{n>K} a_n r^n tau_n (-inf when no tail)
    log_a: np.ndarray = field(repr=False)  # log a_n for n = 0..K

    @property
    def has_tail(self) -> bool:
        return self.tau.size > 0

    def threshold(self, n: int) -> float:
        j = n - self.K
        if j < 1:
            raise ValueError("thresholds are defined for n > K only")
        return math.sqrt(math.log(j * j * math.pi ** 2 / (6.0 * self.eps_fail)))

    def weights(self, radius: float) -> np.ndarray:
        """w_n(radius) for n = 0..K."""
        n = np.arange(self.K + 1)
        if radius == 0:
            return np.where(n == 0, 0.0, -np.inf)
        with np.errstate(invalid="ignore"):
            w = self.log_a + n * math.log(radius)
        return np.where(np.isneginf(self.log_a), -np.inf, w)


@dataclass(frozen=True)
class SampleDraw:
    plan: TruncationPlan
    xi: np.ndarray
    log_weight: float = 0.0
    stream_id: int = 0


def _tau(j: np.ndarray, eps_fail: float) -> np.ndarray:
    return np.sqrt(np.log(j.astype(float) ** 2 * math.pi ** 2 / (6.0 * eps_fail)))


def truncation_plan(model: CoefficientModel, r: float, eps_tail: float = 1e-6,
                    eps_fail: float = 1e-9) -> TruncationPlan:
    """Smallest K >= max N(r) whose union-bound tail fits ``eps_tail``.

    Thresholds ``tau_n = sqrt(log((n-K)^2 pi^2 / (6 eps_fail)))`` make
    ``sum_{n>K} P(|xi_n| >= tau_n) = sum exp(-tau_n^2) <= eps_fail``; on the
    complement the tail is at most ``sum_{n>K} a_n r^n tau_n``.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    if not 0 < eps_tail <= 1:
        raise ValueError("eps_tail must lie in (0, 1]")
    if not 0 < eps_fail < 1:
        raise ValueError("eps_fail must lie in (0, 1)")
    ra = radial_analysis(model, r, with_status=False)
    k_min = ra.max_index
    if model.finite_support:
        K = model.degree
        return TruncationPlan(r, K, eps_tail, eps_fail, np.empty(0), -math.inf,
                              model.log_a(np.arange(K + 1)))
    try:
        horizon = model.horizon(r, math.log(eps_tail) - _TAIL_DEPTH)
    except RuntimeError as exc:
        raise PlanError(f"plan construction failed: {exc}") from exc
    if horizon > _MAX_K:
        raise PlanError(f"plan construction failed: horizon {horizon} exceeds {_MAX_K}")
    top = horizon + 1
    w = model.log_weights(r, top)
    log_eps = math.log(eps_tail)
    for K in range(k_min, top):
        j = np.arange(1, top - K + 1)
        terms = w[K + 1:] + np.log(_tau(j, eps_fail))
        finite = terms[np.isfinite(terms)]
        lts = float(logsumexp(finite)) if finite.size else -math.inf
        if lts <= log_eps:
            return TruncationPlan(r, K, eps_tail, eps_fail, _tau(j, eps_fail), lts,
                                  model.log_a(np.arange(K + 1)))
    raise PlanError("plan construction failed: tail never fell below eps_tail")


def tilt_log_weight(eta: np.ndarray, scales: np.ndarray | None) -> np.ndarray:
    """Log-likelihood ratio of the untilted law against the scaled one.

    The tilted coordinate is ``xi_n = scale_n * eta_n`` with eta standard;
    per coordinate ``log(p/q) = 2 log s - |xi|^2 (1 - s^-2)
    = 2 log s - |eta|^2 (s^2 - 1)``. Unit scales give exactly 0.
    """
    if scales is None:
        return np.zeros(eta.shape[:-1])
    s2 = np.asarray(scales, dtype=float) ** 2
    e2 = eta.real ** 2 + eta.imag ** 2
    return (np.log(s2) - e2 * (s2 - 1.0)).sum(axis=-1)


def draw_batch(plan: TruncationPlan, seed: int, start: int, count: int,
               scales: np.ndarray | None = None, purpose: str = "coefficients"):
    """Coefficient vectors for streams start..start+count-1.

    Returns ``(xi, log_weight)`` with ``xi`` of shape ``(count, K+1)``.
    """
    width = plan.K + 1
    eta = complex_normals(uniforms(seed, purpose, start, count, 2 * width))
    if scales is None:
        return eta, np.zeros(count)
    scales = np.asarray(scales, dtype=float)
    if scales.shape != (width,):
        raise ValueError(f"scale vector has length {scales.shape}, plan needs {width}")
    return eta * scales, tilt_log_weight(eta, scales)


def draw(model: CoefficientModel, plan: TruncationPlan, seed: int, stream_id: int,
         scales: np.ndarray | None = None) -> SampleDraw:
    xi, lw = draw_batch(plan, seed, stream_id, 1, scales)
    return SampleDraw(plan, xi[0], float(lw[0]), stream_id)


def _scaled_sum(xi, w, angle):
    w = np.where(xi != 0, w, -np.inf)
    finite = np.isfinite(w)
    if not finite.any():
        return 0j, 0.0
    scale = float(w[finite].max())
    n = np.arange(w.size)
    c = np.where(finite, xi * np.exp(np.where(finite, w - scale, 0.0)), 0.0)
    return complex(np.sum(c * np.exp(1j * n * angle))), scale


def evaluate(sample: SampleDraw, model: CoefficientModel | None, z: complex) -> dict:
    """log|f(z)| and arg f(z) of the truncated series.

    ``model`` is accepted for interface symmetry; the plan already caches
    the coefficients it needs.
    """
    plan = sample.plan
    rho = abs(z)
    if rho > plan.r * (1 + 1e-12):
        raise ValueError("evaluation point lies outside the planned disk")
    val, scale = _scaled_sum(sample.xi, plan.weights(rho), np.angle(z) if rho > 0 else 0.0)
    if val == 0:
        return {"log_modulus": -math.inf, "phase": None}
    return {"log_modulus": math.log(abs(val)) + scale, "phase": math.atan2(val.imag, val.real)}


def circle_values(xi: np.ndarray, w: np.ndarray, grid_size: int,
                  derivative: bool = False):
    """Scaled values of the truncated series on a uniform circle grid.

    ``xi`` is ``(K+1,)`` or ``(batch, K+1)`` and ``w`` holds the weights at
    the circle radius. Returns ``(values, scale)`` where the true values are
    ``values * exp(scale)`` at angles ``2 pi j / grid_size`` (counter-
    clockwise). Coefficients beyond the grid size are folded, which is exact
    on the roots of unity.
    """
    finite = np.isfinite(w)
    scale = float(w[finite].max()) if finite.any() else 0.0
    amp = np.where(finite, np.exp(np.where(finite, w - scale, 0.0)), 0.0)
    if derivative:
        amp = amp * np.arange(w.size)
    c = np.atleast_2d(xi) * amp
    K1 = c.shape[-1]
    if K1 > grid_size:
        pad = -K1 % grid_size
        c = np.pad(c, ((0, 0), (0, pad))).reshape(c.shape[0], -1, grid_size).sum(axis=1)
    vals = np.fft.ifft(c, n=grid_size, axis=-1) * grid_size
    if np.ndim(xi) == 1:
        vals = vals[0]
    return vals, scale


def max_modulus(sample: SampleDraw, model: CoefficientModel | None, r: float,
                grid_size: int | None = None) -> float:
    """log M(r) estimated as the maximum of log|f| over a uniform grid on |z| = r."""
    plan = sample.plan
    n_max = radial_analysis(model, r, with_status=False).max_index if model is not None else plan.K
    need = 8 * (n_max + 1)
    if grid_size is None:
        grid_size = need
    elif grid_size < need:
        raise ValueError(f"grid_size must be at least {need}")
    # scale by the largest weight actually carried, so pinned draws stay exact
    w = np.where(sample.xi != 0, plan.weights(r), -np.inf)
    vals, scale = circle_values(sample.xi, w, grid_size)
    peak = np.abs(vals).max()
    return -math.inf if peak == 0 else math.log(peak) + scale


def log_deriv_profile(sample: SampleDraw, model: CoefficientModel | None, rho: float,
                      grid_size: int = 1024) -> float:
    """max over the grid of |d/dphi log|f(rho e^{i phi})|| = |Im(z f'(z) / f(z))|."""
    w = sample.plan.weights(rho)
    f, _ = circle_values(sample.xi, w, grid_size)
    zf, _ = circle_values(sample.xi, w, grid_size, derivative=True)
    if np.any(f == 0):
        raise ZeroOnContour(f"f vanishes on the circle of radius {rho}")
    return float(np.abs((zf / f).imag).max())
