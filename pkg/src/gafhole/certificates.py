"""Numerical certificates for the constructive bounds behind the hole asymptotics.

* ``omega_log_prob``: exact log-probability of the dominant-constant-term
  event (a product of independent one-dimensional Gaussian events);
* ``conditional_hole_check``: draws from that event and counts holes;
* ``vandermonde_search`` / ``covariance_logdet``: point sets on a circle
  with a large generalized Vandermonde determinant, and the resulting
  lower bound log det Sigma >= S(rho) for the covariance of f at those points;
* ``volume_bound_audit``: Monte Carlo check of the volume bound for
  {0 <= r_j <= t, prod r_j <= s}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy.special import logsumexp

from .asymptotics import PreconditionError, omega_classes, power_set_delta, radial_analysis
from .models import CoefficientModel
from .rng import chunked_map, uniforms
from .sampler import truncation_plan
from .stats import clopper_pearson
from .zeros import classify_batch

__all__ = [
    "OmegaCertificate",
    "PointConfiguration",
    "CovarianceAudit",
    "SearchExhausted",
    "ConditioningError",
    "omega_log_prob",
    "omega_thresholds",
    "omega_event",
    "conditional_hole_check",
    "vandermonde_search",
    "unit_vandermonde_logdet",
    "vandermonde_mean_square",
    "conditional_draws",
    "covariance_logdet",
    "volume_bound_audit",
]

# terms of the (iv) product are dropped once below this size
_IV_CUTOFF = 1e-300


class SearchExhausted(RuntimeError):
    def __init__(self, msg, best):
        super().__init__(msg)
        self.best = best


class ConditioningError(ArithmeticError):
    def __init__(self, msg, partial_logdet):
        super().__init__(msg)
        self.partial_logdet = partial_logdet


@dataclass(frozen=True)
class OmegaCertificate:
    r: float
    C0: float
    log_prob: float
    components: dict
    S: float
    margin: float
    m: int

    def record(self) -> dict:
        rec = {"r": self.r, "C0": self.C0, "log_prob": self.log_prob, "S": self.S,
               "margin": self.margin, "m": self.m}
        rec.update({f"comp_{k}": v for k, v in self.components.items()})
        return rec


def omega_log_prob(model: CoefficientModel, r: float, C0: float = 4.0) -> OmegaCertificate:
    """Exact log P of the event

    (i)   |xi_0| >= C0 m^(1/4),
    (ii)  |xi_n| <= e^(-w_n) / sqrt(m)        for n in N(r) \\ {0},
    (iii) |xi_n| <= 1 / sqrt(m)               for n in N~_delta(r) \\ N(r),
    (iv)  |xi_n| <= e^(delta n / 2)           for every other n,

    with N~_delta(r) = N_delta(r) ∪ {n < sqrt(m)} and P(|xi| <= x) = 1 - e^(-x^2).
    """
    ra = radial_analysis(model, r, with_status=False)
    m = ra.m_mass
    if m < 1:
        raise PreconditionError("omega event needs m(r) >= 1 (degenerate radius)")
    d = ra.delta
    # (iv) terms are ~ -exp(-e^(delta n)) and vanish past the first bound;
    # the range must also cover every index of N_delta(r)
    n_end = max(math.ceil(math.log(-math.log(_IV_CUTOFF)) / d) + 1,
                int(power_set_delta(model, r, d).max()) + 1)
    classes = omega_classes(model, r, n_end, ra)
    n = np.arange(n_end + 1)
    w = model.log_weights(r, n_end)

    comp_i = -C0 * C0 * math.sqrt(m)
    sel = classes == 1
    log_x = -2.0 * w[sel] - math.log(m)
    # log(1 - e^-x) -> log x once x is tiny
    comp_ii = math.fsum(np.where(log_x < -40, log_x,
                                 np.log(-np.expm1(-np.exp(log_x)))))
    comp_iii = int((classes == 2).sum()) * math.log(-math.expm1(-1.0 / m))
    x = np.exp(d * n[classes == 3])
    iv = np.log1p(-np.exp(-x))
    comp_iv = math.fsum(iv[np.abs(iv) >= _IV_CUTOFF])
    log_prob = math.fsum([comp_i, comp_ii, comp_iii, comp_iv])
    comps = {"i": comp_i, "ii": comp_ii, "iii": comp_iii, "iv": comp_iv}
    return OmegaCertificate(r, C0, log_prob, comps, ra.s_weight, -log_prob - ra.s_weight, m)


def omega_thresholds(model: CoefficientModel, r: float, C0: float, K: int):
    """(squared lower bound on |xi_0|, squared upper bounds on |xi_n| for n=1..K)."""
    ra = radial_analysis(model, r, with_status=False)
    m = ra.m_mass
    if m < 1:
        raise PreconditionError("omega event needs m(r) >= 1 (degenerate radius)")
    classes = omega_classes(model, r, K, ra)
    w = model.log_weights(r, K)
    n = np.arange(K + 1)
    upper2 = np.empty(K + 1)
    sel = classes == 1
    upper2[sel] = np.exp(-2.0 * w[sel]) / m
    upper2[classes == 2] = 1.0 / m
    sel = classes == 3
    upper2[sel] = np.exp(ra.delta * n[sel])
    return C0 * C0 * math.sqrt(m), upper2[1:]


def omega_event(xi: np.ndarray, lower0: float, upper2: np.ndarray) -> np.ndarray:
    """Indicator of the dominant-term event for draws ``xi`` (batch, K+1)."""
    xi = np.atleast_2d(xi)
    mod2 = xi.real ** 2 + xi.imag ** 2
    return (mod2[:, 0] >= lower0) & (mod2[:, 1:] <= upper2).all(axis=1)


def conditional_draws(lower0: float, upper2: np.ndarray, seed: int, start: int, count: int):
    """Coordinates drawn from their laws conditioned on the event, by inversion.

    |xi_0|^2 = lower0 + Exp(1) (memorylessness); for the others |xi_n|^2
    is Exp(1) truncated to [0, upper2_n].
    """
    k = upper2.size + 1
    u = uniforms(seed, "omega", start, count, 2 * k)
    mod2 = np.empty((count, k))
    mod2[:, 0] = lower0 - np.log(u[:, 0])
    mass = -np.expm1(-upper2)
    mod2[:, 1:] = -np.log1p(-(1.0 - u[:, 1:k]) * mass)
    return np.sqrt(mod2) * np.exp(2j * math.pi * u[:, k:])


def conditional_hole_check(model: CoefficientModel, r: float, trials: int, seed: int,
                           C0: float = 4.0, eps_tail: float = 1e-10, eps_fail: float = 1e-12,
                           workers: int = 1) -> dict:
    plan = truncation_plan(model, r, eps_tail, eps_fail)
    lower0, upper2 = omega_thresholds(model, r, C0, plan.K)

    def chunk(start, count):
        xi = conditional_draws(lower0, upper2, seed, start, count)
        return classify_batch(xi, plan, r)

    parts = chunked_map(chunk, trials, 1 << 12, workers)
    holes = sum(int(h.sum()) for h, _ in parts)
    amb = sum(int(a.sum()) for _, a in parts)
    return {"r": r, "C0": C0, "trials": trials, "holes": holes, "ambiguous": amb,
            "fraction": holes / trials, "K": plan.K}


@dataclass(frozen=True)
class PointConfiguration:
    rho: float
    exponents: tuple
    angles: np.ndarray = field(repr=False)
    log_absdet_unit: float
    tries_used: int
    method: str

    @property
    def success(self) -> bool:
        return self.log_absdet_unit >= 0

    @property
    def log_absdet(self) -> float:
        """log |det A| with the factor rho^(sum j) restored."""
        return self.log_absdet_unit + sum(self.exponents) * math.log(self.rho)

    @property
    def points(self) -> np.ndarray:
        return self.rho * np.exp(1j * self.angles)


def unit_vandermonde_logdet(angles: np.ndarray, exponents) -> np.ndarray:
    """log|det U| with U_mk = exp(i j_k theta_m), j_0 = 0; batched over leading axes."""
    J = np.concatenate([[0], np.asarray(exponents, dtype=float)])
    U = np.exp(1j * np.asarray(angles)[..., :, None] * J)
    return np.linalg.slogdet(U)[1]


def vandermonde_search(rho: float, exponents, max_tries: int = 1000,
                       seed: int = 0) -> PointConfiguration:
    """Angles on the circle |z| = rho with |det A| >= rho^(sum j_k).

    Equally spaced angles are tried first when the exponents (with 0) are
    distinct modulo n; then uniformly random angles, one stream per try.
    """
    exps = tuple(int(j) for j in exponents)
    n = len(exps) + 1
    if any(b <= a for a, b in zip((0,) + exps, exps)):
        raise ValueError("exponents must be positive and strictly increasing")
    if n > 64:
        raise ValueError("at most 64 points are supported")
    if len({j % n for j in (0,) + exps}) == n:
        ang = 2 * math.pi * np.arange(n) / n
        ld = float(unit_vandermonde_logdet(ang, exps))
        if ld >= 0:
            return PointConfiguration(rho, exps, ang, ld, 0, "equispaced")
    best = None
    for t in range(max_tries):
        ang = 2 * math.pi * uniforms(seed, "vandermonde", t, 1, n)[0]
        ld = float(unit_vandermonde_logdet(ang, exps))
        if best is None or ld > best.log_absdet_unit:
            best = PointConfiguration(rho, exps, ang, ld, t + 1, "random")
        if ld >= 0:
            return best
    raise SearchExhausted(f"no configuration with log|det U| >= 0 in {max_tries} tries", best)


def vandermonde_mean_square(exponents, trials: int, seed: int, chunk: int = 1 << 14) -> tuple:
    """Sample mean and standard error of |det U|^2 under uniform random angles."""
    n = len(exponents) + 1

    def part(start, count):
        ang = 2 * math.pi * uniforms(seed, "vandermonde", start, count, n)
        return np.exp(2.0 * unit_vandermonde_logdet(ang, exponents))

    vals = np.concatenate(chunked_map(part, trials, chunk))
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(trials))


@dataclass(frozen=True)
class CovarianceAudit:
    rho: float
    points: np.ndarray = field(repr=False)
    K: int
    log_det_sigma: float
    S: float
    margin: float
    log_neglected: float  # log of sum_{k>K} a_k^2 rho^(2k), the dropped diagonal mass

    def record(self) -> dict:
        return {"rho": self.rho, "n_points": int(self.points.size), "K": self.K,
                "log_det_sigma": self.log_det_sigma, "S": self.S, "margin": self.margin,
                "log_neglected": self.log_neglected}


def covariance_logdet(model: CoefficientModel, rho: float, points, K: int | None = None,
                      columns=None) -> CovarianceAudit:
    """log det of Sigma_ij = sum_k a_k^2 (z_i conj(z_j))^k at points on |z| = rho.

    Sigma is factored as s^2 Sigma' with s^2 = sum_k a_k^2 rho^(2k), so
    Sigma' has unit diagonal; log det Sigma' comes from a Cholesky factor.
    ``columns`` restricts the sum over k (the projection P V).
    """
    pts = np.asarray(points)
    if np.iscomplexobj(pts):
        if not np.allclose(np.abs(pts), rho, rtol=1e-9):
            raise ValueError("points must lie on the circle |z| = rho")
        angles = np.angle(pts)
    else:
        angles = pts.astype(float)
    if K is None:
        K = truncation_plan(model, rho).K
    w = model.log_weights(rho, K)
    cols = np.arange(K + 1) if columns is None else np.asarray(sorted(columns))
    wc = w[cols]
    keep = np.isfinite(wc)
    cols, wc = cols[keep], wc[keep]
    log_s2 = float(logsumexp(2.0 * wc))
    V = np.exp(wc - 0.5 * log_s2) * np.exp(1j * np.outer(angles, cols))
    sig = V @ V.conj().T
    n = angles.size
    try:
        L = la.cholesky(sig, lower=True)
        ld_unit = 2.0 * math.fsum(np.log(np.diag(L).real))
    except la.LinAlgError:
        ev = np.linalg.eigvalsh(sig)
        partial = n * log_s2 + math.fsum(np.log(ev[ev > 0]))
        raise ConditioningError("normalized covariance is numerically singular", partial)
    if not np.isfinite(ld_unit):
        raise ConditioningError("normalized covariance is numerically singular", -math.inf)
    log_det = n * log_s2 + ld_unit
    S = radial_analysis(model, rho, with_status=False).s_weight
    # diagonal mass beyond K (reported, not included)
    tail = model.log_weights(rho, K + 400)[K + 1:]
    tail = tail[np.isfinite(tail)]
    log_neg = float(logsumexp(2.0 * tail)) if tail.size else -math.inf
    return CovarianceAudit(rho, rho * np.exp(1j * angles), K, log_det, S, log_det - S, log_neg)


def volume_bound_audit(N: int, s: float, t: float, trials: int, seed: int,
                       level: float = 0.99, workers: int = 1) -> dict:
    """Monte Carlo volume of {r in [0, t]^N : prod r_j <= s} against
    (s / (N-1)!) log^N(t^N / s).

    N = 1 is evaluated exactly (the set is [0, min(s, t)]).
    """
    if N < 1 or s <= 0 or t <= 0:
        raise ValueError("need N >= 1 and s, t > 0")
    L = N * math.log(t) - math.log(s)
    if L < N * (1 - 1e-12):
        raise ValueError(f"volume bound needs log(t^N/s) >= N, got {L:.6g} < {N}")
    bound = s / math.factorial(N - 1) * L ** N
    if N == 1:
        vol = min(s, t)
        return {"N": N, "s": s, "t": t, "trials": 0, "mc_volume": vol, "ci": (vol, vol),
                "bound": bound, "pass": vol <= bound * (1 + 1e-12)}
    cube = t ** N
    # prod r_j <= s  <=>  sum log u_j <= -L for u_j = r_j / t uniform
    def part(start, count):
        u = uniforms(seed, "volume", start, count, N)
        return int((np.log(u).sum(axis=1) <= -L).sum())

    hits = sum(chunked_map(part, trials, 1 << 20, workers))
    lo, hi = clopper_pearson(hits, trials, level)
    return {"N": N, "s": s, "t": t, "trials": trials, "mc_volume": cube * hits / trials,
            "ci": (cube * lo, cube * hi), "bound": bound, "pass": cube * hi <= bound}
