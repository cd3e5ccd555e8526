"""Zero counting on circles by the argument principle.

The phase of f is sampled on |z| = r and wrapped increments are summed.
An arc whose endpoint phase difference exceeds pi/2 is bisected until it
does not (depth limit 40). A draw is *ambiguous* when |f| gets close to
zero somewhere on the contour: either below the tail budget (so the
truncated and the full series could disagree) or below the level where
floating-point cancellation makes the phase meaningless.

Batches are handled with one FFT per draw; only draws with large phase
jumps fall through to a finer FFT grid and then to per-arc bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import CoefficientModel
from .sampler import SampleDraw, TruncationPlan, circle_values

__all__ = ["ContourScan", "winding_count", "hole_indicator", "classify_batch",
           "initial_grid_size", "default_margin", "HOLE", "NOT_HOLE", "AMBIGUOUS"]

HOLE, NOT_HOLE, AMBIGUOUS = "hole", "not_hole", "ambiguous"

MAX_DEPTH = 40
# |f| below this fraction of sum |xi_n a_n z^n| is treated as numerical zero
REL_FLOOR = 1e-11
_ESCALATE = 8  # the FFT escalation accounts for 3 bisection levels
_ESCALATE_DEPTH = 3


@dataclass(frozen=True)
class ContourScan:
    r: float
    count: int
    min_log_modulus: float
    refinements: int
    ambiguous: bool
    total_phase: float


def default_margin(plan: TruncationPlan) -> float:
    """log(1e3 * eps_tail) when a tail was truncated, else no margin."""
    return math.log(1e3 * plan.eps_tail) if plan.has_tail else -math.inf


def initial_grid_size(plan: TruncationPlan, r: float) -> int:
    w = plan.weights(r)
    n_max = int(np.flatnonzero(w >= 0).max())
    return 8 * (n_max + math.ceil(plan.K / 4) + 4)


def _increments(vals: np.ndarray) -> np.ndarray:
    nxt = np.roll(vals, -1, axis=-1)
    return np.angle(nxt * np.conj(vals))


def _refine(c: np.ndarray, phis: np.ndarray, vals: np.ndarray, depth0: int):
    """Bisect arcs with large phase jumps; returns (phase, min |f|, splits, ok)."""
    n = np.arange(c.size)
    G = phis.size
    inc = _increments(vals)
    big = np.abs(inc) > math.pi / 2
    total = [float(np.sum(inc[~big]))]
    splits = 0
    lowest = float(np.abs(vals).min())
    stack = []
    for j in np.flatnonzero(big):
        b = phis[j + 1] if j + 1 < G else 2 * math.pi
        stack.append((phis[j], complex(vals[j]), b, complex(vals[(j + 1) % G]), depth0))
    while stack:
        a, va, b, vb, d = stack.pop()
        q = vb * va.conjugate()
        step = math.atan2(q.imag, q.real)
        if abs(step) <= math.pi / 2:
            total.append(step)
            continue
        if d >= MAX_DEPTH:
            return math.fsum(total), lowest, splits, False
        mid = 0.5 * (a + b)
        vm = complex(np.dot(c, np.exp(1j * n * mid)))
        lowest = min(lowest, abs(vm))
        splits += 1
        if vm == 0:
            return math.fsum(total), 0.0, splits, False
        stack.append((mid, vm, b, vb, d + 1))
        stack.append((a, va, mid, vm, d + 1))
    return math.fsum(total), lowest, splits, True


def _scan_rows(xi: np.ndarray, plan: TruncationPlan, r: float, margin: float | None,
               grid: int | None = None):
    """Vectorized contour scan; returns per-row count, min log|f|, splits, ambiguous, phase."""
    if r > plan.r * (1 + 1e-12):
        raise ValueError("contour radius exceeds the plan radius")
    if margin is None:
        margin = default_margin(plan)
    xi = np.atleast_2d(xi)
    B = xi.shape[0]
    w = plan.weights(r)
    G = grid or initial_grid_size(plan, r)
    finite = np.isfinite(w)
    scale = float(w[finite].max())
    amp = np.where(finite, np.exp(np.where(finite, w - scale, 0.0)), 0.0)
    coef = xi * amp
    abs_sum = np.abs(coef).sum(axis=1)

    vals, _ = circle_values(xi, w, G)
    mod = np.abs(vals)
    low = mod.min(axis=1)
    inc = _increments(vals)
    jumpy = (np.abs(inc) > math.pi / 2).any(axis=1)
    phase = inc.sum(axis=1)
    splits = np.zeros(B, dtype=np.int64)
    ok = np.ones(B, dtype=bool)

    rows = np.flatnonzero(jumpy & (low > 0))
    if rows.size:
        G2 = G * _ESCALATE
        v2, _ = circle_values(xi[rows], w, G2)
        low[rows] = np.minimum(low[rows], np.abs(v2).min(axis=1))
        inc2 = _increments(v2)
        phase[rows] = inc2.sum(axis=1)
        splits[rows] += G2 - G
        still = (np.abs(inc2) > math.pi / 2).any(axis=1)
        phis = 2 * math.pi * np.arange(G2) / G2
        for k in np.flatnonzero(still):
            i = rows[k]
            if low[i] == 0:
                continue
            ph, lo, sp, good = _refine(coef[i], phis, v2[k], _ESCALATE_DEPTH)
            phase[i] = ph
            low[i] = min(low[i], lo)
            splits[i] += sp
            ok[i] &= good

    with np.errstate(divide="ignore"):
        min_log = np.log(low) + scale
        rel = low / np.where(abs_sum > 0, abs_sum, 1.0)
    ambiguous = (~ok) | (low == 0) | (min_log < margin) | (rel < REL_FLOOR)
    count = np.rint(phase / (2 * math.pi)).astype(np.int64)
    # the accumulated phase of a closed contour must be an integer number of turns
    ambiguous |= np.abs(phase - 2 * math.pi * count) > 1e-6
    return count, min_log, splits, ambiguous, phase


def classify_batch(xi: np.ndarray, plan: TruncationPlan, r: float,
                   margin: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Hole classification for a batch of coefficient vectors.

    Returns ``(hole, ambiguous)`` boolean arrays; ``hole`` is False for
    ambiguous rows.
    """
    count, _, _, amb, _ = _scan_rows(xi, plan, r, margin)
    return (count == 0) & ~amb, amb


def winding_count(sample: SampleDraw, model: CoefficientModel | None, r: float,
                  margin: float | None = None, grid: int | None = None) -> ContourScan:
    count, min_log, splits, amb, phase = _scan_rows(sample.xi, sample.plan, r, margin, grid)
    return ContourScan(r, int(count[0]), float(min_log[0]), int(splits[0]),
                       bool(amb[0]), float(phase[0]))


def hole_indicator(sample: SampleDraw, model: CoefficientModel | None, r: float,
                   margin: float | None = None) -> str:
    scan = winding_count(sample, model, r, margin)
    if scan.ambiguous:
        return AMBIGUOUS
    return HOLE if scan.count == 0 else NOT_HOLE
