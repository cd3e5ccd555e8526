"""Coefficient sequences a_n for Gaussian Taylor series.

All models are handled through ``log a_n`` only; ``a_n`` itself is never
formed because 1/sqrt(n!) underflows long before the indices that matter
at moderate radii. ``-inf`` encodes a vanishing coefficient. Every model is
normalized so that ``a_0 = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

__all__ = [
    "CoefficientModel",
    "gamma_power",
    "explicit_table",
    "lacunary_gamma",
    "constant_only",
    "model_from_dict",
    "model_to_dict",
]

KINDS = ("gamma-power", "explicit-table", "lacunary-gamma", "constant-only")

# largest index any scan is allowed to reach
MAX_INDEX = 10_000_000


@dataclass(frozen=True)
class CoefficientModel:
    """A deterministic coefficient sequence, stored by kind and parameters.

    ``gamma-power`` has ``log a_n = -alpha * lgamma(n + 1)``, i.e.
    ``a_n = (n!)^(-alpha)``; ``alpha = 1/2`` gives ``a_n = 1/sqrt(n!)``.
    ``lacunary-gamma`` keeps ``a_n = 1/n!`` on an index set (always
    containing 0) and zero elsewhere; the set is either a finite tuple or
    the powers of an integer base.
    """

    kind: str
    alpha: float | None = None
    table: tuple[float, ...] | None = None
    support: tuple[int, ...] | None = None
    base: int | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "gamma-power" and not (self.alpha and self.alpha > 0):
            raise ValueError("gamma-power requires alpha > 0")
        if self.kind == "explicit-table":
            if not self.table:
                raise ValueError("explicit-table requires a non-empty log_a table")
            if self.table[0] != 0.0:
                raise ValueError("explicit-table must have log a_0 = 0 (a_0 = 1)")
            if any(math.isnan(v) or v == math.inf for v in self.table):
                raise ValueError("log_a entries must be finite or -inf")
        if self.kind == "lacunary-gamma":
            if (self.support is None) == (self.base is None):
                raise ValueError("lacunary-gamma needs exactly one of support / base")
            if self.base is not None and self.base < 2:
                raise ValueError("lacunary base must be >= 2")
            if self.support is not None and any(k < 0 for k in self.support):
                raise ValueError("lacunary support indices must be non-negative")

    @property
    def model_id(self) -> str:
        if self.name:
            return self.name
        if self.kind == "gamma-power":
            return f"gamma-power[alpha={self.alpha:g}]"
        if self.kind == "explicit-table":
            return f"explicit-table[deg={self.degree}]"
        if self.kind == "lacunary-gamma":
            if self.base is not None:
                return f"lacunary-gamma[{self.base}^k]"
            return f"lacunary-gamma[{len(self.support)} idx]"
        return "constant-only"

    @property
    def degree(self) -> int | None:
        """Largest index with ``a_n > 0`` for finite-support models, else None."""
        if self.kind == "constant-only":
            return 0
        if self.kind == "explicit-table":
            finite = [i for i, v in enumerate(self.table) if v > -math.inf]
            return max(finite)
        if self.kind == "lacunary-gamma" and self.support is not None:
            return max(set(self.support) | {0})
        return None

    @property
    def finite_support(self) -> bool:
        return self.degree is not None

    def log_a(self, n):
        """Vectorized ``log a_n``; accepts an int or an integer array."""
        scalar = np.ndim(n) == 0
        idx = np.asarray(n, dtype=np.int64)
        if np.any(idx < 0):
            raise ValueError("coefficient index must be non-negative")
        out = np.full(idx.shape, -np.inf)
        if self.kind == "gamma-power":
            out = -self.alpha * gammaln(idx + 1.0)
        elif self.kind == "explicit-table":
            tab = np.asarray(self.table, dtype=float)
            inside = idx < tab.size
            out[inside] = tab[idx[inside]]
        elif self.kind == "lacunary-gamma":
            mask = self._in_support(idx)
            out[mask] = -gammaln(idx[mask] + 1.0)
        else:
            out[idx == 0] = 0.0
        out = np.where(idx == 0, 0.0, out)
        return float(out) if scalar else out

    def _in_support(self, idx: np.ndarray) -> np.ndarray:
        if self.support is not None:
            return np.isin(idx, np.asarray(sorted(set(self.support) | {0})))
        mask = idx == 0
        p = 1
        top = int(idx.max()) if idx.size else 0
        while p <= top:
            mask |= idx == p
            p *= self.base
        return mask

    def _envelope(self, n: np.ndarray, log_r: float) -> np.ndarray:
        """Concave majorant of ``log a_n + n log r`` used for cutoff searches."""
        if self.kind == "gamma-power":
            return n * log_r - self.alpha * gammaln(n + 1.0)
        # lacunary terms are dominated by the full 1/n! sequence
        return n * log_r - gammaln(n + 1.0)

    def cutoff_hint(self, r: float) -> int:
        """Index bound beyond which ``log(a_n r^n) < 0`` is guaranteed."""
        return self.horizon(r, 0.0)

    def horizon(self, r: float, level: float) -> int:
        """Smallest index ``h`` such that ``log(a_n r^n) < level`` for all n > h.

        Found by doubling search on a concave envelope, so the answer is
        valid for the infinite-support kinds as well.
        """
        if self.finite_support:
            return self.degree
        log_r = math.log(r)
        # first locate a point past the envelope maximum and below `level`
        hi = 1
        while True:
            if hi > MAX_INDEX:
                raise RuntimeError("support scan exhausted: envelope never turned negative")
            e = self._envelope(np.array([hi, hi + 1], dtype=float), log_r)
            if e[1] < e[0] and e[0] < level:
                break
            hi *= 2
        # concavity: once decreasing and below level, stays below; bisect for the crossing
        lo = 0
        while hi - lo > 1:
            mid = (lo + hi) // 2
            e = self._envelope(np.array([mid, mid + 1], dtype=float), log_r)
            if e[1] < e[0] and e[0] < level:
                hi = mid
            else:
                lo = mid
        return hi

    def log_weights(self, r: float, upto: int) -> np.ndarray:
        """``w_n(r) = log a_n + n log r`` for n = 0..upto."""
        n = np.arange(upto + 1)
        la = self.log_a(n)
        if r == 0:
            return np.where(n == 0, 0.0, -np.inf)
        with np.errstate(invalid="ignore"):
            w = la + n * math.log(r)
        return np.where(np.isneginf(la), -np.inf, w)


def gamma_power(alpha: float, name: str = "") -> CoefficientModel:
    return CoefficientModel("gamma-power", alpha=float(alpha), name=name)


def explicit_table(log_a: Sequence[float], name: str = "") -> CoefficientModel:
    return CoefficientModel("explicit-table", table=tuple(float(v) for v in log_a), name=name)


def lacunary_gamma(support: Iterable[int] | None = None, base: int | None = None,
                   name: str = "") -> CoefficientModel:
    sup = None if support is None else tuple(sorted(set(int(k) for k in support) | {0}))
    return CoefficientModel("lacunary-gamma", support=sup, base=base, name=name)


def constant_only(name: str = "") -> CoefficientModel:
    return CoefficientModel("constant-only", name=name)


def model_from_dict(d: dict) -> CoefficientModel:
    """Build a model from its description record (see README for the fields)."""
    kind = d.get("kind")
    name = d.get("name", "")
    if kind == "gamma-power":
        if "alpha" not in d:
            raise ValueError("model.alpha: required for gamma-power")
        return gamma_power(d["alpha"], name)
    if kind == "explicit-table":
        if "log_a" not in d:
            raise ValueError("model.log_a: required for explicit-table")
        vals = [(-math.inf if (isinstance(v, str) and v.strip() in ("-inf", "-Infinity")) else float(v))
                for v in d["log_a"]]
        return explicit_table(vals, name)
    if kind == "lacunary-gamma":
        sup = d.get("support")
        if isinstance(sup, str):
            if not sup.endswith("^k"):
                raise ValueError(f"model.support: cannot parse {sup!r}")
            return lacunary_gamma(base=int(sup[:-2]), name=name)
        if sup is None:
            raise ValueError("model.support: required for lacunary-gamma")
        return lacunary_gamma(support=sup, name=name)
    if kind == "constant-only":
        return constant_only(name)
    raise ValueError(f"model.kind: unknown kind {kind!r}")


def model_to_dict(model: CoefficientModel) -> dict:
    d: dict = {"kind": model.kind}
    if model.kind == "gamma-power":
        d["alpha"] = model.alpha
    elif model.kind == "explicit-table":
        d["log_a"] = ["-inf" if v == -math.inf else v for v in model.table]
    elif model.kind == "lacunary-gamma":
        d["support"] = f"{model.base}^k" if model.base is not None else list(model.support)
    if model.name:
        d["name"] = model.name
    return d
