"""Estimating the hole probability P(no zeros in |z| < r).

Naive Monte Carlo works while the probability is not too small. The
importance sampler tilts the coefficients toward the scenario where the
constant term dominates; its weights can be heavy-tailed, so look at the
effective sample size before trusting it.
"""
from gafhole import (
    estimate_importance,
    estimate_naive,
    explicit_table,
    gamma_power,
    radial_analysis,
    summarize,
)

deg1 = explicit_table([0.0, 0.0])  # f = xi_0 + xi_1 z
for r in (0.5, 1.0, 2.0):
    rep = estimate_naive(deg1, r, 100_000, seed=1)
    print(f"degree one, r={r}: p_hat={rep.p_hat:.4f} CI=({rep.ci[0]:.4f}, {rep.ci[1]:.4f})"
          f"  exact {1 / (1 + r * r):.4f}")

half = gamma_power(0.5)
for r in (1.0, 1.4):
    ra = radial_analysis(half, r)
    naive = estimate_naive(half, r, 200_000, seed=2, workers=4)
    imp = estimate_importance(half, r, 200_000, seed=2, workers=4)
    print(f"\nr={r}: S(r)={ra.s_weight:.3f}")
    for rep in (naive, imp):
        print(f"  {rep.method:<10} p_hat={rep.p_hat:.3e} CI=({rep.ci[0]:.2e}, {rep.ci[1]:.2e})"
              f" ess={rep.ess:.1f}")
    print("  bands:", {k: round(v, 2) if isinstance(v, float) else v
                       for k, v in summarize(naive, ra).items()})
