"""Counting zeros inside |z| = r with the argument principle.

A draw of the Gaussian coefficients is evaluated on a uniform grid of the
circle by one FFT; the winding number of f around 0 is the zero count.
A "hole" is a draw whose count is zero.
"""
import numpy as np

from gafhole import draw, evaluate, gamma_power, hole_indicator, truncation_plan, winding_count

half = gamma_power(0.5)
r = 1.5
plan = truncation_plan(half, r)
print(f"truncation at K = {plan.K} terms for r = {r}")

counts = []
for stream in range(2000):
    s = draw(half, plan, seed=7, stream_id=stream)
    counts.append(winding_count(s, half, r).count)
counts = np.array(counts)
# with a_n = 1/sqrt(n!) the covariance is exp(z conj(w)), so zeros have
# constant density 1/pi and the disk holds r^2 of them on average
print(f"mean zero count over 2000 draws: {counts.mean():.3f} (r^2 = {r * r})")
print("empirical hole frequency:", np.mean(counts == 0))

s = draw(half, plan, seed=7, stream_id=0)
val = evaluate(s, half, 0.3 + 0.4j)
print("log|f| and arg f at 0.3+0.4i:", round(val["log_modulus"], 6), round(val["phase"], 6))
print("classification of stream 0:", hole_indicator(s, half, r))
