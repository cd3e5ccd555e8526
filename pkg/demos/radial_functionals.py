"""Deterministic radial functionals of f(z) = sum xi_n a_n z^n.

For each radius we look at the weights w_n = log a_n + n log r, the
"power set" N(r) of indices with w_n >= 0, and the derived numbers
n(r), m(r), S(r). Then we scan a range of radii for exceptional points.
"""
import math

from gafhole import exceptional_scan, gamma_power, lacunary_gamma, radial_analysis

half = gamma_power(0.5)  # a_n = 1/sqrt(n!)

print("a_n = 1/sqrt(n!)")
print(f"{'r':>6} {'n(r)':>6} {'m(r)':>7} {'S(r)':>12} {'e^2 r^4/4':>12}  status")
for r in (2.0, 5.0, 10.0, 14.0, 20.0):
    ra = radial_analysis(half, r)
    lead = math.e ** 2 * r ** 4 / 4
    print(f"{r:6.1f} {ra.n_count:6d} {ra.m_mass:7d} {ra.s_weight:12.2f} {lead:12.2f}  {ra.normal_status}")

# the leading-order growth e^2 r^4 / 4 is approached slowly
print("4 S(10) / (e^2 10^4) =", 4 * radial_analysis(half, 10.0).s_weight / (math.e ** 2 * 1e4))

# normality fails on a long initial stretch: m(r) jumps by whole indices
scan = exceptional_scan(half, 2.0, 30.0)
print("\nflagged intervals on [2, 30]:")
for lo, hi in scan.intervals:
    print(f"  [{lo:.3f}, {hi:.3f}]")
print(f"logarithmic measure {scan.log_measure:.4f}")

# a lacunary series has a very sparse power set
lac = lacunary_gamma(base=2)
ra = radial_analysis(lac, 20.0)
print("\nlacunary 2^k model at r = 20: N(r) =", [int(j) for j in ra.power_set], " S =", round(ra.s_weight, 3))
