"""Where does log M(r) live?

At a normal radius the log maximum modulus concentrates near the largest
weight, far from the thresholds 3 S(r) and -S(r). We also look at the
angular log-derivative on a smaller circle, for draws that are holes.
"""
from gafhole.diagnostics import gaussian_law_check, log_derivative_stats, max_modulus_deviation
from gafhole.models import gamma_power

print(gaussian_law_check(100_000, seed=0))

half = gamma_power(0.5)
out = max_modulus_deviation(half, 14.0, 2000, seed=1, workers=4)
print(f"r=14: S={out['S']:.0f}, log M in [{out['log_M_min']:.2f}, {out['log_M_max']:.2f}],"
      f" frequencies {out['freq_high']}, {out['freq_low']}")

ld = log_derivative_stats(half, 1.0, 0.8, 20_000, seed=2)
print(f"log-derivative on |z|=0.8 over {ld['accepted']} hole draws: "
      f"median {ld['median']:.3f}, 90% {ld['q90']:.3f}, max {ld['max']:.3f}")
