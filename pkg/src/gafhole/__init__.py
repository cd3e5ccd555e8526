"""Hole probabilities of Gaussian Taylor series f(z) = sum xi_n a_n z^n.

Submodules:

- ``models``: coefficient sequences a_n (log domain)
- ``asymptotics``: N(r), S(r), m(r), n(r), normality and lemma audits
- ``sampler``: counter-based coefficient draws, truncation plans, evaluation
- ``zeros``: argument-principle zero counting and hole classification
- ``estimators``: naive and importance-sampled hole probability estimates
- ``certificates``: exact dominant-term probabilities, Vandermonde and
  covariance determinants, the volume bound
- ``diagnostics``: statistics of M(r), Gaussian laws, log-derivatives
- ``cli``: the ``gaf-hole-lab`` batch runner
"""

from .asymptotics import (
    PreconditionError,
    RadialAnalysis,
    exceptional_scan,
    is_normal,
    log_coeff,
    log_weight,
    power_set_delta,
    radial_analysis,
    s_growth_audit,
    s_lower_audit,
)
from .certificates import (
    conditional_hole_check,
    covariance_logdet,
    omega_log_prob,
    vandermonde_search,
    volume_bound_audit,
)
from .estimators import estimate_importance, estimate_naive, summarize, tilt_schedule
from .models import (
    CoefficientModel,
    constant_only,
    explicit_table,
    gamma_power,
    lacunary_gamma,
    model_from_dict,
)
from .sampler import draw, evaluate, log_deriv_profile, max_modulus, truncation_plan
from .zeros import hole_indicator, winding_count

__version__ = "0.1.0"
