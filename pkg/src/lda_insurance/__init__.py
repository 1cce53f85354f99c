"""Operational-risk loss simulation with insurance mitigation.

Compound Poisson years with alpha-stable severities, six insurance
structures, closed-form Poisson-Lévy mixtures and the capital measures
used to compare bank and insurer positions.
"""

from .experiment import SweepConfig, optimum_insurance_point, risk_equality_point, run_sweep
from .lda import RiskModel, YearBatch, YearOutcome, annual_loss, simulate_year, simulate_years
from .mixture import (
    MixtureDist,
    TruncationRule,
    analytic_es_mcr,
    analytic_expected_claim,
    analytic_scr,
    build_mixture,
    build_mixture_two_risks,
    mixture_cdf,
    mixture_pdf,
    mixture_quantile,
)
from .policies import ALP, ALP2, BLP, CLP, HLP, ILP, NoInsurance, apply_policy
from .risk import RiskReport, empirical_es, empirical_scr, empirical_var, mcr
from .special import erf, erfc, erfcinv
from .stable import StableParams, levy_cdf, levy_params, levy_pdf, sample_stable

__version__ = "0.1.0"
