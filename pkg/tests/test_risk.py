import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lda_insurance.lda import RiskModel, simulate_years
from lda_insurance.mixture import analytic_expected_claim, analytic_scr, build_mixture, mixture_quantile
from lda_insurance.policies import apply_alp, apply_ilp
from lda_insurance.risk import (
    RiskReport,
    basel_cap,
    comparative_metrics,
    empirical_es,
    empirical_scr,
    empirical_var,
    fair_premium,
    ks_distance,
    mcr,
    risk_report,
)
from lda_insurance.stable import StableParams, levy_params

samples = st.lists(st.floats(0, 1e9, allow_nan=False), min_size=1, max_size=300)
levels = st.floats(0.01, 0.99)


@pytest.fixture(scope="module")
def levy_years():
    return simulate_years(RiskModel(1.0, levy_params(1.0)), 1_000_000, np.random.default_rng(21))


def test_var_and_es_small_examples():
    x = np.arange(1, 101, dtype=float)
    assert empirical_var(x, 0.95) == 95.0
    assert empirical_es(x, 0.95) == 97.5
    assert empirical_var(np.full(7, 3.5), 0.3) == 3.5
    assert empirical_es(np.full(7, 3.5), 0.9) == 3.5
    np.random.default_rng(0).shuffle(x)
    assert empirical_var(x, 0.95) == 95.0


def test_var_errors():
    with pytest.raises(ValueError):
        empirical_var([], 0.5)
    with pytest.raises(ValueError):
        empirical_var([1.0], 1.0)
    with pytest.raises(ValueError):
        empirical_var([1.0], 0.0)


@settings(max_examples=200)
@given(samples, levels, st.floats(-1e6, 1e6), st.floats(1e-3, 1e3))
def test_var_equivariance(x, q, shift, scale):
    x = np.array(x)
    assert empirical_var(x + shift, q) == pytest.approx(empirical_var(x, q) + shift, rel=1e-12, abs=1e-6)
    assert empirical_var(x * scale, q) == pytest.approx(empirical_var(x, q) * scale, rel=1e-12)


@settings(max_examples=200)
@given(samples, levels)
def test_es_dominates_var(x, q):
    assert empirical_es(x, q) >= empirical_var(x, q)


def test_scr():
    assert empirical_scr([4.0, 4.0, 4.0]) == 4.0
    assert empirical_scr([0.0, 2.0]) == pytest.approx(1 + 3 * math.sqrt(2))
    with pytest.raises(ValueError):
        empirical_scr([1.0])


def test_mcr_delegation():
    x = np.random.default_rng(1).pareto(1.5, 1000)
    assert mcr(x) == empirical_var(x, 0.95)
    assert mcr(x, 0.9, "es") == empirical_es(x, 0.9)
    assert mcr(np.zeros(10)) == 0.0
    with pytest.raises(ValueError):
        mcr(x, measure="cvar")


def test_comparative_metrics():
    assert comparative_metrics(10.0, 10.0, 0.0) == (1.0, 0.0, 0.0)
    assert comparative_metrics(10.0, 0.0, 10.0) == (0.0, 1.0, 1.0)
    with pytest.raises(ValueError, match="zero gross VaR"):
        comparative_metrics(0.0, 0.0, 0.0)


def test_basel_cap():
    assert basel_cap(100.0, 50.0) == 80.0
    assert basel_cap(100.0, 90.0) == 90.0
    assert basel_cap(100.0, 100.0) == 100.0
    with pytest.raises(ValueError):
        basel_cap(-1.0, 0.0)


def test_fair_premium():
    assert fair_premium([10.0, 10.0], 0.0) == 10.0
    assert fair_premium([8.0, 12.0], 0.2) == pytest.approx(12.0)
    assert fair_premium([1.0], 0.1, alpha=0.5) == math.inf
    assert fair_premium(loading=0.0, dist=build_mixture(1.0, 1.0)) == math.inf
    with pytest.raises(ValueError):
        fair_premium([1.0], -0.1)


def test_analytic_and_empirical_premium_agree(levy_years):
    claims = apply_ilp(levy_years, 5.0).annual("claimed")
    d = build_mixture(1.0, 1.0)
    assert fair_premium(claims, 0.1) == pytest.approx(fair_premium(loading=0.1, dist=d, tcl=5.0), rel=0.01)
    assert fair_premium(loading=0.0, dist=d, tcl=5.0) == analytic_expected_claim(d, 5.0)


def test_gross_var_matches_analytic_quantile(levy_years):
    # sampling sd of the 0.95 quantile at 1e6 years is about 0.9%
    assert empirical_var(levy_years.annual(), 0.95) == pytest.approx(mixture_quantile(build_mixture(1.0, 1.0), 0.95), rel=0.01)


def test_empirical_scr_matches_analytic(levy_years):
    claims = apply_ilp(levy_years, 5.0).annual("claimed")
    assert empirical_scr(claims) == pytest.approx(analytic_scr(build_mixture(1.0, 1.0), 5.0), rel=0.02)


def test_uncapped_alp_claims_equal_gross(levy_years):
    out = apply_alp(levy_years, math.inf)
    assert mcr(out.annual("claimed")) == empirical_var(levy_years.annual(), 0.95)


def test_alp_complete_transfer(levy_years):
    gross = levy_years.annual()
    out = apply_alp(levy_years, 40.0)
    _, pvm, pm = comparative_metrics(empirical_var(gross), empirical_var(out.annual("retained")), mcr(out.annual("claimed")))
    assert pvm == pytest.approx(pm, abs=1e-12)


def test_ilp_var_monotone_on_shared_years(levy_years):
    vals = [empirical_var(apply_ilp(levy_years, t).annual("retained")) for t in (0, 1, 5, 20, 100, 1000)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_es_grows_for_infinite_mean_severity():
    # documented divergence: not a hard statistical claim, just the typical picture
    sev = StableParams(0.5, 0.8, 1.0, 0.0, truncated=True)
    x = simulate_years(RiskModel(1.0, sev), 1_000_000, np.random.default_rng(3)).annual()
    es = [empirical_es(x[:n], 0.95) for n in (10_000, 100_000, 1_000_000)]
    assert np.isfinite(es).all()


def test_risk_report():
    rng = np.random.default_rng(4)
    gross = rng.pareto(1.2, 5000) + 1
    claimed = np.minimum(gross, 3.0)
    rep = risk_report(gross, gross - claimed, claimed, alpha=0.5)
    assert isinstance(rep, RiskReport) and rep.es_divergent
    assert rep.pct_var + rep.pct_var_mit == pytest.approx(1.0)
    assert rep.var_q <= rep.es_q
    assert set(rep.as_dict()) >= {"var_q", "es_q", "scr", "mcr", "pct_mcr"}


def test_ks_distance_handles_atoms():
    x = np.array([0.0, 0.0, 1.0, 2.0])
    cdf = lambda z: np.where(z >= 0, 0.5, 0.0) + np.where(z >= 1, 0.25, 0.0) + np.where(z >= 2, 0.25, 0.0)
    assert ks_distance(x, cdf) == 0.0
    assert ks_distance([0.5], lambda z: np.clip(z, 0, 1)) == pytest.approx(0.5)
