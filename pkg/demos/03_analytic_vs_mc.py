# %% [markdown]
# Closed-form annual loss against simulation
#
# With Lévy severities and Poisson counts the annual loss is a Poisson
# mixture of Lévy laws plus an atom at zero for loss-free years.

# %%
import numpy as np

from lda_insurance.lda import RiskModel, simulate_years
from lda_insurance.mixture import (
    analytic_expected_claim,
    analytic_scr,
    build_mixture,
    mixture_cdf,
    mixture_quantile,
)
from lda_insurance.policies import apply_ilp
from lda_insurance.risk import empirical_scr, empirical_var, ks_distance
from lda_insurance.stable import levy_params

lam, gamma = 1.0, 1.0
dist = build_mixture(lam, gamma, 0.0)
print("terms", dist.n_lower, "to", dist.n_upper, " atom at zero", dist.atom_at_zero)

# %%
batch = simulate_years(RiskModel(lam, levy_params(gamma)), 1_000_000, np.random.default_rng(7))
gross = batch.annual("gross")
print("KS distance", ks_distance(gross, lambda z: mixture_cdf(dist, z)))
print("VaR 95%: analytic", mixture_quantile(dist, 0.95), " simulated", empirical_var(gross, 0.95))

# %%
# per-event cap: mean and SCR of the insurer's annual claims
tcl = 5.0
claims = apply_ilp(batch, tcl).annual("claimed")
print("E[claim]  analytic", analytic_expected_claim(dist, tcl), " simulated", claims.mean())
print("SCR       analytic", analytic_scr(dist, tcl), " simulated", empirical_scr(claims))
