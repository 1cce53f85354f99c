# %% [markdown]
# Lévy severities
#
# The Lévy law is the one stable law with alpha < 1 whose cdf is elementary.
# Here we draw from it, compare with the closed form and look at the tail.

# %%
import numpy as np

from lda_insurance.stable import StableParams, levy_cdf, levy_median, levy_params, sample_stable, stable_tail

rng = np.random.default_rng(0)
params = levy_params(gamma=1.0, edge=0.0)
params

# %%
x = sample_stable(params, rng, 200_000)
for q in (0.5, 0.9, 0.99):
    print(f"q={q}: empirical {np.quantile(x, q):12.3f}")
print("closed-form median", levy_median(1.0))

# %%
# empirical cdf against the closed form at a few points
for z in (0.5, 1.0, 5.0, 50.0, 5000.0):
    print(f"z={z:8g}  F_emp={np.mean(x <= z):.4f}  F={levy_cdf(z, 1.0):.4f}")

# %%
# alpha = 1/2 has no mean, so the running sample mean never settles
for n in (10**3, 10**4, 10**5):
    print(n, x[:n].mean())

# %%
# a general truncated stable severity uses rejection; the tail follows z^-alpha,
# scaled up by the share of the untruncated law that truncation keeps
heavy = StableParams(1.3, 0.8, 1e4, 0.0, truncated=True)
y = sample_stable(heavy, rng, 200_000)
kept = np.mean(sample_stable(StableParams(1.3, 0.8, 1e4, 0.0), rng, 200_000) >= 0)
for z in (1e5, 1e6):
    print(f"P(X > {z:g}): empirical {np.mean(y > z):.2e}  asymptotic {stable_tail(z, heavy) / kept:.2e}")
