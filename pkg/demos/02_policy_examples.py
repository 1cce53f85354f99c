# %% [markdown]
# Six ways to split one year of losses
#
# Five losses in arrival order, a per-event cap of 7 and an annual cap of 25.

# %%
import numpy as np

from lda_insurance.lda import YearOutcome
from lda_insurance.policies import apply_alp, apply_alp2, apply_blp, apply_clp, apply_hlp, apply_ilp

year = YearOutcome.from_losses([6.0, 10.0, 8.0, 2.0, 5.0])
year.times

# %%
for name, out in [
    ("ILP", apply_ilp(year, 7.0)),
    ("ALP", apply_alp(year, 25.0)),
    ("CLP", apply_clp(year, 7.0, 25.0)),
    ("HLP", apply_hlp(year, 7.0)),
]:
    print(f"{name}: claimed {out.claimed.tolist()}  retained {out.retained.tolist()}")

# %%
# ALP2: one annual cap shared by two business lines, paid in time order
other = YearOutcome.from_losses([12.0, 3.0], times=np.array([0.05, 0.5]))
first, second, retained, claimed = apply_alp2((year, other), 25.0)
print("line 1", first.claimed.tolist())
print("line 2", second.claimed.tolist())
print("total claimed", claimed, "retained", retained)

# %%
# BLP: bands of the cover limit; completed bands are paid, the active band at a random share
rng = np.random.default_rng(1)
out, draws = apply_blp(year, 12.0, bands=3, rng=rng)
print("bands", draws.bands.tolist())
print("shares", np.round(draws.deltas, 3).tolist())
print("claimed", np.round(out.claimed, 3).tolist())
