# %% [markdown]
# A desk-scale sweep
#
# Three tail indices, two frequencies, eleven cover limits. Each row shares
# its simulated years across policies, so curves are comparable along TCL.

# %%
from lda_insurance.experiment import SweepConfig, optimum_insurance_point, risk_equality_point, run_sweep

cfg = SweepConfig(alphas=(2.0, 1.3, 0.5), lambdas=(1.0, 10.0), tcl_strata=11,
                  years_per_cell=20_000, pilot_years=20_000, workers=2)
cells = run_sweep(cfg)
len(cells)

# %%
rows = {}
for c in cells:
    rows.setdefault((c.alpha, c.lam, c.policy), []).append(c)

print("alpha lambda policy  equality TCL       optimum TCL")
for (alpha, lam, policy), row in rows.items():
    eq, opt = risk_equality_point(row), optimum_insurance_point(row)
    print(f"{alpha:5g} {lam:6g} {policy:6s} {eq.tcl:12.5g} {eq.status:9s} {opt.tcl:12.5g} {opt.status}")

# %%
# one ILP row in full
for c in rows[(1.3, 1.0, "ILP")]:
    print(f"TCL={c.tcl:12.1f}  %VaR={c.pct_var:.3f}  %MCR={c.pct_mcr:.3f}")
