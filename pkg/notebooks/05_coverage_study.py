"""
A small coverage study
======================

Repeated sampling at a known theta, checking how often the 95% credible
intervals of the three tail risks contain the truth. The acceptance
suite runs the full R = 200 version; R = 20 here keeps it short.
"""

# %%
from copula_tailrisk import SimConfig, coverage_study

cfg = SimConfig(family="clayton", theta_true=2.0, n=500, replicates=20, base_seed=2025)
rep = coverage_study(cfg)

# %%
print("true values:", rep.true_values)
for f in "LUC":
    print(
        f"R_{f}: mean posterior mean {rep.mean_posterior_mean[f]:.6f} "
        f"(sd {rep.sd_posterior_mean[f]:.6f}), coverage {rep.coverage[f]:.2f}"
    )

# %%
# Each replicate's row is what `copula-tailrisk simulate` writes to CSV.
print(rep.to_csv().splitlines()[0])
print(rep.to_csv().splitlines()[1])
