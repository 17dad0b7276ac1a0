# ---
# jupyter:
#   jupytext:
#     formats: py:percent
# ---

# %% [markdown]
# # Decision boundaries in a simulated world
#
# Three 2-D Gaussians model (ASV score, CM score) for each class under a flat
# prior. True LLRs come from the known densities, so the only difference between
# the two policies is the rule itself.

# %%
import numpy as np

from sasvfusion import CostMatrix, Priors, default_spec, empirical_risk, export_boundary_grid, sample_trials

spec = default_spec(n_trials=200_000)
trials = sample_trials(spec)
for name, mean in zip(("spf", "non.bf", "tar.bf"), spec.means):
    print(f"{name:7s} mean {mean}")

# %%
mismatched = Priors([0.05, 0.05, 0.9])
for policy, priors in (("optimal", None), ("linear", None), ("optimal", mismatched)):
    label = policy if priors is None else "optimal, mis-matched priors"
    print(f"{label:28s} risk {empirical_risk(trials, spec, policy, priors):.4f}")

# %% [markdown]
# ## The LLR plane
#
# The linear boundary is a straight line of slope -1. The optimal boundary bends
# toward the axes: a very confident ASV score cannot rescue a spoof, and the
# reverse holds as well. `#` marks cells both rules accept and `+` marks cells
# only the linear rule accepts.

# %%
grid = export_boundary_grid((-4, 8, 0.5), (-4, 8, 0.5))
for j in range(len(grid.llr_cm) - 1, -1, -1):
    cells = ["#" if grid.optimal[i, j] else "+" if grid.linear[i, j] else "." for i in range(len(grid.llr_asv))]
    print(f"{grid.llr_cm[j]:5.1f} " + "".join(cells))
print("      llr_asv from", grid.llr_asv[0], "to", grid.llr_asv[-1])
print("optimal inside linear:", bool(np.all(grid.linear[grid.optimal])))

# %% [markdown]
# On the diagonal the linear rule accepts any positive LLR. The optimal rule
# needs log 2 because the two negative classes add their posterior mass.

# %%
diag = export_boundary_grid((-1, 1, 0.01), (-1, 1, 0.01))
idx = np.arange(len(diag.llr_asv))
on_diag = diag.llr_asv[idx]
print("linear  starts at", on_diag[diag.linear[idx, idx]].min())
print("optimal starts at", on_diag[diag.optimal[idx, idx]].min(), "log 2 =", np.log(2))
