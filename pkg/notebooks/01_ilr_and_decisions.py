# ---
# jupyter:
#   jupytext:
#     formats: py:percent
# ---

# %% [markdown]
# # Posteriors as compositions
#
# A three-class posterior over (spf, non.bf, tar.bf) lives on the simplex. The
# isometric log-ratio (ILR) map sends it to the plane, where Bayes' rule turns
# into vector addition: ilr(posterior) = ilr(prior) + ilr(likelihood).

# %%
import numpy as np

from sasvfusion import (
    CostMatrix,
    Priors,
    closure,
    decide_linear,
    decide_optimal_posterior,
    ilr,
    ilr_inv,
    likelihood_ilr_from_llrs,
    perturb,
)
from sasvfusion.decision import llrs_from_posterior

rng = np.random.default_rng(0)
prior = closure([0.2, 0.3, 0.5])
lik = rng.gamma(1.0, size=3)
post = perturb(prior, lik)
print("posterior        ", post)
print("ilr(post)        ", ilr(post))
print("ilr(prior)+ilr(w)", ilr(prior) + ilr(lik))
print("round trip       ", ilr_inv(ilr(post)))

# %% [markdown]
# With two detectors, the ASV LLR (tar.bf vs non.bf) and the CM LLR (tar.bf vs
# spf) fix the likelihood part of the ILR coordinates directly.

# %%
la, lc = 1.5, -0.4
w = closure(np.exp([-lc, -la, 0.0]))
print(likelihood_ilr_from_llrs(la, lc), ilr(w))

# %% [markdown]
# ## Two accept rules
#
# Summing the two LLRs and thresholding is the linear rule. The minimum-risk
# rule compares the target posterior with the cost-weighted negative mass. The
# posterior (0.05, 0.65, 0.3) separates them under unit costs and flat priors.

# %%
p = np.array([0.05, 0.65, 0.3])
flat = Priors.flat()
print("linear accepts :", bool(decide_linear(llrs_from_posterior(p, flat), flat)))
print("optimal accepts:", bool(decide_optimal_posterior(p, CostMatrix())))

# %% [markdown]
# Over many random posteriors the optimal accept region sits inside the linear
# one: linear acceptance is necessary, not sufficient.

# %%
ps = rng.dirichlet([1, 1, 1], size=200_000)
opt = decide_optimal_posterior(ps, CostMatrix())
lin = decide_linear(llrs_from_posterior(ps, flat), flat)
print("optimal only:", int(np.sum(opt & ~lin)), " linear only:", int(np.sum(lin & ~opt)))
