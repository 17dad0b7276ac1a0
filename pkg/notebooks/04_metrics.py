# ---
# jupyter:
#   jupytext:
#     formats: py:percent
# ---

# %% [markdown]
# # Metrics
#
# EER and Cllr_min depend only on the ranking of scores. Cllr additionally
# charges for poor calibration. Cllr_min comes from the best monotone
# recalibration, found by pool-adjacent-violators.

# %%
import numpy as np

from sasvfusion import compute_cllr, compute_cllr_min, compute_eer, compute_t_eer, default_spec, sample_trials
from sasvfusion.classes import TARBF
from sasvfusion.metrics import pav_llrs

rng = np.random.default_rng(3)
y = rng.random(4000) < 0.3
llr = rng.normal(np.where(y, 2.0, -2.0), 2.0)
for scale in (0.25, 1.0, 4.0):
    s = scale * llr
    print(f"scale {scale:4.2f}  EER {compute_eer(s, y)[0]:.4f}  Cllr {compute_cllr(s, y):.3f}  Cllr_min {compute_cllr_min(s, y):.3f}")
print("zero LLRs cost", compute_cllr(np.zeros(10), np.arange(10) < 5), "bit")

# %% [markdown]
# The PAV map is a nondecreasing step function of the score.

# %%
order = np.argsort(llr)
steps = pav_llrs(llr, y)[order]
print("distinct PAV levels:", len(np.unique(steps)), " nondecreasing:", bool(np.all(steps[1:] >= steps[:-1])))

# %% [markdown]
# ## Tandem EER
#
# t-EER searches over pairs of ASV and CM thresholds. It is invariant to any
# strictly increasing transform applied to either stream.

# %%
t = sample_trials(default_spec(n_trials=20_000))
base = compute_t_eer(t.s_asv, t.s_cm, t.label)
warped = compute_t_eer(np.exp(t.s_asv), t.s_cm**3, t.label)
print("t-EER", base, "after warping", warped)
print("SASV-EER of the plain sum", compute_eer(t.s_asv + t.s_cm, t.label == TARBF)[0])
