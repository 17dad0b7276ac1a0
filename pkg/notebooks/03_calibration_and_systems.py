# ---
# jupyter:
#   jupytext:
#     formats: py:percent
# ---

# %% [markdown]
# # Calibration and the fusion systems
#
# When the ASV scores are shrunk 100x the raw sum is dominated by the CM and
# SASV-EER suffers. Affine calibration restores the scale. The Gaussian back-end
# turns score pairs into LLRs, and the non-linear rule tuned by rho uses them
# best.

# %%
from sasvfusion import default_spec, evaluate_system, fit_system_models, sample_trials
from sasvfusion.fusion import SYSTEMS
from sasvfusion.simulation import scale_mismatched_spec

spec = scale_mismatched_spec(default_spec(n_trials=50_000, seed=1))
dev = sample_trials(spec)
ev = sample_trials(spec.replace(seed=2))

# %%
print(f"{'system':6s} {'SASV-EER':>9s} {'Cllr':>7s} {'Cllr_min':>9s} {'t-EER':>7s}  rho")
for name in SYSTEMS:
    models = fit_system_models(name, dev)
    r = evaluate_system(ev, name, models)
    rho = "" if models.rho is None else f"{models.rho:.2f}"
    print(f"{name:6s} {r.sasv_eer:9.4f} {r.cllr:7.3f} {r.cllr_min:9.3f} {r.t_eer:7.4f}  {rho}")

# %% [markdown]
# Cllr only has its usual meaning for systems whose output is an LLR, so the
# sigmoid baselines report large values. t-EER is computed from the two input
# streams and does not depend on the fusion rule, which is why systems that
# share inputs also share t-EER.

# %%
m = fit_system_models("l3c", dev)
print("ASV map:", m.affine_asv)
print("CM map: ", m.affine_cm)
