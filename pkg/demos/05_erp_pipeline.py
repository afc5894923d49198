"""
Event-related potentials
========================

ERP data are imbalanced (one target per nine non-targets) and the class
information lives in the waveform, not just the covariance. MDRM needs an
augmented trial that stacks a class template on top of each trial, while the
spatial-filter chain projects onto xDAWN components before a linear SVM.
Scores are balanced classification accuracy.
"""
from eegalign import SynthConfig, synth_erp
from eegalign.harness import OnlineConfig, PipelineSpec, loso_eval, online_eval
from eegalign.models import xdawn_apply, xdawn_fit

ds = synth_erp(SynthConfig(n_subjects=4, n_trials_per_class=10, n_channels=6, n_samples=32,
                           fs=64.0, noise_scale=0.7, seed=4))
s = ds.subjects[0]
print(f"{s.subject}: {len(s.trials)} trials, {int(sum(s.y))} targets")

# xDAWN recovers the spatial pattern of the evoked response
filters = xdawn_fit(s.X, s.y)
print("xDAWN projected trial shape:", xdawn_apply(s.X, filters).shape)

# %%
# Cross-subject transfer with and without alignment

for name in ("xDAWN-SVM", "EA-xDAWN-SVM"):
    rep = loso_eval(ds, PipelineSpec.from_name(name, C=1.0))
    print(f"{name:>13}: mean BCA {rep.mean:.3f}")

# %%
# MDRM online
# -----------
# The target template comes from labeled trials of the new subject, so MDRM
# only runs in the online protocol, where labels arrive with the pool.

cfg = OnlineConfig(m=40, r=10, first_batch=20, repetitions=1)
for name in ("MDRM", "RA-MDRM"):
    rep = online_eval(ds, PipelineSpec.from_name(name), cfg)
    print(f"{name:>13}: mean BCA AUC {rep.mean:.3f}")
