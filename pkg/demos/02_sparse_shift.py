# %% [markdown]
# # The random shift H2 - 1
#
# For sparse matrices the leading eigenvalue fluctuation is a common
# dilation driven by H2 - 1 = tr(H^2)/N - 1. Every bulk eigenvalue moves
# by roughly gamma_i (H2 - 1)/2, so far-apart eigenvalues are strongly
# correlated, and the counting function Sigma(E) moves with them.

# %%
import numpy as np

from sparse_rmt import harness as hz
from sparse_rmt.ensemble import EnsembleSpec, entry_moments

spec = EnsembleSpec(N=600, beta=0.15)
cfg = hz.ExperimentConfig(ensemble=spec, recipe="CountingCLT", replicas=80, master_seed=3,
                          params={"energies": [1.0, 0.05]})
rep = hz.run(cfg, write=False)

# %%
h2 = rep.column("h2")
print(f"Var(H2 - 1) = {h2.var(ddof=1):.3e}, theory 2 E H^4 = {2 * entry_moments(spec).m4:.3e}")
for t in rep.targets:
    print(f"{t['statistic']}: observed {t['observed']:.2f}, sigma^2 {t['theory']:.2f}")

# %% [markdown]
# Removing the shift leaves a much smaller residual at E = 1. Near E = 0 the
# shift term vanishes, so Sigma barely fluctuates there to begin with.

# %%
for E, r in hz.counting_shift_residual(rep).items():
    print(f"E = {E}: std centred {r['std_centered']:.2f}, std residual {r['std_residual']:.2f}")

# %%
sigma1 = rep.column("Sigma[1.0]").astype(float)
print(f"corr(Sigma(1), H2 - 1) = {np.corrcoef(sigma1, h2)[0, 1]:+.3f}")
