# %% [markdown]
# # Semicircle, quantiles and the Stieltjes transform
#
# A sparse Erdős–Rényi matrix at moderate size already follows the
# semicircle law closely. We compare its sorted eigenvalues with the
# classical locations gamma_i and check the self-consistent equation of m(z).

# %%
import numpy as np

from sparse_rmt import semicircle as sc
from sparse_rmt.ensemble import EnsembleSpec, sample
from sparse_rmt.spectra import eigen_decompose

spec = EnsembleSpec(N=800, beta=0.3)
lam = eigen_decompose(sample(spec, 1).A).eigenvalues
gamma = sc.quantiles(spec.N)

# %%
bulk = slice(spec.N // 10, 9 * spec.N // 10)
print(f"N = {spec.N}, q = {spec.q:.2f}")
print(f"max |lambda_i - gamma_i| over the bulk: {np.max(np.abs(lam[bulk] - gamma[bulk])):.4f}")
print(f"largest eigenvalue of A: {lam[-1]:.3f}  (edge at 2)")

# %% [markdown]
# Histogram against the density, as text.

# %%
edges = np.linspace(-2.2, 2.2, 23)
counts, _ = np.histogram(lam, bins=edges)
mid = (edges[:-1] + edges[1:]) / 2
for x, c in zip(mid, counts):
    expect = sc.density(x) * spec.N * (edges[1] - edges[0])
    print(f"{x:+.1f} {'#' * int(c / 4):<28} {c:4d}  expected {expect:6.1f}")

# %% [markdown]
# m(z) solves 1 + z m + m^2 = 0 in the upper half plane; the normalised
# trace of the resolvent tracks it.

# %%
for z in (1 + 0.5j, -0.3 + 0.05j, 2.5 + 0.1j):
    m = sc.stieltjes(z)
    emp = np.mean(1 / (lam - z))
    print(f"z = {z}: m = {m:.4f}, residual {abs(1 + z * m + m * m):.1e}, empirical {emp:.4f}")
