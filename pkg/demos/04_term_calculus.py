# %% [markdown]
# # Power counting for Green-function monomials
#
# Terms of the cumulant expansion are written as formal monomials. Their
# size is read off from a few integer maps (index count, N-power, extra
# Green powers, off-diagonal entries, number of [G] factors).

# %%
from sparse_rmt import term_calculus as tc

term = "N^{-2} C4 [G]^{n-1} [Gs]^{n-1} Gs^{2}_(i,i) Gs_(j,j) G_(i,i) G_(j,j)"
prof = tc.profile(tc.parse(term))
for k, v in prof.to_dict().items():
    print(f"{k:>10} = {v}")

# %% [markdown]
# The refined bound keeps the moment norm M symbolic. Binding n = 2 and
# evaluating at N = 10^4, eta = N^-0.5, q = N^0.3 gives a number.

# %%
expr = tc.bound(term, "L4.3")
print(expr)
print(f"value: {tc.evaluate(expr, 1e4, 0.5, 0.3, 1e-2, n=2):.4e}")

# %% [markdown]
# One expansion step adds a cumulant and a summation index; the child is
# smaller than its parent by exactly N^-beta, so about 1/beta steps
# absorb the trivial bound N.

# %%
parent = tc.profile(tc.parse("N^{-1} [G]^{n-1} G^{2}_(i,i)"))
child = tc.profile(tc.parse("N^{-1} C3 [G]^{n-1} G^{2}_(i,j) G_(j,j)"))
step = tc.recursion_step(parent, child, beta=0.3)
print(f"gain exponent {step.gain} -> {step.gain_value}, contracts: {step.holds}")
print(f"steps needed at beta = 0.3: {tc.steps_to_absorb(0.3)}")
