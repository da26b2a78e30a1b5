# %% [markdown]
# # From DNF formulas to stability checks
#
# Every DNF formula maps to a game with one leader per variable and a
# follower who names a variable. The bundled witness vector is perfectly
# stable exactly when the formula is a tautology, so checking perfect
# stability is at least as hard as checking tautologies.

# %%
from scelab import DnfFormula, dnf_to_sg, is_tautology, stability_violations, verify_stability

for text in ["v1 | !v1", "(v1 & v2) | !v1 | !v2", "(v1 & v2) | (!v1 & !v2)"]:
    phi = DnfFormula.parse(text)
    sg, witness = dnf_to_sg(phi)
    print(f"{text:28} tautology={is_tautology(phi)!s:5} perfect={verify_stability(sg, witness, 'perfect')}")

# %% [markdown]
# ## Where a non-tautology breaks
# For a falsifiable formula the violation names the defection record where a
# leader would rather opt out.

# %%
phi = DnfFormula.parse("(v1 & v2) | (!v1 & !v2)")
sg, witness = dnf_to_sg(phi)
print(stability_violations(sg, witness, "perfect")[:3])

# %% [markdown]
# ## The welfare variant
# With `swmax=True` an extra one-action leader earns |V|^2 when every
# variable leader plays true. For tautologies the witness then reaches the
# optimal perfectly stable welfare for that leader.

# %%
from scelab import objective_value, solve_opt_sce_pa

phi = DnfFormula.parse("v1 | !v1 | v2")
sg, witness = dnf_to_sg(phi, swmax=True)
weights = [0] * len(phi.variables) + [1]
print("witness", objective_value(sg, witness, weights), "optimum", solve_opt_sce_pa(sg, weights).objective)
