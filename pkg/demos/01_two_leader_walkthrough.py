# %% [markdown]
# # Two leaders, one agreement
#
# A walk through the `fig1_left` game. Player 1 has five strategies and
# player 2 has two, and both lead. We solve for the best stable vector,
# check the bundled hand-written vectors and look at the agreement stage
# they induce.

# %%
from fractions import Fraction

from scelab import (
    build_agreement_tree,
    load_fixture,
    load_vector_fixture,
    solve_f_sce_pa,
    solve_opt_sce,
    solve_opt_sce_pa,
    stability_violations,
    verify_efficiency,
    verify_stability,
)

sg = load_fixture("fig1_left")
print(sg)

# %% [markdown]
# ## Optimal stable vector for player 1
# With weights (1, 0) the solver maximizes player 1's utility at the
# no-defection entry. The counter shows how many oracle LPs it took.

# %%
report = solve_opt_sce(sg, [1, 0])
print("objective", report.objective, "queries", report.oracle_queries)
print("no-defection entry", report.vector.empty)

# %% [markdown]
# ## The hand-written vectors
# `example_x` is stable and efficient but not perfectly stable. The
# violation list says which record breaks it.

# %%
x = load_vector_fixture("example_x")
print("stable", verify_stability(sg, x, "first-level"))
print("efficient", verify_efficiency(sg, x, "sce"))
print("perfect", verify_stability(sg, x, "perfect"))
for line in stability_violations(sg, x, "perfect"):
    print("  ", line)

xp = load_vector_fixture("example_x_prime")
print("x' perfect", verify_stability(sg, xp, "perfect"), "efficient", verify_efficiency(sg, xp, "sce-pa"))

# %% [markdown]
# ## The agreement stage as a tree
# Opting out of the all-in path never pays under `example_x`, which
# makes all-in a Nash equilibrium. The subgame after player 2 opts out is
# a different story.

# %%
tree = build_agreement_tree(sg, x)
print(tree.outline())

# %% [markdown]
# ## Perfectly stable solvers
# The first solver needs strictly positive weights and one query per leader
# plus one. The second searches the whole punishment recursion.

# %%
fast = solve_f_sce_pa(sg, [1, Fraction(1, 2)])
best = solve_opt_sce_pa(sg, [1, Fraction(1, 2)])
print("f-SCE-PA", fast.objective, fast.oracle_queries)
print("Opt-SCE-PA", best.objective, best.oracle_queries)
