# %% [markdown]
# # How the equilibrium sets relate
#
# Correlated equilibria, coarse correlated equilibria and the stable and
# perfectly stable sets overlap in ways the bundled fixtures pin down. Each
# fixture carries claims that are re-checked on load.

# %%
from scelab import GAMES, relation_fixture

for name in GAMES:
    fx = relation_fixture(name, check=False)
    print(name)
    for claim in fx.claims:
        got = claim.check()
        mark = "ok" if got == claim.expected else "MISMATCH"
        print(f"   [{mark}] {claim.description}: {got}")

# %% [markdown]
# ## Perfect stability without being a CCE
# In `table5_left`, once both players lead, the corner profile can be
# sustained by punishments even though it is not a CCE.

# %%
from scelab import CorrelatedDistribution, admits_perfectly_stable_vector, everyone_leads, is_cce, load_fixture

left = load_fixture("table5_left")
corner = CorrelatedDistribution.delta((0, 0))
print("CCE", is_cce(left.game, corner), "perfectly stable", admits_perfectly_stable_vector(everyone_leads(left.game), corner))

# %% [markdown]
# ## The cyclic CCE
# The uniform diagonal of `table5_right` is a CCE. After a single
# defection the defector is pinned to one fixed strategy while the other
# player mixes uniformly. Both leaders stay in, so the vector is
# perfectly stable.

# %%
from scelab import DistributionVector, verify_stability

right = load_fixture("table5_right")
grid = CorrelatedDistribution.uniform([(a, b) for a in range(3) for b in range(3)])
v = DistributionVector(
    [0, 1],
    "full",
    {
        (): CorrelatedDistribution.uniform([(0, 0), (1, 1), (2, 2)]),
        (0,): CorrelatedDistribution.uniform([(0, 0), (0, 1), (0, 2)]),
        (1,): CorrelatedDistribution.uniform([(0, 0), (1, 0), (2, 0)]),
        (0, 1): grid,
        (1, 0): grid,
    },
)
print("perfectly stable", verify_stability(right, v, "perfect"))

# %% [markdown]
# ## Any CCE becomes a stable vector when everyone leads
# Collapse each defector onto her best fixed response.

# %%
from scelab import cce_to_stable, optimal_cce

x = optimal_cce(right.game, [1, 1])
sg, sv = cce_to_stable(right.game, x)
print("CCE", x)
print("stable", verify_stability(sg, sv, "first-level"))
