"""Exact correlated equilibria for games where several leaders commit together.

Games are finite and normal-form; every probability and payoff is an exact
rational. The main entry points are the three solvers in ``scelab.solvers``
and the matching verifiers; ``scelab.cli`` exposes them on the command line.
"""

from .agreement import AgreementTree, EquilibriumMode, all_opt_in_equilibrium, build_agreement_tree
from .analysis import (
    admits_perfectly_stable_vector,
    admits_stable_vector,
    cce_to_stable,
    everyone_leads,
    lift_to_all_leaders,
    optimal_cce,
    optimal_commitment,
    perfectly_efficient_agreement_exists,
    relation_fixture,
)
from .fixtures import GAMES, VECTORS, load_fixture, load_vector_fixture, table6_mlbetter
from .game import (
    CorrelatedDistribution,
    GameError,
    NormalFormGame,
    StackelbergGame,
    expected_utility,
    is_cce,
    is_ce,
    is_ce_for,
    load_game,
)
from .hardness import (
    AdjustmentWeights,
    DnfFormula,
    DualPoint,
    dnf_to_sg,
    is_tautology,
    sep_search,
    sep_to_wdasw,
    wdasw_search,
)
from .lp import Constraint, LinearProgram, LpStatus, Relation, solve_lp
from .oracle import OracleInfeasible, OracleObjective, QueryCounter, StabilityConstraint, stability_oracle
from .solvers import (
    EfficiencyMode,
    PreconditionError,
    SolveReport,
    StabilityMode,
    canonicalize,
    objective_value,
    punishment_values,
    solve_f_sce_pa,
    solve_opt_sce,
    solve_opt_sce_pa,
    stability_violations,
    verify_efficiency,
    verify_stability,
)
from .vector import EMPTY, DefectionKey, DistributionVector, VectorError, VectorForm, constant_vector

__version__ = "0.1.0"
