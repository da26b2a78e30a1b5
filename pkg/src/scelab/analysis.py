"""How the stable sets relate to CE, CCE and single-leader commitment.

The helpers here answer membership questions ("is ``x`` the no-defection
distribution of some stable vector?") and build the witnesses behind the
containments: lifting a perfectly stable vector to the game where everyone
leads, and turning a coarse correlated equilibrium into a stable vector for
that game.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

from .game import (
    CorrelatedDistribution,
    GameError,
    NormalFormGame,
    StackelbergGame,
    expected_utility,
    is_cce,
    is_ce_for,
)
from .lp import LinearProgram, LpStatus, Relation, solve_lp
from .oracle import OracleObjective, incentive_rows, stability_oracle
from .solvers import (
    EfficiencyMode,
    PreconditionError,
    StabilityMode,
    punishment_plan,
    punishment_values,
    stability_violations,
)
from .vector import (
    DefectionKey,
    DistributionVector,
    VectorForm,
    compact_keys,
    ordered_subsets,
)


def optimal_commitment(sg: StackelbergGame) -> tuple[CorrelatedDistribution, Fraction]:
    """Best correlated strategy for a single leader to commit to.

    Maximizes the leader's utility subject to every follower's incentive
    constraints. With one follower the value is the leader's Stackelberg
    equilibrium utility.
    """
    if len(sg.leaders) != 1:
        raise PreconditionError(f"optimal commitment needs exactly one leader, got {len(sg.leaders)}")
    (leader,) = sg.leaders
    game = sg.game
    x = stability_oracle(sg, OracleObjective.weights(game.player_count, [leader], [1]), [leader])
    return x, expected_utility(game, x, leader)


def everyone_leads(game: NormalFormGame) -> StackelbergGame:
    return StackelbergGame(game, game.players())


def lift_to_all_leaders(sg: StackelbergGame, v: DistributionVector) -> tuple[StackelbergGame, DistributionVector]:
    """Extend a perfectly stable vector to the game in which every player leads.

    A record over all players is mapped to its subsequence of original
    leaders, so a follower's defection never changes the distribution in play.
    """
    problems = stability_violations(sg, v, StabilityMode.PERFECT)
    if problems:
        raise PreconditionError(f"input is not perfectly stable: {problems[0]}")
    lifted = everyone_leads(sg.game)
    lead = set(sg.leaders)
    entries = {
        record: v[tuple(p for p in record if p in lead)] for record in ordered_subsets(lifted.leaders)
    }
    return lifted, DistributionVector(lifted.leaders, VectorForm.FULL, entries)


def best_response(game: NormalFormGame, x: CorrelatedDistribution, player: int) -> int:
    """Lowest-index strategy maximizing ``player``'s payoff if she ignores her recommendation."""
    values = [
        sum((m * game.deviation_utility(s, player, b) for s, m in x.items()), Fraction(0))
        for b in range(game.strategy_counts[player])
    ]
    return values.index(max(values))


def collapse_onto(x: CorrelatedDistribution, player: int, strategy: int) -> CorrelatedDistribution:
    """Move all of ``player``'s mass onto ``strategy``, keeping the others' joint marginal."""
    mass: dict[tuple[int, ...], Fraction] = {}
    for s, m in x.items():
        t = s[:player] + (strategy,) + s[player + 1:]
        mass[t] = mass.get(t, Fraction(0)) + m
    return CorrelatedDistribution(mass)


def cce_to_stable(game: NormalFormGame, x: CorrelatedDistribution) -> tuple[StackelbergGame, DistributionVector]:
    """A stable vector, for the game where everyone leads, whose no-defection entry is the CCE ``x``.

    A defector ``p`` is held to the collapse of ``x`` onto her best fixed
    response, which satisfies her incentive constraints and pays her no more
    than ``x`` does. Records with two or more defectors use one full-game CE.
    """
    if not is_cce(game, x):
        raise PreconditionError("distribution is not a coarse correlated equilibrium")
    sg = everyone_leads(game)
    deep = stability_oracle(sg, OracleObjective((0,) * game.player_count), ())
    entries = {}
    for key in compact_keys(sg.leaders):
        if key.last is None:
            entries[key] = x
        elif len(key.defectors) == 1:
            entries[key] = collapse_onto(x, key.last, best_response(game, x, key.last))
        else:
            entries[key] = deep
    return sg, DistributionVector(sg.leaders, VectorForm.COMPACT, entries)


def optimal_cce(game: NormalFormGame, weights: Sequence[Fraction]) -> CorrelatedDistribution:
    """CCE maximizing ``sum_p weights[p] * u_p``."""
    profiles = game.profiles()
    lp = LinearProgram(
        [sum((w * game.utility(s, p) for p, w in enumerate(weights) if w), Fraction(0)) for s in profiles]
    )
    for p in game.players():
        for b in range(game.strategy_counts[p]):
            lp.add([game.utility(s, p) - game.deviation_utility(s, p, b) for s in profiles], Relation.GE, 0)
    lp.add([1] * len(profiles), Relation.EQ, 1)
    outcome = solve_lp(lp)
    return CorrelatedDistribution({profiles[i]: v for i, v in enumerate(outcome.solution) if v})


def admits_stable_vector(sg: StackelbergGame, x: CorrelatedDistribution) -> bool:
    """Whether some stable vector uses ``x`` when nobody defects."""
    if not is_ce_for(sg.game, x, sg.followers):
        return False
    b = punishment_values(sg, EfficiencyMode.SCE)
    return all(expected_utility(sg.game, x, p) >= b[p] for p in sg.leaders)


def admits_perfectly_stable_vector(sg: StackelbergGame, x: CorrelatedDistribution) -> bool:
    """Whether some perfectly stable vector uses ``x`` when nobody defects."""
    if not is_ce_for(sg.game, x, sg.followers):
        return False
    b = punishment_values(sg, EfficiencyMode.SCE_PA)
    return all(expected_utility(sg.game, x, p) >= b[p] for p in sg.leaders)


# -- perfectly efficient perfect agreements ----------------------------------


def _face_program(
    sg: StackelbergGame,
    defectors: frozenset,
    thresholds: dict[int, Fraction],
    objective: dict[int, Fraction],
    rows: Iterable[tuple[dict[int, Fraction], Relation, Fraction]] = (),
) -> LinearProgram:
    """LP over ``x`` with incentive constraints for ``defectors | F``, utility bounds
    ``thresholds`` and extra rows, each a weighted sum of player utilities."""
    game = sg.game
    profiles = game.profiles()

    def combo(weights: dict[int, Fraction]) -> list[Fraction]:
        return [sum((w * game.utility(s, p) for p, w in weights.items()), Fraction(0)) for s in profiles]

    lp = LinearProgram(combo(objective))
    for _, _, _, coeffs in incentive_rows(game, defectors | set(sg.followers)):
        lp.add(coeffs, Relation.GE, 0)
    for p, b in sorted(thresholds.items()):
        lp.add(combo({p: Fraction(1)}), Relation.GE, b)
    for weights, rel, rhs in rows:
        lp.add(combo(weights), rel, rhs)
    lp.add([1] * len(profiles), Relation.EQ, 1)
    return lp


def _utilities_at(sg: StackelbergGame, solution: Sequence[Fraction], players: Iterable[int]) -> tuple[Fraction, ...]:
    profiles = sg.game.profiles()
    x = {profiles[i]: v for i, v in enumerate(solution) if v}
    return tuple(sum((m * sg.game.utility(s, p) for s, m in x.items()), Fraction(0)) for p in players)


def _pareto_faces(sg, defectors, thresholds, objectives: tuple[int, ...]) -> list[dict[int, Fraction]] | None:
    """Strictly positive weightings whose optimal faces cover the Pareto set.

    Returns None when the polytope is empty. Handles at most two objectives
    (weighted-sum scan of the two-dimensional frontier).
    """

    def argmax_point(first: int, second: int | None):
        out = solve_lp(_face_program(sg, defectors, thresholds, {first: Fraction(1)}))
        if out.status is LpStatus.INFEASIBLE:
            return None
        if second is None:
            return out.value
        pinned = [({first: Fraction(1)}, Relation.EQ, out.value)]
        out2 = solve_lp(_face_program(sg, defectors, thresholds, {second: Fraction(1)}, pinned))
        return _utilities_at(sg, out2.solution, objectives)

    if not objectives:
        probe = solve_lp(_face_program(sg, defectors, thresholds, {}))
        return None if probe.status is LpStatus.INFEASIBLE else [{}]
    if len(objectives) == 1:
        (a,) = objectives
        return None if argmax_point(a, None) is None else [{a: Fraction(1)}]
    if len(objectives) != 2:
        raise GameError("Pareto face enumeration supports at most two objectives")
    a, b = objectives
    top_a = argmax_point(a, b)
    if top_a is None:
        return None
    top_b = argmax_point(b, a)
    if top_a == top_b:
        return [{a: Fraction(1), b: Fraction(1)}]
    normals = []

    def scan(p, q):
        # p has the larger u_a, q the larger u_b; the chord normal is positive
        w = {a: q[1] - p[1], b: p[0] - q[0]}
        out = solve_lp(_face_program(sg, defectors, thresholds, w))
        if out.value == w[a] * p[0] + w[b] * p[1]:
            normals.append(w)
            return
        r = _utilities_at(sg, out.solution, objectives)
        scan(p, r)
        scan(r, q)

    scan(top_a, top_b)
    return normals


def perfectly_efficient_agreement_exists(sg: StackelbergGame) -> bool:
    """Decide whether a vector that is perfectly stable and perfectly efficient exists.

    Works set by set from the largest defector sets down. For defector set
    ``D`` the admissible entries are the Pareto optimal points (for the
    leaders still in) of the perfectly stable projection, restricted so that
    every remaining leader does at least as well as her own worst admissible
    continuation. Such a vector exists iff no admissible set is empty.

    This is an exact desk-scale check limited to three leaders, because the
    Pareto set is scanned through at most two objectives at a time.
    """
    leaders = frozenset(sg.leaders)
    if len(leaders) > 3:
        raise GameError("perfect-efficiency check is implemented for at most three leaders")
    game = sg.game
    plan = punishment_plan(sg)
    beta = {key: expected_utility(game, x, key.last) for key, x in plan.items()}
    worst: dict[DefectionKey, Fraction] = {}  # min of u_last over admissible entries
    for k in range(len(leaders), -1, -1):
        for combo in itertools.combinations(sorted(leaders), k):
            defectors = frozenset(combo)
            rest = tuple(sorted(leaders - defectors))
            base = {q: beta[DefectionKey(defectors | {q}, q)] for q in rest}
            admissible = [
                ({q: Fraction(1)}, Relation.GE, worst[DefectionKey(defectors | {q}, q)]) for q in rest
            ]
            if not defectors:
                probe = solve_lp(_face_program(sg, defectors, base, {}, admissible))
                return probe.status is not LpStatus.INFEASIBLE
            faces = _pareto_faces(sg, defectors, base, rest)
            if faces is None:
                return False
            for p in defectors:
                lowest = None
                for w in faces:
                    top = solve_lp(_face_program(sg, defectors, base, w)).value
                    rows = admissible + ([(w, Relation.EQ, top)] if w else [])
                    out = solve_lp(_face_program(sg, defectors, base, {p: Fraction(-1)}, rows))
                    if out.optimal and (lowest is None or -out.value < lowest):
                        lowest = -out.value
                if lowest is None:
                    return False
                worst[DefectionKey(defectors, p)] = lowest
    return True


# -- fixture corpus ------------------------------------------------------------


@dataclass(frozen=True)
class Claim:
    description: str
    expected: bool
    check: Callable[[], bool]


@dataclass(frozen=True)
class RelationFixture:
    """A bundled game together with the memberships it is known to witness."""

    name: str
    game: StackelbergGame
    claims: tuple[Claim, ...]

    def failures(self) -> list[str]:
        return [c.description for c in self.claims if c.check() != c.expected]


class FixtureClaimError(GameError):
    """A bundled fixture no longer exhibits a documented fact."""


def _relation_claims(name: str, sg: StackelbergGame) -> tuple[Claim, ...]:
    from .fixtures import load_vector_fixture
    from .solvers import objective_value, solve_opt_sce_pa, verify_efficiency, verify_stability

    game = sg.game
    if name == "fig1_left":
        x, xp, xpp = (load_vector_fixture(n) for n in ("example_x", "example_x_prime", "example_x_pape"))
        return (
            Claim("first example vector is stable", True, lambda: verify_stability(sg, x, "first-level")),
            Claim("first example vector is efficient among stable vectors", True, lambda: verify_efficiency(sg, x, "sce")),
            Claim("first example vector is perfectly stable", False, lambda: verify_stability(sg, x, "perfect")),
            Claim("second example vector is perfectly stable", True, lambda: verify_stability(sg, xp, "perfect")),
            Claim("second example vector is efficient among perfectly stable vectors", True,
                  lambda: verify_efficiency(sg, xp, "sce-pa")),
            Claim("third example vector is perfectly stable", True, lambda: verify_stability(sg, xpp, "perfect")),
            Claim("a perfectly stable vector efficient after every record exists", True,
                  lambda: perfectly_efficient_agreement_exists(sg)),
        )
    if name == "table2_no_pape":
        return (
            Claim("a perfectly stable vector efficient after every record exists", False,
                  lambda: perfectly_efficient_agreement_exists(sg)),
        )
    if name == "table4_ordering":
        def distinguishes_last() -> bool:
            report = solve_opt_sce_pa(sg, [0, 0, 1])
            a = report.vector.entry(DefectionKey(frozenset({0, 1}), 0))
            b = report.vector.entry(DefectionKey(frozenset({0, 1}), 1))
            return report.objective == 10 and a != b

        return (Claim("optimal perfectly stable plan reaches 10 and depends on the last defector", True,
                      distinguishes_last),)
    if name == "table5_left":
        corner = CorrelatedDistribution.delta((0, 0))
        solo = sg.with_leaders([0])
        return (
            Claim("(s11, s21) is a coarse correlated equilibrium", False, lambda: is_cce(game, corner)),
            Claim("(s11, s21) starts a perfectly stable vector when both lead", True,
                  lambda: admits_perfectly_stable_vector(sg, corner)),
            Claim("(s11, s21) starts a stable vector when only player 1 leads", False,
                  lambda: admits_stable_vector(solo, corner)),
            Claim("player 1's optimal commitment is (s12, s22) worth 1", True,
                  lambda: optimal_commitment(solo) == (CorrelatedDistribution.delta((1, 1)), 1)),
        )
    if name == "table5_right":
        cycle = CorrelatedDistribution.uniform([(0, 0), (1, 1), (2, 2)])
        return (
            Claim("uniform diagonal is a coarse correlated equilibrium", True, lambda: is_cce(game, cycle)),
            Claim("uniform diagonal starts a stable vector when both lead", True,
                  lambda: admits_stable_vector(sg, cycle)),
            # every CCE here pays each player at least her perfect-stability punishment value
            Claim("uniform diagonal starts a perfectly stable vector when both lead", True,
                  lambda: admits_perfectly_stable_vector(sg, cycle)),
        )
    if name.startswith("table6_mlbetter_k"):
        k = int(name.rsplit("k", 1)[1])

        def welfare_gap() -> bool:
            ce = stability_oracle(sg, OracleObjective((1, 1)), ())
            pa = solve_opt_sce_pa(sg, [1, 1])
            return pa.objective == 2 * k and objective_value(sg, pa.vector, [1, 1]) == 2 * k and (
                expected_utility(game, ce, 0) + expected_utility(game, ce, 1) == 2
            )

        return (Claim(f"perfectly stable welfare is {2 * k} while the best CE welfare is 2", True, welfare_gap),)
    raise KeyError(f"no relation claims for fixture {name!r}")


def relation_fixture(name: str, check: bool = True) -> RelationFixture:
    """Load a bundled game with its documented facts, re-checking them unless ``check`` is false.

    Raises:
        FixtureClaimError: if some documented fact does not hold.
    """
    from .fixtures import load_fixture

    sg = load_fixture(name)
    fixture = RelationFixture(name, sg, _relation_claims(name, sg))
    if check:
        failed = fixture.failures()
        if failed:
            raise FixtureClaimError(f"{name}: claim failed: {failed[0]}")
    return fixture


__all__ = [
    "Claim",
    "FixtureClaimError",
    "RelationFixture",
    "relation_fixture",
    "admits_perfectly_stable_vector",
    "admits_stable_vector",
    "best_response",
    "cce_to_stable",
    "collapse_onto",
    "everyone_leads",
    "lift_to_all_leaders",
    "optimal_cce",
    "optimal_commitment",
    "perfectly_efficient_agreement_exists",
]
