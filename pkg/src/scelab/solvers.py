"""Constructing and checking Stackelberg correlated equilibria.

Three constructions, each a fixed sequence of stability-oracle queries:

* :func:`solve_opt_sce` - an SCE maximizing weighted leader welfare
  (``|L| + 2`` queries);
* :func:`solve_f_sce_pa` - some SCE with perfect agreement (``|L| + 1``);
* :func:`solve_opt_sce_pa` - an optimal SCE with perfect agreement, by a
  backward recursion over (defector set, last defector) keys
  (``|L| * 2**(|L|-1) + 1``).

The verifiers decide stability, perfect stability and Pareto efficiency of a
given vector directly from the definitions, so they can be used to check the
constructions and hand-built vectors alike.
"""

from __future__ import annotations

import enum
import itertools
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .game import (
    CorrelatedDistribution,
    GameError,
    StackelbergGame,
    expected_utility,
    format_rational,
    is_ce_for,
    parse_rational,
)
from .lp import LinearProgram, Relation, solve_lp
from .oracle import (
    OracleObjective,
    QueryCounter,
    StabilityConstraint,
    incentive_rows,
    stability_oracle,
)
from .vector import (
    EMPTY,
    DefectionKey,
    DistributionVector,
    VectorError,
    VectorForm,
    compact_keys,
    describe_key,
    vector_from_document,
    vector_to_document,
)


class PreconditionError(GameError):
    """An input violates an operation's precondition (as opposed to failing a check)."""


class StabilityMode(str, enum.Enum):
    FIRST_LEVEL = "first-level"
    PERFECT = "perfect"


class EfficiencyMode(str, enum.Enum):
    SCE = "sce"
    SCE_PA = "sce-pa"


def leader_weights(sg: StackelbergGame, lam: Sequence[Any], *, positive: bool = False) -> tuple[Fraction, ...]:
    """Validate one weight per leader, in ``[0, 1]`` (or ``(0, 1]`` when ``positive``)."""
    lam = tuple(parse_rational(w, f"lambda[{i}]") for i, w in enumerate(lam))
    if len(lam) != len(sg.leaders):
        raise GameError(f"expected {len(sg.leaders)} leader weights, got {len(lam)}")
    for i, w in enumerate(lam):
        if w > 1 or w < 0 or (positive and w == 0):
            bounds = "(0, 1]" if positive else "[0, 1]"
            raise GameError(f"lambda[{i}] = {w} outside {bounds}")
    return lam


@dataclass(frozen=True)
class SolveReport:
    vector: DistributionVector
    objective: Fraction
    oracle_queries: int

    def to_document(self) -> dict[str, Any]:
        doc = vector_to_document(self.vector)
        doc["objective"] = format_rational(self.objective)
        doc["oracle_queries"] = self.oracle_queries
        return doc

    @classmethod
    def from_document(cls, doc: dict[str, Any]) -> SolveReport:
        return cls(
            vector_from_document(doc),
            parse_rational(doc["objective"], "$.objective"),
            int(doc["oracle_queries"]),
        )


def objective_value(sg: StackelbergGame, v: DistributionVector, lam: Sequence[Any]) -> Fraction:
    """Weighted leader welfare at the distribution used when nobody defects."""
    lam = leader_weights(sg, lam)
    x = v.empty
    return sum(
        (w * expected_utility(sg.game, x, p) for p, w in zip(sg.leaders, lam) if w),
        Fraction(0),
    )


def _no_leader_report(sg: StackelbergGame, form: VectorForm) -> SolveReport:
    counter = QueryCounter()
    n = sg.game.player_count
    x = stability_oracle(sg, OracleObjective((0,) * n), (), counter=counter)
    return SolveReport(DistributionVector((), form, {(): x}), Fraction(0), counter.count)


def solve_opt_sce(sg: StackelbergGame, lam: Sequence[Any]) -> SolveReport:
    """Optimal SCE for weights ``lam`` with ``|L| + 2`` oracle queries.

    Each leader's defection is punished as hard as her own incentive
    constraints allow, the no-defection distribution maximizes the weighted
    welfare subject to beating those punishments, and every deeper record uses
    one shared optimal CE.
    """
    lam = leader_weights(sg, lam)
    if not sg.leaders:
        return _no_leader_report(sg, VectorForm.COMPACT)
    game, leaders = sg.game, sg.leaders
    n = game.player_count
    counter = QueryCounter()
    punish = {}
    for p in leaders:
        others = [q for q in leaders if q != p]
        punish[p] = stability_oracle(sg, OracleObjective.minimize(n, p), others, counter=counter)
    c_lam = OracleObjective.weights(n, leaders, lam)
    thresholds = [StabilityConstraint.from_distribution(game, p, punish[p]) for p in leaders]
    x_empty = stability_oracle(sg, c_lam, leaders, thresholds, counter=counter)
    x_deep = stability_oracle(sg, c_lam, (), counter=counter)

    entries = {}
    for key in compact_keys(leaders):
        if key.last is None:
            entries[key] = x_empty
        elif len(key.defectors) == 1:
            entries[key] = punish[key.last]
        else:
            entries[key] = x_deep
    v = DistributionVector(leaders, VectorForm.COMPACT, entries)
    return SolveReport(v, objective_value(sg, v, lam), counter.count)


def solve_f_sce_pa(sg: StackelbergGame, lam: Sequence[Any]) -> SolveReport:
    """Some SCE with perfect agreement, with ``|L| + 1`` oracle queries.

    The result is keyed by the first defector: once leader ``p`` opts out,
    play is fixed to a full-game CE minimizing ``u_p``, whatever happens next.
    Use :meth:`DistributionVector.to_full` for the per-record view.
    """
    lam = leader_weights(sg, lam, positive=True)
    if not sg.leaders:
        return _no_leader_report(sg, VectorForm.FIRST)
    game, leaders = sg.game, sg.leaders
    n = game.player_count
    counter = QueryCounter()
    punish = {p: stability_oracle(sg, OracleObjective.minimize(n, p), (), counter=counter) for p in leaders}
    thresholds = [StabilityConstraint.from_distribution(game, p, punish[p]) for p in leaders]
    x_empty = stability_oracle(sg, OracleObjective.weights(n, leaders, lam), leaders, thresholds, counter=counter)
    entries = {(): x_empty}
    entries.update({(p,): punish[p] for p in leaders})
    v = DistributionVector(leaders, VectorForm.FIRST, entries)
    return SolveReport(v, objective_value(sg, v, lam), counter.count)


def punishment_plan(
    sg: StackelbergGame, counter: QueryCounter | None = None, threads: int = 1
) -> dict[DefectionKey, CorrelatedDistribution]:
    """Harshest perfectly stable continuation for every non-empty compact key.

    For key ``(D, p)`` the entry minimizes ``u_p`` over distributions in which
    ``D`` and the followers respect their incentive constraints and every
    remaining leader does at least as well as by defecting next. Keys are
    processed from the largest defector sets down; keys of one size are
    independent, and run on ``threads`` workers.
    """
    game, leaders = sg.game, frozenset(sg.leaders)
    n = game.player_count
    plan: dict[DefectionKey, CorrelatedDistribution] = {}

    def solve(key: DefectionKey) -> CorrelatedDistribution:
        rest = sorted(leaders - key.defectors)
        thresholds = [
            StabilityConstraint.from_distribution(game, q, plan[DefectionKey(key.defectors | {q}, q)])
            for q in rest
        ]
        return stability_oracle(sg, OracleObjective.minimize(n, key.last), rest, thresholds, counter=counter)

    keys = [k for k in compact_keys(leaders) if k.last is not None]
    for _, level in itertools.groupby(keys, key=lambda k: len(k.defectors)):
        level = list(level)
        if threads > 1 and len(level) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(solve, level))
        else:
            results = [solve(k) for k in level]
        plan.update(zip(level, results))
    return plan


def solve_opt_sce_pa(sg: StackelbergGame, lam: Sequence[Any], threads: int = 1) -> SolveReport:
    """Optimal SCE with perfect agreement, with ``|L| * 2**(|L|-1) + 1`` oracle queries."""
    lam = leader_weights(sg, lam)
    if not sg.leaders:
        return _no_leader_report(sg, VectorForm.COMPACT)
    game, leaders = sg.game, sg.leaders
    counter = QueryCounter()
    plan = punishment_plan(sg, counter, threads)
    thresholds = [
        StabilityConstraint.from_distribution(game, p, plan[DefectionKey(frozenset({p}), p)]) for p in leaders
    ]
    c_lam = OracleObjective.weights(game.player_count, leaders, lam)
    entries = dict(plan)
    entries[EMPTY] = stability_oracle(sg, c_lam, leaders, thresholds, counter=counter)
    v = DistributionVector(leaders, VectorForm.COMPACT, entries)
    return SolveReport(v, objective_value(sg, v, lam), counter.count)


# -- verification ------------------------------------------------------------


def _check_leaders(sg: StackelbergGame, v: DistributionVector) -> None:
    if set(v.leaders) != set(sg.leaders):
        raise PreconditionError(
            f"vector is for leaders {[p + 1 for p in sorted(v.leaders)]}, "
            f"game has leaders {[p + 1 for p in sorted(sg.leaders)]}"
        )


def stability_violations(sg: StackelbergGame, v: DistributionVector, mode: StabilityMode | str) -> list[str]:
    """Every reason ``v`` fails the requested stability notion (empty list if none).

    Besides the stability inequalities this checks that each stored
    distribution satisfies the incentive constraints its records demand.

    Raises:
        VectorError: if ``v`` lacks a key its form requires.
    """
    mode = StabilityMode(mode)
    _check_leaders(sg, v)
    v.require_complete()
    game = sg.game
    problems = []
    followers = sg.followers
    for key, x in v.items():
        x.check_for(game)
        players = v.ce_players(key, followers)
        if not is_ce_for(game, x, players):
            problems.append(
                f"{describe_key(key)}: incentive constraints of players {[p + 1 for p in sorted(players)]} violated"
            )
    keys = [v.empty_key] if mode is StabilityMode.FIRST_LEVEL else v.required_keys()
    for key in keys:
        x = v.entry(key)
        for q, nxt in v.successors(key):
            stay = expected_utility(game, x, q)
            leave = expected_utility(game, v.entry(nxt), q)
            if stay < leave:
                problems.append(f"{describe_key(key)}: leader {q + 1} gets {stay} but {leave} by opting out")
    return problems


def verify_stability(sg: StackelbergGame, v: DistributionVector, mode: StabilityMode | str) -> bool:
    return not stability_violations(sg, v, mode)


def _sce_thresholds(sg: StackelbergGame) -> dict[int, Fraction]:
    game, leaders = sg.game, sg.leaders
    out = {}
    for p in leaders:
        others = [q for q in leaders if q != p]
        x = stability_oracle(sg, OracleObjective.minimize(game.player_count, p), others)
        out[p] = expected_utility(game, x, p)
    return out


def _sce_pa_thresholds(sg: StackelbergGame) -> dict[int, Fraction]:
    plan = punishment_plan(sg)
    return {
        p: expected_utility(sg.game, plan[DefectionKey(frozenset({p}), p)], p) for p in sg.leaders
    }


def punishment_values(sg: StackelbergGame, mode: EfficiencyMode | str) -> dict[int, Fraction]:
    """Lowest utility each leader can be held to after defecting first.

    ``sce`` minimizes over her own relaxed CE set; ``sce-pa`` runs the
    perfectly stable backward recursion, whose values describe which
    no-defection distributions some perfectly stable vector can support.
    """
    mode = EfficiencyMode(mode)
    return _sce_thresholds(sg) if mode is EfficiencyMode.SCE else _sce_pa_thresholds(sg)


def pareto_slack(sg: StackelbergGame, x: CorrelatedDistribution, thresholds: dict[int, Fraction]) -> Fraction:
    """Largest total leader improvement over ``x`` among stable-supportable distributions.

    Solves ``max sum eps_p`` s.t. ``u_p(x') = u_p(x) + eps_p``, ``eps >= 0``,
    followers' incentive constraints on ``x'``, ``u_p(x') >= thresholds[p]``.
    Zero means ``x`` is Pareto optimal.
    """
    game, leaders = sg.game, sg.leaders
    profiles = game.profiles()
    m, k = len(profiles), len(leaders)
    lp = LinearProgram([0] * m + [1] * k)
    for _, _, _, coeffs in incentive_rows(game, sg.followers):
        lp.add(coeffs + [0] * k, Relation.GE, 0)
    for i, p in enumerate(leaders):
        utilities = [game.utility(s, p) for s in profiles]
        eps = [0] * k
        eps[i] = -1
        lp.add(utilities + eps, Relation.EQ, expected_utility(game, x, p))
        lp.add(utilities + [0] * k, Relation.GE, thresholds[p])
    lp.add([1] * m + [0] * k, Relation.EQ, 1)
    outcome = solve_lp(lp)
    if not outcome.optimal:
        raise PreconditionError(f"efficiency program is {outcome.status.value}")
    return outcome.value


def verify_efficiency(sg: StackelbergGame, v: DistributionVector, mode: EfficiencyMode | str) -> bool:
    """Whether the no-defection distribution is Pareto optimal for the leaders.

    ``sce`` compares against every stable vector, ``sce-pa`` against every
    perfectly stable one. The perfectly stable comparison set is described
    through the backward-recursion punishment values (see
    :func:`punishment_values`).

    Raises:
        PreconditionError: if ``v`` is not stable (``sce``) or perfectly
            stable (``sce-pa``) to begin with.
    """
    mode = EfficiencyMode(mode)
    needed = StabilityMode.FIRST_LEVEL if mode is EfficiencyMode.SCE else StabilityMode.PERFECT
    problems = stability_violations(sg, v, needed)
    if problems:
        raise PreconditionError(f"vector is not {needed.value} stable: {problems[0]}")
    if not sg.leaders:
        return True
    return pareto_slack(sg, v.empty, punishment_values(sg, mode)) == 0


def canonicalize(sg: StackelbergGame, v: DistributionVector) -> DistributionVector:
    """Re-key a perfectly stable full-form vector by (defector set, last defector).

    Each compact key ``(D, p)`` takes, among the records that order ``D`` and
    end with ``p``, the distribution that is worst for ``p`` (first such
    record in lexicographic order on ties). Perfect stability and the
    no-defection distribution are preserved.
    """
    if v.form is not VectorForm.FULL:
        raise PreconditionError("canonicalize expects a full-form vector")
    problems = stability_violations(sg, v, StabilityMode.PERFECT)
    if problems:
        raise PreconditionError(f"input is not perfectly stable: {problems[0]}")
    game = sg.game
    entries = {EMPTY: v.empty}
    for key in compact_keys(v.leaders):
        if key.last is None:
            continue
        p = key.last
        best = None
        for order in itertools.permutations(sorted(key.defectors - {p})):
            x = v.entry(order + (p,))
            value = expected_utility(game, x, p)
            if best is None or value < best[0]:
                best = (value, x)
        entries[key] = best[1]
    return DistributionVector(v.leaders, VectorForm.COMPACT, entries)


__all__ = [
    "EfficiencyMode",
    "PreconditionError",
    "SolveReport",
    "StabilityMode",
    "VectorError",
    "canonicalize",
    "leader_weights",
    "objective_value",
    "pareto_slack",
    "punishment_plan",
    "punishment_values",
    "solve_f_sce_pa",
    "solve_opt_sce",
    "solve_opt_sce_pa",
    "stability_violations",
    "verify_efficiency",
    "verify_stability",
]
