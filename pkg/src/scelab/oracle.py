"""The stability oracle and its decision form.

The oracle maximizes a weighted sum of expected utilities over distributions
that satisfy the CE incentive constraints of every non-leader, subject to
lower bounds on some leaders' utilities. On a normal-form game this is one LP
over the profile simplex, solved exactly.
"""

from __future__ import annotations

import threading
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

from .game import (
    CorrelatedDistribution,
    GameError,
    NormalFormGame,
    StackelbergGame,
    expected_utility,
    is_ce_for,
)
from .lp import LinearProgram, Relation, solve_lp


class OracleInfeasible(RuntimeError):
    """The thresholds cut the constrained CE polytope down to nothing."""


class QueryCounter:
    """Thread-safe tally of oracle queries."""

    def __init__(self):
        self._lock = threading.Lock()
        self._count = 0

    def increment(self) -> None:
        with self._lock:
            self._count += 1

    @property
    def count(self) -> int:
        with self._lock:
            return self._count


@dataclass(frozen=True)
class OracleObjective:
    """Per-player weights in ``[-1, 1]``."""

    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = tuple(Fraction(c) for c in self.coefficients)
        for p, c in enumerate(coeffs):
            if not -1 <= c <= 1:
                raise GameError(f"oracle coefficient {c} of player {p} outside [-1, 1]")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def weights(cls, n: int, leaders: Sequence[int], lam: Sequence[Fraction]) -> OracleObjective:
        """``lam[i]`` on ``leaders[i]``, zero elsewhere: the weighted leader-welfare objective."""
        if len(lam) != len(leaders):
            raise GameError(f"expected {len(leaders)} leader weights, got {len(lam)}")
        c = [Fraction(0)] * n
        for p, w in zip(leaders, lam):
            c[p] = Fraction(w)
        return cls(tuple(c))

    @classmethod
    def minimize(cls, n: int, player: int) -> OracleObjective:
        """``-1`` on ``player``: push that player's utility as low as possible."""
        c = [Fraction(0)] * n
        c[player] = Fraction(-1)
        return cls(tuple(c))

    def value(self, game: NormalFormGame, x: CorrelatedDistribution) -> Fraction:
        return sum(
            (c * expected_utility(game, x, p) for p, c in enumerate(self.coefficients) if c),
            Fraction(0),
        )


@dataclass(frozen=True)
class StabilityConstraint:
    """``u_player(x) >= threshold``."""

    player: int
    threshold: Fraction

    @classmethod
    def from_distribution(cls, game: NormalFormGame, player: int, x: CorrelatedDistribution) -> StabilityConstraint:
        return cls(player, expected_utility(game, x, player))


def _check_arguments(game: NormalFormGame, leaders: Iterable[int], thresholds: Iterable[StabilityConstraint]):
    leaders = frozenset(leaders)
    for p in leaders:
        if not 0 <= p < game.player_count:
            raise GameError(f"leader {p} is not a player")
    thresholds = sorted(thresholds, key=lambda t: t.player)
    seen = set()
    for t in thresholds:
        if t.player not in leaders:
            raise GameError(f"stability constraint on player {t.player}, who is not among the leaders {sorted(leaders)}")
        if t.player in seen:
            raise GameError(f"two stability constraints on player {t.player}")
        seen.add(t.player)
    return leaders, thresholds


def incentive_rows(game: NormalFormGame, players: Iterable[int]) -> list[tuple[int, int, int, list[Fraction]]]:
    """CE incentive constraint rows, sorted by (player, recommended, deviation).

    Each row is ``(player, recommended, deviation, coefficients over profiles)``
    and encodes ``coefficients . x >= 0``.
    """
    profiles = game.profiles()
    rows = []
    for p in sorted(players):
        for a in range(game.strategy_counts[p]):
            for b in range(game.strategy_counts[p]):
                if a == b:
                    continue
                coeffs = [
                    game.utility(s, p) - game.deviation_utility(s, p, b) if s[p] == a else Fraction(0)
                    for s in profiles
                ]
                rows.append((p, a, b, coeffs))
    return rows


def oracle_program(
    sg: StackelbergGame,
    c: OracleObjective,
    leaders: Iterable[int],
    thresholds: Iterable[StabilityConstraint] = (),
) -> LinearProgram:
    """The LP behind the oracle; one variable per profile, in enumeration order."""
    game = sg.game
    if len(c.coefficients) != game.player_count:
        raise GameError(f"objective has {len(c.coefficients)} coefficients for {game.player_count} players")
    leaders, thresholds = _check_arguments(game, leaders, thresholds)
    profiles = game.profiles()
    objective = [
        sum((w * game.utility(s, p) for p, w in enumerate(c.coefficients) if w), Fraction(0))
        for s in profiles
    ]
    lp = LinearProgram(objective)
    followers = [p for p in game.players() if p not in leaders]
    for _, _, _, coeffs in incentive_rows(game, followers):
        lp.add(coeffs, Relation.GE, 0)
    for t in thresholds:
        lp.add([game.utility(s, t.player) for s in profiles], Relation.GE, t.threshold)
    lp.add([1] * len(profiles), Relation.EQ, 1)
    return lp


def stability_oracle(
    sg: StackelbergGame,
    c: OracleObjective,
    leaders: Iterable[int],
    thresholds: Iterable[StabilityConstraint] = (),
    counter: QueryCounter | None = None,
) -> CorrelatedDistribution:
    """Best distribution for objective ``c`` among those in which no non-leader wants to deviate.

    ``leaders`` is the set of players exempt from incentive constraints (the
    committed ones); ``thresholds`` add ``u_p(x) >= b_p`` for some of them.
    With no leaders and no thresholds this returns an optimal CE.

    Raises:
        OracleInfeasible: if the thresholds leave no feasible distribution.
    """
    lp = oracle_program(sg, c, leaders, thresholds)
    if counter is not None:
        counter.increment()
    outcome = solve_lp(lp)
    if not outcome.optimal:
        raise OracleInfeasible(f"stability oracle: {outcome.status.value}")
    profiles = sg.game.profiles()
    return CorrelatedDistribution({profiles[i]: v for i, v in enumerate(outcome.solution) if v})


def oracle_decision(
    sg: StackelbergGame,
    x: CorrelatedDistribution,
    leaders: Iterable[int],
    thresholds: Iterable[StabilityConstraint] = (),
) -> bool:
    """Membership test matching ``stability_oracle``'s feasible set; no optimization."""
    game = sg.game
    leaders, thresholds = _check_arguments(game, leaders, thresholds)
    if not is_ce_for(game, x, [p for p in game.players() if p not in leaders]):
        return False
    return all(expected_utility(game, x, t.player) >= t.threshold for t in thresholds)


def thresholds_from(game: NormalFormGame, punishments: Mapping[int, CorrelatedDistribution]) -> list[StabilityConstraint]:
    """One constraint per leader: do at least as well as under her punishment distribution."""
    return [StabilityConstraint.from_distribution(game, p, x) for p, x in sorted(punishments.items())]
