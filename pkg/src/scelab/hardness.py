"""Hardness gadgets: the DNF-tautology reduction and the separation-problem transform.

The reduction builds a game with one two-action leader per variable and a
follower who names a variable. Its witness vector is perfectly stable exactly
when the formula is a tautology, so verifying perfect stability is as hard as
tautology checking.

The second half concerns the dual of the oracle LP. Finding a violated dual
constraint (``Sep``) is rewritten as a weighted deviation-adjusted welfare
problem (``w-DaSW``); both are solved here by brute-force scans so the
rewriting can be checked on its own.
"""

from __future__ import annotations

import itertools
import re
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .game import CorrelatedDistribution, GameError, NormalFormGame, StackelbergGame
from .oracle import OracleObjective, StabilityConstraint
from .vector import DistributionVector, VectorForm, compact_keys

MAX_TAUTOLOGY_VARIABLES = 20
MAX_REDUCTION_VARIABLES = 12
MAX_SCAN_PROFILES = 1 << 20

TRUE, FALSE = 0, 1  # strategy indices of a variable leader


# -- formulas ----------------------------------------------------------------

Literal = tuple[str, bool]  # (variable, negated)

_NAME = re.compile(r"[A-Za-z_]\w*")
_TOKEN = re.compile(r"\s*(?:(?P<var>[A-Za-z_]\w*)|(?P<op>[()&|!~]))")


@dataclass(frozen=True)
class DnfFormula:
    """Disjunction of conjunctive clauses over an ordered variable list."""

    variables: tuple[str, ...]
    clauses: tuple[frozenset[Literal], ...]

    def __post_init__(self):
        if len(set(self.variables)) != len(self.variables):
            raise GameError("duplicate variable")
        known = set(self.variables)
        for clause in self.clauses:
            if not clause:
                raise GameError("empty clause")
            for var, _ in clause:
                if var not in known:
                    raise GameError(f"literal on unknown variable {var!r}")

    @classmethod
    def parse(cls, text: str, variables: Sequence[str] | None = None) -> DnfFormula:
        """Parse text such as ``"(v1 & !v2) | (v3)"``.

        Without ``variables``, the variable order is that of the names found,
        sorted by their numeric suffix (``v2`` before ``v10``).
        """
        tokens = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise GameError(f"unexpected character {text[pos]!r} at position {pos}")
            tokens.append(m.group("var") or m.group("op"))
            pos = m.end()
            while pos < len(text) and text[pos].isspace():
                pos += 1
        clauses = []
        i = 0

        def expect_literal(i: int) -> tuple[Literal, int]:
            negated = False
            while i < len(tokens) and tokens[i] in ("!", "~"):
                negated = not negated
                i += 1
            if i >= len(tokens) or not _NAME.fullmatch(tokens[i]):
                raise GameError("expected a variable")
            return (tokens[i], negated), i + 1

        while True:
            closing = i < len(tokens) and tokens[i] == "("
            if closing:
                i += 1
            literals = []
            lit, i = expect_literal(i)
            literals.append(lit)
            while i < len(tokens) and tokens[i] == "&":
                lit, i = expect_literal(i + 1)
                literals.append(lit)
            if closing:
                if i >= len(tokens) or tokens[i] != ")":
                    raise GameError("missing ')'")
                i += 1
            clauses.append(frozenset(literals))
            if i == len(tokens):
                break
            if tokens[i] != "|":
                raise GameError(f"expected '|' but found {tokens[i]!r}")
            i += 1
        if variables is None:
            names = {v for c in clauses for v, _ in c}
            variables = sorted(names, key=_variable_order)
        return cls(tuple(variables), tuple(clauses))

    def evaluate(self, assignment: Mapping[str, bool]) -> bool:
        return any(all(assignment[v] != neg for v, neg in clause) for clause in self.clauses)

    def __str__(self) -> str:
        def lit(l: Literal) -> str:
            return ("!" if l[1] else "") + l[0]

        order = {v: i for i, v in enumerate(self.variables)}
        return " | ".join(
            "(" + " & ".join(lit(l) for l in sorted(c, key=lambda l: (order[l[0]], l[1]))) + ")"
            for c in self.clauses
        )


def _variable_order(name: str):
    m = re.fullmatch(r"(.*?)(\d+)", name)
    return (m.group(1), int(m.group(2)), name) if m else (name, -1, name)


def is_tautology(phi: DnfFormula) -> bool:
    """Brute force over all assignments."""
    if len(phi.variables) > MAX_TAUTOLOGY_VARIABLES:
        raise GameError(f"{len(phi.variables)} variables exceed the limit of {MAX_TAUTOLOGY_VARIABLES}")
    return all(
        phi.evaluate(dict(zip(phi.variables, values)))
        for values in itertools.product((True, False), repeat=len(phi.variables))
    )


# -- the reduction game ------------------------------------------------------


def reduction_utility(phi: DnfFormula, leader_strategies: Sequence[int], named: int, leader: int) -> int:
    """Payoff of the leader for variable ``leader`` when the follower names variable ``named``."""
    k = len(phi.variables)
    falses = sum(1 for a in leader_strategies if a == FALSE)
    assignment = {v: a == TRUE for v, a in zip(phi.variables, leader_strategies)}
    plays_false = leader_strategies[leader] == FALSE
    if phi.evaluate(assignment):
        if named == leader:
            return falses - 1 if plays_false else 0
        return k if plays_false else falses
    if falses:
        return k
    return 0 if plays_false else -1


def dnf_to_sg(phi: DnfFormula, swmax: bool = False) -> tuple[StackelbergGame, DistributionVector]:
    """Game and witness vector that is perfectly stable iff ``phi`` is a tautology.

    Players are the variable leaders in variable order, then (with
    ``swmax``) a one-action leader paid ``|V|^2`` when every variable is true,
    then the follower, who always gets 0. The witness has every defector play
    false and everyone else true; the follower names the last defector, or
    the first variable when the last defector is not a variable leader.
    """
    k = len(phi.variables)
    if k < 1:
        raise GameError("formula has no variables")
    if k > MAX_REDUCTION_VARIABLES:
        raise GameError(f"{k} variables exceed the limit of {MAX_REDUCTION_VARIABLES}")
    counts = [2] * k + ([1] if swmax else []) + [k]
    follower = len(counts) - 1

    def payoffs(s: Sequence[int]) -> list[int]:
        row = [reduction_utility(phi, s[:k], s[follower], v) for v in range(k)]
        if swmax:
            row.append(k * k if all(a == TRUE for a in s[:k]) else 0)
        return row + [0]

    game = NormalFormGame.from_function(counts, payoffs)
    leaders = tuple(range(follower))
    sg = StackelbergGame(game, leaders)

    def profile(defectors: frozenset, named: int) -> tuple[int, ...]:
        lead = tuple(FALSE if v in defectors else TRUE for v in range(k))
        return lead + ((0,) if swmax else ()) + (named,)

    entries = {}
    for key in compact_keys(leaders):
        if key.last is None or key.last >= k:
            variables = sorted(p for p in key.defectors if p < k)
            named = variables[0] if variables else 0
        else:
            named = key.last
        entries[key] = CorrelatedDistribution.delta(profile(key.defectors, named))
    return sg, DistributionVector(leaders, VectorForm.COMPACT, entries)


# -- separation and deviation-adjusted welfare ---------------------------------

Deviation = tuple[int, int, int]  # (player, recommended, alternative)


@dataclass(frozen=True)
class DualPoint:
    """Dual multipliers for the oracle LP and a bound ``t``.

    ``z_follower`` weights the incentive rows of non-leaders, ``z_leader``
    the utility-threshold rows. Missing entries are zero.
    """

    z_follower: Mapping[Deviation, Fraction] = field(default_factory=dict)
    z_leader: Mapping[int, Fraction] = field(default_factory=dict)
    t: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "z_follower", {k: Fraction(v) for k, v in self.z_follower.items()})
        object.__setattr__(self, "z_leader", {k: Fraction(v) for k, v in self.z_leader.items()})
        object.__setattr__(self, "t", Fraction(self.t))
        if any(v < 0 for v in self.z_follower.values()) or any(v < 0 for v in self.z_leader.values()):
            raise GameError("dual point has a negative component")


@dataclass(frozen=True)
class AdjustmentWeights:
    """Deviation weights ``y >= 0`` and per-player utility weights ``v`` (any sign)."""

    y: Mapping[Deviation, Fraction]
    v: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "y", {k: Fraction(w) for k, w in self.y.items() if w})
        object.__setattr__(self, "v", tuple(Fraction(w) for w in self.v))
        if any(w < 0 for w in self.y.values()):
            raise GameError("adjustment weights have a negative component")


def _profiles(game: NormalFormGame) -> list[tuple[int, ...]]:
    if game.profile_count > MAX_SCAN_PROFILES:
        raise GameError(f"{game.profile_count} profiles exceed the scan limit of {MAX_SCAN_PROFILES}")
    return game.profiles()


def _regret_terms(game: NormalFormGame, weights: Mapping[Deviation, Fraction], s: tuple[int, ...]) -> Fraction:
    return sum(
        (w * (game.utility(s, p) - game.deviation_utility(s, p, b)) for (p, a, b), w in weights.items() if s[p] == a),
        Fraction(0),
    )


def deviation_adjusted_welfare(game: NormalFormGame, w: AdjustmentWeights, s: Sequence[int]) -> Fraction:
    """``sum_p v_p u_p(s)`` plus the ``y``-weighted regrets of the recommendations in ``s``."""
    s = game.check_profile(s)
    if len(w.v) != game.player_count:
        raise GameError(f"expected {game.player_count} utility weights, got {len(w.v)}")
    base = sum((vp * game.utility(s, p) for p, vp in enumerate(w.v) if vp), Fraction(0))
    return base + _regret_terms(game, w.y, s)


def wdasw_violations(game: NormalFormGame, w: AdjustmentWeights, t: Fraction) -> Iterator[tuple[int, ...]]:
    """Every profile whose deviation-adjusted welfare exceeds ``t``, in enumeration order."""
    for s in _profiles(game):
        if deviation_adjusted_welfare(game, w, s) > t:
            yield s


def wdasw_search(game: NormalFormGame, w: AdjustmentWeights, t: Fraction) -> tuple[int, ...] | None:
    return next(wdasw_violations(game, w, Fraction(t)), None)


def _threshold_map(sg: StackelbergGame, thresholds: Iterable[StabilityConstraint]) -> dict[int, Fraction]:
    b = {}
    for c in thresholds:
        if c.player not in sg.leaders:
            raise GameError(f"threshold on non-leader {c.player}")
        b[c.player] = Fraction(c.threshold)
    return b


def _check_dual(sg: StackelbergGame, b: Mapping[int, Fraction], d: DualPoint) -> None:
    for p, a, alt in d.z_follower:
        if p in sg.leaders:
            raise GameError(f"incentive multiplier on leader {p}")
        if not (0 <= a < sg.game.strategy_counts[p] and 0 <= alt < sg.game.strategy_counts[p]):
            raise GameError(f"incentive multiplier {(p, a, alt)} out of range")
    for p in d.z_leader:
        if p not in b:
            raise GameError(f"threshold multiplier on player {p}, who has no threshold")


def dual_row_value(
    sg: StackelbergGame, c: OracleObjective, b: Mapping[int, Fraction], d: DualPoint, s: tuple[int, ...]
) -> Fraction:
    """``(U_s)^T z + w_s`` expanded term by term."""
    game = sg.game
    value = sum((cp * game.utility(s, p) for p, cp in enumerate(c.coefficients) if cp), Fraction(0))
    value += _regret_terms(game, d.z_follower, s)
    value += sum((z * (game.utility(s, p) - b[p]) for p, z in d.z_leader.items()), Fraction(0))
    return value


def sep_violations(
    sg: StackelbergGame, c: OracleObjective, thresholds: Iterable[StabilityConstraint], d: DualPoint
) -> Iterator[tuple[int, ...]]:
    b = _threshold_map(sg, thresholds)
    _check_dual(sg, b, d)
    for s in _profiles(sg.game):
        if dual_row_value(sg, c, b, d, s) > d.t:
            yield s


def sep_search(
    sg: StackelbergGame, c: OracleObjective, thresholds: Iterable[StabilityConstraint], d: DualPoint
) -> tuple[int, ...] | None:
    """First profile whose dual constraint ``d`` violates, or None if ``d`` is feasible."""
    return next(sep_violations(sg, c, thresholds, d), None)


def sep_to_wdasw(
    c: OracleObjective, leaders: Iterable[int], thresholds: Iterable[StabilityConstraint], d: DualPoint
) -> tuple[AdjustmentWeights, Fraction]:
    """Rewrite a separation query as a weighted deviation-adjusted welfare query."""
    leaders = frozenset(leaders)
    b = {t.player: Fraction(t.threshold) for t in thresholds}
    y = {(p, a, alt): z for (p, a, alt), z in d.z_follower.items() if p not in leaders}
    v = tuple(cp + (d.z_leader.get(p, 0) if p in leaders else 0) for p, cp in enumerate(c.coefficients))
    t_hat = d.t + sum((z * b[p] for p, z in d.z_leader.items() if p in leaders), Fraction(0))
    return AdjustmentWeights(y, v), t_hat


__all__ = [
    "AdjustmentWeights",
    "DnfFormula",
    "DualPoint",
    "deviation_adjusted_welfare",
    "dnf_to_sg",
    "dual_row_value",
    "is_tautology",
    "sep_search",
    "sep_to_wdasw",
    "sep_violations",
    "reduction_utility",
    "wdasw_search",
    "wdasw_violations",
]
