"""Finite normal-form games, leader/follower partitions and correlated distributions.

Everything here is exact: payoffs and probabilities are ``fractions.Fraction``.
Players and strategies are 0-based in code; game documents use 1-based
indices so that ``s_{p,i}`` in a document reads the way it is usually written.
"""

from __future__ import annotations

import itertools
import json
import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from fractions import Fraction
from typing import Any

Rational = Fraction
Profile = tuple[int, ...]


class GameError(ValueError):
    """Malformed game, distribution or document."""


def parse_rational(value: Any, path: str = "value") -> Fraction:
    """Parse an exact rational from an int or an ``"a/b"`` / ``"a"`` string.

    Floats are rejected on purpose: a payoff of ``0.1`` has no exact binary
    representation and silently rounding it would defeat the point.
    """
    if isinstance(value, bool):
        raise GameError(f"{path}: expected int or 'a/b' string, got bool")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise GameError(f"{path}: cannot parse rational {value!r}") from None
    raise GameError(f"{path}: expected int or 'a/b' string, got {type(value).__name__}")


def format_rational(q: Fraction) -> str:
    """``"a/b"``, or just ``"a"`` when the denominator is 1."""
    return str(Fraction(q))


class NormalFormGame:
    """Dense utility tensor of a finite game.

    Profiles are enumerated row-major, the last player's strategy varying
    fastest (the order of ``itertools.product``).
    """

    __slots__ = ("strategy_counts", "_payoffs", "_strides", "_profiles")

    def __init__(self, strategy_counts: Sequence[int], payoffs: Sequence[Sequence[Any]]):
        counts = tuple(int(c) for c in strategy_counts)
        if not counts:
            raise GameError("a game needs at least one player")
        if any(c < 1 for c in counts):
            raise GameError(f"every player needs at least one strategy, got {counts}")
        size = math.prod(counts)
        if len(payoffs) != size:
            raise GameError(f"utility count mismatch: expected {size} profiles, got {len(payoffs)}")
        rows = []
        for i, row in enumerate(payoffs):
            if len(row) != len(counts):
                raise GameError(
                    f"utility count mismatch: utilities[{i}] has {len(row)} entries, expected {len(counts)}"
                )
            rows.append(tuple(parse_rational(v, f"utilities[{i}][{j}]") for j, v in enumerate(row)))
        self.strategy_counts = counts
        self._payoffs = tuple(rows)
        strides = [1] * len(counts)
        for p in range(len(counts) - 2, -1, -1):
            strides[p] = strides[p + 1] * counts[p + 1]
        self._strides = tuple(strides)
        self._profiles = tuple(itertools.product(*(range(c) for c in counts)))

    @classmethod
    def from_function(cls, strategy_counts: Sequence[int], utility) -> NormalFormGame:
        """Build a game from ``utility(profile) -> per-player payoffs``."""
        profiles = itertools.product(*(range(c) for c in strategy_counts))
        return cls(strategy_counts, [utility(s) for s in profiles])

    @property
    def player_count(self) -> int:
        return len(self.strategy_counts)

    @property
    def profile_count(self) -> int:
        return len(self._payoffs)

    def players(self) -> range:
        return range(len(self.strategy_counts))

    def profiles(self) -> tuple[Profile, ...]:
        return self._profiles

    def index(self, profile: Profile) -> int:
        return sum(s * k for s, k in zip(profile, self._strides))

    def payoffs(self, profile: Profile) -> tuple[Fraction, ...]:
        return self._payoffs[self.index(profile)]

    def utility(self, profile: Profile, player: int) -> Fraction:
        return self._payoffs[self.index(profile)][player]

    def deviation_utility(self, profile: Profile, player: int, strategy: int) -> Fraction:
        """``u_p(s'_p, s_{-p})``: player's payoff when only she switches to ``strategy``."""
        i = self.index(profile) + (strategy - profile[player]) * self._strides[player]
        return self._payoffs[i][player]

    def check_profile(self, profile: Sequence[int]) -> Profile:
        profile = tuple(profile)
        if len(profile) != self.player_count:
            raise GameError(f"dimension mismatch: profile {profile} for a {self.player_count}-player game")
        for p, (s, c) in enumerate(zip(profile, self.strategy_counts)):
            if not 0 <= s < c:
                raise GameError(f"strategy {s} out of range for player {p} ({c} strategies)")
        return profile

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NormalFormGame):
            return NotImplemented
        return self.strategy_counts == other.strategy_counts and self._payoffs == other._payoffs

    def __hash__(self) -> int:
        return hash((self.strategy_counts, self._payoffs))

    def __repr__(self) -> str:
        return f"NormalFormGame(strategy_counts={self.strategy_counts})"


class StackelbergGame:
    """A game plus an ordered tuple of leaders; followers are everyone else.

    The leader order is the order in which leaders are asked during the
    agreement stage. It never changes which distributions are optimal.
    """

    __slots__ = ("game", "leaders")

    def __init__(self, game: NormalFormGame, leaders: Iterable[int] = ()):
        leaders = tuple(int(p) for p in leaders)
        if len(set(leaders)) != len(leaders):
            raise GameError(f"duplicate leader index in {leaders}")
        for p in leaders:
            if not 0 <= p < game.player_count:
                raise GameError(f"leader index {p} out of range for {game.player_count} players")
        self.game = game
        self.leaders = leaders

    @property
    def followers(self) -> tuple[int, ...]:
        lead = set(self.leaders)
        return tuple(p for p in self.game.players() if p not in lead)

    def with_leaders(self, leaders: Iterable[int]) -> StackelbergGame:
        return StackelbergGame(self.game, leaders)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StackelbergGame):
            return NotImplemented
        return self.game == other.game and self.leaders == other.leaders

    def __hash__(self) -> int:
        return hash((self.game, self.leaders))

    def __repr__(self) -> str:
        return f"StackelbergGame({self.game!r}, leaders={self.leaders})"


class CorrelatedDistribution(Mapping):
    """Sparse probability mass over strategy profiles.

    Absent profiles carry mass 0; explicit zeros are dropped on construction.
    """

    __slots__ = ("_mass", "_hash")

    def __init__(self, mass: Mapping[Sequence[int], Any] | Iterable[tuple[Sequence[int], Any]]):
        items = mass.items() if isinstance(mass, Mapping) else mass
        table: dict[Profile, Fraction] = {}
        for profile, m in items:
            key = tuple(int(s) for s in profile)
            q = parse_rational(m, f"mass{list(key)}")
            if q < 0:
                raise GameError(f"negative mass {q} on profile {key}")
            if q:
                table[key] = table.get(key, Fraction(0)) + q
        total = sum(table.values(), Fraction(0))
        if total != 1:
            raise GameError(f"masses sum to {total}, not 1")
        self._mass = dict(sorted(table.items()))
        self._hash = None

    @classmethod
    def delta(cls, profile: Sequence[int]) -> CorrelatedDistribution:
        return cls({tuple(profile): 1})

    @classmethod
    def uniform(cls, profiles: Iterable[Sequence[int]]) -> CorrelatedDistribution:
        profiles = [tuple(s) for s in profiles]
        if not profiles:
            raise GameError("uniform distribution over an empty set")
        return cls({s: Fraction(1, len(profiles)) for s in profiles})

    def __getitem__(self, profile) -> Fraction:
        return self._mass.get(tuple(profile), Fraction(0))

    def __iter__(self) -> Iterator[Profile]:
        return iter(self._mass)

    def __len__(self) -> int:
        return len(self._mass)

    def __contains__(self, profile) -> bool:
        return tuple(profile) in self._mass

    @property
    def support(self) -> tuple[Profile, ...]:
        return tuple(self._mass)

    def mix(self, other: CorrelatedDistribution, alpha: Fraction) -> CorrelatedDistribution:
        """``alpha * self + (1 - alpha) * other``."""
        alpha = Fraction(alpha)
        if not 0 <= alpha <= 1:
            raise GameError(f"mixing weight {alpha} outside [0, 1]")
        out: dict[Profile, Fraction] = {}
        for s, m in self._mass.items():
            out[s] = out.get(s, Fraction(0)) + alpha * m
        for s, m in other.items():
            out[s] = out.get(s, Fraction(0)) + (1 - alpha) * m
        return CorrelatedDistribution(out)

    def check_for(self, game: NormalFormGame) -> CorrelatedDistribution:
        for s in self._mass:
            game.check_profile(s)
        return self

    def __eq__(self, other: object) -> bool:
        if isinstance(other, CorrelatedDistribution):
            return self._mass == other._mass
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._mass.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{list(s)}: {m}" for s, m in self._mass.items())
        return f"CorrelatedDistribution({{{body}}})"


def expected_utility(game: NormalFormGame, x: CorrelatedDistribution, player: int) -> Fraction:
    if not 0 <= player < game.player_count:
        raise GameError(f"dimension mismatch: player {player} in a {game.player_count}-player game")
    return sum((m * game.utility(s, player) for s, m in x.items()), Fraction(0))


def incentive_gains(game: NormalFormGame, x: CorrelatedDistribution, player: int) -> dict[tuple[int, int], Fraction]:
    """Left-hand sides of the CE incentive constraints of one player.

    Keyed by ``(recommended, deviation)``; only recommendations in the support
    appear. A CE needs every value to be non-negative.
    """
    gains: dict[tuple[int, int], Fraction] = {}
    count = game.strategy_counts[player]
    for s, m in x.items():
        a = s[player]
        u = game.utility(s, player)
        for b in range(count):
            if b != a:
                key = (a, b)
                gains[key] = gains.get(key, Fraction(0)) + m * (u - game.deviation_utility(s, player, b))
    return gains


def is_ce_for(game: NormalFormGame, x: CorrelatedDistribution, players: Iterable[int]) -> bool:
    """Whether ``x`` satisfies the CE incentive constraints of every player in ``players``.

    With all players this is CE membership; with a subset it tests the
    relaxation where only those players may deviate.
    """
    x.check_for(game)
    for p in players:
        if not 0 <= p < game.player_count:
            raise GameError(f"dimension mismatch: player {p} in a {game.player_count}-player game")
        if any(g < 0 for g in incentive_gains(game, x, p).values()):
            return False
    return True


def is_ce(game: NormalFormGame, x: CorrelatedDistribution) -> bool:
    return is_ce_for(game, x, game.players())


def is_cce(game: NormalFormGame, x: CorrelatedDistribution) -> bool:
    """Coarse CE: no player gains by committing to a fixed strategy before seeing the draw."""
    x.check_for(game)
    for p in game.players():
        value = expected_utility(game, x, p)
        for b in range(game.strategy_counts[p]):
            fixed = sum((m * game.deviation_utility(s, p, b) for s, m in x.items()), Fraction(0))
            if fixed > value:
                return False
    return True


# -- documents ---------------------------------------------------------------


def _require(doc: Mapping, key: str, kind, path: str):
    if key not in doc:
        raise GameError(f"{path}.{key}: missing")
    value = doc[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise GameError(f"{path}.{key}: expected {kind.__name__}")
    return value


def game_from_document(doc: Mapping[str, Any]) -> StackelbergGame:
    """Validate a parsed game document and build the Stackelberg game it describes."""
    if not isinstance(doc, Mapping):
        raise GameError("$: game document must be a JSON object")
    n = _require(doc, "players", int, "$")
    if n < 1:
        raise GameError("$.players: need at least one player")
    counts = _require(doc, "strategies", list, "$")
    if len(counts) != n:
        raise GameError(f"$.strategies: expected {n} entries, got {len(counts)}")
    for i, c in enumerate(counts):
        if not isinstance(c, int) or isinstance(c, bool) or c < 1:
            raise GameError(f"$.strategies[{i}]: expected a positive integer")
    leaders = doc.get("leaders", [])
    if not isinstance(leaders, list):
        raise GameError("$.leaders: expected a list")
    seen = set()
    for i, p in enumerate(leaders):
        if not isinstance(p, int) or isinstance(p, bool) or not 1 <= p <= n:
            raise GameError(f"$.leaders[{i}]: leader index {p!r} out of range 1..{n}")
        if p in seen:
            raise GameError(f"$.leaders[{i}]: duplicate leader index {p}")
        seen.add(p)
    utilities = _require(doc, "utilities", list, "$")
    size = math.prod(counts)
    if len(utilities) != size:
        raise GameError(f"$.utilities: utility count mismatch, expected {size} profiles, got {len(utilities)}")
    rows = []
    for i, row in enumerate(utilities):
        if not isinstance(row, list) or len(row) != n:
            raise GameError(f"$.utilities[{i}]: utility count mismatch, expected {n} entries")
        rows.append([parse_rational(v, f"$.utilities[{i}][{j}]") for j, v in enumerate(row)])
    return StackelbergGame(NormalFormGame(counts, rows), [p - 1 for p in leaders])


def load_game(document: str | bytes | Mapping[str, Any]) -> StackelbergGame:
    """Parse a game from JSON text (or an already-decoded object)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise GameError(f"$: invalid JSON ({exc})") from None
    return game_from_document(document)


def game_to_document(sg: StackelbergGame) -> dict[str, Any]:
    g = sg.game
    return {
        "players": g.player_count,
        "strategies": list(g.strategy_counts),
        "leaders": [p + 1 for p in sg.leaders],
        "utilities": [
            [u.numerator if u.denominator == 1 else format_rational(u) for u in g.payoffs(s)]
            for s in g.profiles()
        ],
    }


def distribution_to_document(x: CorrelatedDistribution) -> list[dict[str, Any]]:
    return [{"profile": [i + 1 for i in s], "p": format_rational(m)} for s, m in x.items()]


def distribution_from_document(doc: Sequence[Mapping[str, Any]], path: str = "$") -> CorrelatedDistribution:
    if not isinstance(doc, list):
        raise GameError(f"{path}: distribution must be a list of {{profile, p}} entries")
    mass = []
    for i, entry in enumerate(doc):
        if not isinstance(entry, Mapping) or "profile" not in entry or "p" not in entry:
            raise GameError(f"{path}[{i}]: expected an object with 'profile' and 'p'")
        profile = entry["profile"]
        if not isinstance(profile, list) or not all(isinstance(s, int) and s >= 1 for s in profile):
            raise GameError(f"{path}[{i}].profile: expected 1-based strategy indices")
        mass.append(([s - 1 for s in profile], parse_rational(entry["p"], f"{path}[{i}].p")))
    try:
        return CorrelatedDistribution(mass)
    except GameError as exc:
        raise GameError(f"{path}: {exc}") from None
