import itertools
import math
import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from scelab.game import CorrelatedDistribution, NormalFormGame, StackelbergGame  # noqa: E402

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_game(rng: random.Random, counts, low=-3, high=3) -> NormalFormGame:
    size = math.prod(counts)
    return NormalFormGame(counts, [[rng.randint(low, high) for _ in counts] for _ in range(size)])


def random_sg(rng: random.Random, max_leaders=3, max_strategies=3, max_profiles=27, min_leaders=0) -> StackelbergGame:
    """Random small SG; leaders in shuffled order so the asking order varies too."""
    while True:
        n = rng.randint(max(1, min_leaders), max_leaders + 1)
        counts = [rng.randint(1, max_strategies) for _ in range(n)]
        if math.prod(counts) <= max_profiles:
            break
    k = rng.randint(min_leaders, min(n, max_leaders))
    leaders = rng.sample(range(n), k)
    return StackelbergGame(random_game(rng, counts), leaders)


def random_distribution(rng: random.Random, game: NormalFormGame, support=None) -> CorrelatedDistribution:
    profiles = game.profiles()
    chosen = rng.sample(profiles, min(len(profiles), support or rng.randint(1, len(profiles))))
    weights = [rng.randint(1, 5) for _ in chosen]
    total = sum(weights)
    return CorrelatedDistribution({s: Fraction(w, total) for s, w in zip(chosen, weights)})


@st.composite
def games(draw, max_players=3, max_strategies=3, max_profiles=18):
    n = draw(st.integers(1, max_players))
    counts = draw(
        st.lists(st.integers(1, max_strategies), min_size=n, max_size=n).filter(
            lambda c: math.prod(c) <= max_profiles
        )
    )
    size = math.prod(counts)
    payoffs = draw(st.lists(st.lists(st.integers(-4, 4), min_size=n, max_size=n), min_size=size, max_size=size))
    return NormalFormGame(counts, payoffs)


@st.composite
def stackelberg_games(draw, max_players=3, max_strategies=3, max_profiles=18, min_leaders=0):
    g = draw(games(max_players, max_strategies, max_profiles))
    leaders = draw(st.permutations(range(g.player_count)))
    k = draw(st.integers(min(min_leaders, g.player_count), g.player_count))
    return StackelbergGame(g, leaders[:k])


@st.composite
def distributions(draw, game: NormalFormGame):
    profiles = game.profiles()
    weights = draw(st.lists(st.integers(0, 4), min_size=len(profiles), max_size=len(profiles)))
    if not any(weights):
        weights[draw(st.integers(0, len(profiles) - 1))] = 1
    total = sum(weights)
    return CorrelatedDistribution({s: Fraction(w, total) for s, w in zip(profiles, weights) if w})


@pytest.fixture
def rng():
    return random.Random(20240611)


def all_pure(game: NormalFormGame):
    return [CorrelatedDistribution.delta(s) for s in itertools.product(*(range(c) for c in game.strategy_counts))]


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
