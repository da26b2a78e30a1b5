"""Bundled example games and hand-built vectors, shipped as JSON documents."""

from __future__ import annotations

import json
from importlib import resources

from ..game import NormalFormGame, StackelbergGame, load_game
from ..vector import DistributionVector, vector_from_document

GAMES = (
    "fig1_left",
    "table2_no_pape",
    "table4_ordering",
    "table5_left",
    "table5_right",
    "table6_mlbetter_k2",
    "table6_mlbetter_k3",
    "table6_mlbetter_k5",
)
VECTORS = ("example_x", "example_x_prime", "example_x_pape")


def fixture_text(name: str) -> str:
    try:
        return resources.files(__name__).joinpath(f"{name}.json").read_text()
    except FileNotFoundError:
        raise KeyError(f"no bundled fixture named {name!r}") from None


def load_fixture(name: str) -> StackelbergGame:
    """Game fixture by name, e.g. ``"fig1_left"``."""
    return load_game(fixture_text(name))


def load_vector_fixture(name: str) -> DistributionVector:
    """Hand-built vector for ``fig1_left`` by name, e.g. ``"example_x"``."""
    return vector_from_document(json.loads(fixture_text(name)))


def table6_mlbetter(k: int) -> StackelbergGame:
    """Two-leader game where the perfectly stable optimum pays ``2k`` but every CE pays ``2``."""
    if k < 2:
        raise ValueError("k must be at least 2")
    g = NormalFormGame([2, 2], [[k, k], [0, k + 1], [k + 1, 0], [1, 1]])
    return StackelbergGame(g, (0, 1))
