"""The agreement stage as an explicit game tree.

Leaders are asked in a fixed order whether they opt in. An opt-out removes
the leader for good and restarts the round with whoever is left; a round in
which everyone remaining opts in ends the stage. Each leaf is the ordered
record of opt-outs on its path.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction

from .game import GameError, StackelbergGame, expected_utility
from .vector import DistributionVector, OrderedSubset

MAX_TREE_LEADERS = 6


class EquilibriumMode(str, enum.Enum):
    NE = "ne"
    SPE = "spe"


@dataclass(frozen=True)
class Leaf:
    record: OrderedSubset
    payoffs: tuple[tuple[int, Fraction], ...]  # (leader, utility) pairs

    def payoff(self, leader: int) -> Fraction:
        return dict(self.payoffs)[leader]


@dataclass(frozen=True)
class DecisionNode:
    leader: int
    record: OrderedSubset
    to_ask: tuple[int, ...]  # still to be asked in this round, ``leader`` first
    opt_in: DecisionNode | Leaf
    opt_out: DecisionNode | Leaf


@dataclass(frozen=True)
class AgreementTree:
    leaders: tuple[int, ...]
    root: DecisionNode | Leaf

    def leaves(self) -> Iterator[Leaf]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf):
                yield node
            else:
                stack.append(node.opt_out)
                stack.append(node.opt_in)

    def decision_nodes(self) -> Iterator[DecisionNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, DecisionNode):
                yield node
                stack.append(node.opt_out)
                stack.append(node.opt_in)

    def outline(self) -> str:
        """Indented text rendering; leaders are shown 1-based."""
        lines: list[str] = []

        def show(rec: Sequence[int]) -> str:
            return "(" + ",".join(str(p + 1) for p in rec) + ")"

        def walk(node, depth: int, label: str) -> None:
            pad = "  " * depth
            if isinstance(node, Leaf):
                pay = ", ".join(f"u{p + 1}={u}" for p, u in node.payoffs)
                lines.append(f"{pad}{label}leaf {show(node.record)}: {pay}")
                return
            lines.append(f"{pad}{label}leader {node.leader + 1} decides after {show(node.record)}")
            walk(node.opt_in, depth + 1, "Opt-In -> ")
            walk(node.opt_out, depth + 1, "Opt-Out -> ")

        walk(self.root, 0, "")
        return "\n".join(lines)


def build_agreement_tree(
    sg: StackelbergGame, v: DistributionVector, asking_order: Iterable[int] | None = None
) -> AgreementTree:
    """Materialize the agreement stage with leaf payoffs ``u_p(x_record)``.

    ``asking_order`` defaults to ascending leader index.

    Raises:
        GameError: with more than ``MAX_TREE_LEADERS`` leaders (the tree grows
            factorially) or an asking order that is not a permutation of the leaders.
        VectorError: if ``v`` has no entry for some record.
    """
    order = tuple(sorted(sg.leaders)) if asking_order is None else tuple(asking_order)
    if sorted(order) != sorted(sg.leaders):
        raise GameError(f"asking order {order} is not a permutation of the leaders {sg.leaders}")
    if len(order) > MAX_TREE_LEADERS:
        raise GameError(f"agreement tree for {len(order)} leaders is too large (limit {MAX_TREE_LEADERS})")
    game = sg.game

    def leaf(record: OrderedSubset) -> Leaf:
        x = v[record]
        return Leaf(record, tuple((p, expected_utility(game, x, p)) for p in order))

    def node(record: OrderedSubset, to_ask: tuple[int, ...]) -> DecisionNode | Leaf:
        if not to_ask:
            return leaf(record)
        leader = to_ask[0]
        out_record = record + (leader,)
        fresh = tuple(p for p in order if p not in out_record)
        return DecisionNode(
            leader,
            record,
            to_ask,
            opt_in=node(record, to_ask[1:]),
            opt_out=node(out_record, fresh),
        )

    return AgreementTree(order, node((), order))


def _all_in(node: DecisionNode | Leaf) -> Leaf:
    while isinstance(node, DecisionNode):
        node = node.opt_in
    return node


def all_opt_in_equilibrium(tree: AgreementTree, mode: EquilibriumMode | str) -> bool:
    """Whether everybody always opting in is an equilibrium of the agreement stage.

    ``ne``: no leader profits from opting out at her decision on the all-in
    path. ``spe``: at every decision node, opting in (with all-in play
    afterwards) is at least as good for the acting leader as opting out.
    """
    mode = EquilibriumMode(mode)
    if mode is EquilibriumMode.NE:
        nodes = []
        node = tree.root
        while isinstance(node, DecisionNode):
            nodes.append(node)
            node = node.opt_in
    else:
        nodes = list(tree.decision_nodes())
    for node in nodes:
        stay = _all_in(node.opt_in).payoff(node.leader)
        leave = _all_in(node.opt_out).payoff(node.leader)
        if leave > stay:
            return False
    return True
