"""Commitment plans: one correlated distribution per record of leader defections.

A defection record is the ordered tuple of leaders who opted out. Storing one
distribution per ordered record is factorial in the number of leaders, so a
vector picks a keying scheme that maps every record onto a storage key:

``full``
    the record itself (used for verification at small sizes);
``compact``
    the unordered set of defectors plus the last one to defect, which is all
    an optimal perfectly stable plan ever needs;
``first``
    the first defector only, the shape of the cheap perfectly stable plans
    whose every continuation is a full-game CE.
"""

from __future__ import annotations

import enum
import itertools
import math
from collections.abc import Iterable, Iterator, Mapping
from typing import Any, NamedTuple, Union

from .game import (
    CorrelatedDistribution,
    GameError,
    StackelbergGame,
    distribution_from_document,
    distribution_to_document,
)

OrderedSubset = tuple[int, ...]


class DefectionKey(NamedTuple):
    """Compact key: ``last is None`` only for the empty record."""

    defectors: frozenset
    last: int | None

    @classmethod
    def of(cls, record: Iterable[int]) -> DefectionKey:
        record = tuple(record)
        if not record:
            return EMPTY
        return cls(frozenset(record), record[-1])

    def __repr__(self) -> str:
        if self.last is None:
            return "DefectionKey(empty)"
        return f"DefectionKey({sorted(self.defectors)}, last={self.last})"


EMPTY = DefectionKey(frozenset(), None)


def describe_key(key) -> str:
    """Human-readable key with 1-based players: ``(2,1)``, ``{1,2} last 2`` or ``empty``."""
    if isinstance(key, DefectionKey):
        if key.last is None:
            return "empty"
        return "{" + ",".join(str(p + 1) for p in sorted(key.defectors)) + f"}} last {key.last + 1}"
    return "(" + ",".join(str(p + 1) for p in key) + ")"

Key = Union[OrderedSubset, DefectionKey]


class VectorForm(str, enum.Enum):
    FULL = "full"
    COMPACT = "compact"
    FIRST = "first"


class VectorError(GameError):
    """Incomplete or inconsistent distribution vector."""


def ordered_subsets(players: Iterable[int]) -> Iterator[OrderedSubset]:
    """Every ordered subset (including the empty one), shortest first."""
    players = tuple(players)
    for k in range(len(players) + 1):
        for combo in itertools.combinations(players, k):
            yield from itertools.permutations(combo)


def ordered_subset_count(k: int) -> int:
    return sum(math.comb(k, i) * math.factorial(i) for i in range(k + 1))


def compact_keys(leaders: Iterable[int]) -> list[DefectionKey]:
    """All compact keys, largest defector sets first (the order a backward recursion needs)."""
    leaders = tuple(sorted(leaders))
    keys = []
    for k in range(len(leaders), 0, -1):
        for combo in itertools.combinations(leaders, k):
            keys.extend(DefectionKey(frozenset(combo), p) for p in combo)
    keys.append(EMPTY)
    return keys


class DistributionVector:
    """Immutable map from storage keys to distributions, for one leader set."""

    __slots__ = ("leaders", "form", "_entries")

    def __init__(self, leaders: Iterable[int], form: VectorForm | str, entries: Mapping[Any, CorrelatedDistribution]):
        self.leaders = tuple(leaders)
        self.form = VectorForm(form)
        table = {}
        lead = set(self.leaders)
        for key, x in entries.items():
            key = self._normalize(key)
            members = set(key.defectors) if isinstance(key, DefectionKey) else set(key)
            if not members <= lead:
                raise VectorError(f"key {key!r} mentions a non-leader")
            if not isinstance(x, CorrelatedDistribution):
                raise VectorError(f"entry for {key!r} is not a CorrelatedDistribution")
            table[key] = x
        if self.empty_key not in table:
            raise VectorError("the empty defection record has no distribution")
        self._entries = table

    def _normalize(self, key) -> Key:
        if self.form is VectorForm.COMPACT:
            if isinstance(key, DefectionKey):
                if key.last is None:
                    if key.defectors:
                        raise VectorError("empty key with defectors")
                elif key.last not in key.defectors:
                    raise VectorError(f"last defector {key.last} not among {sorted(key.defectors)}")
                return DefectionKey(frozenset(key.defectors), key.last)
            return DefectionKey.of(key)
        key = tuple(key)
        if len(set(key)) != len(key):
            raise VectorError(f"duplicate leader in record {key}")
        if self.form is VectorForm.FIRST and len(key) > 1:
            raise VectorError(f"first-defector keys have at most one leader, got {key}")
        return key

    @property
    def empty_key(self) -> Key:
        return EMPTY if self.form is VectorForm.COMPACT else ()

    def key_of(self, record: Iterable[int]) -> Key:
        record = tuple(record)
        if self.form is VectorForm.COMPACT:
            return DefectionKey.of(record)
        if self.form is VectorForm.FIRST:
            return record[:1]
        return record

    def __getitem__(self, record: Iterable[int]) -> CorrelatedDistribution:
        """Distribution used after the defection record ``record``."""
        key = self.key_of(record)
        try:
            return self._entries[key]
        except KeyError:
            raise VectorError(f"missing key {key!r}") from None

    @property
    def empty(self) -> CorrelatedDistribution:
        return self._entries[self.empty_key]

    def entry(self, key: Key) -> CorrelatedDistribution:
        try:
            return self._entries[key]
        except KeyError:
            raise VectorError(f"missing key {key!r}") from None

    def keys(self) -> list[Key]:
        return list(self._entries)

    def items(self):
        return self._entries.items()

    def __len__(self) -> int:
        return len(self._entries)

    def required_keys(self) -> list[Key]:
        if self.form is VectorForm.COMPACT:
            return compact_keys(self.leaders)
        if self.form is VectorForm.FIRST:
            return [()] + [(p,) for p in self.leaders]
        return list(ordered_subsets(self.leaders))

    def missing_keys(self) -> list[Key]:
        return [k for k in self.required_keys() if k not in self._entries]

    def require_complete(self) -> None:
        missing = self.missing_keys()
        if missing:
            shown = ", ".join(repr(k) for k in missing[:5])
            more = "" if len(missing) <= 5 else f" and {len(missing) - 5} more"
            raise VectorError(f"incomplete {self.form.value} vector: missing key {shown}{more}")

    def ce_players(self, key: Key, followers: Iterable[int]) -> frozenset:
        """Players whose incentive constraints the entry at ``key`` must satisfy.

        It is the union of ``record | followers`` over every record that maps
        onto ``key``.
        """
        followers = frozenset(followers)
        if self.form is VectorForm.COMPACT:
            return key.defectors | followers
        if self.form is VectorForm.FIRST and key:
            return frozenset(self.leaders) | followers
        return frozenset(key) | followers

    def successors(self, key: Key) -> list[tuple[int, Key]]:
        """``(q, key')`` pairs: leader ``q`` can still defect and would move play to ``key'``.

        For first-defector keys a later defection never changes the entry, so
        those comparisons are vacuous and omitted.
        """
        if self.form is VectorForm.COMPACT:
            return [
                (q, DefectionKey(key.defectors | {q}, q))
                for q in self.leaders
                if q not in key.defectors
            ]
        if self.form is VectorForm.FIRST:
            return [] if key else [(q, (q,)) for q in self.leaders]
        return [(q, key + (q,)) for q in self.leaders if q not in key]

    def to_full(self, limit: int = 6) -> DistributionVector:
        if len(self.leaders) > limit:
            raise VectorError(f"refusing to materialize {ordered_subset_count(len(self.leaders))} records")
        return DistributionVector(
            self.leaders, VectorForm.FULL, {rec: self[rec] for rec in ordered_subsets(self.leaders)}
        )

    def replace(self, updates: Mapping[Any, CorrelatedDistribution]) -> DistributionVector:
        entries = dict(self._entries)
        for key, x in updates.items():
            entries[self._normalize(key)] = x
        return DistributionVector(self.leaders, self.form, entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DistributionVector):
            return NotImplemented
        return (self.leaders, self.form, self._entries) == (other.leaders, other.form, other._entries)

    def __repr__(self) -> str:
        return f"DistributionVector(form={self.form.value}, leaders={self.leaders}, entries={len(self._entries)})"


def constant_vector(sg: StackelbergGame, x: CorrelatedDistribution, form: VectorForm | str = VectorForm.COMPACT) -> DistributionVector:
    """The plan that uses ``x`` after every defection record."""
    template = DistributionVector(sg.leaders, form, {(): x})
    return DistributionVector(sg.leaders, form, {k: x for k in template.required_keys()})


# -- serialization -----------------------------------------------------------


def _key_to_document(key: Key, form: VectorForm) -> Any:
    if form is VectorForm.COMPACT:
        if key.last is None:
            return "empty"
        return {"defectors": sorted(p + 1 for p in key.defectors), "last": key.last + 1}
    if not key:
        return "empty"
    if form is VectorForm.FIRST:
        return {"first": key[0] + 1}
    return {"sequence": [p + 1 for p in key]}


def _key_from_document(doc: Any, form: VectorForm, path: str) -> Key:
    if doc == "empty":
        return EMPTY if form is VectorForm.COMPACT else ()
    if not isinstance(doc, Mapping):
        raise VectorError(f"{path}: expected \"empty\" or an object")
    try:
        if form is VectorForm.COMPACT:
            return DefectionKey(frozenset(p - 1 for p in doc["defectors"]), doc["last"] - 1)
        if form is VectorForm.FIRST:
            return (doc["first"] - 1,)
        return tuple(p - 1 for p in doc["sequence"])
    except (KeyError, TypeError):
        raise VectorError(f"{path}: malformed {form.value} key {doc!r}") from None


def vector_to_document(v: DistributionVector) -> dict[str, Any]:
    return {
        "form": v.form.value,
        "leaders": [p + 1 for p in v.leaders],
        "entries": [
            {"key": _key_to_document(k, v.form), "distribution": distribution_to_document(x)}
            for k, x in v.items()
        ],
    }


def vector_from_document(doc: Mapping[str, Any]) -> DistributionVector:
    if not isinstance(doc, Mapping):
        raise VectorError("$: vector document must be a JSON object")
    try:
        form = VectorForm(doc.get("form", "compact"))
    except ValueError:
        raise VectorError(f"$.form: unknown vector form {doc.get('form')!r}") from None
    leaders = doc.get("leaders")
    if not isinstance(leaders, list) or not all(isinstance(p, int) and p >= 1 for p in leaders):
        raise VectorError("$.leaders: expected 1-based leader indices")
    entries = doc.get("entries")
    if not isinstance(entries, list):
        raise VectorError("$.entries: expected a list")
    table = {}
    for i, item in enumerate(entries):
        if not isinstance(item, Mapping):
            raise VectorError(f"$.entries[{i}]: expected an object")
        key = _key_from_document(item.get("key"), form, f"$.entries[{i}].key")
        table[key] = distribution_from_document(item.get("distribution"), f"$.entries[{i}].distribution")
    return DistributionVector([p - 1 for p in leaders], form, table)
