"""Feature relations between events and the df-path generator.

A relation is stored as a union of bicliques ``(left, right)``: every event in
``left`` is related to every event in ``right``.  Atomic relations are one
clique per distinct value, so nothing quadratic in the table is materialized
until a relation is restricted to an observation.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import RelationError, UnknownFeatureError
from .event_model import EventTable, Observation


@dataclass(frozen=True, order=False)
class FeatureSet:
    members: frozenset

    def __post_init__(self):
        if not isinstance(self.members, frozenset):
            object.__setattr__(self, "members", frozenset(self.members))
        if not 1 <= len(self.members) <= 2:
            raise RelationError("a feature set holds one (atomic) or two (derived) features")

    @classmethod
    def of(cls, *names: str) -> FeatureSet:
        return cls(frozenset(names))

    @property
    def is_atomic(self) -> bool:
        return len(self.members) == 1

    @property
    def key(self) -> tuple[str, ...]:
        return tuple(sorted(self.members))

    def __lt__(self, other: FeatureSet) -> bool:
        return (len(self.members), self.key) < (len(other.members), other.key)

    def __str__(self) -> str:
        return "{" + ",".join(self.key) + "}"


@dataclass(frozen=True)
class Model:
    feature_sets: frozenset = frozenset()

    def __post_init__(self):
        if not isinstance(self.feature_sets, frozenset):
            object.__setattr__(self, "feature_sets", frozenset(self.feature_sets))

    @classmethod
    def atomic(cls, *names: str) -> Model:
        return cls(frozenset(FeatureSet.of(n) for n in names))

    @classmethod
    def from_lists(cls, lists: Iterable[Iterable[str]]) -> Model:
        return cls(frozenset(FeatureSet(frozenset(x)) for x in lists))

    def sorted_sets(self) -> list[FeatureSet]:
        return sorted(self.feature_sets)

    def to_lists(self) -> list[list[str]]:
        return [list(fs.key) for fs in self.sorted_sets()]

    def features(self) -> frozenset:
        return frozenset().union(*(fs.members for fs in self.feature_sets))

    def union(self, other: Model) -> Model:
        return Model(self.feature_sets | other.feature_sets)

    def __len__(self) -> int:
        return len(self.feature_sets)

    def __iter__(self):
        return iter(self.sorted_sets())

    def __str__(self) -> str:
        return "{" + ",".join(str(fs) for fs in self.sorted_sets()) + "}"


@dataclass(frozen=True)
class SymmetricRelation:
    """Symmetric relation over table event indices.

    ``support`` holds the events related to themselves (nonempty value-sets).
    """
    bicliques: tuple[tuple[frozenset, frozenset], ...]
    support: frozenset
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        index: dict[int, list[int]] = {}
        for k, (left, right) in enumerate(self.bicliques):
            for e in left | right:
                index.setdefault(e, []).append(k)
        object.__setattr__(self, "_index", index)

    def related(self, a: int, b: int) -> bool:
        if a == b:
            return a in self.support
        for k in self._index.get(a, ()):
            left, right = self.bicliques[k]
            if (a in left and b in right) or (a in right and b in left):
                return True
        return False

    def pairs_within(self, members: Iterable[int]) -> set[tuple[int, int]]:
        """Unordered pairs ``(a, b)``, ``a < b``, with both ends in ``members``."""
        mset = set(members)
        touched = sorted({k for e in mset for k in self._index.get(e, ())})
        out: set[tuple[int, int]] = set()
        for k in touched:
            left, right = self.bicliques[k]
            lm = mset & left
            rm = lm if right is left else mset & right
            if not lm or not rm:
                continue
            for a in lm:
                for b in rm:
                    if a < b:
                        out.add((a, b))
                    elif b < a:
                        out.add((b, a))
        return out

    @property
    def pairs(self) -> frozenset:
        members = set(self._index)
        return frozenset(self.pairs_within(members))


def _value_groups(table: EventTable, feature: str) -> dict[str, frozenset]:
    groups: dict[str, set[int]] = {}
    for e, vs in enumerate(table.column(feature)):
        for v in vs:
            groups.setdefault(v, set()).add(e)
    return {v: frozenset(g) for v, g in groups.items()}


def atomic_relation(table: EventTable, feature: str) -> SymmetricRelation:
    """Events are related when their value-sets for ``feature`` intersect."""
    groups = _value_groups(table, feature)
    cliques = tuple((g, g) for _, g in sorted(groups.items()))
    support = frozenset(e for e, vs in enumerate(table.column(feature)) if vs)
    return SymmetricRelation(cliques, support)


def _neighbourhoods(groups: Mapping[str, frozenset], table_size: int) -> list[frozenset]:
    nbr: list[set[int]] = [set() for _ in range(table_size)]
    for g in groups.values():
        for e in g:
            nbr[e] |= g
    return [frozenset(s) for s in nbr]


def derived_relation(table: EventTable, fi: str, fk: str) -> SymmetricRelation:
    """Relation of the derived feature ``{fi, fk}``.

    Union of both atomic relations plus every pair ``(a, d)`` bridged as
    ``a ~fi b ~fj c ~fk d`` for some third atomic feature ``fj`` and ``b != c``.
    ``a == b`` and ``c == d`` are allowed through reflexivity.  No further
    transitive closure is taken.
    """
    if fi == fk:
        raise RelationError("derived feature needs two distinct features")
    table.feature_index(fi)
    table.feature_index(fk)
    gi = _value_groups(table, fi)
    gk = _value_groups(table, fk)
    ni = _neighbourhoods(gi, len(table))
    nk = _neighbourhoods(gk, len(table))
    cross: set[tuple[frozenset, frozenset]] = set()
    for fj in table.features:
        if fj in (fi, fk):
            continue
        for g in _value_groups(table, fj).values():
            for b in g:
                if not ni[b]:
                    continue
                for c in g:
                    if c != b and nk[c]:
                        cross.add((ni[b], nk[c]))
    base_i = atomic_relation(table, fi)
    base_k = atomic_relation(table, fk)
    bicliques = base_i.bicliques + base_k.bicliques + tuple(
        sorted(cross, key=lambda lr: (sorted(lr[0]), sorted(lr[1]))))
    return SymmetricRelation(bicliques, base_i.support | base_k.support)


def feature_relation(table: EventTable, fs: FeatureSet) -> SymmetricRelation:
    if fs.is_atomic:
        (f,) = fs.members
        return atomic_relation(table, f)
    fi, fk = fs.key
    return derived_relation(table, fi, fk)


class RelationCache:
    """Per-table memo of relations keyed by :class:`FeatureSet`; thread safe."""

    def __init__(self, table: EventTable):
        self.table = table
        self._cache: dict[FeatureSet, SymmetricRelation] = {}
        self._lock = threading.Lock()

    def get(self, fs: FeatureSet) -> SymmetricRelation:
        with self._lock:
            rel = self._cache.get(fs)
        if rel is not None:
            return rel
        for f in fs.members:
            if f not in self.table.features:
                raise UnknownFeatureError(f"unknown feature {f!r}")
        rel = feature_relation(self.table, fs)
        with self._lock:
            return self._cache.setdefault(fs, rel)

    def for_model(self, model: Model) -> dict[FeatureSet, SymmetricRelation]:
        return {fs: self.get(fs) for fs in model.sorted_sets()}


def df_path_generator(obs: Observation, model: Model,
                      relations: Mapping[FeatureSet, SymmetricRelation]) -> set[tuple[int, int]]:
    """Ordered pairs ``(a, b)`` of table indices with ``a`` before ``b`` in ``obs``
    and ``a``, ``b`` related by some feature set of ``model``."""
    out: set[tuple[int, int]] = set()
    for fs in model.sorted_sets():
        try:
            rel = relations[fs]
        except KeyError:
            raise RelationError(f"no relation supplied for {fs}") from None
        # members are chronological and table indices follow the table order
        out |= rel.pairs_within(obs.members)
    return out


def attributed_pairs(obs: Observation, model: Model,
                     relations: Mapping[FeatureSet, SymmetricRelation]) -> dict[tuple[int, int], list[FeatureSet]]:
    """Like :func:`df_path_generator` but remembers which feature sets induced each pair."""
    out: dict[tuple[int, int], list[FeatureSet]] = {}
    for fs in model.sorted_sets():
        if fs not in relations:
            raise RelationError(f"no relation supplied for {fs}")
        for pair in sorted(relations[fs].pairs_within(obs.members)):
            out.setdefault(pair, []).append(fs)
    return out
