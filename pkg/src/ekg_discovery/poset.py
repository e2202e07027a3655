"""Finite strict partial orders stored as DAGs over dense indices ``0..n-1``."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import PosetError, OracleLimitError
from .event_model import Observation
from .relations import FeatureSet, Model, RelationCache, SymmetricRelation, df_path_generator

DEFAULT_ORACLE_CEILING = 20


@dataclass(frozen=True)
class Poset:
    """A DAG whose transitive closure is the order.  Edges ``(a, b)`` mean a < b."""
    n: int
    edges: frozenset = frozenset()
    labels: tuple | None = None
    _pred: tuple = field(default=None, init=False, repr=False, compare=False, hash=False)
    _succ: tuple = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not isinstance(self.edges, frozenset):
            object.__setattr__(self, "edges", frozenset(self.edges))
        if self.labels is not None and len(self.labels) != self.n:
            raise PosetError("labels must cover every element")
        pred = [0] * self.n
        succ = [0] * self.n
        for a, b in self.edges:
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise PosetError(f"edge {(a, b)} out of range")
            if a == b:
                raise PosetError("self loops are not allowed in a strict order")
            pred[b] |= 1 << a
            succ[a] |= 1 << b
        object.__setattr__(self, "_pred", tuple(pred))
        object.__setattr__(self, "_succ", tuple(succ))
        self.topological_order()  # raises on cycles

    @property
    def pred_masks(self) -> tuple[int, ...]:
        return self._pred

    @property
    def succ_masks(self) -> tuple[int, ...]:
        return self._succ

    def label(self, i: int):
        return self.labels[i] if self.labels is not None else i

    def topological_order(self) -> list[int]:
        indeg = [bin(p).count("1") for p in self._pred]
        ready = [i for i in range(self.n) if indeg[i] == 0]
        order = []
        while ready:
            ready.sort(reverse=True)
            v = ready.pop()
            order.append(v)
            s = self._succ[v]
            while s:
                low = s & -s
                w = low.bit_length() - 1
                s ^= low
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
        if len(order) != self.n:
            raise PosetError("edge set contains a cycle")
        return order

    def reach_masks(self) -> list[int]:
        """``reach[a]`` has bit ``b`` set iff a < b in the closure."""
        reach = [0] * self.n
        for v in reversed(self.topological_order()):
            r = 0
            s = self._succ[v]
            while s:
                low = s & -s
                w = low.bit_length() - 1
                s ^= low
                r |= low | reach[w]
            reach[v] = r
        return reach

    def closure(self) -> frozenset:
        reach = self.reach_masks()
        return frozenset((a, b) for a in range(self.n) for b in _bits(reach[a]))

    def order_equal(self, other: Poset) -> bool:
        return self.n == other.n and self.closure() == other.closure()

    def induced(self, elements: Iterable[int]) -> Poset:
        """Sub-poset on ``elements``, relabelled densely in ascending order.

        Only valid as a restriction of the order when ``elements`` is closed
        under paths (e.g. a component or an up-set); otherwise closure edges
        through removed elements are lost.
        """
        keep = sorted(set(elements))
        pos = {e: i for i, e in enumerate(keep)}
        edges = frozenset((pos[a], pos[b]) for a, b in self.edges if a in pos and b in pos)
        labels = tuple(self.label(e) for e in keep)
        return Poset(len(keep), edges, labels)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def build_poset(obs: Observation, model: Model,
                relations: Mapping[FeatureSet, SymmetricRelation] | None = None,
                cache: RelationCache | None = None) -> Poset:
    """Poset over the members of ``obs`` induced by ``model``; labels are event ids."""
    if relations is None:
        cache = cache or RelationCache(obs.table)
        relations = cache.for_model(model)
    pairs = df_path_generator(obs, model, relations)
    pos = {e: i for i, e in enumerate(obs.members)}
    edges = frozenset((pos[a], pos[b]) for a, b in pairs)
    return Poset(len(obs.members), edges, obs.event_ids)


def transitive_reduction(p: Poset) -> Poset:
    reach = p.reach_masks()
    edges = set()
    for a in range(p.n):
        covered = 0
        for c in _bits(reach[a]):
            covered |= reach[c]
        for b in _bits(reach[a] & ~covered):
            edges.add((a, b))
    return Poset(p.n, frozenset(edges), p.labels)


def component_masks(p: Poset, within: int | None = None) -> list[int]:
    """Weakly connected components of the elements in ``within`` as bitmasks,
    ordered by their smallest element."""
    if within is None:
        within = (1 << p.n) - 1
    adj = [p._pred[i] | p._succ[i] for i in range(p.n)]
    comps = []
    rest = within
    while rest:
        low = rest & -rest
        comp = low
        frontier = low
        while frontier:
            nxt = 0
            for v in _bits(frontier):
                nxt |= adj[v]
            nxt &= within & ~comp
            comp |= nxt
            frontier = nxt
        comps.append(comp)
        rest &= ~comp
    return comps


def connected_components(p: Poset) -> list[Poset]:
    return [p.induced(_bits(m)) for m in component_masks(p)]


def minimal_elements(p: Poset) -> set[int]:
    return {i for i in range(p.n) if p._pred[i] == 0}


def count_extensions_exact(p: Poset, ceiling: int = DEFAULT_ORACLE_CEILING) -> int:
    """Exact linear-extension count by dynamic programming over down-sets."""
    if p.n > ceiling:
        raise OracleLimitError(f"exact counting limited to {ceiling} elements, got {p.n}")
    pred = p._pred
    full = (1 << p.n) - 1
    layer = {0: 1}
    for _ in range(p.n):
        nxt: dict[int, int] = {}
        for down, ways in layer.items():
            free = full & ~down
            for x in _bits(free):
                if pred[x] & ~down == 0:
                    key = down | (1 << x)
                    nxt[key] = nxt.get(key, 0) + ways
        layer = nxt
    return layer.get(full, 1 if p.n == 0 else 0)
