"""Brute-force reference implementations for small instances.

Nothing in here shares code paths with the fast implementations beyond the
plain data types: relations are evaluated by nested loops straight from their
definitions and extensions are counted by enumerating permutations.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import OracleLimitError
from .event_model import EventTable, Observation
from .poset import Poset, count_extensions_exact

BRUTE_FORCE_LIMIT = 8
EXHAUSTIVE_FEATURE_LIMIT = 6


def brute_count_extensions(p: Poset) -> int:
    """Count permutations of ``p``'s elements that respect every closure edge."""
    if p.n > BRUTE_FORCE_LIMIT:
        raise OracleLimitError(f"permutation enumeration limited to {BRUTE_FORCE_LIMIT} elements")
    closure = p.closure()
    count = 0
    for perm in itertools.permutations(range(p.n)):
        pos = {v: i for i, v in enumerate(perm)}
        if all(pos[a] < pos[b] for a, b in closure):
            count += 1
    return count


def naive_atomic_pairs(table: EventTable, feature: str) -> set[tuple[int, int]]:
    """All ordered pairs ``(a, b)``, including ``a == b``, with intersecting value-sets."""
    col = table.column(feature)
    n = len(table)
    return {(a, b) for a in range(n) for b in range(n) if col[a] & col[b]}


def naive_derived_pairs(table: EventTable, fi: str, fk: str) -> set[tuple[int, int]]:
    """Ordered pairs of the derived relation by scanning every (a, b, c, d, X_j).

    The feature set is unordered, so bridges are tried from both ends.
    """
    ri = naive_atomic_pairs(table, fi)
    rk = naive_atomic_pairs(table, fk)
    out = ri | rk
    n = len(table)
    for fj in table.features:
        if fj in (fi, fk):
            continue
        rj = naive_atomic_pairs(table, fj)
        for first, last in ((ri, rk), (rk, ri)):
            for a in range(n):
                for b in range(n):
                    if (a, b) not in first:
                        continue
                    for c in range(n):
                        if b == c or (b, c) not in rj:
                            continue
                        for d in range(n):
                            if (c, d) in last:
                                out.add((a, d))
    return out


def naive_relation_pairs(table: EventTable, feature_set: Iterable[str]) -> set[tuple[int, int]]:
    names = sorted(feature_set)
    if len(names) == 1:
        return naive_atomic_pairs(table, names[0])
    return naive_derived_pairs(table, names[0], names[1])


def naive_generator(obs: Observation, model: Iterable[Iterable[str]]) -> set[tuple[int, int]]:
    """Pairs ``(a, b)`` with ``a`` strictly before ``b`` in ``obs`` and related by some feature set.

    A pair counts if either direction appears in the relation.
    """
    rels = [naive_relation_pairs(obs.table, fs) for fs in model]
    out = set()
    for i, a in enumerate(obs.members):
        for b in obs.members[i + 1:]:
            if any((a, b) in r or (b, a) in r for r in rels):
                out.add((a, b))
    return out


def naive_poset(obs: Observation, model: Iterable[Iterable[str]]) -> Poset:
    pos = {e: i for i, e in enumerate(obs.members)}
    edges = frozenset((pos[a], pos[b]) for a, b in naive_generator(obs, model))
    return Poset(len(obs.members), edges, obs.event_ids)


def naive_entropy(table: EventTable, feature: str) -> float:
    col = table.column(feature)
    n = len(col)
    probs = [col.count(v) / n for v in set(col)]
    return -sum(p * math.log2(p) for p in probs) / (1 + math.log2(n))


def exact_score(table: EventTable, samples: Sequence[Observation], features: Sequence[str]) -> float:
    """log2 prior plus exact log2 likelihood, for an atomic model."""
    logs = []
    for f in features:
        ent = naive_entropy(table, f)
        if ent <= 0:
            return -math.inf
        logs.append(math.log2(ent))
    counts = [math.log2(count_extensions_exact(naive_poset(s, [[f] for f in features]))) for s in samples]
    return math.fsum(logs) - math.fsum(counts)


def exhaustive_best_model(table: EventTable, samples: Sequence[Observation],
                          candidate_features: Sequence[str]) -> tuple[list[str], float]:
    """Score all ``2^M`` atomic models exactly; ties go to fewer features, then lexicographic."""
    if len(candidate_features) > EXHAUSTIVE_FEATURE_LIMIT:
        raise OracleLimitError(f"exhaustive search limited to {EXHAUSTIVE_FEATURE_LIMIT} features")
    best: tuple[list[str], float] | None = None
    for r in range(len(candidate_features) + 1):
        for combo in itertools.combinations(sorted(candidate_features), r):
            s = exact_score(table, samples, combo)
            if best is None or s > best[1] or (
                    s == best[1] and (len(combo), [[f] for f in combo]) < (len(best[0]), [[f] for f in best[0]])):
                best = (list(combo), s)
    return best


@dataclass(frozen=True)
class OracleReport:
    instance: str
    oracle_value: float
    system_value: float
    agree: bool
    discrepancy: float


def _report(instance: str, oracle_value: float, system_value: float, tol: float) -> OracleReport:
    if oracle_value == system_value:
        diff = 0.0
    else:
        diff = abs(oracle_value - system_value)
    return OracleReport(instance, oracle_value, system_value, diff <= tol, diff)


def random_poset(rng: random.Random, n: int, density: float | None = None) -> Poset:
    """Random DAG: each forward pair of a random permutation is an edge with probability ``density``."""
    if density is None:
        density = rng.random()
    perm = list(range(n))
    rng.shuffle(perm)
    edges = {(perm[i], perm[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < density}
    return Poset(n, frozenset(edges))


def random_table(rng: random.Random, n_events: int, n_features: int, n_values: int = 3,
                 empty_prob: float = 0.2, multi_prob: float = 0.1) -> EventTable:
    ids = [f"e{i}" for i in range(n_events)]
    feats = [f"F{j}" for j in range(n_features)]
    rows = []
    for _ in range(n_events):
        row = []
        for _ in feats:
            if rng.random() < empty_prob:
                row.append(frozenset())
                continue
            vals = {f"v{rng.randrange(n_values)}"}
            if rng.random() < multi_prob:
                vals.add(f"v{rng.randrange(n_values)}")
            row.append(frozenset(vals))
        rows.append(tuple(row))
    return EventTable(tuple(ids), tuple(feats), tuple(rows))


def run_verification(trials: int = 50, seed: int = 0) -> list[OracleReport]:
    """Small-instance agreement suite: counting, bounds, relations and search."""
    from .extcount import bound_extensions
    from .relations import Model, RelationCache, df_path_generator
    from .search import SearchConfig, discover

    rng = random.Random(seed)
    reports: list[OracleReport] = []
    for t in range(trials):
        p = random_poset(rng, rng.randint(0, BRUTE_FORCE_LIMIT))
        brute = brute_count_extensions(p)
        reports.append(_report(f"count n={p.n} #{t}", brute, count_extensions_exact(p), 0.0))
        b = bound_extensions(p)
        reports.append(_report(f"bound n={p.n} #{t}", math.log2(brute), b.log2_lower, 1e-6))
    for t in range(trials):
        table = random_table(rng, rng.randint(2, 8), rng.randint(2, 4))
        obs = Observation.whole(table)
        model = Model.from_lists([[f] for f in table.features[:2]] + [list(table.features[:2])])
        cache = RelationCache(table)
        fast = df_path_generator(obs, model, cache.for_model(model))
        slow = naive_generator(obs, model.to_lists())
        reports.append(OracleReport(f"generator |E|={len(table)} #{t}", len(slow), len(fast), fast == slow,
                                    float(len(fast ^ slow))))
    for t in range(max(1, trials // 5)):
        table = random_table(rng, rng.randint(3, 8), rng.randint(1, 4))
        samples = [Observation.whole(table)]
        _, want = exhaustive_best_model(table, samples, table.features)
        got = discover(table, samples, SearchConfig(unbounded=True)).best_score.score_lo
        reports.append(_report(f"search |E|={len(table)} M={len(table.features)} #{t}", want, got, 1e-9))
    return reports
