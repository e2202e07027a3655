"""Entropy prior, likelihood bounds and posterior log-odds between models.

Everything is log2 and unnormalized: the evidence and the prior's
normalizing constant cancel in every comparison this package makes.
"""
from __future__ import annotations

import math
import os
from collections import Counter
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .errors import ScoringError
from .event_model import EventTable, Observation
from .extcount import BoundedCount, Budget, bound_extensions
from .poset import Poset, build_poset
from .relations import FeatureSet, Model, RelationCache

NEG_INF = -math.inf


def normalized_entropy(table: EventTable, fs: FeatureSet) -> float:
    """Shannon entropy (bits) of the per-event outcome divided by ``1 + log2 |E|``.

    The outcome of an event is its whole value-set (the empty set counts);
    for a derived feature set it is the pair of value-sets.
    """
    cols = [table.column(f) for f in fs.key]
    outcomes = Counter(zip(*cols))
    n = len(table)
    h = -math.fsum((c / n) * math.log2(c / n) for c in outcomes.values())
    if h <= 0.0:
        return 0.0
    return h / (1.0 + math.log2(n))


def model_prior_unnormalized(table: EventTable, model: Model) -> float:
    """log2 of the product of the feature sets' normalized entropies."""
    total = []
    for fs in model.sorted_sets():
        ent = normalized_entropy(table, fs)
        if ent <= 0.0:
            return NEG_INF
        total.append(math.log2(ent))
    return math.fsum(total)


def samples_key(samples: Sequence[Observation]) -> tuple:
    return tuple(s.members for s in samples)


@dataclass(frozen=True)
class LogScore:
    log2_prior: float
    log2_likelihood_lower: float
    log2_likelihood_upper: float
    score_lo: float
    score_hi: float
    exact: bool
    counts: tuple = ()
    samples: tuple = ()

    @classmethod
    def assemble(cls, log2_prior: float, counts: Sequence[BoundedCount], samples: tuple = ()) -> LogScore:
        # summed in sample order so the result is independent of scheduling
        lik_lo = -math.fsum(c.log2_upper for c in counts)
        lik_hi = -math.fsum(c.log2_lower for c in counts)
        # normalize -0.0 so serialized scores are stable
        lik_lo += 0.0
        lik_hi += 0.0
        return cls(log2_prior, lik_lo, lik_hi, log2_prior + lik_lo, log2_prior + lik_hi,
                   all(c.exact for c in counts), tuple(counts), samples)

    def to_dict(self) -> dict:
        return {
            "log2_prior": _json_float(self.log2_prior),
            "log2_likelihood_lower": _json_float(self.log2_likelihood_lower),
            "log2_likelihood_upper": _json_float(self.log2_likelihood_upper),
            "score_lo": _json_float(self.score_lo),
            "score_hi": _json_float(self.score_hi),
            "exact": self.exact,
        }


def _json_float(x: float):
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return x


def posterior_log_odds(s1: LogScore, s2: LogScore) -> tuple[float, float]:
    """Interval on log2 P(M1|D)/P(M2|D).  An interval excluding 0 decides the comparison."""
    if s1.samples and s2.samples and s1.samples != s2.samples:
        raise ScoringError("scores were computed on different samples")
    a_lo, a_hi, b_lo, b_hi = s1.score_lo, s1.score_hi, s2.score_lo, s2.score_hi
    if a_hi == NEG_INF and b_hi == NEG_INF:
        return (NEG_INF, math.inf)
    if a_hi == NEG_INF:
        return (NEG_INF, NEG_INF)
    if b_hi == NEG_INF:
        return (math.inf, math.inf)
    return (a_lo - b_hi, a_hi - b_lo)


def _bound_task(args: tuple[Poset, Budget]) -> BoundedCount:
    p, budget = args
    return bound_extensions(p, budget)


def worker_count(requested: int | None = None) -> int:
    """Requested worker count capped by the ``EKG_THREADS`` environment variable."""
    n = requested if requested is not None else 1
    cap = os.environ.get("EKG_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, n)


class Scorer:
    """Scores models on a fixed table and sample list.

    Holds the relation cache and, for ``workers > 1``, a process pool that
    bounds per-sample posets concurrently.  Use as a context manager or call
    :meth:`close`.
    """

    def __init__(self, table: EventTable, samples: Sequence[Observation], workers: int = 1):
        if not samples:
            raise ScoringError("need at least one sample")
        for s in samples:
            if s.table is not table and s.table != table:
                raise ScoringError("sample drawn from a different table")
        self.table = table
        self.samples = list(samples)
        self.cache = RelationCache(table)
        self.workers = worker_count(workers)
        self._pool: Executor | None = None
        self._entropy: dict[FeatureSet, float] = {}

    def __enter__(self) -> Scorer:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def entropy(self, fs: FeatureSet) -> float:
        v = self._entropy.get(fs)
        if v is None:
            v = self._entropy[fs] = normalized_entropy(self.table, fs)
        return v

    def log2_prior(self, model: Model) -> float:
        logs = []
        for fs in model.sorted_sets():
            e = self.entropy(fs)
            if e <= 0.0:
                return NEG_INF
            logs.append(math.log2(e))
        return math.fsum(logs)

    def posets(self, model: Model) -> list[Poset]:
        rels = self.cache.for_model(model)
        return [build_poset(s, model, rels) for s in self.samples]

    def bound_counts(self, model: Model, budget: Budget) -> list[BoundedCount]:
        posets = self.posets(model)
        if self.workers > 1 and len(posets) > 1:
            if self._pool is None:
                self._pool = ProcessPoolExecutor(max_workers=self.workers)
            return list(self._pool.map(_bound_task, [(p, budget) for p in posets]))
        return [bound_extensions(p, budget) for p in posets]

    def score(self, model: Model, budget: Budget = Budget()) -> LogScore:
        prior = self.log2_prior(model)
        counts = self.bound_counts(model, budget)
        return LogScore.assemble(prior, counts, samples_key(self.samples))


def score_model(table: EventTable, samples: Sequence[Observation], model: Model,
                budget: Budget = Budget(), workers: int = 1) -> LogScore:
    """log2 P(M) + sum_i log2(1/|e(P_i)|), as an interval when counts are only bounded."""
    with Scorer(table, samples, workers) as scorer:
        return scorer.score(model, budget)
