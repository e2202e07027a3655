"""Branch-and-bound discovery of the best atomic-feature model.

States are explored breadth first.  A state owns the model built so far and a
position in a fixed feature ordering; children only add features at or after
that position, so every model is reachable from exactly one path and the
union of everything reachable from a state is known up front.  The poset of
that reachable union is the most restrictive one in the subtree, which gives
the pruning bound: log2 prior of the state's model minus the summed log2
lower count bounds of the union's posets.

Models whose score interval straddles the incumbent are queued and re-scored
in later passes with exponentially larger counting budgets.
"""
from __future__ import annotations

import enum
import logging
import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .errors import SearchError
from .event_model import EventTable, Observation
from .extcount import BoundedCount, Budget
from .relations import FeatureSet, Model
from .scoring import NEG_INF, LogScore, Scorer, samples_key

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchConfig:
    candidate_features: tuple[str, ...] | None = None
    first_budget_ms: float | None = 1000.0
    first_budget_calls: int | None = None
    budget_growth: float = 4.0
    max_passes: int = 16
    workers: int = 1
    tie_break: str = "fewest-then-lexicographic"
    seed: int = 0
    unbounded: bool = False
    record_pruned: bool = False

    def first_budget(self) -> Budget:
        if self.unbounded:
            return Budget.unbounded()
        if self.first_budget_ms is None and self.first_budget_calls is None:
            return Budget.unbounded()
        return Budget(deadline_ms=self.first_budget_ms, max_calls=self.first_budget_calls)


@dataclass(frozen=True)
class SearchState:
    chosen: tuple[int, ...]
    next_index: int

    def model(self, order: Sequence[str]) -> Model:
        return Model.atomic(*(order[i] for i in self.chosen))

    def children(self, n_features: int) -> list[SearchState]:
        return [SearchState(self.chosen + (i,), i + 1) for i in range(self.next_index, n_features)]


def reachable_union(state: SearchState, feature_order: Sequence[str]) -> Model:
    """Union of every model reachable from ``state`` (including its own)."""
    idx = set(state.chosen) | set(range(state.next_index, len(feature_order)))
    return Model.atomic(*(feature_order[i] for i in sorted(idx)))


def tie_key(model: Model) -> tuple:
    """Smaller is preferred among equal scores: fewer feature sets, then lexicographic."""
    return (len(model), model.to_lists())


class Decision(enum.Enum):
    PRUNE = "prune"
    EXPAND = "expand"


@dataclass(frozen=True)
class TraceRow:
    elapsed_ms: float
    best_score: float
    model: Model


@dataclass(frozen=True)
class PrunedState:
    state: SearchState
    model: Model
    bound: float
    threshold: float


@dataclass
class DiscoveryResult:
    best_model: Model
    best_score: LogScore
    feature_order: tuple[str, ...]
    trace: list[TraceRow] = field(default_factory=list)
    visited: int = 0
    pruned: int = 0
    reestimated: int = 0
    dismissed: int = 0
    unresolved: list[Model] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)
    pruned_states: list[PrunedState] = field(default_factory=list)
    elapsed_ms: float = 0.0

    @property
    def counters(self) -> dict[str, int]:
        return {"visited": self.visited, "pruned": self.pruned, "reestimated": self.reestimated,
                "dismissed": self.dismissed, "unresolved": len(self.unresolved)}


def _intersect(a: Sequence[BoundedCount], b: Sequence[BoundedCount]) -> list[BoundedCount]:
    out = []
    for x, y in zip(a, b):
        if x.exact:
            out.append(x)
        elif y.exact:
            out.append(y)
        else:
            lo, hi = max(x.log2_lower, y.log2_lower), min(x.log2_upper, y.log2_upper)
            out.append(BoundedCount(min(lo, hi), hi, False))
    return out


class BranchAndBound:
    """Mutable search state: incumbent, threshold, re-estimation queue, counters."""

    def __init__(self, scorer: Scorer, feature_order: Sequence[str], config: SearchConfig):
        self.scorer = scorer
        self.order = tuple(feature_order)
        self.config = config
        self.start = time.perf_counter()
        empty = Model()
        empty_score = scorer.score(empty, Budget.unbounded())
        # edgeless posets are always counted exactly
        assert empty_score.exact
        self.best_model = empty
        self.best = empty_score
        # lower bound on the optimum; may exceed the incumbent via inexact models
        self.threshold = empty_score.score_lo
        self.queue: dict[Model, LogScore] = {}
        self.result = DiscoveryResult(empty, empty_score, self.order)
        self._trace()

    def _trace(self) -> None:
        elapsed = (time.perf_counter() - self.start) * 1000.0
        self.result.trace.append(TraceRow(elapsed, self.best.score_lo, self.best_model))

    def _offer(self, model: Model, score: LogScore) -> None:
        cur = self.best.score_lo
        s = score.score_lo
        if s > cur or (s == cur and tie_key(model) < tie_key(self.best_model)):
            self.best_model, self.best = model, score
            self._trace()
            log.debug("new best %s at %.6f", model, s)

    def _resolve(self, model: Model, score: LogScore) -> str:
        if score.score_hi < self.threshold:
            self.queue.pop(model, None)
            self.result.dismissed += 1
            return "discarded"
        self.threshold = max(self.threshold, score.score_lo)
        if score.exact:
            self.queue.pop(model, None)
            self._offer(model, score)
            return "best"
        self.queue[model] = score
        return "queued"

    def expand_or_prune(self, state: SearchState, budget: Budget) -> Decision:
        model = state.model(self.order)
        prior = self.scorer.log2_prior(model)
        union = reachable_union(state, self.order)
        if prior == NEG_INF:
            bound = NEG_INF
            union_counts = None
        else:
            union_counts = self.scorer.bound_counts(union, budget)
            bound = prior - math.fsum(c.log2_lower for c in union_counts)
        if bound < self.threshold:
            self.result.pruned += 1
            if self.config.record_pruned:
                self.result.pruned_states.append(PrunedState(state, model, bound, self.threshold))
            return Decision.PRUNE
        if union == model:
            score = LogScore.assemble(prior, union_counts, samples_key(self.scorer.samples))
        else:
            score = self.scorer.score(model, budget)
        self._resolve(model, score)
        return Decision.EXPAND

    def reestimate_pass(self, budget: Budget) -> None:
        for model, old in list(self.queue.items()):
            if old.score_hi < self.threshold:
                self.queue.pop(model)
                self.result.dismissed += 1
                continue
            fresh = self.scorer.bound_counts(model, budget)
            counts = _intersect(old.counts, fresh)
            self.result.reestimated += 1
            score = LogScore.assemble(old.log2_prior, counts, old.samples)
            self._resolve(model, score)

    def run(self) -> DiscoveryResult:
        budget = self.config.first_budget()
        frontier = deque([SearchState((), 0)])
        while frontier:
            state = frontier.popleft()
            self.result.visited += 1
            if self.expand_or_prune(state, budget) is Decision.EXPAND:
                frontier.extend(state.children(len(self.order)))
        for p in range(1, self.config.max_passes + 1):
            if not self.queue:
                break
            self.reestimate_pass(budget.scaled(self.config.budget_growth ** p))
        res = self.result
        res.best_model, res.best_score = self.best_model, self.best
        res.unresolved = list(self.queue)
        res.elapsed_ms = (time.perf_counter() - self.start) * 1000.0
        if res.unresolved:
            res.diagnostics.append(
                f"{len(res.unresolved)} model(s) still unresolved after {self.config.max_passes} passes")
        return res


def feature_ordering(scorer: Scorer, features: Sequence[str]) -> list[str]:
    """Descending normalized entropy, ties by name."""
    return sorted(features, key=lambda f: (-scorer.entropy(FeatureSet.of(f)), f))


def discover(table: EventTable, samples: Sequence[Observation], config: SearchConfig = SearchConfig()) -> DiscoveryResult:
    """Find the atomic-feature model with the highest posterior score."""
    if not samples:
        raise SearchError("need at least one sample")
    features = list(config.candidate_features) if config.candidate_features is not None else list(table.features)
    if not features:
        raise SearchError("no candidate features")
    for f in features:
        table.feature_index(f)
    if len(set(features)) != len(features):
        raise SearchError("duplicate candidate features")
    with Scorer(table, samples, config.workers) as scorer:
        zero = sorted(f for f in features if scorer.entropy(FeatureSet.of(f)) <= 0.0)
        usable = [f for f in features if f not in zero]
        order = feature_ordering(scorer, usable)
        bnb = BranchAndBound(scorer, order, config)
        if zero:
            bnb.result.diagnostics.append(
                "zero-entropy features excluded (prior is 0): " + ", ".join(zero))
        if not usable:
            bnb.result.diagnostics.append("every candidate model scores -inf; returning the empty model")
        return bnb.run()
