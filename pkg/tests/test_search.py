import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import planted_table, whole
from ekg_discovery import Model, SearchConfig, SearchState, discover, reachable_union, sample_observations
from ekg_discovery.errors import SearchError, UnknownFeatureError
from ekg_discovery.oracle import exact_score, exhaustive_best_model, random_table
from ekg_discovery.search import tie_key

EXACT = SearchConfig(unbounded=True, record_pruned=True)


def test_toy_log_prefers_the_connecting_feature(toy_log):
    res = discover(toy_log, [whole(toy_log)], EXACT)
    assert res.best_model == Model.atomic("X_2", "X_4")
    assert res.best_score.score_lo == pytest.approx(math.log2(0.1875) - math.log2(70), abs=1e-9)
    assert res.feature_order == ("X_2", "X_3", "X_4")
    assert any("X_1" in d for d in res.diagnostics)


def test_purchase_log_matches_exhaustive(purchase_log):
    samples = [whole(purchase_log)]
    feats = ["Activity", "Actor", "Invoice", "Order", "Payment", "SupplierOrder"]
    want_model, want = exhaustive_best_model(purchase_log, samples, feats)
    res = discover(purchase_log, samples, EXACT)
    assert res.best_model == Model.atomic(*want_model)
    assert res.best_score.score_lo == pytest.approx(want, abs=1e-9)


def test_candidate_subset(purchase_log):
    res = discover(purchase_log, [whole(purchase_log)], SearchConfig(candidate_features=("Invoice", "Order"), unbounded=True))
    assert res.best_model.features() <= {"Invoice", "Order"}
    assert set(res.feature_order) == {"Invoice", "Order"}


@pytest.mark.parametrize("config,exc", [
    (SearchConfig(candidate_features=()), SearchError),
    (SearchConfig(candidate_features=("Order", "Order")), SearchError),
    (SearchConfig(candidate_features=("Nope",)), UnknownFeatureError),
])
def test_search_errors(purchase_log, config, exc):
    with pytest.raises(exc):
        discover(purchase_log, [whole(purchase_log)], config)


def test_search_needs_samples(purchase_log):
    with pytest.raises(SearchError):
        discover(purchase_log, [], EXACT)


def test_only_degenerate_features_returns_empty_model(toy_log):
    res = discover(toy_log, [whole(toy_log)], SearchConfig(candidate_features=("X_1",), unbounded=True))
    assert res.best_model == Model()
    assert res.best_score.score_lo == pytest.approx(-math.log2(math.factorial(8)), abs=1e-9)


def test_reachable_union_and_children():
    order = ("a", "b", "c", "d")
    s = SearchState((0,), 2)
    assert reachable_union(s, order) == Model.atomic("a", "c", "d")
    assert [c.chosen for c in s.children(4)] == [(0, 2), (0, 3)]


def test_every_model_is_reached_once():
    order = ("a", "b", "c", "d")
    seen = []
    frontier = [SearchState((), 0)]
    while frontier:
        s = frontier.pop()
        seen.append(s.model(order))
        frontier.extend(s.children(len(order)))
    assert len(seen) == len(set(seen)) == 16


def test_tie_key_prefers_fewer_then_lexicographic():
    assert tie_key(Model.atomic("z")) < tie_key(Model.atomic("a", "b"))
    assert tie_key(Model.atomic("a", "c")) < tie_key(Model.atomic("b", "c"))


def test_trace_is_monotone_and_ends_at_best(purchase_log):
    res = discover(purchase_log, [whole(purchase_log)], EXACT)
    scores = [r.best_score for r in res.trace]
    assert scores == sorted(scores)
    assert res.trace[-1].best_score == res.best_score.score_lo
    assert res.trace[-1].model == res.best_model


def test_budgeted_search_reestimates_and_agrees_with_unbounded():
    table = planted_table(1)
    samples = sample_observations(table, 2, 32, scheme="partition")
    exact = discover(table, samples, SearchConfig(unbounded=True))
    tight = discover(table, samples, SearchConfig(first_budget_ms=None, first_budget_calls=50))
    assert tight.reestimated > 0
    assert not tight.unresolved
    assert tight.best_model == exact.best_model
    assert tight.best_score.score_lo == pytest.approx(exact.best_score.score_lo, abs=1e-9)


def test_exhausted_passes_report_unresolved():
    table = planted_table(2)
    samples = sample_observations(table, 2, 32, scheme="partition")
    res = discover(table, samples, SearchConfig(first_budget_ms=None, first_budget_calls=1, max_passes=0))
    if res.unresolved:
        assert any("unresolved" in d for d in res.diagnostics)
    lo = res.best_score.score_lo
    assert all(r.best_score <= lo for r in res.trace)


def _instances(seed):
    rng = random.Random(seed)
    table = random_table(rng, rng.randint(2, 10), rng.randint(1, 5), n_values=rng.randint(2, 4))
    n_samples = rng.randint(1, 2)
    size = rng.randint(1, len(table) // n_samples)
    samples = sample_observations(table, n_samples, size, seed=rng.randrange(1000), scheme="partition")
    return table, samples


def _near_tie(table, samples, best):
    feats = table.features
    hits = sum(1 for r in range(len(feats) + 1) for combo in itertools.combinations(feats, r)
               if abs(exact_score(table, samples, combo) - best) <= 1e-9)
    return hits > 1


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_search_matches_exhaustive_enumeration(seed):
    table, samples = _instances(seed)
    want_model, want = exhaustive_best_model(table, samples, table.features)
    res = discover(table, samples, EXACT)
    got = exact_score(table, samples, sorted(res.best_model.features()))
    assert got == pytest.approx(want, abs=1e-9)
    assert res.best_score.score_lo == pytest.approx(want, abs=1e-9)
    if not _near_tie(table, samples, want):
        assert res.best_model == Model.atomic(*want_model)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_pruned_subtrees_hide_nothing_better(seed):
    table, samples = _instances(seed)
    res = discover(table, samples, EXACT)
    best = res.best_score.score_lo
    order = res.feature_order
    for pruned in res.pruned_states:
        rest = order[pruned.state.next_index:]
        base = [order[i] for i in pruned.state.chosen]
        for r in range(len(rest) + 1):
            for extra in itertools.combinations(rest, r):
                assert exact_score(table, samples, base + list(extra)) <= best + 1e-9
