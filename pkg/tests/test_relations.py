import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import ids_of, whole
from ekg_discovery import (FeatureSet, Model, Observation, RelationCache, atomic_relation,
                           derived_relation, df_path_generator)
from ekg_discovery.errors import RelationError, UnknownFeatureError
from ekg_discovery.oracle import naive_generator, naive_relation_pairs, random_table
from ekg_discovery.relations import attributed_pairs, feature_relation


def unordered(pairs):
    return {(a, b) for a, b in pairs if a < b}


def test_invoice_relation(purchase_log):
    rel = atomic_relation(purchase_log, "Invoice")
    assert ids_of(purchase_log, rel.pairs) == {("e_5", "e_9"), ("e_9", "e_30"), ("e_5", "e_30"), ("e_18", "e_30")}


def test_reflexive_only_on_nonempty_values(purchase_log):
    rel = atomic_relation(purchase_log, "Invoice")
    i = purchase_log.event_ids.index
    assert rel.related(i("e_18"), i("e_18"))
    assert not rel.related(i("e_1"), i("e_1"))
    assert rel.related(i("e_30"), i("e_5")) and rel.related(i("e_5"), i("e_30"))


def test_order_payment_derived_relation(purchase_log):
    pos = purchase_log.event_ids.index
    cross = {tuple(sorted((e, p), key=pos))
             for e in ("e_1", "e_2", "e_5", "e_7", "e_18", "e_28", "e_34") for p in ("e_29", "e_30")}
    assert len(cross) == 14
    order = ids_of(purchase_log, atomic_relation(purchase_log, "Order").pairs)
    payment = ids_of(purchase_log, atomic_relation(purchase_log, "Payment").pairs)
    derived = ids_of(purchase_log, derived_relation(purchase_log, "Order", "Payment").pairs)
    assert derived == order | payment | cross
    assert derived - order - payment == cross


def test_derived_relation_is_symmetric_in_its_arguments(purchase_log):
    a = derived_relation(purchase_log, "Order", "Payment").pairs
    b = derived_relation(purchase_log, "Payment", "Order").pairs
    assert a == b


def test_invoice_generator(purchase_log):
    model = Model.atomic("Invoice")
    pairs = df_path_generator(whole(purchase_log), model, RelationCache(purchase_log).for_model(model))
    assert ids_of(purchase_log, pairs) == {("e_5", "e_9"), ("e_9", "e_30"), ("e_5", "e_30"), ("e_18", "e_30")}


def test_generator_restricts_to_observation(purchase_log):
    model = Model.atomic("Invoice")
    i = purchase_log.event_ids.index
    obs = Observation(purchase_log, (i("e_5"), i("e_18"), i("e_30")))
    pairs = df_path_generator(obs, model, RelationCache(purchase_log).for_model(model))
    assert ids_of(purchase_log, pairs) == {("e_5", "e_30"), ("e_18", "e_30")}


def test_generator_needs_every_relation(purchase_log):
    with pytest.raises(RelationError):
        df_path_generator(whole(purchase_log), Model.atomic("Invoice"), {})
    with pytest.raises(RelationError):
        attributed_pairs(whole(purchase_log), Model.atomic("Invoice"), {})


def test_attributed_pairs_record_sources(purchase_log):
    model = Model.atomic("Order", "Invoice")
    attr = attributed_pairs(whole(purchase_log), model, RelationCache(purchase_log).for_model(model))
    i = purchase_log.event_ids.index
    assert attr[(i("e_5"), i("e_9"))] == [FeatureSet.of("Invoice")]
    assert attr[(i("e_1"), i("e_18"))] == [FeatureSet.of("Order")]
    assert set(attr) == df_path_generator(whole(purchase_log), model, RelationCache(purchase_log).for_model(model))


def test_toy_log_derived_bridges_components(toy_log):
    # X_3 and X_4 share no value, but X_2 links them through distinct events
    got = derived_relation(toy_log, "X_3", "X_4").pairs
    assert got == unordered(naive_relation_pairs(toy_log, ["X_3", "X_4"]))
    assert got > atomic_relation(toy_log, "X_3").pairs | atomic_relation(toy_log, "X_4").pairs


def test_cache_rejects_unknown_feature(purchase_log):
    cache = RelationCache(purchase_log)
    with pytest.raises(UnknownFeatureError):
        cache.get(FeatureSet.of("Nope"))
    assert cache.get(FeatureSet.of("Order")) is cache.get(FeatureSet.of("Order"))


def test_feature_set_validation():
    with pytest.raises(RelationError):
        FeatureSet(frozenset())
    with pytest.raises(RelationError):
        FeatureSet(frozenset({"a", "b", "c"}))
    assert str(FeatureSet.of("B", "A")) == "{A,B}"
    assert FeatureSet.of("Z") < FeatureSet.of("A", "B")


def test_model_canonical_form():
    m = Model.from_lists([["b"], ["a", "c"], ["a"]])
    assert m.to_lists() == [["a"], ["b"], ["a", "c"]]
    assert str(m) == "{{a},{b},{a,c}}"
    assert m.features() == {"a", "b", "c"}


@st.composite
def random_tables(draw, max_events=7, max_features=4):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = random.Random(seed)
    return random_table(rng, rng.randint(1, max_events), rng.randint(2, max_features),
                        n_values=rng.randint(1, 4))


@given(random_tables())
@settings(max_examples=150, deadline=None)
def test_relations_match_nested_loop_definitions(table):
    feats = table.features
    for f in feats:
        assert atomic_relation(table, f).pairs == unordered(naive_relation_pairs(table, [f]))
    for a in feats:
        for b in feats:
            if a < b:
                fast = feature_relation(table, FeatureSet.of(a, b))
                slow = naive_relation_pairs(table, [a, b])
                assert fast.pairs == unordered(slow)
                # reflexive part and symmetry
                for x in range(len(table)):
                    assert fast.related(x, x) == ((x, x) in slow)


@given(random_tables())
@settings(max_examples=100, deadline=None)
def test_derived_contains_both_atomic_relations(table):
    a, b = table.features[:2]
    derived = derived_relation(table, a, b).pairs
    assert atomic_relation(table, a).pairs <= derived
    assert atomic_relation(table, b).pairs <= derived


@given(random_tables(), st.data())
@settings(max_examples=100, deadline=None)
def test_generator_is_monotone_in_the_model(table, data):
    feats = list(table.features)
    small = data.draw(st.lists(st.sampled_from(feats), unique=True))
    extra = data.draw(st.lists(st.sampled_from(feats), unique=True))
    m1 = Model.atomic(*small)
    m2 = m1.union(Model.atomic(*extra)).union(Model.from_lists([feats[:2]]))
    cache = RelationCache(table)
    obs = whole(table)
    g1 = df_path_generator(obs, m1, cache.for_model(m1))
    g2 = df_path_generator(obs, m2, cache.for_model(m2))
    assert g1 <= g2
    assert g2 == naive_generator(obs, m2.to_lists())


def _generated_ids(table, model):
    return ids_of(table, df_path_generator(whole(table), model, RelationCache(table).for_model(model)))


def _respects(order, pairs):
    pos = {e: i for i, e in enumerate(order)}
    return all(pos[a] < pos[b] for a, b in pairs)


@given(random_tables(), st.randoms(use_true_random=False), st.data())
@settings(max_examples=150, deadline=None)
def test_mutual_extension_iff_equal_generated_orders(table, shuffler, data):
    perm = list(range(len(table)))
    shuffler.shuffle(perm)
    other = type(table)(tuple(table.event_ids[i] for i in perm), table.features,
                        tuple(table.values[i] for i in perm))
    feats = data.draw(st.lists(st.sampled_from(list(table.features)), unique=True, min_size=1))
    model = Model.atomic(*feats)
    g, g_other = _generated_ids(table, model), _generated_ids(other, model)
    mutual = _respects(table.event_ids, g_other) and _respects(other.event_ids, g)
    assert mutual == (g == g_other)
    assert _respects(table.event_ids, g)
