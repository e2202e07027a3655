import math
import random

import pytest

from ekg_discovery import Poset
from ekg_discovery.errors import OracleLimitError
from ekg_discovery.oracle import (brute_count_extensions, exhaustive_best_model, naive_entropy, random_poset,
                                  random_table, run_verification)


def test_brute_force_small_cases():
    assert brute_count_extensions(Poset(0)) == 1
    assert brute_count_extensions(Poset(3)) == 6
    assert brute_count_extensions(Poset(3, frozenset({(0, 1), (1, 2)}))) == 1


def test_random_poset_is_reproducible_and_acyclic():
    a = random_poset(random.Random(5), 8)
    b = random_poset(random.Random(5), 8)
    assert a == b
    assert len(a.topological_order()) == 8


def test_random_table_shape():
    t = random_table(random.Random(1), 6, 3)
    assert len(t) == 6 and len(t.features) == 3


def test_entropy_of_uniform_column(toy_log):
    assert naive_entropy(toy_log, "X_2") == pytest.approx(2 / (1 + math.log2(8)))


def test_exhaustive_limit(purchase_log):
    with pytest.raises(OracleLimitError):
        exhaustive_best_model(purchase_log, [], [f"f{i}" for i in range(7)])


def test_verification_suite_agrees():
    reports = run_verification(trials=20, seed=11)
    assert reports
    assert all(r.agree for r in reports), [r for r in reports if not r.agree]
