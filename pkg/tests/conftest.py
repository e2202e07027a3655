import random
from pathlib import Path

import pytest

from ekg_discovery import Observation, parse_event_table

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def purchase_log():
    with open(DATA / "purchase_log.csv", "rb") as fh:
        return parse_event_table(fh)


@pytest.fixture(scope="session")
def toy_log():
    with open(DATA / "toy_log.csv", "rb") as fh:
        return parse_event_table(fh)


@pytest.fixture
def rng():
    return random.Random(1234)


def ids_of(table, pairs):
    return {(table.event_ids[a], table.event_ids[b]) for a, b in pairs}


def whole(table):
    return Observation.whole(table)


def planted_table(seed, n_events=64, n_cases=8):
    """Synthetic log where ``Case`` drives the order and the other columns are noise.

    Cases interleave at random; ``Step`` repeats within a case, ``Resource``, ``Shift``
    and ``Site`` are random and ``Batch`` pairs up neighbouring events.
    """
    rng = random.Random(seed)
    case_of = [k % n_cases for k in range(n_events)]
    rng.shuffle(case_of)
    seen = [0] * n_cases
    header = ["event", "Case", "Step", "Resource", "Shift", "Batch", "Site"]
    lines = [",".join(header)]
    for k, c in enumerate(case_of):
        step = seen[c]
        seen[c] += 1
        row = [f"e{k:03d}", f"C{c}", f"S{step}", f"R{rng.randrange(3)}", f"T{rng.randrange(2)}",
               f"B{k // 2}", f"L{rng.randrange(4)}"]
        lines.append(",".join(row))
    return parse_event_table("\n".join(lines) + "\n")


_CRITERIA: dict[int, tuple[str, bool, float]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _CRITERIA[number] = (title, rep.passed, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, duration = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({duration:.2f}s)")
