"""Event tables and observation samples.

An :class:`EventTable` is a chronologically ordered list of events, each with
a (possibly empty) set of opaque value tokens per feature column.  Row
position is the observed total order.
"""
from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from .errors import IngestError, SamplingError, UnknownFeatureError

ValueSet = frozenset  # frozenset[str]


@dataclass(frozen=True)
class IngestConfig:
    id_column: str = "event"
    order_column: str | None = None
    value_separator: str = ";"
    feature_columns: tuple[str, ...] | None = None
    delimiter: str = ","
    # "auto": numeric if every cell parses as a number, else lexicographic
    order_kind: str = "auto"


@dataclass(frozen=True)
class EventTable:
    event_ids: tuple[str, ...]
    features: tuple[str, ...]
    values: tuple[tuple[frozenset, ...], ...]
    _feature_index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not self.event_ids:
            raise IngestError("event table is empty")
        if len(set(self.event_ids)) != len(self.event_ids):
            raise IngestError("duplicate event ids")
        if len(set(self.features)) != len(self.features):
            raise IngestError("duplicate feature names")
        if len(self.values) != len(self.event_ids):
            raise IngestError("values must have one row per event")
        for row in self.values:
            if len(row) != len(self.features):
                raise IngestError("each event needs exactly one value-set per feature")
        object.__setattr__(self, "_feature_index", {f: i for i, f in enumerate(self.features)})

    def __len__(self) -> int:
        return len(self.event_ids)

    def feature_index(self, feature: str) -> int:
        try:
            return self._feature_index[feature]
        except KeyError:
            raise UnknownFeatureError(f"unknown feature {feature!r}") from None

    def column(self, feature: str) -> tuple[frozenset, ...]:
        j = self.feature_index(feature)
        return tuple(row[j] for row in self.values)

    def value(self, event: int, feature: str) -> frozenset:
        return self.values[event][self.feature_index(feature)]

    def to_csv(self, id_column: str = "event", separator: str = ";", delimiter: str = ",") -> str:
        """Canonical serialization; re-parsing it yields an equal table."""
        buf = io.StringIO()
        writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
        writer.writerow([id_column, *self.features])
        for eid, row in zip(self.event_ids, self.values):
            writer.writerow([eid, *(separator.join(sorted(vs)) for vs in row)])
        return buf.getvalue()

    @classmethod
    def from_rows(cls, event_ids: Sequence[str], features: Sequence[str],
                  rows: Iterable[Sequence[Iterable[str] | str | None]], separator: str = ";") -> EventTable:
        """Build a table from python data; string cells are split on ``separator``."""
        values = []
        for row in rows:
            values.append(tuple(_as_value_set(cell, separator) for cell in row))
        return cls(tuple(event_ids), tuple(features), tuple(values))


def _as_value_set(cell, separator: str) -> frozenset:
    if cell is None:
        return frozenset()
    if isinstance(cell, str):
        return _split_cell(cell, separator)
    return frozenset(t.strip() for t in cell if t.strip())


def _split_cell(cell: str, separator: str) -> frozenset:
    return frozenset(tok.strip() for tok in cell.split(separator) if tok.strip())


@dataclass(frozen=True)
class Observation:
    table: EventTable = field(repr=False)
    members: tuple[int, ...]

    def __post_init__(self):
        if not self.members:
            raise SamplingError("an observation needs at least one event")
        if any(b <= a for a, b in zip(self.members, self.members[1:])):
            raise SamplingError("observation members must be distinct and chronological")
        if self.members[0] < 0 or self.members[-1] >= len(self.table):
            raise SamplingError("observation member out of range")

    def __len__(self) -> int:
        return len(self.members)

    @property
    def event_ids(self) -> tuple[str, ...]:
        return tuple(self.table.event_ids[i] for i in self.members)

    @classmethod
    def whole(cls, table: EventTable) -> Observation:
        return cls(table, tuple(range(len(table))))


def _to_number(text: str) -> float:
    return float(text)


def parse_event_table(source: IO[bytes] | IO[str] | bytes | str, config: IngestConfig = IngestConfig()) -> EventTable:
    """Parse delimiter-separated text with a header row into an :class:`EventTable`."""
    if isinstance(source, bytes):
        text = source.decode("utf-8-sig")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8-sig") if isinstance(raw, bytes) else raw
    reader = csv.reader(io.StringIO(text), delimiter=config.delimiter)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise IngestError("input has no header row") from None
    if len(set(header)) != len(header):
        raise IngestError("duplicate column names in header")
    col = {name: i for i, name in enumerate(header)}
    if config.id_column not in col:
        raise IngestError(f"missing id column {config.id_column!r}")
    if config.order_column is not None and config.order_column not in col:
        raise IngestError(f"missing order column {config.order_column!r}")
    if config.feature_columns is None:
        features = [h for h in header if h not in (config.id_column, config.order_column)]
    else:
        features = list(config.feature_columns)
        missing = [f for f in features if f not in col]
        if missing:
            raise IngestError(f"missing feature columns: {', '.join(missing)}")
        if config.id_column in features or (config.order_column and config.order_column in features):
            raise IngestError("id/order columns cannot be feature columns")

    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not c.strip() for c in rec):
            continue
        if len(rec) < len(header):
            rec = rec + [""] * (len(header) - len(rec))
        elif len(rec) > len(header):
            raise IngestError(f"line {lineno}: {len(rec)} cells, header has {len(header)}")
        rows.append(rec)
    if not rows:
        raise IngestError("event table is empty")

    if config.order_column is not None:
        keys = [r[col[config.order_column]].strip() for r in rows]
        if any(k == "" for k in keys):
            raise IngestError("empty ordering value")
        kind = config.order_kind
        if kind == "auto":
            try:
                [_to_number(k) for k in keys]
                kind = "numeric"
            except ValueError:
                kind = "lexical"
        if kind == "numeric":
            try:
                parsed = [_to_number(k) for k in keys]
            except ValueError as exc:
                raise IngestError(f"unparseable ordering value: {exc}") from None
        elif kind == "lexical":
            parsed = keys
        else:
            raise IngestError(f"unknown order_kind {config.order_kind!r}")
        # sorted() is stable, so ties keep input row order
        order = sorted(range(len(rows)), key=lambda i: parsed[i])
        rows = [rows[i] for i in order]

    ids = [r[col[config.id_column]].strip() for r in rows]
    if any(not i for i in ids):
        raise IngestError("empty event id")
    seen = set()
    for i in ids:
        if i in seen:
            raise IngestError(f"duplicate event id {i!r}")
        seen.add(i)
    fidx = [col[f] for f in features]
    values = tuple(tuple(_split_cell(r[j], config.value_separator) for j in fidx) for r in rows)
    return EventTable(tuple(ids), tuple(features), values)


def sample_observations(table: EventTable, n: int, size: int, seed: int = 0,
                        scheme: str = "contiguous-window") -> list[Observation]:
    """Draw ``n`` observations of exactly ``size`` chronologically ordered events.

    ``contiguous-window`` picks window start offsets uniformly at random from
    ``random.Random(seed)``; ``partition`` takes the first ``n`` disjoint
    consecutive blocks and ignores the seed.
    """
    total = len(table)
    if n < 1:
        raise SamplingError("n must be >= 1")
    if size < 1 or size > total:
        raise SamplingError(f"sample size must be in [1, {total}]")
    if scheme == "contiguous-window":
        rng = random.Random(seed)
        starts = [rng.randint(0, total - size) for _ in range(n)]
    elif scheme == "partition":
        if n * size > total:
            raise SamplingError(f"partition needs n*size <= {total}")
        starts = [i * size for i in range(n)]
    else:
        raise SamplingError(f"unknown sampling scheme {scheme!r}")
    return [Observation(table, tuple(range(s, s + size))) for s in starts]
