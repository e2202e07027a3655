"""Command-line front end.

Subcommands: ``discover``, ``score``, ``sample``, ``export`` and ``verify``.
Settings come from an optional flat JSON config file (``--config``); flags
override file values.  Failures print a JSON error object on stderr and exit
with 2 (usage/input) or 3 (internal invariant violation).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError, EKGError
from .event_model import EventTable, IngestConfig, Observation, parse_event_table, sample_observations
from .export import observation_dot
from .extcount import Budget
from .relations import Model, RelationCache
from .scoring import Scorer
from .search import SearchConfig, discover

EXIT_OK, EXIT_USAGE, EXIT_INTERNAL = 0, 2, 3


class CLIError(EKGError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class RunManifest:
    input: str | None = None
    out: str | None = None
    id_column: str = "event"
    order_column: str | None = None
    order_kind: str = "auto"
    value_separator: str = ";"
    delimiter: str = ","
    feature_columns: list[str] | None = None
    samples: int = 1
    sample_size: int | None = None
    scheme: str = "contiguous-window"
    seed: int = 0
    features: list[str] | None = None
    budget_ms: float | None = 1000.0
    budget_calls: int | None = None
    budget_growth: float = 4.0
    max_passes: int = 16
    workers: int = 1
    unbounded: bool = False
    model: list[list[str]] | None = None

    def ingest_config(self) -> IngestConfig:
        return IngestConfig(
            id_column=self.id_column, order_column=self.order_column,
            value_separator=self.value_separator,
            feature_columns=tuple(self.feature_columns) if self.feature_columns else None,
            delimiter=self.delimiter, order_kind=self.order_kind)

    def search_config(self) -> SearchConfig:
        return SearchConfig(
            candidate_features=tuple(self.features) if self.features else None,
            first_budget_ms=self.budget_ms, first_budget_calls=self.budget_calls,
            budget_growth=self.budget_growth, max_passes=self.max_passes,
            workers=self.workers, seed=self.seed, unbounded=self.unbounded)

    def budget(self) -> Budget:
        return self.search_config().first_budget()


_MANIFEST_KEYS = {f.name for f in fields(RunManifest)}


def load_manifest(config_path: str | None, overrides: dict) -> RunManifest:
    values: dict = {}
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise CLIError("CONFIG_NOT_FOUND", f"config file not found: {config_path}") from None
        except json.JSONDecodeError as exc:
            raise CLIError("CONFIG_ERROR", f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise CLIError("CONFIG_ERROR", "config must be a flat JSON object")
        unknown = sorted(set(data) - _MANIFEST_KEYS)
        if unknown:
            raise CLIError("CONFIG_ERROR", f"unknown config keys: {', '.join(unknown)}")
        values.update(data)
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunManifest(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _read_table(m: RunManifest) -> EventTable:
    if not m.input:
        raise CLIError("INPUT_MISSING", "no --input given")
    path = Path(m.input)
    if not path.is_file():
        raise CLIError("INPUT_NOT_FOUND", f"input file not found: {m.input}")
    with open(path, "rb") as fh:
        return parse_event_table(fh, m.ingest_config())


def _samples(m: RunManifest, table: EventTable) -> list[Observation]:
    size = m.sample_size if m.sample_size is not None else len(table) // max(1, m.samples)
    return sample_observations(table, m.samples, size, m.seed, m.scheme)


def _parse_model(m: RunManifest, table: EventTable) -> Model:
    if m.model is None:
        raise CLIError("MODEL_MISSING", "no --model given")
    try:
        model = Model.from_lists(m.model)
    except (TypeError, EKGError) as exc:
        raise CLIError("MODEL_INVALID", f"bad model: {exc}") from None
    for f in sorted(model.features()):
        if f not in table.features:
            raise CLIError("UNKNOWN_FEATURE", f"unknown feature in model: {f!r}")
    return model


def _out_dir(m: RunManifest) -> Path | None:
    if not m.out:
        return None
    out = Path(m.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _sample_info(m: RunManifest, samples: list[Observation]) -> dict:
    return {"n": len(samples), "size": len(samples[0]), "scheme": m.scheme, "seed": m.seed}


def cmd_discover(m: RunManifest) -> int:
    table = _read_table(m)
    samples = _samples(m, table)
    out = _out_dir(m)
    res = discover(table, samples, m.search_config())

    scores = [row.best_score for row in res.trace]
    if any(b < a for a, b in zip(scores, scores[1:])) or scores[-1] != res.best_score.score_lo \
            or not res.best_score.exact:
        raise AssertionError("trace is not monotone or does not end at the reported best score")

    # counters depend on wall-clock budgets, so they live in stats.json
    result = {
        "best_model": res.best_model.to_lists(),
        "score": res.best_score.to_dict(),
        "feature_order": list(res.feature_order),
        "diagnostics": res.diagnostics,
        "unresolved": [mdl.to_lists() for mdl in res.unresolved],
        "samples": _sample_info(m, samples),
    }
    text = _dump(result)
    if out is None:
        sys.stdout.write(text)
        return EXIT_OK
    (out / "result.json").write_text(text, encoding="utf-8")
    stats = dict(res.counters, elapsed_ms=round(res.elapsed_ms, 3))
    (out / "stats.json").write_text(_dump(stats), encoding="utf-8")
    with open(out / "trace.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["elapsed_ms", "best_score_log2", "model"])
        for row in res.trace:
            w.writerow([f"{row.elapsed_ms:.3f}", repr(row.best_score), json.dumps(row.model.to_lists())])
    cache = RelationCache(table)
    for i, s in enumerate(samples):
        (out / f"ekg_{i}.dot").write_text(observation_dot(s, res.best_model, cache, name=f"ekg_{i}"),
                                          encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_score(m: RunManifest) -> int:
    table = _read_table(m)
    samples = _samples(m, table)
    model = _parse_model(m, table)
    with Scorer(table, samples, m.workers) as scorer:
        score = scorer.score(model, m.budget())
    result = {
        "model": model.to_lists(),
        "score": score.to_dict(),
        "samples": [
            {"event_ids": list(s.event_ids), "log2_count_lower": c.log2_lower,
             "log2_count_upper": c.log2_upper, "exact": c.exact}
            for s, c in zip(samples, score.counts)
        ],
    }
    text = _dump(result)
    out = _out_dir(m)
    if out is not None:
        (out / "score.json").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_sample(m: RunManifest) -> int:
    table = _read_table(m)
    samples = _samples(m, table)
    text = _dump({"observations": [{"indices": list(s.members), "event_ids": list(s.event_ids)}
                                   for s in samples]})
    out = _out_dir(m)
    if out is not None:
        (out / "samples.json").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_export(m: RunManifest) -> int:
    table = _read_table(m)
    samples = _samples(m, table)
    model = _parse_model(m, table)
    cache = RelationCache(table)
    out = _out_dir(m)
    for i, s in enumerate(samples):
        dot = observation_dot(s, model, cache, name=f"ekg_{i}")
        if out is None:
            sys.stdout.write(dot)
        else:
            (out / f"ekg_{i}.dot").write_text(dot, encoding="utf-8")
    return EXIT_OK


def cmd_verify(trials: int, seed: int) -> int:
    from .oracle import run_verification

    reports = run_verification(trials, seed)
    width = max(len(r.instance) for r in reports)
    print(f"{'instance':<{width}}  {'oracle':>14}  {'system':>14}  {'diff':>10}  agree")
    for r in reports:
        print(f"{r.instance:<{width}}  {r.oracle_value:>14.6g}  {r.system_value:>14.6g}  "
              f"{r.discrepancy:>10.3g}  {'yes' if r.agree else 'NO'}")
    bad = sum(not r.agree for r in reports)
    print(f"{len(reports) - bad}/{len(reports)} agree")
    return EXIT_OK if bad == 0 else EXIT_INTERNAL


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _json_model(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"--model must be JSON, e.g. '[[\"A\"],[\"B\",\"C\"]]': {exc}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="delimiter-separated event table with a header row")
    common.add_argument("--config", help="flat JSON file with manifest keys; flags override it")
    common.add_argument("--out", help="output directory")
    common.add_argument("--samples", type=int, help="number of observations N")
    common.add_argument("--sample-size", type=int, dest="sample_size", help="events per observation")
    common.add_argument("--scheme", choices=["contiguous-window", "partition"])
    common.add_argument("--seed", type=int)
    common.add_argument("--budget-ms", type=float, dest="budget_ms", help="first-pass counting deadline")
    common.add_argument("--budget-calls", type=int, dest="budget_calls",
                        help="first-pass cap on recursive counting calls (reproducible)")
    common.add_argument("--budget-growth", type=float, dest="budget_growth")
    common.add_argument("--max-passes", type=int, dest="max_passes")
    common.add_argument("--unbounded", action="store_const", const=True, help="count exactly")
    common.add_argument("--workers", type=int)
    common.add_argument("--features", type=_csv_list, help="candidate features f1,f2,...")
    common.add_argument("--model", type=_json_model, help="JSON list of feature sets")
    common.add_argument("--id-column", dest="id_column")
    common.add_argument("--order-column", dest="order_column")
    common.add_argument("--order-kind", dest="order_kind", choices=["auto", "numeric", "lexical"])
    common.add_argument("--separator", dest="value_separator", help="multi-value separator (default ';')")
    common.add_argument("--delimiter", help="column delimiter (default ',')")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ekg-discover", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("discover", parents=[common], help="branch-and-bound model search")
    sub.add_parser("score", parents=[common], help="score one explicit model")
    sub.add_parser("sample", parents=[common], help="print the sampled observations")
    sub.add_parser("export", parents=[common], help="write DOT graphs for a model")
    v = sub.add_parser("verify", help="run the small-instance oracle agreement suite")
    v.add_argument("--trials", type=int, default=50)
    v.add_argument("--seed", type=int, default=0)
    return parser


def _fail(code: str, message: str, status: int) -> int:
    sys.stderr.write(json.dumps({"error": {"code": code, "message": message}}, sort_keys=True) + "\n")
    return status


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args.trials, args.seed)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    overrides = {k: v for k, v in vars(args).items()
                 if k in _MANIFEST_KEYS and v is not None}
    try:
        manifest = load_manifest(args.config, overrides)
        handler = {"discover": cmd_discover, "score": cmd_score,
                   "sample": cmd_sample, "export": cmd_export}[args.command]
        return handler(manifest)
    except EKGError as exc:
        return _fail(exc.code, str(exc), EXIT_USAGE)
    except OSError as exc:
        return _fail("IO_ERROR", str(exc), EXIT_USAGE)
    except AssertionError as exc:
        return _fail("INVARIANT_VIOLATION", str(exc) or "internal invariant violated", EXIT_INTERNAL)


if __name__ == "__main__":
    sys.exit(main())
