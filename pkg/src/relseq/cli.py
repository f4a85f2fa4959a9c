"""Command-line driver.

    relseq mine --schema S --data D --min-support 0.1 [--max-gap 3] ...
    relseq stats --schema S --data D
    relseq generate --seed 1 --out-dir DIR [--sequences 500] ...
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_UP, Decimal, InvalidOperation
from typing import Sequence as Seq

from .datagen import GenSpec, InfeasibleSpec, generate_db
from .hierminer import RefinementResult, refine_all
from .model import ParseError, Schema, Sequence, format_pattern, load_schema, parse_sequence_db
from .typeminer import MinerConfig, mine_type_patterns

logger = logging.getLogger("relseq")

EXIT_OK, EXIT_INPUT, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunReport:
    n_sequences: int
    n_events: int
    events_per_type: dict[str, int]
    events_histogram: dict[int, int]
    parameters: dict
    time_type_patterns: float = 0.0
    time_hierarchical: float = 0.0
    time_total: float = 0.0
    n_type_patterns: int = 0
    n_refined: int = 0
    n_specialized: int = 0
    complete: bool = True
    notes: list[str] = field(default_factory=list)


def resolve_min_support(text: str, n_sequences: int) -> int:
    """``"300"`` is an absolute count; ``"0.045"`` is a fraction, rounded up."""
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise ConfigError(f"--min-support: not a number: {text!r}") from None
    if "." in text or "e" in text.lower():
        theta = math.ceil(value * n_sequences)
    else:
        theta = int(value)
    if theta < 1:
        raise ConfigError(f"minimum support resolves to {theta}; it must be >= 1")
    return theta


def _bound(text: str | None, flag: str) -> int | None:
    if text is None or text.lower() in ("inf", "infinity", "none"):
        return None
    try:
        v = int(text)
    except ValueError:
        raise ConfigError(f"{flag}: expected an integer or 'inf', got {text!r}") from None
    if v < 1:
        raise ConfigError(f"{flag} must be >= 1")
    return v


def _fraction(count: int, total: int) -> str:
    if total == 0:
        return "0.0000"
    q = (Decimal(count) / Decimal(total)).quantize(Decimal("0.0001"), rounding=ROUND_HALF_UP)
    return f"{q:.4f}"


def pattern_lines(results: Seq[RefinementResult], schema: Schema, n_sequences: int) -> list[str]:
    """Output-file lines, sorted by (event count, text)."""
    keyed = []
    for res in results:
        for p, sup in res.refinements:
            text = format_pattern(p, schema)
            keyed.append(((p.base.n_events, text), f"{sup}\t{_fraction(sup, n_sequences)}\t{text}"))
    keyed.sort()
    return [line for _, line in keyed]


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_inputs(schema_path: str, data_path: str) -> tuple[Schema, list[Sequence]]:
    try:
        schema = load_schema(_read(schema_path), base_dir=os.path.dirname(schema_path) or ".")
    except ParseError as exc:
        raise ParseError(f"{schema_path}: {exc}") from None
    try:
        db = parse_sequence_db(_read(data_path), schema)
    except ParseError as exc:
        raise ParseError(f"{data_path}: {exc}") from None
    return schema, db


def _histogram(db: Seq[Sequence]) -> dict[int, int]:
    return dict(sorted(Counter(len(s.events) for s in db).items()))


def run_mining(
    schema: Schema,
    db: list[Sequence],
    theta: int,
    max_gap: int | None = None,
    max_projected_length: int | None = None,
    relationship_only: bool = False,
    max_pattern_events: int = 10,
    occ_cap: int | None = None,
    ban_uniform_runs: bool = False,
    threads: int = 1,
) -> tuple[list[str], RunReport]:
    """Both stages end to end; returns the pattern-file lines and the report."""
    config = MinerConfig(
        min_support=theta,
        max_gap=max_gap,
        max_projected_length=max_projected_length,
        max_pattern_events=max_pattern_events,
        occ_cap=occ_cap,
        ban_uniform_runs=ban_uniform_runs,
        threads=threads,
    )
    report = RunReport(
        n_sequences=len(db),
        n_events=sum(len(s.events) for s in db),
        events_per_type=dict(sorted(Counter(t for s in db for t in s.types).items())),
        events_histogram=_histogram(db),
        parameters={k: v for k, v in asdict(config).items()} | {"relationship_only": relationship_only},
    )
    t0 = time.perf_counter()
    ftps = mine_type_patterns(db, config, schema)
    t1 = time.perf_counter()
    results = refine_all(ftps, db, schema, theta, relationship_only, threads)
    t2 = time.perf_counter()
    lines = pattern_lines(results, schema, len(db))
    t3 = time.perf_counter()

    report.time_type_patterns = t1 - t0
    report.time_hierarchical = t2 - t1
    report.time_total = t3 - t0
    report.n_type_patterns = len(ftps)
    report.n_refined = sum(len(r.refinements) for r in results)
    report.n_specialized = sum(
        1 for r in results for p, _ in r.refinements if p.is_specialized(schema)
    )
    report.complete = not any(f.truncated for f in ftps)
    if not report.complete:
        report.notes.append("occurrence cap truncated some sequences; refinements may be incomplete")
    return lines, report


# -- subcommands --------------------------------------------------------------


def cmd_mine(args: argparse.Namespace) -> int:
    try:
        schema, db = load_inputs(args.schema, args.data)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        theta = resolve_min_support(args.min_support, len(db))
        lines, report = run_mining(
            schema,
            db,
            theta,
            max_gap=_bound(args.max_gap, "--max-gap"),
            max_projected_length=_bound(args.max_projected_length, "--max-projected-length"),
            relationship_only=args.relationship_only,
            max_pattern_events=args.max_pattern_events,
            occ_cap=_bound(args.occ_cap, "--occ-cap"),
            ban_uniform_runs=args.ban_uniform_runs,
            threads=args.threads,
        )
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    body = "".join(line + "\n" for line in lines)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(asdict(report), fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(
        f"{report.n_sequences} sequences, theta={theta}: {report.n_type_patterns} type-patterns, "
        f"{report.n_refined} patterns ({report.n_specialized} specialized) in "
        f"{report.time_total:.2f}s (type {report.time_type_patterns:.2f}s, "
        f"hierarchical {report.time_hierarchical:.2f}s)"
        + ("" if report.complete else " [incomplete: occurrence cap hit]"),
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    try:
        schema, db = load_inputs(args.schema, args.data)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    per_type = Counter(t for s in db for t in s.types)
    print(f"sequences: {len(db)}")
    print(f"events: {sum(per_type.values())}")
    print(f"transactions: {sum(len(s.transactions) for s in db)}")
    for t in schema.type_names:
        print(f"events[{t}]: {per_type.get(t, 0)}")
    print("events-per-sequence histogram:")
    hist = _histogram(db)
    width = max((len(str(v)) for v in hist.values()), default=1)
    for k, v in hist.items():
        print(f"  {k:>3}: {v:>{width}} {'#' * min(v, 60)}")
    return EXIT_OK


def _plant(text: str) -> tuple[str, float]:
    if "@" not in text:
        raise argparse.ArgumentTypeError("expected PATTERN@PROBABILITY")
    pattern, prob = text.rsplit("@", 1)
    try:
        return pattern.strip(), float(prob)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad probability {prob!r}") from None


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        spec = GenSpec(
            seed=args.seed,
            n_sequences=args.sequences,
            events_per_seq=args.events_per_seq,
            distribution=args.distribution,
            n_event_types=args.types,
            branching=args.branching,
            depth=args.depth,
            txn_break_prob=args.txn_break_prob,
            planted=list(args.plant or []),
        )
        files = generate_db(spec)
    except InfeasibleSpec as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(args.out_dir, exist_ok=True)
    for name, text in files.items():
        with open(os.path.join(args.out_dir, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    print(f"wrote {len(files)} files to {args.out_dir}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relseq", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("mine", help="mine frequent relationship-aware patterns")
    m.add_argument("--schema", required=True)
    m.add_argument("--data", required=True)
    m.add_argument("--out", help="pattern file (default: stdout)")
    m.add_argument(
        "--min-support",
        required=True,
        help="absolute count, or a fraction of the sequences when it has a decimal point",
    )
    m.add_argument("--max-gap", default=None, help="max event-ordinal gap (default: inf)")
    m.add_argument("--max-projected-length", default=None, help="max span (default: inf)")
    m.add_argument("--relationship-only", action="store_true", help="ignore event taxonomies")
    m.add_argument("--max-pattern-events", type=int, default=10)
    m.add_argument("--occ-cap", default=None, help="keep at most this many occurrences per sequence")
    m.add_argument("--ban-uniform-runs", action="store_true")
    m.add_argument("--threads", type=int, default=1)
    m.add_argument("--report", help="write the run report (JSON) here")
    m.set_defaults(func=cmd_mine)

    s = sub.add_parser("stats", help="dataset statistics")
    s.add_argument("--schema", required=True)
    s.add_argument("--data", required=True)
    s.set_defaults(func=cmd_stats)

    g = sub.add_parser("generate", help="write a synthetic dataset")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out-dir", required=True)
    g.add_argument("--sequences", type=int, default=100)
    g.add_argument("--events-per-seq", type=float, default=6)
    g.add_argument("--distribution", choices=["fixed", "geometric"], default="geometric")
    g.add_argument("--types", type=int, default=2)
    g.add_argument("--branching", type=int, default=3)
    g.add_argument("--depth", type=int, default=2)
    g.add_argument("--txn-break-prob", type=float, default=0.5)
    g.add_argument("--plant", type=_plant, action="append", help="PATTERN@PROBABILITY, repeatable")
    g.set_defaults(func=cmd_generate)
    return parser


def main(argv: Seq[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
