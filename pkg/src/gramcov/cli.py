"""Command line front end: instrument -> run -> analyze.

Exit codes: 0 success, 1 analyses found problems under --strict,
2 usage or input errors.  Reports go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .analysis import (
    TestCase,
    UsageDatabase,
    UsageDbError,
    disjunct_coverage,
    equivalence_classes,
    greedy_reduce,
    load_testsuite,
    make_usage_record,
    read_usage_db,
    save_testsuite,
    suspicion_scores,
    write_usage_db,
)
from .engine import DEFAULT_CAP, parse_sentence, tokenize
from .grammar import Grammar, GrammarError, parse_grammar, print_grammar, validate
from .instrument import (
    collect_marker_ids,
    format_inventory,
    grammar_hash,
    instrument_grammar,
    is_instrumented,
    parse_inventory,
)
from .reports import render_coverage, render_reduction, render_suspects, render_validation


class CliError(Exception):
    """Usage or input error; message goes to stderr, exit code 2."""


def _use_color() -> bool:
    if os.environ.get("GRAMCOV_NO_COLOR"):
        return False
    return sys.stdout.isatty()


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _load_grammar(path: str) -> Grammar:
    try:
        return parse_grammar(_read_text(path))
    except GrammarError as exc:
        raise CliError(f"{path}: {exc}") from exc


def inventory_path_for(grammar_path: str) -> str:
    return grammar_path + ".inventory.tsv"


def _fraction_arg(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


# ------------------------------------------------------------- subcommands

def cmd_instrument(args: argparse.Namespace) -> int:
    g = _load_grammar(args.grammar)
    try:
        instrumented, infos = instrument_grammar(g, include_lexicon=args.include_lexicon)
    except GrammarError as exc:
        raise CliError(f"{args.grammar}: {exc}") from exc
    inventory_path = args.inventory or inventory_path_for(args.output)
    Path(args.output).write_text(print_grammar(instrumented), encoding="utf-8")
    Path(inventory_path).write_text(format_inventory(infos), encoding="utf-8")
    print(f"{len(infos)} disjuncts -> {args.output}, inventory -> {inventory_path}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    g = _load_grammar(args.grammar)
    if not is_instrumented(g):
        raise CliError(f"{args.grammar}: grammar is not instrumented; run `instrument` first")
    inventory_path = args.inventory or inventory_path_for(args.grammar)
    try:
        inventory = parse_inventory(_read_text(inventory_path))
    except GrammarError as exc:
        raise CliError(f"{inventory_path}: {exc}") from exc
    if collect_marker_ids(g) != [info.id for info in inventory]:
        raise CliError(f"{inventory_path}: inventory does not match grammar markers")
    try:
        cases = load_testsuite(_read_text(args.testsuite))
    except ValueError as exc:
        raise CliError(f"{args.testsuite}: {exc}") from exc
    records = []
    for case in cases:
        result = parse_sentence(g, tokenize(case.text), cap=args.cap, test_case_id=case.id)
        for diag in result.diagnostics:
            print(f"note: case {case.id}: {diag}", file=sys.stderr)
        records.append(make_usage_record(case, result))
    write_usage_db(args.output, records, inventory, grammar_hash(g))
    n_parseable = sum(1 for r in records if r.parseable)
    print(f"{len(records)} cases ({n_parseable} parseable) -> {args.output}")
    return 0


def _load_db(args: argparse.Namespace) -> UsageDatabase:
    expected = None
    if getattr(args, "grammar", None):
        expected = grammar_hash(_load_grammar(args.grammar))
    try:
        return read_usage_db(args.db, expected_hash=expected)
    except OSError as exc:
        raise CliError(f"cannot read {args.db}: {exc.strerror or exc}") from exc
    except UsageDbError as exc:
        raise CliError(f"{args.db}: {exc}") from exc


def cmd_coverage(args: argparse.Namespace) -> int:
    db = _load_db(args)
    report = disjunct_coverage(db.records, db.inventory)
    sys.stdout.write(render_coverage(report, db.grammar_hash, args.format, _use_color()))
    if args.figures:
        from .figures import coverage_figure

        coverage_figure(report, db.inventory, Path(args.figures))
    if args.strict and report.untested:
        return 1
    return 0


def cmd_reduce(args: argparse.Namespace) -> int:
    db = _load_db(args)
    partition = None
    if args.level == "similarity":
        kept_ids = greedy_reduce(db.records)
    else:
        partition = equivalence_classes(db.records, level="equivalence")
        kept_ids = [cls[0] for cls in partition.classes]
        kept_ids += list(partition.excluded_truncated)
    kept_set = set(kept_ids)
    kept_in_suite_order = [
        r.test_case_id
        for r in db.records
        if r.test_case_id in kept_set
    ]
    sys.stdout.write(render_reduction(
        args.level, db.records, kept_in_suite_order, partition, args.format, _use_color()
    ))
    if args.output:
        reduced = [
            TestCase(id=r.test_case_id, text=r.text, intended=r.intended)
            for r in db.records
            if r.intended == "bad"
            or not r.parseable
            or r.test_case_id in kept_set
        ]
        Path(args.output).write_text(save_testsuite(reduced), encoding="utf-8")
    if args.figures:
        from .figures import reduction_figure

        reduction_figure(db.records, kept_in_suite_order, Path(args.figures))
    eligible = sum(1 for r in db.records if r.intended == "ok" and r.parseable)
    if args.strict and len(kept_in_suite_order) < eligible:
        return 1
    return 0


def cmd_suspects(args: argparse.Namespace) -> int:
    db = _load_db(args)
    if not 0 <= args.tau <= 1:
        raise CliError("--tau must be between 0 and 1")
    if args.alpha < 0:
        raise CliError("--alpha must be non-negative")
    entries = suspicion_scores(db.records, db.inventory, alpha=args.alpha, tau=args.tau)
    sys.stdout.write(render_suspects(entries, args.alpha, args.tau, args.format, _use_color()))
    if args.figures and entries:
        from .figures import suspects_figure

        suspects_figure(entries, Path(args.figures))
    if args.strict and entries:
        return 1
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    g = _load_grammar(args.grammar)
    diagnostics = validate(g)
    sys.stdout.write(render_validation(diagnostics, args.format, _use_color()))
    if args.strict and diagnostics:
        return 1
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gramcov",
        description="Instrument a unification grammar, run testsuites, "
        "and analyze disjunct coverage, redundancy, and overgeneration.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("text", "json"), default="text",
                       help="report format (default: text)")
        p.add_argument("--strict", action="store_true",
                       help="exit 1 when the analysis finds problems")
        p.add_argument("--figures", metavar="DIR",
                       help="also render PNG figures into DIR")

    p = sub.add_parser("instrument", help="add disjunct markers to a grammar")
    p.add_argument("grammar", help="grammar file")
    p.add_argument("-o", "--output", required=True, help="instrumented grammar file")
    p.add_argument("--inventory", metavar="PATH",
                   help="inventory file (default: <output>.inventory.tsv)")
    p.add_argument("--include-lexicon", action="store_true",
                   help="also count lexicon entries as disjuncts")
    p.set_defaults(func=cmd_instrument)

    p = sub.add_parser("run", help="parse a testsuite and record disjunct usage")
    p.add_argument("grammar", help="instrumented grammar file")
    p.add_argument("testsuite", help="testsuite file (OK/BAD lines)")
    p.add_argument("-o", "--output", required=True, help="usage database file")
    p.add_argument("--inventory", metavar="PATH",
                   help="inventory file (default: <grammar>.inventory.tsv)")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, metavar="N",
                   help=f"per-sentence reading cap (default: {DEFAULT_CAP})")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("coverage", help="report tested vs. total disjuncts")
    p.add_argument("db", help="usage database file")
    p.add_argument("--grammar", metavar="PATH",
                   help="cross-check the database against this grammar")
    add_format(p)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("reduce", help="drop redundant test cases")
    p.add_argument("db", help="usage database file")
    p.add_argument("--level", choices=("equivalence", "similarity"),
                   default="similarity",
                   help="redundancy notion (default: similarity)")
    p.add_argument("-o", "--output", metavar="PATH",
                   help="write the reduced testsuite to PATH")
    add_format(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("suspects", help="rank disjuncts by overgeneration suspicion")
    p.add_argument("db", help="usage database file")
    p.add_argument("--alpha", type=_fraction_arg, default=Fraction(1), metavar="X",
                   help="smoothing constant (default: 1)")
    p.add_argument("--tau", type=_fraction_arg, default=Fraction(1, 2), metavar="X",
                   help="score threshold (default: 1/2)")
    add_format(p)
    p.set_defaults(func=cmd_suspects)

    p = sub.add_parser("validate", help="check a grammar for declaration problems")
    p.add_argument("grammar", help="grammar file")
    p.add_argument("--format", choices=("text", "json"), default="text",
                   help="report format (default: text)")
    p.add_argument("--strict", action="store_true",
                   help="exit 1 when diagnostics are found")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "cap", 1) < 1:
        parser.error("--cap must be at least 1")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
