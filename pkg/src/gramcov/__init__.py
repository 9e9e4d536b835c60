"""Coverage instrumentation and testsuite analysis for unification grammars.

The toolkit rewrites a grammar so every disjunct (phrase structure
branch, optional item, iterated item, annotation branch) deposits a
countable marker, parses testsuites with the rewritten grammar, and
analyses the recorded usage: how much of the grammar a suite exercises,
which test cases are redundant, and which disjuncts look responsible
when ungrammatical input parses.
"""

from __future__ import annotations

from .analysis import (
    CoverageReport,
    Partition,
    RelianceSignature,
    SuspicionEntry,
    TestCase,
    UsageDatabase,
    UsageDbError,
    UsageRecord,
    disjunct_coverage,
    equivalence_classes,
    format_ratio,
    greedy_reduce,
    interaction_stats,
    load_testsuite,
    make_usage_record,
    read_usage_db,
    reliance_signature,
    save_testsuite,
    suspicion_scores,
    untested_disjuncts,
    write_usage_db,
)
from .engine import (
    DEFAULT_CAP,
    ParseResult,
    ParseTree,
    Reading,
    collect_usage,
    parse_sentence,
    tokenize,
)
from .fstruct import FeatureCycleError, FeatureStructure, unify
from .grammar import (
    AnnDisjunction,
    Annotation,
    AtomEq,
    Diagnostic,
    Disjunction,
    Element,
    Empty,
    Grammar,
    GrammarError,
    LexEntry,
    Marker,
    Membership,
    NonExistence,
    Path,
    PathEq,
    Repetition,
    RhsItem,
    Rule,
    parse_grammar,
    print_grammar,
    validate,
)
from .instrument import (
    DisjunctInfo,
    enumerate_disjuncts,
    format_inventory,
    grammar_hash,
    instrument_grammar,
    is_instrumented,
    parse_inventory,
)

__version__ = "0.1.0"

__all__ = [
    "AnnDisjunction",
    "Annotation",
    "AtomEq",
    "CoverageReport",
    "DEFAULT_CAP",
    "Diagnostic",
    "Disjunction",
    "DisjunctInfo",
    "Element",
    "Empty",
    "FeatureCycleError",
    "FeatureStructure",
    "Grammar",
    "GrammarError",
    "LexEntry",
    "Marker",
    "Membership",
    "NonExistence",
    "ParseResult",
    "ParseTree",
    "Partition",
    "Path",
    "PathEq",
    "Reading",
    "RelianceSignature",
    "Repetition",
    "RhsItem",
    "Rule",
    "SuspicionEntry",
    "TestCase",
    "UsageDatabase",
    "UsageDbError",
    "UsageRecord",
    "collect_usage",
    "disjunct_coverage",
    "enumerate_disjuncts",
    "equivalence_classes",
    "format_inventory",
    "format_ratio",
    "grammar_hash",
    "greedy_reduce",
    "instrument_grammar",
    "interaction_stats",
    "is_instrumented",
    "load_testsuite",
    "make_usage_record",
    "parse_grammar",
    "parse_inventory",
    "parse_sentence",
    "print_grammar",
    "read_usage_db",
    "reliance_signature",
    "save_testsuite",
    "suspicion_scores",
    "tokenize",
    "unify",
    "untested_disjuncts",
    "validate",
    "write_usage_db",
]
