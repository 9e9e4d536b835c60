"""Testsuite analyses over recorded disjunct usage.

A testsuite file holds one case per line: ``OK`` or ``BAD``, then the
sentence, with ``#`` comments and blank lines skipped.  The case id is
the 1-based line number unless the line starts with ``id:NAME``.

Usage records keep, per test case, the usage multiset of every reading.
Coverage counts every disjunct some grammatical parseable case relies
on.  Two cases are equivalent when they produce the same set of
per-reading disjunct sets (strictly equivalent: multisets), and a suite
shrinks by keeping, in decreasing order of reliance-set size, only cases
that still rely on an uncovered disjunct.  Suspicion ranks disjuncts by
(U + a) / (U + G + 2a), where U and G count ungrammatical respectively
grammatical parseable cases relying on the disjunct; a disjunct is
reported when U is at least 1 and the score reaches the threshold.

The usage database is UTF-8 JSON lines: a header object with the format
version, the instrumented grammar's content hash, and the disjunct
inventory, then one object per test case in suite order.  All keys are
sorted, so identical inputs serialize byte for byte identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path as FilePath
from typing import Iterable, Mapping, Sequence

from .engine import ParseResult
from .instrument import DisjunctInfo

FORMAT_VERSION = 1

_VERDICTS = {"OK": "ok", "BAD": "bad"}


class UsageDbError(ValueError):
    """Raised for unreadable or mismatched usage databases."""


@dataclass(frozen=True)
class TestCase:
    id: str
    text: str
    intended: str  # "ok" (grammatical) or "bad" (ungrammatical)


@dataclass(frozen=True)
class UsageRecord:
    test_case_id: str
    text: str
    intended: str
    parseable: bool
    truncated: bool
    readings: tuple[Mapping[int, int], ...]


@dataclass(frozen=True)
class RelianceSignature:
    """What a test case relies on, at three levels of detail."""

    union_set: frozenset[int]
    combos: frozenset[frozenset[int]]
    strict_combos: frozenset[tuple[tuple[int, int], ...]]


@dataclass(frozen=True)
class CoverageReport:
    tested: int
    total: int
    ratio: Fraction
    untested: tuple[DisjunctInfo, ...]
    distinct_combos_tested: int
    n_cases: int
    n_ok_parseable: int
    n_bad_parseable: int
    n_ok_unparseable: int
    n_truncated: int


@dataclass(frozen=True)
class Partition:
    level: str
    classes: tuple[tuple[str, ...], ...]
    excluded_truncated: tuple[str, ...]


@dataclass(frozen=True)
class SuspicionEntry:
    info: DisjunctInfo
    score: Fraction
    bad_count: int
    ok_count: int
    bad_cases: tuple[tuple[str, str], ...]


# -------------------------------------------------------------- testsuites

def load_testsuite(text: str) -> list[TestCase]:
    """Parse testsuite text; raises ValueError on malformed lines."""
    cases: list[TestCase] = []
    seen_ids: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        case_id = str(lineno)
        first, _, rest = line.partition(" ")
        if first.startswith("id:"):
            case_id = first[3:]
            if not case_id:
                raise ValueError(f"line {lineno}: empty id")
            line = rest.strip()
            first, _, rest = line.partition(" ")
        if first not in _VERDICTS:
            raise ValueError(f"line {lineno}: expected OK or BAD, found {first!r}")
        sentence = rest.strip()
        if not sentence:
            raise ValueError(f"line {lineno}: missing sentence")
        if case_id in seen_ids:
            raise ValueError(f"line {lineno}: duplicate case id {case_id!r}")
        seen_ids.add(case_id)
        cases.append(TestCase(id=case_id, text=sentence, intended=_VERDICTS[first]))
    return cases


def save_testsuite(cases: Iterable[TestCase]) -> str:
    """Render cases in the testsuite format, with explicit ids."""
    lines = [
        f"id:{case.id} {'OK' if case.intended == 'ok' else 'BAD'} {case.text}"
        for case in cases
    ]
    return "".join(line + "\n" for line in lines)


def make_usage_record(case: TestCase, result: ParseResult) -> UsageRecord:
    return UsageRecord(
        test_case_id=case.id,
        text=case.text,
        intended=case.intended,
        parseable=result.parseable,
        truncated=result.truncated,
        readings=tuple(dict(reading.usage) for reading in result.readings),
    )


# -------------------------------------------------------------- signatures

def reliance_signature(record: UsageRecord) -> RelianceSignature:
    combos = frozenset(frozenset(reading) for reading in record.readings)
    strict = frozenset(tuple(sorted(reading.items())) for reading in record.readings)
    union: frozenset[int] = frozenset().union(*combos) if combos else frozenset()
    return RelianceSignature(union_set=union, combos=combos, strict_combos=strict)


def _check_known_ids(records: Sequence[UsageRecord], inventory: Sequence[DisjunctInfo]) -> None:
    known = {info.id for info in inventory}
    for record in records:
        for reading in record.readings:
            unknown = set(reading) - known
            if unknown:
                raise UsageDbError(
                    f"case {record.test_case_id!r} uses disjunct "
                    f"{min(unknown)} missing from the inventory; "
                    "grammar mismatch?"
                )


def _ok_parseable(records: Sequence[UsageRecord]) -> list[UsageRecord]:
    return [r for r in records if r.intended == "ok" and r.parseable]


# ---------------------------------------------------------------- coverage

def format_ratio(ratio: Fraction) -> str:
    """Two decimal display of an exact ratio, rounding halves up."""
    value = Decimal(ratio.numerator) / Decimal(ratio.denominator)
    return str(value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def disjunct_coverage(
    records: Sequence[UsageRecord], inventory: Sequence[DisjunctInfo]
) -> CoverageReport:
    """Share of the inventory that grammatical parseable cases rely on."""
    _check_known_ids(records, inventory)
    tested: set[int] = set()
    for record in _ok_parseable(records):
        for reading in record.readings:
            tested.update(reading)
    total = len(inventory)
    ratio = Fraction(len(tested), total) if total else Fraction(0)
    untested = tuple(
        info for info in sorted(inventory, key=lambda i: i.id) if info.id not in tested
    )
    return CoverageReport(
        tested=len(tested),
        total=total,
        ratio=ratio,
        untested=untested,
        distinct_combos_tested=interaction_stats(records),
        n_cases=len(records),
        n_ok_parseable=sum(1 for r in records if r.intended == "ok" and r.parseable),
        n_bad_parseable=sum(1 for r in records if r.intended == "bad" and r.parseable),
        n_ok_unparseable=sum(1 for r in records if r.intended == "ok" and not r.parseable),
        n_truncated=sum(1 for r in records if r.truncated),
    )


def untested_disjuncts(
    records: Sequence[UsageRecord], inventory: Sequence[DisjunctInfo]
) -> list[DisjunctInfo]:
    return list(disjunct_coverage(records, inventory).untested)


def interaction_stats(records: Sequence[UsageRecord]) -> int:
    """Number of distinct per-reading disjunct sets across the suite."""
    combos: set[frozenset[int]] = set()
    for record in _ok_parseable(records):
        combos.update(frozenset(reading) for reading in record.readings)
    return len(combos)


# -------------------------------------------------------------- partitions

def equivalence_classes(
    records: Sequence[UsageRecord], level: str = "equivalence"
) -> Partition:
    """Group grammatical parseable cases by reliance signature.

    ``level`` is ``equivalence`` (per-reading sets) or ``strict``
    (per-reading multisets).  Truncated records carry incomplete reading
    lists and are excluded, listed separately.
    """
    if level not in ("equivalence", "strict"):
        raise ValueError(f"unknown partition level {level!r}")
    eligible = [r for r in _ok_parseable(records) if not r.truncated]
    excluded = tuple(r.test_case_id for r in _ok_parseable(records) if r.truncated)
    groups: dict[object, list[str]] = {}
    for record in eligible:
        signature = reliance_signature(record)
        key = signature.combos if level == "equivalence" else signature.strict_combos
        groups.setdefault(key, []).append(record.test_case_id)
    classes = tuple(tuple(members) for members in groups.values())
    return Partition(level=level, classes=classes, excluded_truncated=excluded)


# --------------------------------------------------------------- reduction

def greedy_reduce(records: Sequence[UsageRecord]) -> list[str]:
    """Pick case ids whose reliance unions jointly cover the suite's union.

    Cases are visited in decreasing order of reliance-set size, ties in
    suite order, and kept only when they rely on a disjunct no kept case
    relies on.  The kept set always covers exactly the input union.
    """
    eligible = _ok_parseable(records)
    unions = {r.test_case_id: reliance_signature(r).union_set for r in eligible}
    ordered = sorted(
        range(len(eligible)), key=lambda idx: (-len(unions[eligible[idx].test_case_id]), idx)
    )
    covered: set[int] = set()
    kept: list[str] = []
    for idx in ordered:
        case_id = eligible[idx].test_case_id
        union = unions[case_id]
        if union - covered:
            covered.update(union)
            kept.append(case_id)
    return kept


# --------------------------------------------------------------- suspicion

def suspicion_scores(
    records: Sequence[UsageRecord],
    inventory: Sequence[DisjunctInfo],
    alpha: Fraction = Fraction(1),
    tau: Fraction = Fraction(1, 2),
) -> list[SuspicionEntry]:
    """Rank disjuncts by reliance from parseable ungrammatical cases.

    Scores are exact: (U + alpha) / (U + G + 2 alpha), smoothed by
    ``alpha``.  Only disjuncts with U >= 1 and score >= ``tau`` are
    returned, sorted by score, then U, then id.
    """
    _check_known_ids(records, inventory)
    alpha = Fraction(alpha)
    tau = Fraction(tau)
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    bad_counts: dict[int, int] = {}
    ok_counts: dict[int, int] = {}
    bad_cases: dict[int, list[tuple[str, str]]] = {}
    for record in records:
        if not record.parseable:
            continue
        union = reliance_signature(record).union_set
        for disjunct_id in union:
            if record.intended == "bad":
                bad_counts[disjunct_id] = bad_counts.get(disjunct_id, 0) + 1
                bad_cases.setdefault(disjunct_id, []).append(
                    (record.test_case_id, record.text)
                )
            else:
                ok_counts[disjunct_id] = ok_counts.get(disjunct_id, 0) + 1
    entries: list[SuspicionEntry] = []
    by_id = {info.id: info for info in inventory}
    for disjunct_id, bad in bad_counts.items():
        good = ok_counts.get(disjunct_id, 0)
        score = Fraction(bad + alpha, bad + good + 2 * alpha)
        if score >= tau:
            entries.append(SuspicionEntry(
                info=by_id[disjunct_id],
                score=score,
                bad_count=bad,
                ok_count=good,
                bad_cases=tuple(bad_cases[disjunct_id]),
            ))
    entries.sort(key=lambda e: (-e.score, -e.bad_count, e.info.id))
    return entries


# ----------------------------------------------------------- usage database

@dataclass(frozen=True)
class UsageDatabase:
    grammar_hash: str
    inventory: tuple[DisjunctInfo, ...]
    records: tuple[UsageRecord, ...]


def _dumps(obj: object) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def format_usage_db(db: UsageDatabase) -> str:
    header = {
        "format_version": FORMAT_VERSION,
        "grammar_hash": db.grammar_hash,
        "inventory": [
            {"id": info.id, "rule": info.rule_lhs, "kind": info.kind, "locus": info.locus}
            for info in sorted(db.inventory, key=lambda i: i.id)
        ],
    }
    lines = [_dumps(header)]
    for record in db.records:
        lines.append(_dumps({
            "id": record.test_case_id,
            "text": record.text,
            "intended": record.intended,
            "parseable": record.parseable,
            "truncated": record.truncated,
            "readings": [
                {str(k): v for k, v in sorted(reading.items())}
                for reading in record.readings
            ],
        }))
    return "".join(line + "\n" for line in lines)


def parse_usage_db(text: str, expected_hash: str | None = None) -> UsageDatabase:
    lines = text.splitlines()
    if not lines:
        raise UsageDbError("empty usage database")
    lineno = 1
    try:
        header = json.loads(lines[0])
        if not isinstance(header, dict) or header.get("format_version") != FORMAT_VERSION:
            raise UsageDbError(
                f"unsupported usage database (expected format_version {FORMAT_VERSION})"
            )
        grammar_digest = header["grammar_hash"]
        inventory = tuple(
            DisjunctInfo(
                id=int(item["id"]),
                rule_lhs=str(item["rule"]),
                kind=str(item["kind"]),
                locus=str(item["locus"]),
            )
            for item in header["inventory"]
        )
        records = []
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            obj = json.loads(line)
            intended = obj["intended"]
            if intended not in ("ok", "bad"):
                raise UsageDbError(f"bad intended value {intended!r} on line {lineno}")
            records.append(UsageRecord(
                test_case_id=str(obj["id"]),
                text=str(obj["text"]),
                intended=intended,
                parseable=bool(obj["parseable"]),
                truncated=bool(obj["truncated"]),
                readings=tuple(
                    {int(k): int(v) for k, v in reading.items()}
                    for reading in obj["readings"]
                ),
            ))
    except UsageDbError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageDbError(f"malformed usage database on line {lineno}: {exc}") from exc
    if expected_hash is not None and grammar_digest != expected_hash:
        raise UsageDbError(
            "grammar mismatch: database was recorded against a different grammar"
        )
    return UsageDatabase(grammar_hash=grammar_digest, inventory=inventory, records=tuple(records))


def write_usage_db(
    path: str | FilePath,
    records: Sequence[UsageRecord],
    inventory: Sequence[DisjunctInfo],
    grammar_digest: str,
) -> None:
    db = UsageDatabase(
        grammar_hash=grammar_digest,
        inventory=tuple(inventory),
        records=tuple(records),
    )
    FilePath(path).write_text(format_usage_db(db), encoding="utf-8")


def read_usage_db(path: str | FilePath, expected_hash: str | None = None) -> UsageDatabase:
    return parse_usage_db(FilePath(path).read_text(encoding="utf-8"), expected_hash)
