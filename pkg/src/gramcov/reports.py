"""Report rendering: aligned text tables and a JSON variant.

Both forms are deterministic: identical analysis inputs render byte for
byte identically.  Reports never carry timestamps.
"""

from __future__ import annotations

import json
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Sequence

from .analysis import CoverageReport, Partition, SuspicionEntry, UsageRecord, format_ratio
from .grammar import Diagnostic
from .instrument import DisjunctInfo


def _bold(text: str, color: bool) -> str:
    return f"\x1b[1m{text}\x1b[0m" if color else text


def _json_report(obj: object) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def format_percent(ratio: Fraction) -> str:
    value = Decimal(ratio.numerator * 100) / Decimal(ratio.denominator)
    return str(value.quantize(Decimal("1"), rounding=ROUND_HALF_UP)) + "%"


def _disjunct_rows(infos: Sequence[DisjunctInfo]) -> list[str]:
    rows = [("id", "rule", "kind", "locus")]
    rows += [(str(i.id), i.rule_lhs, i.kind, i.locus) for i in infos]
    widths = [max(len(row[col]) for row in rows) for col in range(4)]
    return [
        "    " + "  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()
        for row in rows
    ]


def _disjunct_json(info: DisjunctInfo) -> dict:
    return {"id": info.id, "rule": info.rule_lhs, "kind": info.kind, "locus": info.locus}


# ----------------------------------------------------------------- coverage

def render_coverage(
    report: CoverageReport, grammar_digest: str, fmt: str = "text", color: bool = False
) -> str:
    if fmt == "json":
        return _json_report({
            "grammar_hash": grammar_digest,
            "cases": {
                "total": report.n_cases,
                "ok_parseable": report.n_ok_parseable,
                "bad_parseable": report.n_bad_parseable,
                "ok_unparseable": report.n_ok_unparseable,
                "truncated": report.n_truncated,
            },
            "coverage": {
                "tested": report.tested,
                "total": report.total,
                "exact": f"{report.tested}/{report.total}",
                "display": format_ratio(report.ratio),
            },
            "distinct_combos": report.distinct_combos_tested,
            "untested": [_disjunct_json(info) for info in report.untested],
        })
    lines = [_bold("coverage", color)]
    lines.append(f"  grammar hash             : {grammar_digest}")
    lines.append(
        f"  test cases               : {report.n_cases}"
        f" ({report.n_ok_parseable} grammatical parseable,"
        f" {report.n_bad_parseable} ungrammatical parseable,"
        f" {report.n_ok_unparseable} grammatical unparseable,"
        f" {report.n_truncated} truncated)"
    )
    lines.append(
        f"  disjunct coverage        : {report.tested}/{report.total}"
        f" = {format_ratio(report.ratio)}"
    )
    lines.append(f"  distinct reading combos  : {report.distinct_combos_tested}")
    lines.append(f"  untested disjuncts       : {len(report.untested)}")
    if report.untested:
        lines.extend(_disjunct_rows(report.untested))
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------- reduction

def render_reduction(
    level: str,
    records: Sequence[UsageRecord],
    kept_ids: Sequence[str],
    partition: Partition | None,
    fmt: str = "text",
    color: bool = False,
) -> str:
    eligible = [r for r in records if r.intended == "ok" and r.parseable]
    n_input = len(eligible)
    n_kept = len(kept_ids)
    relative = Fraction(n_kept, n_input) if n_input else Fraction(1)
    retained_bad = [r.test_case_id for r in records if r.intended == "bad"]
    if fmt == "json":
        payload: dict = {
            "level": level,
            "cases": {"parseable_grammatical": n_input, "kept": n_kept},
            "relative_size": format_percent(relative),
            "kept_ids": list(kept_ids),
            "retained_ungrammatical": retained_bad,
        }
        if partition is not None:
            payload["classes"] = [list(cls) for cls in partition.classes]
            payload["excluded_truncated"] = list(partition.excluded_truncated)
        return _json_report(payload)
    lines = [_bold("reduction", color)]
    lines.append(f"  level                    : {level}")
    lines.append(f"  parseable grammatical    : {n_input} test cases")
    lines.append(f"  kept                     : {n_kept} test cases")
    lines.append(f"  relative size            : {format_percent(relative)}")
    lines.append(f"  kept case ids            : {' '.join(kept_ids) if kept_ids else '(none)'}")
    if retained_bad:
        lines.append(f"  ungrammatical retained   : {' '.join(retained_bad)}")
    if partition is not None:
        redundant = [cls for cls in partition.classes if len(cls) > 1]
        lines.append(f"  equivalence classes      : {len(partition.classes)}")
        if redundant:
            lines.append("  redundant groups:")
            for cls in redundant:
                lines.append(f"    {cls[0]} ~ {' ~ '.join(cls[1:])}  (kept {cls[0]})")
        if partition.excluded_truncated:
            lines.append(
                "  excluded (truncated)     : "
                + " ".join(partition.excluded_truncated)
            )
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------- suspects

def render_suspects(
    entries: Sequence[SuspicionEntry],
    alpha: Fraction,
    tau: Fraction,
    fmt: str = "text",
    color: bool = False,
) -> str:
    if fmt == "json":
        return _json_report({
            "alpha": str(Fraction(alpha)),
            "tau": str(Fraction(tau)),
            "suspects": [
                {
                    "disjunct": _disjunct_json(entry.info),
                    "score": {
                        "exact": str(entry.score),
                        "display": format_ratio(entry.score),
                    },
                    "ungrammatical_reliant": entry.bad_count,
                    "grammatical_reliant": entry.ok_count,
                    "cases": [
                        {"id": case_id, "text": text} for case_id, text in entry.bad_cases
                    ],
                }
                for entry in entries
            ],
        })
    lines = [_bold(f"suspicion (alpha={Fraction(alpha)}, tau={Fraction(tau)})", color)]
    lines.append(f"  flagged disjuncts        : {len(entries)}")
    if entries:
        rows = [("id", "score", "exact", "U", "G", "rule", "kind", "locus")]
        for entry in entries:
            rows.append((
                str(entry.info.id),
                format_ratio(entry.score),
                str(entry.score),
                str(entry.bad_count),
                str(entry.ok_count),
                entry.info.rule_lhs,
                entry.info.kind,
                entry.info.locus,
            ))
        widths = [max(len(row[col]) for row in rows) for col in range(8)]
        for row in rows:
            lines.append(
                "    " + "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
            )
        for entry in entries:
            lines.append(f"  ungrammatical cases relying on disjunct {entry.info.id}:")
            for case_id, text in entry.bad_cases:
                lines.append(f"    {case_id}  {text}")
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------- validate

def render_validation(
    diagnostics: Sequence[Diagnostic], fmt: str = "text", color: bool = False
) -> str:
    if fmt == "json":
        return _json_report({
            "diagnostics": [
                {"kind": d.kind, "context": d.context, "message": d.message}
                for d in diagnostics
            ],
        })
    lines = [_bold("validation", color)]
    lines.append(f"  diagnostics              : {len(diagnostics)}")
    for diag in diagnostics:
        context = f" [{diag.context}]" if diag.context else ""
        lines.append(f"    warning {diag.kind}{context}: {diag.message}")
    return "".join(line + "\n" for line in lines)
