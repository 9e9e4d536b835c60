"""Optional matplotlib figures rendered next to report output.

matplotlib is imported lazily so the analysis pipeline works without a
display stack; the Agg backend writes PNG files only.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .analysis import CoverageReport, SuspicionEntry, UsageRecord
from .instrument import DisjunctInfo


def _new_axes(title: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    ax.set_title(title)
    return fig, ax


def _save(fig, out_dir: Path, name: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / name
    fig.tight_layout()
    fig.savefig(target, dpi=120)
    import matplotlib.pyplot as plt

    plt.close(fig)
    return target


def coverage_figure(
    report: CoverageReport, inventory: Sequence[DisjunctInfo], out_dir: Path
) -> Path:
    """Bar chart of tested vs total disjuncts per rule."""
    untested = {info.id for info in report.untested}
    totals: dict[str, int] = {}
    tested: dict[str, int] = {}
    for info in inventory:
        totals[info.rule_lhs] = totals.get(info.rule_lhs, 0) + 1
        if info.id not in untested:
            tested[info.rule_lhs] = tested.get(info.rule_lhs, 0) + 1
    rules = list(totals)
    fig, ax = _new_axes("disjunct coverage by rule")
    xs = range(len(rules))
    ax.bar(xs, [totals[r] for r in rules], color="#d0d0d0", label="total")
    ax.bar(xs, [tested.get(r, 0) for r in rules], color="#3465a4", label="tested")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(rules)
    ax.set_ylabel("disjuncts")
    ax.legend()
    return _save(fig, out_dir, "coverage.png")


def suspects_figure(entries: Sequence[SuspicionEntry], out_dir: Path) -> Path:
    """Horizontal bars of suspicion scores, most suspicious on top."""
    fig, ax = _new_axes("suspicion scores")
    labels = [f"{e.info.id} ({e.info.rule_lhs} {e.info.kind})" for e in entries]
    scores = [float(e.score) for e in entries]
    ys = range(len(entries))
    ax.barh(list(ys), scores, color="#a40000")
    ax.set_yticks(list(ys))
    ax.set_yticklabels(labels)
    ax.invert_yaxis()
    ax.set_xlim(0.0, 1.0)
    ax.set_xlabel("score")
    return _save(fig, out_dir, "suspects.png")


def reduction_figure(
    records: Sequence[UsageRecord], kept_ids: Sequence[str], out_dir: Path
) -> Path:
    """Before/after bar chart of the grammatical parseable suite size."""
    eligible = sum(1 for r in records if r.intended == "ok" and r.parseable)
    kept = len(kept_ids)
    relative = float(Fraction(kept, eligible)) if eligible else 1.0
    fig, ax = _new_axes("testsuite reduction")
    ax.bar([0, 1], [eligible, kept], color=["#d0d0d0", "#4e9a06"])
    ax.set_xticks([0, 1])
    ax.set_xticklabels(["input", f"kept ({relative:.0%})"])
    ax.set_ylabel("grammatical parseable cases")
    return _save(fig, out_dir, "reduction.png")
