"""Disjunct enumeration and grammar instrumentation.

A disjunct is one atomic alternative the grammar writer put into a rule:
a branch of an explicit disjunction, the two sides of an optional item
(absent or present), the two sides of an iterated ``*`` item (zero or
some), or one branch of an annotation disjunction.  Instrumentation
rewrites the grammar so that choosing a disjunct deposits a marker
annotation, and markers accumulate per reading without constraining
anything, so the set of accepted strings and their readings is unchanged.

Rewrites applied, with fresh markers written ``@DISJUNCT-nnn``::

    X ? (ANNS)   ==>   { e (@a;) | X (ANNS @p;) }
    X * (ANNS)   ==>   { e (@z;) | X + (ANNS [@s;]) }
    { A | B }    ==>   { A' (@m;) | B' (@n;) }
    { P; | Q; }  ==>   { P; @m; | Q; @n; }        (annotation disjunction)

The iteration marker ``@s`` is added only when the ``*`` item carries no
annotation disjunction; otherwise the per-branch markers inside the
``+`` item already identify every use.  Annotations on an iterated item
apply once per daughter, so iterated markers count multiplicities.

Numbering is global and sequential in textual order of the instrumented
grammar: rule order, left to right, depth first.  Lexicon entries are
left alone unless ``include_lexicon`` is set, in which case each entry
gets a trailing marker (an entry is a phrase structure alternative for
its category).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .grammar import (
    AnnDisjunction,
    Annotation,
    Disjunction,
    Element,
    Empty,
    Grammar,
    GrammarError,
    LexEntry,
    Marker,
    Repetition,
    RhsItem,
    Rule,
    print_grammar,
)

KINDS = (
    "ps-branch",
    "optionality-absent",
    "optionality-present",
    "iteration-zero",
    "iteration-some",
    "annotation-branch",
)


@dataclass(frozen=True)
class DisjunctInfo:
    """One countable alternative: its marker id, host rule, kind, and locus."""

    id: int
    rule_lhs: str
    kind: str
    locus: str


def _contains_marker(anns: tuple[Annotation, ...]) -> bool:
    for ann in anns:
        if isinstance(ann, Marker):
            return True
        if isinstance(ann, AnnDisjunction):
            if any(_contains_marker(branch) for branch in ann.branches):
                return True
    return False


def _item_has_marker(item: RhsItem) -> bool:
    if isinstance(item, (Element, Empty)):
        return _contains_marker(item.annotations)
    return any(any(_item_has_marker(i) for i in branch) for branch in item.branches)


def is_instrumented(g: Grammar) -> bool:
    """True when any marker annotation occurs anywhere in the grammar."""
    return (
        any(any(_item_has_marker(item) for item in rule.rhs) for rule in g.rules)
        or any(_contains_marker(entry.annotations) for entry in g.lexicon)
    )


def collect_marker_ids(g: Grammar) -> list[int]:
    """All marker ids in the grammar, in textual order."""
    ids: list[int] = []

    def from_anns(anns: tuple[Annotation, ...]) -> None:
        for ann in anns:
            if isinstance(ann, Marker):
                ids.append(ann.disjunct_id)
            elif isinstance(ann, AnnDisjunction):
                for branch in ann.branches:
                    from_anns(branch)

    def from_items(items: tuple[RhsItem, ...]) -> None:
        for item in items:
            if isinstance(item, (Element, Empty)):
                from_anns(item.annotations)
            else:
                for branch in item.branches:
                    from_items(branch)

    for rule in g.rules:
        from_items(rule.rhs)
    for entry in g.lexicon:
        from_anns(entry.annotations)
    return ids


class _Numbering:
    def __init__(self) -> None:
        self.next_id = 1
        self.infos: list[DisjunctInfo] = []

    def mark(self, rule_lhs: str, kind: str, locus: str) -> Marker:
        info = DisjunctInfo(id=self.next_id, rule_lhs=rule_lhs, kind=kind, locus=locus)
        self.next_id += 1
        self.infos.append(info)
        return Marker(disjunct_id=info.id)

    def annotations(self, anns: tuple[Annotation, ...], lhs: str, locus: str) -> tuple[Annotation, ...]:
        out: list[Annotation] = []
        for k, ann in enumerate(anns):
            if isinstance(ann, AnnDisjunction):
                branches: list[tuple[Annotation, ...]] = []
                for j, branch in enumerate(ann.branches):
                    where = f"{locus}.a{k}.b{j}"
                    rewritten = self.annotations(branch, lhs, where)
                    branches.append(rewritten + (self.mark(lhs, "annotation-branch", where),))
                out.append(AnnDisjunction(branches=tuple(branches)))
            else:
                out.append(ann)
        return tuple(out)

    def item(self, item: RhsItem, lhs: str, locus: str) -> RhsItem:
        if isinstance(item, Empty):
            return Empty(annotations=self.annotations(item.annotations, lhs, locus))
        if isinstance(item, Disjunction):
            branches = tuple(
                self.ps_branch(branch, lhs, f"{locus}.b{j}")
                for j, branch in enumerate(item.branches)
            )
            return Disjunction(branches=branches)
        if item.repetition is Repetition.OPTIONAL:
            absent = Empty(annotations=(self.mark(lhs, "optionality-absent", f"{locus}.absent"),))
            anns = self.annotations(item.annotations, lhs, locus)
            anns += (self.mark(lhs, "optionality-present", f"{locus}.present"),)
            present = Element(category=item.category, repetition=Repetition.ONE, annotations=anns)
            return Disjunction(branches=((absent,), (present,)))
        if item.repetition is Repetition.STAR:
            zero = Empty(annotations=(self.mark(lhs, "iteration-zero", f"{locus}.zero"),))
            anns = self.annotations(item.annotations, lhs, locus)
            if not any(isinstance(a, AnnDisjunction) for a in item.annotations):
                anns += (self.mark(lhs, "iteration-some", f"{locus}.some"),)
            some = Element(category=item.category, repetition=Repetition.PLUS, annotations=anns)
            return Disjunction(branches=((zero,), (some,)))
        return Element(
            category=item.category,
            repetition=item.repetition,
            annotations=self.annotations(item.annotations, lhs, locus),
        )

    def ps_branch(self, branch: tuple[RhsItem, ...], lhs: str, locus: str) -> tuple[RhsItem, ...]:
        items = [self.item(it, lhs, f"{locus}.i{k}") for k, it in enumerate(branch)]
        marker = self.mark(lhs, "ps-branch", locus)
        last = items[-1]
        # The marker must fire exactly once per use of the branch, so it can
        # only ride on a non-iterated final item; otherwise it gets its own e.
        if isinstance(last, Element) and last.repetition is Repetition.ONE:
            items[-1] = Element(last.category, last.repetition, last.annotations + (marker,))
        elif isinstance(last, Empty):
            items[-1] = Empty(last.annotations + (marker,))
        else:
            items.append(Empty(annotations=(marker,)))
        return tuple(items)


def instrument_grammar(
    g: Grammar, include_lexicon: bool = False
) -> tuple[Grammar, list[DisjunctInfo]]:
    """Rewrite ``g`` with one fresh marker per disjunct.

    Returns the rewritten grammar and its disjunct inventory.  Weak
    generative capacity is preserved: markers never constrain, and each
    rewrite keeps the number of derivations per string unchanged.
    Raises GrammarError if ``g`` already contains markers.
    """
    if is_instrumented(g):
        raise GrammarError("grammar is already instrumented")
    numbering = _Numbering()
    rules: list[Rule] = []
    for r_idx, rule in enumerate(g.rules):
        items = tuple(
            numbering.item(item, rule.lhs, f"r{r_idx}.i{k}")
            for k, item in enumerate(rule.rhs)
        )
        rules.append(Rule(lhs=rule.lhs, rhs=items))
    lexicon = g.lexicon
    if include_lexicon:
        entries: list[LexEntry] = []
        for e_idx, entry in enumerate(g.lexicon):
            anns = numbering.annotations(entry.annotations, entry.category, f"lex{e_idx}")
            anns += (numbering.mark(entry.category, "ps-branch", f"lex{e_idx}"),)
            entries.append(LexEntry(entry.surface, entry.category, anns))
        lexicon = tuple(entries)
    instrumented = Grammar(
        start_symbol=g.start_symbol,
        declared_functions=g.declared_functions,
        rules=tuple(rules),
        lexicon=lexicon,
    )
    return instrumented, numbering.infos


def enumerate_disjuncts(g: Grammar, include_lexicon: bool = False) -> list[DisjunctInfo]:
    """List the disjuncts instrumentation would mark, in numbering order."""
    _, infos = instrument_grammar(g, include_lexicon=include_lexicon)
    return infos


def grammar_hash(g: Grammar) -> str:
    """Content hash of the canonical text form, for mismatch detection."""
    return hashlib.sha256(print_grammar(g).encode("utf-8")).hexdigest()


# ------------------------------------------------------- inventory file io

def format_inventory(infos: list[DisjunctInfo]) -> str:
    """One tab separated line per disjunct: id, rule, kind, locus."""
    lines = [
        f"{info.id}\t{info.rule_lhs}\t{info.kind}\t{info.locus}"
        for info in sorted(infos, key=lambda i: i.id)
    ]
    return "".join(line + "\n" for line in lines)


def parse_inventory(text: str) -> list[DisjunctInfo]:
    infos: list[DisjunctInfo] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4 or not parts[0].isdigit():
            raise GrammarError(f"malformed inventory line {lineno}: {line!r}")
        infos.append(DisjunctInfo(id=int(parts[0]), rule_lhs=parts[1], kind=parts[2], locus=parts[3]))
    return infos
