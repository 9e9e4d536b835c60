"""Two phase parsing engine with per reading usage counts.

Phase one parses the context free backbone.  Each rule body, including
its repetition operators and explicit disjunctions, compiles to a small
positional automaton whose edges either consume a constituent of some
category or move silently (skipped optional items, empty ``e`` items).
A packed chart then stores, per rule, automaton state, and span, every
way of reaching that state, so shared subderivations are kept once.

Phase two enumerates backbone trees from the chart in a fixed order and
solves each tree's annotations.  Every annotation disjunction multiplies
the candidate readings; each candidate is checked by unification, with
negated existence constraints evaluated after all equations.  Marker
annotations never touch the feature structure: they accumulate in a per
reading usage multiset, once per constituent instance, so a marker on an
iterated item counts one per daughter.

Grammars whose backbone admits unboundedly many derivations for one
string (a category deriving itself over the same span, or an iterated
category that derives the empty string) are rejected at load with a
GrammarError, which keeps enumeration finite.  Readings are cut off at
``cap``; the result is flagged truncated only when more readings exist.
"""

from __future__ import annotations

import itertools
from collections import Counter, deque
from dataclasses import dataclass
from functools import lru_cache

from .fstruct import (
    FeatureStructure,
    _make_set,
    _Node,
    _resolve_create,
    _resolve_peek,
    _unify_nodes,
    _ATOM,
)
from .grammar import (
    AnnDisjunction,
    Annotation,
    AtomEq,
    Disjunction,
    Element,
    Empty,
    Grammar,
    GrammarError,
    Marker,
    Membership,
    NonExistence,
    PathEq,
    Repetition,
    RhsItem,
)

DEFAULT_CAP = 1000


def tokenize(text: str) -> list[str]:
    """Split on whitespace; punctuation must already be separated."""
    return text.split()


@dataclass(frozen=True)
class ParseTree:
    category: str
    start: int
    end: int
    children: tuple[ParseTree, ...] = ()
    token: str | None = None


@dataclass(frozen=True)
class Reading:
    """One solution: backbone tree, feature structure, usage multiset."""

    tree: ParseTree
    fstruct: FeatureStructure
    usage: dict[int, int]
    choice_markers: tuple[tuple[int, ...], ...] = ()


@dataclass(frozen=True)
class ParseResult:
    tokens: tuple[str, ...]
    readings: tuple[Reading, ...]
    parseable: bool
    truncated: bool
    diagnostics: tuple[str, ...] = ()
    test_case_id: str | None = None


def collect_usage(reading: Reading) -> dict[int, int]:
    """Recount the markers of the reading's chosen branches."""
    counts = Counter(itertools.chain.from_iterable(reading.choice_markers))
    return dict(sorted(counts.items()))


# ------------------------------------------------------------- compilation

class _Occ:
    """One grammar position carrying annotations; identity equality."""

    __slots__ = ("category", "annotations", "alts")

    def __init__(self, category: str | None, annotations: tuple[Annotation, ...]):
        self.category = category
        self.annotations = annotations
        self.alts = _expand_annotations(annotations)


def _expand_annotations(
    anns: tuple[Annotation, ...],
) -> tuple[tuple[tuple[Annotation, ...], tuple[int, ...]], ...]:
    """Multiply out annotation disjunctions.

    Each alternative is a pair of the flat constraint sequence and the
    marker ids picked up along the chosen branches.
    """
    alts: list[tuple[list[Annotation], list[int]]] = [([], [])]
    for ann in anns:
        if isinstance(ann, Marker):
            for _, markers in alts:
                markers.append(ann.disjunct_id)
        elif isinstance(ann, AnnDisjunction):
            branch_alts = []
            for branch in ann.branches:
                branch_alts.extend(
                    (list(c), list(m)) for c, m in _expand_annotations(branch)
                )
            alts = [
                (c + bc, m + bm)
                for c, m in alts
                for bc, bm in branch_alts
            ]
        else:
            for constraints, _ in alts:
                constraints.append(ann)
    return tuple((tuple(c), tuple(m)) for c, m in alts)


class _CRule:
    __slots__ = ("index", "lhs", "start", "accept", "eps", "cat")

    def __init__(self, index: int, lhs: str):
        self.index = index
        self.lhs = lhs
        self.start = 0
        self.accept = 0
        self.eps: list[list[tuple[_Occ | None, int]]] = []
        self.cat: list[list[tuple[str, _Occ, int]]] = []

    def new_state(self) -> int:
        self.eps.append([])
        self.cat.append([])
        return len(self.eps) - 1

    def compile_body(self, items: tuple[RhsItem, ...], iterated: set[str]) -> None:
        self.start = self.new_state()
        self.accept = self._seq(items, self.start, iterated)

    def _seq(self, items: tuple[RhsItem, ...], src: int, iterated: set[str]) -> int:
        for item in items:
            src = self._item(item, src, iterated)
        return src

    def _item(self, item: RhsItem, src: int, iterated: set[str]) -> int:
        if isinstance(item, Empty):
            dst = self.new_state()
            self.eps[src].append((_Occ(None, item.annotations), dst))
            return dst
        if isinstance(item, Disjunction):
            dst = self.new_state()
            for branch in item.branches:
                end = self._seq(branch, src, iterated)
                self.eps[end].append((None, dst))
            return dst
        occ = _Occ(item.category, item.annotations)
        if item.repetition is Repetition.ONE:
            dst = self.new_state()
            self.cat[src].append((item.category, occ, dst))
            return dst
        if item.repetition is Repetition.OPTIONAL:
            dst = self.new_state()
            self.cat[src].append((item.category, occ, dst))
            self.eps[src].append((None, dst))
            return dst
        iterated.add(item.category)
        loop = self.new_state()
        self.cat[src].append((item.category, occ, loop))
        self.cat[loop].append((item.category, occ, loop))
        dst = self.new_state()
        self.eps[loop].append((None, dst))
        if item.repetition is Repetition.STAR:
            self.eps[src].append((None, dst))
        return dst


class _Compiled:
    __slots__ = ("start_symbol", "rules", "lex")

    def __init__(self, g: Grammar):
        self.start_symbol = g.start_symbol
        iterated: set[str] = set()
        self.rules: list[_CRule] = []
        for index, rule in enumerate(g.rules):
            crule = _CRule(index, rule.lhs)
            crule.compile_body(rule.rhs, iterated)
            self.rules.append(crule)
        self.lex: dict[str, list[tuple[str, _Occ]]] = {}
        for entry in g.lexicon:
            occ = _Occ(entry.category, entry.annotations)
            self.lex.setdefault(entry.surface, []).append((entry.category, occ))
        _reject_unbounded_ambiguity(self, iterated)


def _empty_reach(crule: _CRule, nullable: set[str], backwards: bool) -> set[int]:
    """States connected to start (or accept) using only empty spanning edges."""
    edges: dict[int, list[int]] = {s: [] for s in range(len(crule.eps))}
    for s in range(len(crule.eps)):
        for _, dst in crule.eps[s]:
            edges[dst if backwards else s].append(s if backwards else dst)
        for cat, _, dst in crule.cat[s]:
            if cat in nullable:
                edges[dst if backwards else s].append(s if backwards else dst)
    seen = {crule.accept if backwards else crule.start}
    frontier = list(seen)
    while frontier:
        state = frontier.pop()
        for nxt in edges[state]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def _nullable_categories(rules: list[_CRule]) -> set[str]:
    nullable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for crule in rules:
            if crule.lhs in nullable:
                continue
            if crule.accept in _empty_reach(crule, nullable, backwards=False):
                nullable.add(crule.lhs)
                changed = True
    return nullable


def _reject_unbounded_ambiguity(comp: _Compiled, iterated: set[str]) -> None:
    nullable = _nullable_categories(comp.rules)
    for cat in sorted(iterated):
        if cat in nullable:
            raise GrammarError(
                f"iterated category {cat!r} can derive the empty string, "
                "which admits unboundedly many derivations"
            )
    # A category that can rederive itself over the same span (all sibling
    # material nullable) also admits unboundedly many trees.
    graph: dict[str, set[str]] = {}
    for crule in comp.rules:
        forward = _empty_reach(crule, nullable, backwards=False)
        backward = _empty_reach(crule, nullable, backwards=True)
        targets = graph.setdefault(crule.lhs, set())
        for s in forward:
            for cat, _, dst in crule.cat[s]:
                if dst in backward:
                    targets.add(cat)
    seen: dict[str, int] = {}

    def visit(cat: str) -> None:
        state = seen.get(cat)
        if state == 1:
            raise GrammarError(
                f"category {cat!r} can derive itself over the same input span, "
                "which admits unboundedly many derivations"
            )
        if state == 2:
            return
        seen[cat] = 1
        for nxt in sorted(graph.get(cat, ())):
            visit(nxt)
        seen[cat] = 2

    for cat in sorted(graph):
        visit(cat)


@lru_cache(maxsize=16)
def _compile(g: Grammar) -> _Compiled:
    return _Compiled(g)


# -------------------------------------------------------------- the chart

_SEED = None


def _saturate(comp: _Compiled, tokens: tuple[str, ...]):
    n = len(tokens)
    passive: dict[tuple, list] = {}
    spans: dict[tuple, list[int]] = {}
    waiting: dict[tuple, list[tuple]] = {}
    active: dict[tuple, list] = {}
    queue: deque[tuple] = deque()

    def add_active(key: tuple, pred) -> None:
        preds = active.get(key)
        if preds is None:
            active[key] = [pred]
            queue.append(key)
        else:
            preds.append(pred)

    def add_passive(cat: str, i: int, j: int, completion) -> None:
        pkey = (cat, i, j)
        existing = passive.get(pkey)
        if existing is not None:
            existing.append(completion)
            return
        passive[pkey] = [completion]
        spans.setdefault((cat, i), []).append(j)
        for akey, occ, dst in waiting.get((cat, i), ()):
            add_active((akey[0], dst, akey[2], j), (akey, ("cat", occ, pkey)))

    for idx, token in enumerate(tokens):
        for cat, occ in comp.lex.get(token, ()):
            add_passive(cat, idx, idx + 1, ("lex", occ))
    for crule in comp.rules:
        for i in range(n + 1):
            add_active((crule.index, crule.start, i, i), _SEED)

    while queue:
        key = queue.popleft()
        ri, state, i, j = key
        crule = comp.rules[ri]
        for occ, dst in crule.eps[state]:
            add_active((ri, dst, i, j), (key, ("eps", occ)))
        for cat, occ, dst in crule.cat[state]:
            waiting.setdefault((cat, j), []).append((key, occ, dst))
            for j2 in spans.get((cat, j), ()):
                add_active((ri, dst, i, j2), (key, ("cat", occ, (cat, j, j2))))
        if state == crule.accept:
            add_passive(crule.lhs, i, j, ("rule", crule, key))

    return passive, active


def _iter_derivs(active: dict, akey: tuple):
    for pred in active[akey]:
        if pred is _SEED:
            yield []
        else:
            pkey, step = pred
            for prefix in _iter_derivs(active, pkey):
                yield prefix + [step]


def _iter_trees(passive: dict, active: dict, pkey: tuple):
    cat, i, j = pkey
    for completion in passive[pkey]:
        if completion[0] == "lex":
            yield ("lex", completion[1], cat, i, j)
        else:
            _, crule, akey = completion
            for steps in _iter_derivs(active, akey):
                content = [
                    step for step in steps
                    if step[0] == "cat" or step[1] is not None
                ]
                yield from _fill_children(passive, active, crule, i, j, content, 0, [])


def _fill_children(passive, active, crule, i, j, content, k, acc):
    if k == len(content):
        yield ("node", crule, i, j, tuple(acc))
        return
    step = content[k]
    if step[0] == "eps":
        acc.append(("eps", step[1]))
        yield from _fill_children(passive, active, crule, i, j, content, k + 1, acc)
        acc.pop()
    else:
        _, occ, child_key = step
        for subtree in _iter_trees(passive, active, child_key):
            acc.append(("child", occ, subtree))
            yield from _fill_children(passive, active, crule, i, j, content, k + 1, acc)
            acc.pop()


# ------------------------------------------------------------- phase two

def _tree_attachments(tree) -> list[tuple[int, int, _Occ]]:
    attachments: list[tuple[int, int, _Occ]] = []
    counter = itertools.count(1)

    def leaf(var: int, occ: _Occ) -> None:
        if occ.annotations:
            attachments.append((var, next(counter), occ))

    def node(tree, var: int) -> None:
        for step in tree[4]:
            if step[0] == "eps":
                if step[1].annotations:
                    attachments.append((var, next(counter), step[1]))
            else:
                _, occ, subtree = step
                child_var = next(counter)
                if occ.annotations:
                    attachments.append((var, child_var, occ))
                if subtree[0] == "lex":
                    leaf(child_var, subtree[1])
                else:
                    node(subtree, child_var)

    if tree[0] == "lex":
        leaf(0, tree[1])
    else:
        node(tree, 0)
    return attachments


def _public_tree(tree, tokens: tuple[str, ...]) -> ParseTree:
    if tree[0] == "lex":
        _, _, cat, i, j = tree
        return ParseTree(category=cat, start=i, end=j, token=tokens[i])
    _, crule, i, j, steps = tree
    children = tuple(
        _public_tree(step[2], tokens) for step in steps if step[0] == "child"
    )
    return ParseTree(category=crule.lhs, start=i, end=j, children=children)


def _solve(sites, choice) -> tuple[FeatureStructure, tuple[tuple[int, ...], ...]] | None:
    nodes: dict[int, _Node] = {}

    def node_for(var: int) -> _Node:
        node = nodes.get(var)
        if node is None:
            node = _Node()
            nodes[var] = node
        return node

    deferred: list[tuple[_Node, tuple[str, ...]]] = []
    chosen_markers: list[tuple[int, ...]] = []
    for (mother, daughter, occ), alt_index in zip(sites, choice):
        constraints, markers = occ.alts[alt_index]
        chosen_markers.append(markers)
        mother_node = node_for(mother)
        daughter_node = node_for(daughter)

        def base(root: str) -> _Node:
            return mother_node if root == "^" else daughter_node

        for ann in constraints:
            if isinstance(ann, PathEq):
                left = _resolve_create(base(ann.left.root), ann.left.attrs)
                right = _resolve_create(base(ann.right.root), ann.right.attrs)
                if left is None or right is None or not _unify_nodes(left, right):
                    return None
            elif isinstance(ann, AtomEq):
                target = _resolve_create(base(ann.path.root), ann.path.attrs)
                if target is None:
                    return None
                atom = _Node()
                atom.kind = _ATOM
                atom.atom = ann.atom
                if not _unify_nodes(target, atom):
                    return None
            elif isinstance(ann, Membership):
                element = _resolve_create(base(ann.element.root), ann.element.attrs)
                target = _resolve_create(base(ann.target.root), ann.target.attrs)
                if element is None or target is None:
                    return None
                group = _make_set(target)
                if group is None:
                    return None
                group.members.append(element)  # type: ignore[union-attr]
            else:
                deferred.append((base(ann.path.root), ann.path.attrs))
    for node, attrs in deferred:
        if _resolve_peek(node, attrs) is not None:
            return None
    return FeatureStructure._from_node(node_for(0)), tuple(chosen_markers)


def parse_sentence(
    g: Grammar,
    tokens: list[str] | tuple[str, ...],
    cap: int = DEFAULT_CAP,
    test_case_id: str | None = None,
) -> ParseResult:
    """Parse one token sequence; readings carry usage multisets.

    Plain grammars yield empty usage multisets, instrumented grammars one
    count per marker per constituent instance.  At most ``cap`` readings
    are produced; ``truncated`` is set only if more exist.
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    comp = _compile(g)
    toks = tuple(tokens)
    missing = sorted({t for t in toks if t not in comp.lex})
    if missing:
        return ParseResult(
            tokens=toks,
            readings=(),
            parseable=False,
            truncated=False,
            diagnostics=tuple(f"unknown token: {t}" for t in missing),
            test_case_id=test_case_id,
        )
    passive, active = _saturate(comp, toks)
    readings: list[Reading] = []
    truncated = False
    root_key = (comp.start_symbol, 0, len(toks))
    if root_key in passive:
        for tree in _iter_trees(passive, active, root_key):
            attachments = _tree_attachments(tree)
            public = None
            for choice in itertools.product(*[range(len(occ.alts)) for _, _, occ in attachments]):
                solved = _solve(attachments, choice)
                if solved is None:
                    continue
                if len(readings) >= cap:
                    truncated = True
                    break
                fstruct, chosen = solved
                if public is None:
                    public = _public_tree(tree, toks)
                usage = dict(sorted(Counter(itertools.chain.from_iterable(chosen)).items()))
                readings.append(Reading(
                    tree=public,
                    fstruct=fstruct,
                    usage=usage,
                    choice_markers=chosen,
                ))
            if truncated:
                break
    return ParseResult(
        tokens=toks,
        readings=tuple(readings),
        parseable=bool(readings),
        truncated=truncated,
        test_case_id=test_case_id,
    )
