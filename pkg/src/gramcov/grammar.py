"""Grammar representation, text format, and static checks.

A grammar file has up to four sections, in any order, each at most once::

    features: OBJ OBL ADJUNCT SUBJ ;
    start: S ;
    rules:
      S  -> NP (^SUBJ = !;) VP (^ = !;) .
      VP -> V (^ = !;) NP ? (^OBJ = !;) PP * ({ ^OBL = !; | ! in ^ADJUNCT; }) .
    lexicon:
      John  N () .
      drinks V () .

Rule items are a category with an optional repetition operator (``?`` ``*``
``+``) and a parenthesised annotation group, an explicit disjunction
``{ ITEMS | ITEMS }`` over item sequences, or the empty item ``e``.
Annotations are path equations (``^OBJ = !``, ``!CASE = dat``), set
membership (``! in ^ADJUNCT``), negated existence (``~^OBJ``), nested
annotation disjunctions ``{ ANNS | ANNS }``, and usage markers
``@DISJUNCT-001``.  Paths start at the mother (``^``) or the daughter
(``!``) and name attributes left to right (``^OBJ CASE``).

Comments run from ``#`` to end of line, or sit between double quotes.
The words ``e`` and ``in`` are reserved.  Attribute vocabulary is closed:
every attribute used in a path should be declared under ``features:``;
offenders are reported by :func:`validate` as warnings, not errors.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class GrammarError(ValueError):
    """Raised for unreadable or structurally broken grammars."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)
        self.line = line
        self.col = col


class Repetition(enum.Enum):
    ONE = ""
    OPTIONAL = "?"
    STAR = "*"
    PLUS = "+"


@dataclass(frozen=True)
class Path:
    """Attribute path rooted at the mother (^) or daughter (!) structure."""

    root: str
    attrs: tuple[str, ...] = ()


@dataclass(frozen=True)
class PathEq:
    left: Path
    right: Path


@dataclass(frozen=True)
class AtomEq:
    path: Path
    atom: str


@dataclass(frozen=True)
class Membership:
    element: Path
    target: Path


@dataclass(frozen=True)
class NonExistence:
    path: Path


@dataclass(frozen=True)
class Marker:
    """Identifies one disjunct; collected per reading, never constrains."""

    disjunct_id: int


@dataclass(frozen=True)
class AnnDisjunction:
    branches: tuple[tuple[Annotation, ...], ...]


Annotation = PathEq | AtomEq | Membership | NonExistence | Marker | AnnDisjunction


@dataclass(frozen=True)
class Element:
    category: str
    repetition: Repetition = Repetition.ONE
    annotations: tuple[Annotation, ...] = ()


@dataclass(frozen=True)
class Disjunction:
    branches: tuple[tuple[RhsItem, ...], ...]


@dataclass(frozen=True)
class Empty:
    """The empty item ``e``; carries only annotations (possibly a marker)."""

    annotations: tuple[Annotation, ...] = ()


RhsItem = Element | Disjunction | Empty


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: tuple[RhsItem, ...]


@dataclass(frozen=True)
class LexEntry:
    surface: str
    category: str
    annotations: tuple[Annotation, ...] = ()


@dataclass(frozen=True)
class Grammar:
    start_symbol: str
    declared_functions: tuple[str, ...] = ()
    rules: tuple[Rule, ...] = ()
    lexicon: tuple[LexEntry, ...] = ()


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str
    context: str = ""


_RESERVED = frozenset({"e", "in"})
_SECTIONS = ("features", "start", "rules", "lexicon")


# ---------------------------------------------------------------- tokenizer

@dataclass(frozen=True)
class _Tok:
    kind: str
    value: str
    line: int
    col: int


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch in "_'"


def _tokenize_source(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i, col = i + 1, col + 1
            while i < n and text[i] != '"':
                if text[i] == "\n":
                    line, col = line + 1, 0
                i, col = i + 1, col + 1
            if i >= n:
                raise GrammarError("unterminated comment", start_line, start_col)
            i, col = i + 1, col + 1
            continue
        if ch == "-" and text[i : i + 2] == "->":
            toks.append(_Tok("->", "->", line, col))
            i, col = i + 2, col + 2
            continue
        if _is_ident_char(ch):
            start, start_col = i, col
            while i < n:
                c = text[i]
                if _is_ident_char(c):
                    i, col = i + 1, col + 1
                elif c == "-" and i + 1 < n and _is_ident_char(text[i + 1]):
                    i, col = i + 1, col + 1
                else:
                    break
            toks.append(_Tok("ident", text[start:i], line, start_col))
            continue
        if ch in ".(){}|=;?*+~^!@:":
            toks.append(_Tok(ch, ch, line, col))
            i, col = i + 1, col + 1
            continue
        raise GrammarError(f"unexpected character {ch!r}", line, col)
    toks.append(_Tok("eof", "", line, col))
    return toks


# ------------------------------------------------------------------- parser

class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize_source(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> _Tok:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> _Tok:
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> _Tok:
        tok = self.next()
        if tok.kind != kind:
            raise GrammarError(f"expected {kind!r}, found {tok.value!r}", tok.line, tok.col)
        return tok

    def fail(self, message: str) -> GrammarError:
        tok = self.peek()
        return GrammarError(message + f", found {tok.value or 'end of file'!r}", tok.line, tok.col)

    def at_section(self) -> bool:
        return self.peek().kind == "ident" and self.peek(1).kind == ":"

    def parse(self) -> Grammar:
        features: tuple[str, ...] = ()
        start: str | None = None
        rules: list[Rule] = []
        lexicon: list[LexEntry] = []
        seen: set[str] = set()
        while self.peek().kind != "eof":
            if not self.at_section():
                raise self.fail("expected a section header")
            tok = self.next()
            self.expect(":")
            name = tok.value
            if name not in _SECTIONS:
                raise GrammarError(f"unknown section {name!r}", tok.line, tok.col)
            if name in seen:
                raise GrammarError(f"duplicate section {name!r}", tok.line, tok.col)
            seen.add(name)
            if name == "features":
                features = self._parse_features()
            elif name == "start":
                start = self.expect("ident").value
                self.expect(";")
            elif name == "rules":
                rules = self._parse_rules()
            else:
                lexicon = self._parse_lexicon()
        merged = _merge_duplicate_lhs(rules)
        if start is None:
            if not merged:
                raise GrammarError("grammar declares no start symbol and no rules")
            start = merged[0].lhs
        if all(r.lhs != start for r in merged):
            raise GrammarError(f"start symbol {start!r} has no rule")
        return Grammar(
            start_symbol=start,
            declared_functions=features,
            rules=tuple(merged),
            lexicon=tuple(lexicon),
        )

    def _parse_features(self) -> tuple[str, ...]:
        names: list[str] = []
        while self.peek().kind == "ident":
            names.append(self.next().value)
        self.expect(";")
        if len(set(names)) != len(names):
            raise self.fail("duplicate feature declaration")
        return tuple(names)

    def _parse_rules(self) -> list[Rule]:
        rules: list[Rule] = []
        while self.peek().kind == "ident" and not self.at_section():
            lhs_tok = self.next()
            if lhs_tok.value in _RESERVED:
                raise GrammarError(f"{lhs_tok.value!r} is reserved", lhs_tok.line, lhs_tok.col)
            self.expect("->")
            items = self._parse_item_seq(stop=".")
            dot = self.expect(".")
            if not items:
                raise GrammarError(f"empty RHS in rule for {lhs_tok.value!r}", dot.line, dot.col)
            rules.append(Rule(lhs=lhs_tok.value, rhs=tuple(items)))
        return rules

    def _parse_lexicon(self) -> list[LexEntry]:
        entries: list[LexEntry] = []
        while self.peek().kind == "ident" and not self.at_section():
            surface_tok = self.next()
            cat_tok = self.expect("ident")
            if cat_tok.value in _RESERVED:
                raise GrammarError(f"{cat_tok.value!r} is reserved", cat_tok.line, cat_tok.col)
            anns = self._parse_ann_group() if self.peek().kind == "(" else ()
            self.expect(".")
            for ann in _iter_annotations(anns):
                for path in _annotation_paths(ann):
                    if path.root != "^":
                        raise GrammarError(
                            f"lexicon entry {surface_tok.value!r} uses a ! path; "
                            "entry annotations describe only the entry's own structure",
                            surface_tok.line, surface_tok.col,
                        )
            entries.append(LexEntry(
                surface=surface_tok.value, category=cat_tok.value, annotations=anns,
            ))
        return entries

    def _parse_item_seq(self, stop: str) -> list[RhsItem]:
        items: list[RhsItem] = []
        while True:
            kind = self.peek().kind
            if kind == stop or kind in ("|", "}"):
                return items
            if kind == "eof":
                raise self.fail(f"expected {stop!r}")
            items.append(self._parse_item())

    def _parse_item(self) -> RhsItem:
        tok = self.peek()
        if tok.kind == "{":
            self.next()
            branches: list[tuple[RhsItem, ...]] = []
            while True:
                seq = self._parse_item_seq(stop="}")
                if not seq:
                    raise self.fail("empty disjunction branch (write e)")
                branches.append(tuple(seq))
                if self.peek().kind == "|":
                    self.next()
                    continue
                self.expect("}")
                return Disjunction(branches=tuple(branches))
        if tok.kind != "ident":
            raise self.fail("expected a category, disjunction, or e")
        self.next()
        if tok.value == "e":
            anns = self._parse_ann_group() if self.peek().kind == "(" else ()
            return Empty(annotations=anns)
        if tok.value in _RESERVED:
            raise GrammarError(f"{tok.value!r} is reserved", tok.line, tok.col)
        rep = Repetition.ONE
        if self.peek().kind in ("?", "*", "+"):
            rep = Repetition(self.next().kind)
        anns = self._parse_ann_group() if self.peek().kind == "(" else ()
        return Element(category=tok.value, repetition=rep, annotations=anns)

    def _parse_ann_group(self) -> tuple[Annotation, ...]:
        self.expect("(")
        anns = self._parse_ann_seq(stop=")")
        self.expect(")")
        return anns

    def _parse_ann_seq(self, stop: str) -> tuple[Annotation, ...]:
        anns: list[Annotation] = []
        while True:
            kind = self.peek().kind
            if kind == stop or kind in ("|", "}"):
                return tuple(anns)
            if kind == "eof":
                raise self.fail(f"expected {stop!r}")
            anns.append(self._parse_annotation())

    def _parse_annotation(self) -> Annotation:
        tok = self.peek()
        if tok.kind == "@":
            self.next()
            name = self.expect("ident").value
            self.expect(";")
            prefix, _, digits = name.partition("-")
            if prefix != "DISJUNCT" or not digits.isdigit():
                raise GrammarError(f"malformed marker @{name}", tok.line, tok.col)
            return Marker(disjunct_id=int(digits))
        if tok.kind == "{":
            self.next()
            branches: list[tuple[Annotation, ...]] = []
            while True:
                seq = self._parse_ann_seq(stop="}")
                if not seq:
                    raise self.fail("empty annotation branch")
                branches.append(seq)
                if self.peek().kind == "|":
                    self.next()
                    continue
                self.expect("}")
                if self.peek().kind == ";":
                    self.next()
                return AnnDisjunction(branches=tuple(branches))
        if tok.kind == "~":
            self.next()
            path = self._parse_path()
            self.expect(";")
            return NonExistence(path=path)
        if tok.kind in ("^", "!"):
            left = self._parse_path()
            op = self.next()
            if op.kind == "=":
                ann = self._parse_eq_rhs(left)
            elif op.kind == "ident" and op.value == "in":
                ann = Membership(element=left, target=self._parse_path())
            else:
                raise GrammarError("expected '=' or 'in' after path", op.line, op.col)
            self.expect(";")
            return ann
        raise self.fail("expected an annotation")

    def _parse_eq_rhs(self, left: Path) -> Annotation:
        tok = self.peek()
        if tok.kind in ("^", "!"):
            return PathEq(left=left, right=self._parse_path())
        if tok.kind == "ident":
            if tok.value in _RESERVED:
                raise GrammarError(f"{tok.value!r} is reserved", tok.line, tok.col)
            self.next()
            return AtomEq(path=left, atom=tok.value)
        raise self.fail("expected a path or atom after '='")

    def _parse_path(self) -> Path:
        root = self.next()
        attrs: list[str] = []
        while self.peek().kind == "ident" and self.peek().value not in _RESERVED:
            attrs.append(self.next().value)
        return Path(root=root.kind, attrs=tuple(attrs))


def _merge_duplicate_lhs(rules: list[Rule]) -> list[Rule]:
    # A repeated LHS contributes one more branch to a single top-level
    # disjunction, keeping the position of the first occurrence.
    by_lhs: dict[str, list[tuple[RhsItem, ...]]] = {}
    for rule in rules:
        by_lhs.setdefault(rule.lhs, []).append(rule.rhs)
    merged: list[Rule] = []
    for lhs, bodies in by_lhs.items():
        if len(bodies) == 1:
            merged.append(Rule(lhs=lhs, rhs=bodies[0]))
        else:
            merged.append(Rule(lhs=lhs, rhs=(Disjunction(branches=tuple(bodies)),)))
    return merged


def parse_grammar(text: str) -> Grammar:
    """Parse grammar source text; raises GrammarError with position info."""
    return _Parser(text).parse()


# ------------------------------------------------------------------ printer

def _format_path(path: Path) -> str:
    return path.root + " ".join(path.attrs)


def format_marker(disjunct_id: int) -> str:
    return f"@DISJUNCT-{disjunct_id:03d}"


def _format_annotation(ann: Annotation) -> str:
    if isinstance(ann, PathEq):
        return f"{_format_path(ann.left)} = {_format_path(ann.right)};"
    if isinstance(ann, AtomEq):
        return f"{_format_path(ann.path)} = {ann.atom};"
    if isinstance(ann, Membership):
        return f"{_format_path(ann.element)} in {_format_path(ann.target)};"
    if isinstance(ann, NonExistence):
        return f"~{_format_path(ann.path)};"
    if isinstance(ann, Marker):
        return format_marker(ann.disjunct_id) + ";"
    if isinstance(ann, AnnDisjunction):
        inner = " | ".join(_format_anns(branch) for branch in ann.branches)
        return "{ " + inner + " }"
    raise TypeError(f"not an annotation: {ann!r}")


def _format_anns(anns: tuple[Annotation, ...]) -> str:
    return " ".join(_format_annotation(a) for a in anns)


def _format_item(item: RhsItem) -> str:
    if isinstance(item, Element):
        rep = f" {item.repetition.value}" if item.repetition is not Repetition.ONE else ""
        return f"{item.category}{rep} ({_format_anns(item.annotations)})"
    if isinstance(item, Empty):
        if item.annotations:
            return f"e ({_format_anns(item.annotations)})"
        return "e"
    if isinstance(item, Disjunction):
        inner = " | ".join(" ".join(_format_item(i) for i in branch) for branch in item.branches)
        return "{ " + inner + " }"
    raise TypeError(f"not an RHS item: {item!r}")


def print_grammar(g: Grammar) -> str:
    """Render a grammar to its canonical text form (re-parses identically)."""
    lines: list[str] = []
    if g.declared_functions:
        lines.append("features: " + " ".join(g.declared_functions) + " ;")
    lines.append(f"start: {g.start_symbol} ;")
    if g.rules:
        lines.append("rules:")
        for rule in g.rules:
            body = " ".join(_format_item(item) for item in rule.rhs)
            lines.append(f"  {rule.lhs} -> {body} .")
    if g.lexicon:
        lines.append("lexicon:")
        for entry in g.lexicon:
            lines.append(f"  {entry.surface} {entry.category} ({_format_anns(entry.annotations)}) .")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- validate

def _iter_annotations(anns: tuple[Annotation, ...]):
    for ann in anns:
        if isinstance(ann, AnnDisjunction):
            for branch in ann.branches:
                yield from _iter_annotations(branch)
        else:
            yield ann


def _iter_elements(items: tuple[RhsItem, ...]):
    for item in items:
        if isinstance(item, Element):
            yield item
        elif isinstance(item, Disjunction):
            for branch in item.branches:
                yield from _iter_elements(branch)


def _item_annotations(items: tuple[RhsItem, ...]):
    for item in items:
        if isinstance(item, (Element, Empty)):
            yield from _iter_annotations(item.annotations)
        else:
            for branch in item.branches:
                yield from _item_annotations(branch)


def _annotation_paths(ann: Annotation):
    if isinstance(ann, PathEq):
        yield ann.left
        yield ann.right
    elif isinstance(ann, AtomEq):
        yield ann.path
    elif isinstance(ann, Membership):
        yield ann.element
        yield ann.target
    elif isinstance(ann, NonExistence):
        yield ann.path


def validate(g: Grammar) -> list[Diagnostic]:
    """Static checks; returns warnings only, never blocks processing.

    Reported kinds: ``undeclared-function`` (a path uses an attribute
    missing from ``features:``), ``undefined-category`` (an RHS category
    that no rule defines and no lexicon entry provides), and
    ``unreachable-rule`` (a rule the start symbol never reaches).
    """
    diags: list[Diagnostic] = []
    declared = set(g.declared_functions)

    def check_anns(anns, context: str) -> None:
        for ann in _iter_annotations(anns):
            for path in _annotation_paths(ann):
                for attr in path.attrs:
                    if attr not in declared:
                        diags.append(Diagnostic(
                            kind="undeclared-function",
                            message=f"attribute {attr!r} is not declared under features:",
                            context=context,
                        ))

    defined = {r.lhs for r in g.rules} | {e.category for e in g.lexicon}
    for rule in g.rules:
        check_anns(tuple(_item_annotations(rule.rhs)), f"rule {rule.lhs}")
        seen_here: set[str] = set()
        for elem in _iter_elements(rule.rhs):
            if elem.category not in defined and elem.category not in seen_here:
                seen_here.add(elem.category)
                diags.append(Diagnostic(
                    kind="undefined-category",
                    message=f"category {elem.category!r} has no rule and no lexicon entry",
                    context=f"rule {rule.lhs}",
                ))
    for entry in g.lexicon:
        check_anns(entry.annotations, f"lexicon entry {entry.surface!r}")

    reachable: set[str] = set()
    frontier = [g.start_symbol]
    rules_by_lhs = {r.lhs: r for r in g.rules}
    while frontier:
        cat = frontier.pop()
        if cat in reachable:
            continue
        reachable.add(cat)
        rule = rules_by_lhs.get(cat)
        if rule is not None:
            for elem in _iter_elements(rule.rhs):
                frontier.append(elem.category)
    for rule in g.rules:
        if rule.lhs not in reachable:
            diags.append(Diagnostic(
                kind="unreachable-rule",
                message=f"rule {rule.lhs!r} is not reachable from {g.start_symbol!r}",
                context=f"rule {rule.lhs}",
            ))
    return diags
