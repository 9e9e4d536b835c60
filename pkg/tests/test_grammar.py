from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gramcov.grammar import (
    AnnDisjunction,
    AtomEq,
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
    Rule,
    format_marker,
    parse_grammar,
    print_grammar,
    validate,
)

from conftest import G0_TEXT


class TestParsing:
    def test_g0_sections(self, g0):
        assert g0.start_symbol == "S"
        assert g0.declared_functions == ("SUBJ", "OBJ", "OBL", "ADJUNCT", "PRED")
        assert [r.lhs for r in g0.rules] == ["S", "VP", "NP", "PP"]
        assert [e.surface for e in g0.lexicon] == ["John", "wine", "table", "drinks", "on"]

    def test_vp_rule_structure(self, g0):
        vp = g0.rules[1].rhs
        assert isinstance(vp[0], Element) and vp[0].repetition is Repetition.ONE
        assert isinstance(vp[1], Element) and vp[1].repetition is Repetition.OPTIONAL
        assert vp[1].category == "NP"
        pp = vp[2]
        assert isinstance(pp, Element) and pp.repetition is Repetition.STAR
        (disj,) = pp.annotations
        assert isinstance(disj, AnnDisjunction) and len(disj.branches) == 2
        assert disj.branches[0] == (PathEq(Path("^", ("OBL",)), Path("!")),)
        assert disj.branches[1] == (Membership(Path("!"), Path("^", ("ADJUNCT",))),)

    def test_comments_ignored(self):
        g = parse_grammar(
            'rules:\n  S -> "the subject" NP () . # trailing\n'
            "lexicon:\n  a NP . # entry\n"
        )
        assert g.rules[0].rhs == (Element(category="NP", annotations=()),)

    def test_default_start_is_first_rule_lhs(self):
        g = parse_grammar("rules:\n  Top -> A () .\n  A -> B () .\nlexicon:\n  b B .\n")
        assert g.start_symbol == "Top"

    def test_duplicate_lhs_merges_into_disjunction(self):
        g = parse_grammar("rules:\n  A -> B .\n  A -> C D .\nlexicon:\n  x B .\n")
        (item,) = g.rules[0].rhs
        assert isinstance(item, Disjunction)
        assert item.branches == (
            (Element(category="B"),),
            (Element(category="C"), Element(category="D")),
        )

    def test_annotation_forms(self):
        g = parse_grammar(
            "rules:\n"
            "  S -> A (^OBJ = !; ! CASE = dat; ! in ^ADJ; ~^COMP;"
            " { ^X = !; | { !Y = a; | !Y = b; } }) .\n"
            "lexicon:\n  a A .\n"
        )
        anns = g.rules[0].rhs[0].annotations
        assert anns[0] == PathEq(Path("^", ("OBJ",)), Path("!"))
        assert anns[1] == AtomEq(Path("!", ("CASE",)), "dat")
        assert anns[2] == Membership(Path("!"), Path("^", ("ADJ",)))
        assert anns[3] == NonExistence(Path("^", ("COMP",)))
        outer = anns[4]
        assert isinstance(outer, AnnDisjunction)
        assert isinstance(outer.branches[1][0], AnnDisjunction)

    def test_marker_annotation(self):
        g = parse_grammar("rules:\n  S -> A (@DISJUNCT-007;) .\nlexicon:\n  a A .\n")
        assert g.rules[0].rhs[0].annotations == (Marker(disjunct_id=7),)

    def test_multi_attribute_path(self):
        g = parse_grammar("rules:\n  S -> A (^OBJ CASE = dat;) .\nlexicon:\n  a A .\n")
        assert g.rules[0].rhs[0].annotations[0].path == Path("^", ("OBJ", "CASE"))

    @pytest.mark.parametrize("source, fragment", [
        ("rules:\n  S -> A () \n", "expected"),
        ("rules:\n  S -> .\n", "empty RHS"),
        ("grammar:\n  x ;\n", "unknown section"),
        ("start: S ;\nstart: S ;\n", "duplicate section"),
        ("rules:\n  S -> { } .\n", "empty disjunction branch"),
        ("rules:\n  S -> A ({ | ^X = !; }) .\n", "empty annotation branch"),
        ("rules:\n  e -> A .\n", "reserved"),
        ("rules:\n  S -> in .\n", "reserved"),
        ("rules:\n  S -> A (^X = e;) .\n", "reserved"),
        ("rules:\n  S -> A (@BRANCH-1;) .\n", "malformed marker"),
        ('rules:\n  S -> A ("unclosed .\n', "unterminated comment"),
        ("start: S ;\n", "no rule"),
        ("features: X ;\n", "no start symbol and no rules"),
        ("lexicon:\n  a A (!X = b;) .\nrules:\n  S -> A .\n", "! path"),
    ])
    def test_errors(self, source, fragment):
        with pytest.raises(GrammarError, match=fragment):
            parse_grammar(source)

    def test_error_carries_position(self):
        with pytest.raises(GrammarError) as err:
            parse_grammar("rules:\n  S -> .\n")
        assert err.value.line == 2


class TestPrinting:
    def test_g0_round_trip(self, g0):
        assert parse_grammar(print_grammar(g0)) == g0

    def test_printing_is_canonical(self, g0):
        once = print_grammar(g0)
        assert print_grammar(parse_grammar(once)) == once

    def test_marker_format_zero_pads(self):
        assert format_marker(1) == "@DISJUNCT-001"
        assert format_marker(42) == "@DISJUNCT-042"
        assert format_marker(1000) == "@DISJUNCT-1000"

    def test_marker_format_round_trips(self):
        for disjunct_id in (1, 99, 1000):
            g = parse_grammar(
                f"rules:\n  S -> A ({format_marker(disjunct_id)};) .\nlexicon:\n  a A .\n"
            )
            assert g.rules[0].rhs[0].annotations == (Marker(disjunct_id=disjunct_id),)


# ----------------------------------------------------- random grammar ASTs

_CATS = st.sampled_from(["A", "B", "C", "XP"])
_ATTRS = st.sampled_from(["SUBJ", "OBJ", "MOD", "CASE"])
_ATOMS = st.sampled_from(["dat", "acc", "sg"])


def _paths(roots: tuple[str, ...] = ("^", "!")) -> st.SearchStrategy[Path]:
    return st.builds(
        Path,
        root=st.sampled_from(roots),
        attrs=st.lists(_ATTRS, max_size=2).map(tuple),
    )


def _constraints(roots: tuple[str, ...] = ("^", "!")) -> st.SearchStrategy:
    path = _paths(roots)
    return st.one_of(
        st.builds(PathEq, left=path, right=path),
        st.builds(AtomEq, path=path, atom=_ATOMS),
        st.builds(Membership, element=path, target=path),
        st.builds(NonExistence, path=path),
    )


def _annotations(roots: tuple[str, ...] = ("^", "!")) -> st.SearchStrategy:
    return st.recursive(
        _constraints(roots),
        lambda inner: st.builds(
            AnnDisjunction,
            branches=st.lists(
                st.lists(inner, min_size=1, max_size=2).map(tuple),
                min_size=2, max_size=2,
            ).map(tuple),
        ),
        max_leaves=4,
    )


_ANN_GROUPS = st.lists(_annotations(), max_size=2).map(tuple)

_ELEMENTS = st.builds(
    Element,
    category=_CATS,
    repetition=st.sampled_from(list(Repetition)),
    annotations=_ANN_GROUPS,
)

_ITEMS = st.recursive(
    st.one_of(_ELEMENTS, st.builds(Empty, annotations=_ANN_GROUPS)),
    lambda inner: st.builds(
        Disjunction,
        branches=st.lists(
            st.lists(inner, min_size=1, max_size=2).map(tuple),
            min_size=2, max_size=2,
        ).map(tuple),
    ),
    max_leaves=4,
)


@st.composite
def _grammars(draw) -> Grammar:
    lhs_names = draw(st.lists(_CATS, min_size=1, max_size=3, unique=True))
    rules = tuple(
        Rule(lhs=lhs, rhs=tuple(draw(st.lists(_ITEMS, min_size=1, max_size=3))))
        for lhs in lhs_names
    )
    lexicon = tuple(
        LexEntry(surface=surface, category=draw(_CATS),
                 annotations=draw(st.lists(_annotations(roots=("^",)), max_size=2).map(tuple)))
        for surface in draw(st.lists(st.sampled_from(["la", "li", "lu"]),
                                     max_size=3, unique=True))
    )
    return Grammar(
        start_symbol=draw(st.sampled_from(lhs_names)),
        declared_functions=tuple(draw(st.lists(_ATTRS, max_size=4, unique=True))),
        rules=rules,
        lexicon=lexicon,
    )


class TestRoundTripProperty:
    @settings(max_examples=150, deadline=None)
    @given(_grammars())
    def test_print_parse_round_trip(self, g: Grammar):
        assert parse_grammar(print_grammar(g)) == g


class TestValidate:
    def test_clean_grammar_has_no_diagnostics(self, g0):
        assert validate(g0) == []

    def test_undeclared_function_reported_per_occurrence(self):
        g = parse_grammar(
            "features: SUBJ ;\nrules:\n  S -> A (^OBJ = !; !OBJ CASE = dat;) .\n"
            "lexicon:\n  a A .\n"
        )
        kinds = [d.kind for d in validate(g)]
        assert kinds.count("undeclared-function") == 3  # OBJ, OBJ, CASE

    def test_undefined_category(self):
        g = parse_grammar("rules:\n  S -> A B .\nlexicon:\n  a A .\n")
        diags = [d for d in validate(g) if d.kind == "undefined-category"]
        assert len(diags) == 1
        assert "B" in diags[0].message and diags[0].context == "rule S"

    def test_unreachable_rule(self):
        g = parse_grammar(
            "start: S ;\nrules:\n  S -> A .\n  Z -> A .\nlexicon:\n  a A .\n"
        )
        diags = [d for d in validate(g) if d.kind == "unreachable-rule"]
        assert [d.context for d in diags] == ["rule Z"]

    def test_lexicon_annotations_checked(self):
        g = parse_grammar(
            "features: PRED ;\nrules:\n  S -> A .\nlexicon:\n  a A (^LEMMA = a;) .\n"
        )
        diags = validate(g)
        assert [d.kind for d in diags] == ["undeclared-function"]
        assert diags[0].context == "lexicon entry 'a'"


def test_g0_text_matches_fixture(g0):
    assert parse_grammar(G0_TEXT) == g0
