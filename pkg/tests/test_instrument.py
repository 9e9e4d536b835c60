from __future__ import annotations

import pytest

from gramcov.grammar import GrammarError, parse_grammar, print_grammar
from gramcov.instrument import (
    KINDS,
    collect_marker_ids,
    enumerate_disjuncts,
    format_inventory,
    grammar_hash,
    instrument_grammar,
    is_instrumented,
    parse_inventory,
)


class TestNumbering:
    def test_g0_has_five_disjuncts(self, g0_instrumented):
        _, infos = g0_instrumented
        assert [info.id for info in infos] == [1, 2, 3, 4, 5]

    def test_g0_kinds(self, g0_instrumented):
        _, infos = g0_instrumented
        assert [info.kind for info in infos] == [
            "optionality-absent",
            "optionality-present",
            "iteration-zero",
            "annotation-branch",
            "annotation-branch",
        ]

    def test_g0_all_in_vp(self, g0_instrumented):
        _, infos = g0_instrumented
        assert {info.rule_lhs for info in infos} == {"VP"}

    def test_g0_loci(self, g0_instrumented):
        _, infos = g0_instrumented
        assert [info.locus for info in infos] == [
            "r1.i1.absent",
            "r1.i1.present",
            "r1.i2.zero",
            "r1.i2.a0.b0",
            "r1.i2.a0.b1",
        ]

    def test_kinds_are_declared(self, g0_instrumented):
        _, infos = g0_instrumented
        assert all(info.kind in KINDS for info in infos)

    def test_ps_branch_numbering_follows_text_order(self):
        g = parse_grammar(
            "rules:\n  S -> { A | B C ? } .\nlexicon:\n  a A .\n  b B .\n  c C .\n"
        )
        infos = enumerate_disjuncts(g)
        # First branch: its ps id.  Second branch: the nested optionality
        # ids come first, then the branch's own id.
        assert [(i.id, i.kind) for i in infos] == [
            (1, "ps-branch"),
            (2, "optionality-absent"),
            (3, "optionality-present"),
            (4, "ps-branch"),
        ]

    def test_iteration_some_only_without_annotation_disjunction(self):
        plain = parse_grammar("rules:\n  S -> A * (^X = !;) .\nlexicon:\n  a A .\n")
        kinds = [i.kind for i in enumerate_disjuncts(plain)]
        assert kinds == ["iteration-zero", "iteration-some"]
        disjunctive = parse_grammar(
            "rules:\n  S -> A * ({ ^X = !; | ^Y = !; }) .\nlexicon:\n  a A .\n"
        )
        kinds = [i.kind for i in enumerate_disjuncts(disjunctive)]
        assert kinds == ["iteration-zero", "annotation-branch", "annotation-branch"]

    def test_plus_gets_no_repetition_disjuncts(self):
        g = parse_grammar("rules:\n  S -> A + (^X = !;) .\nlexicon:\n  a A .\n")
        assert enumerate_disjuncts(g) == []

    def test_nested_annotation_disjunction_marks_every_branch(self):
        g = parse_grammar(
            "rules:\n  S -> A ({ ^X = a; | { ^Y = b; | ^Y = c; } }) .\nlexicon:\n  a A .\n"
        )
        infos = enumerate_disjuncts(g)
        assert [i.kind for i in infos] == ["annotation-branch"] * 4
        # Inner branches are numbered before the outer branch closing them.
        assert [i.locus for i in infos] == [
            "r0.i0.a0.b0",
            "r0.i0.a0.b1.a0.b0",
            "r0.i0.a0.b1.a0.b1",
            "r0.i0.a0.b1",
        ]


class TestRewriting:
    def test_g0_instrumented_text(self, g0_instrumented):
        instrumented, _ = g0_instrumented
        text = print_grammar(instrumented)
        for n in range(1, 6):
            assert f"@DISJUNCT-00{n};" in text
        assert (
            "VP -> V (^ = !;)"
            " { e (@DISJUNCT-001;) | NP (^OBJ = !; @DISJUNCT-002;) }"
            " { e (@DISJUNCT-003;) |"
            " PP + ({ ^OBL = !; @DISJUNCT-004; | ! in ^ADJUNCT; @DISJUNCT-005; }) } ."
        ) in text

    def test_untouched_rules_stay_identical(self, g0, g0_instrumented):
        instrumented, _ = g0_instrumented
        assert instrumented.rules[0] == g0.rules[0]  # S
        assert instrumented.rules[2] == g0.rules[2]  # NP
        assert instrumented.rules[3] == g0.rules[3]  # PP
        assert instrumented.lexicon == g0.lexicon

    def test_instrumented_output_reparses(self, g0_instrumented):
        instrumented, _ = g0_instrumented
        assert parse_grammar(print_grammar(instrumented)) == instrumented

    def test_already_instrumented_rejected(self, g0_instrumented):
        instrumented, _ = g0_instrumented
        with pytest.raises(GrammarError, match="already instrumented"):
            instrument_grammar(instrumented)

    def test_zero_disjunct_grammar(self):
        g = parse_grammar("rules:\n  S -> A B .\nlexicon:\n  a A .\n  b B .\n")
        instrumented, infos = instrument_grammar(g)
        assert infos == []
        assert instrumented == g

    def test_ps_branch_marker_placement(self):
        # Trailing rep-ONE element or e carries the marker; an iterated
        # trailing element forces a separate empty item.
        g = parse_grammar(
            "rules:\n  S -> { A | e | B * } .\nlexicon:\n  a A .\n  b B .\n"
        )
        instrumented, infos = instrument_grammar(g)
        text = print_grammar(instrumented)
        assert "A (@DISJUNCT-001;)" in text
        assert "e (@DISJUNCT-002;)" in text
        # The B* branch ends with its own e so the marker counts once per
        # branch use, not once per daughter.
        assert "} e (@DISJUNCT-005;)" in text
        assert [i.kind for i in infos] == [
            "ps-branch", "ps-branch",
            "iteration-zero", "iteration-some", "ps-branch",
        ]

    def test_determinism(self, g0):
        first = instrument_grammar(g0)
        second = instrument_grammar(g0)
        assert first == second


class TestIncludeLexicon:
    def test_entries_become_disjuncts(self, g0):
        _, infos = instrument_grammar(g0, include_lexicon=True)
        assert len(infos) == 10
        lexical = infos[5:]
        assert [i.kind for i in lexical] == ["ps-branch"] * 5
        assert [i.rule_lhs for i in lexical] == ["N", "N", "N", "V", "P"]
        assert [i.locus for i in lexical] == [f"lex{k}" for k in range(5)]

    def test_lexicon_markers_present(self, g0):
        instrumented, _ = instrument_grammar(g0, include_lexicon=True)
        text = print_grammar(instrumented)
        assert "John N (^PRED = John; @DISJUNCT-006;)" in text


class TestIntrospection:
    def test_is_instrumented(self, g0, g0_instrumented):
        instrumented, _ = g0_instrumented
        assert not is_instrumented(g0)
        assert is_instrumented(instrumented)

    def test_collect_marker_ids_matches_inventory(self, g0_instrumented):
        instrumented, infos = g0_instrumented
        assert collect_marker_ids(instrumented) == [info.id for info in infos]

    def test_grammar_hash_tracks_content(self, g0, g0_instrumented):
        instrumented, _ = g0_instrumented
        assert grammar_hash(g0) == grammar_hash(parse_grammar(print_grammar(g0)))
        assert grammar_hash(g0) != grammar_hash(instrumented)

    def test_inventory_round_trip(self, g0_instrumented):
        _, infos = g0_instrumented
        assert parse_inventory(format_inventory(infos)) == infos

    def test_inventory_rejects_garbage(self):
        with pytest.raises(GrammarError):
            parse_inventory("not a number\tVP\tps-branch\tr0\n")
