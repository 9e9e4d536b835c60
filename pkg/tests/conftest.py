from __future__ import annotations

import pytest

from gramcov.analysis import UsageRecord
from gramcov.grammar import Grammar, parse_grammar
from gramcov.instrument import DisjunctInfo, instrument_grammar

# Toy grammar exercised throughout: an optional object plus iterated PP
# adjuncts whose annotation is itself disjunctive.  Its five disjuncts are
# D1 object-absent, D2 object-present, D3 no-PPs, D4 PP-as-OBL,
# D5 PP-as-adjunct.
G0_TEXT = """\
features: SUBJ OBJ OBL ADJUNCT PRED ;
start: S ;
rules:
  S  -> NP (^ SUBJ = !;) VP (^ = !;) .
  VP -> V (^ = !;) NP ? (^ OBJ = !;) PP * ({ ^ OBL = !; | ! in ^ ADJUNCT; }) .
  NP -> N (^ = !;) .
  PP -> P (^ = !;) NP (^ OBJ = !;) .
lexicon:
  John   N (^ PRED = John;) .
  wine   N (^ PRED = wine;) .
  table  N (^ PRED = table;) .
  drinks V (^ PRED = drink;) .
  on     P (^ PRED = on;) .
"""

# Variant with an iterated attributive adjective: noun phrases differing
# only in adjective count are equivalent but not strictly equivalent.
G_ADJ_TEXT = """\
features: SUBJ OBJ PRED MOD ;
start: S ;
rules:
  S  -> NP (^ SUBJ = !;) VP (^ = !;) .
  VP -> V (^ = !;) NP ? (^ OBJ = !;) .
  NP -> ADJ * (! in ^ MOD;) N (^ = !;) .
lexicon:
  John   N (^ PRED = John;) .
  wine   N (^ PRED = wine;) .
  good   ADJ (^ PRED = good;) .
  old    ADJ (^ PRED = old;) .
  drinks V (^ PRED = drink;) .
"""


@pytest.fixture(scope="session")
def g0() -> Grammar:
    return parse_grammar(G0_TEXT)


@pytest.fixture(scope="session")
def g0_instrumented(g0) -> tuple[Grammar, list[DisjunctInfo]]:
    return instrument_grammar(g0)


@pytest.fixture(scope="session")
def g_adj() -> Grammar:
    return parse_grammar(G_ADJ_TEXT)


def record(case_id: str, readings, intended: str = "ok", text: str = "",
           parseable: bool | None = None, truncated: bool = False) -> UsageRecord:
    """Shorthand for analysis tests: readings as a list of dicts."""
    return UsageRecord(
        test_case_id=case_id,
        text=text or case_id,
        intended=intended,
        parseable=bool(readings) if parseable is None else parseable,
        truncated=truncated,
        readings=tuple(dict(r) for r in readings),
    )


def inventory(n: int) -> list[DisjunctInfo]:
    """Synthetic inventory of n disjuncts for formula level tests."""
    return [
        DisjunctInfo(id=i, rule_lhs="R", kind="ps-branch", locus=f"r0.b{i}")
        for i in range(1, n + 1)
    ]
