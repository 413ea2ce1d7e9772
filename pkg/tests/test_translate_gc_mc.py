import pytest

from corpus import GC_CORPUS
from graphcount.formulas import Not, classify_fragment
from graphcount.parser import parse_formula
from graphcount.translate import TranslationError, equivalence_check, gc_to_mc


def test_simple_guarded_example():
    f = parse_formula("exists^{>=1} x2 . (E(x1,x2) & P1(x1) & P1(x2))")
    out = gc_to_mc(f)
    assert classify_fragment(out).is_MC
    assert equivalence_check(f, out, enum_max=4, labels=1) is None


def test_already_modal_unchanged_semantics():
    f = parse_formula("exists^{>=2} x2 . (E(x1,x2) & P1(x2))")
    out = gc_to_mc(f)
    assert classify_fragment(out).is_MC
    assert equivalence_check(f, out, enum_max=4, labels=1) is None


def test_threshold_two_disjunction():
    f = parse_formula("exists^{>=2} x2 . (E(x1,x2) & (P1(x1) | P1(x2)))")
    out = gc_to_mc(f)
    assert classify_fragment(out).is_MC
    assert equivalence_check(f, out, enum_max=4, labels=1) is None


def test_rejects_non_gc():
    with pytest.raises(TranslationError):
        gc_to_mc(parse_formula("exists^{>=1} x2 . (P1(x2))"))
    with pytest.raises(TranslationError):
        gc_to_mc(parse_formula("exists (y < ord) . (y = y)"))


def test_counterexample_for_negation():
    f = parse_formula("exists^{>=1} x2 . (E(x1,x2) & P1(x2))")
    cex = equivalence_check(f, Not(f), enum_max=3, labels=1)
    assert cex is not None
    g = cex.graph
    assert 0 <= cex.assignment["x1"] < g.n


def test_free_number_vars_rejected():
    with pytest.raises(TranslationError):
        equivalence_check(parse_formula("y = y"), parse_formula("tt"), enum_max=2)


@pytest.mark.parametrize("text,labels", GC_CORPUS)
def test_corpus_translates_and_agrees(text, labels):
    f = parse_formula(text)
    assert classify_fragment(f).is_GC
    out = gc_to_mc(f)
    assert classify_fragment(out).is_MC
    assert equivalence_check(f, out, enum_max=3, labels=labels) is None
