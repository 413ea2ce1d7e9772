import random

import pytest

from corpus import EQ8, GUARDED_CHEAP, GUARDED_CORPUS, PHI1
from fractions import Fraction

from graphcount.evaluate import EvalSession
from graphcount.formulas import classify_fragment, print_formula
from graphcount.graphs import make_complete_bipartite, random_graph
from graphcount.parser import parse_formula
from graphcount.translate import (TranslationError, equivalence_check, find_good_prime,
                                  good_prime_check, good_prime_fraction, guarded_to_modal,
                                  relation_numbers, threshold_order, verify_hashing_claims)

EVEN_DEGREE = "exists (y < ord) . (2*y = #(x2).(E(x1,x2) & x2 = x2))"


def test_modal_input_no_wrapper():
    res = guarded_to_modal(parse_formula(EVEN_DEGREE))
    assert res.n0 == 2 and res.c == 0 and not res.steps
    assert classify_fragment(res.formula).is_MFOC
    assert equivalence_check(parse_formula(EVEN_DEGREE), res.formula, enum_max=4) is None


def test_phi1_diagnostics():
    res = guarded_to_modal(parse_formula(PHI1))
    assert classify_fragment(res.formula).is_MFOC
    assert len(res.steps) == 1
    step = res.steps[0]
    assert (step.q, step.k0, step.d) == (1, 1, 1)
    assert step.c == step.d * step.k0 + 3
    assert res.n0 >= 2


def test_sanity_c_lower_bound():
    for text, labels in GUARDED_CORPUS:
        res = guarded_to_modal(parse_formula(text))
        for step in res.steps:
            assert step.c >= step.d * step.k0 + 3


def test_rejects_unguarded():
    with pytest.raises(TranslationError):
        guarded_to_modal(parse_formula("exists (x3) . (E(x1,x3))"))
    with pytest.raises(TranslationError):
        guarded_to_modal(parse_formula("y = y"))


def test_threshold_order_monotone_inputs():
    assert threshold_order(1, 2) <= threshold_order(1, 3) <= threshold_order(1, 4)
    assert threshold_order(1, 3) <= threshold_order(2, 3)
    assert threshold_order(1, 2) >= 2


def test_relation_numbers_degree_fingerprint():
    # chi(x, y) := y = deg(x) encodes each vertex as 2^deg
    g = make_complete_bipartite(2, 3)
    chi = parse_formula("y = #(x2).(E(x1,x2) & x2 = x2)")
    numbers = relation_numbers(g, [(chi, ("y",))], d=1)
    assert numbers[(0, 0)] == 2 ** 3
    assert numbers[(0, 2)] == 2 ** 2


def test_good_prime_check_k23():
    g = make_complete_bipartite(2, 3)
    chi = parse_formula("y = #(x2).(E(x1,x2) & x2 = x2)")
    x_formulas = [(chi, ("y",))]
    # encodings are 8 and 4; both are 0 mod 2
    assert not good_prime_check(g, x_formulas, d=1, p=2)
    assert good_prime_check(g, x_formulas, d=1, p=5)


def test_good_prime_trivial_when_one_class():
    g = make_complete_bipartite(3, 3)
    chi = parse_formula("y = #(x2).(E(x1,x2) & x2 = x2)")
    for p in (2, 3, 5, 7):
        assert good_prime_check(g, [(chi, ("y",))], d=1, p=p)


def test_good_prime_fraction_majority():
    rng = random.Random(1)
    chi = parse_formula("y = #(x2).(E(x1,x2) & x2 = x2)")
    for _ in range(3):
        g = random_graph(rng, 8)
        frac = good_prime_fraction(g, [(chi, ("y",))], d=1, c=4)
        assert frac > Fraction(1, 2)


def test_phi1_claims_on_random_graphs():
    res = guarded_to_modal(parse_formula(PHI1))
    step = res.steps[0]
    rng = random.Random(0)
    for _ in range(2):
        g = random_graph(rng, res.n0)
        report = verify_hashing_claims(step, g, rng=rng, samples=4)
        assert report["all"], report


def test_cheap_corpus_claims():
    rng = random.Random(1)
    for text, labels in GUARDED_CHEAP:
        res = guarded_to_modal(parse_formula(text))
        step = res.steps[0]
        g = random_graph(rng, res.n0, labels)
        report = verify_hashing_claims(step, g, rng=rng, samples=4)
        assert report["all"], (text, report)


def test_full_phi_hat_agreement_cheap():
    # the whole hashed formula against the input on a graph of order n0
    text, labels = GUARDED_CHEAP[1]
    phi = parse_formula(text)
    res = guarded_to_modal(phi)
    assert res.n0 ** res.c <= 10 ** 7
    rng = random.Random(2)
    g = random_graph(rng, res.n0, labels)
    sess = EvalSession(g)
    for v in g.vertices():
        assert sess.formula(phi, {"x1": v}) == sess.formula(res.formula, {"x1": v})


def test_phi1_agrees_with_eq8():
    # the paper's hand-written modal form of the same query
    assert equivalence_check(parse_formula(PHI1), parse_formula(EQ8), enum_max=4) is None
