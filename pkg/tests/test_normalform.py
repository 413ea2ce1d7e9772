import random

from graphcount.bounds import variable_degrees
from graphcount.evaluate import EvalSession
from graphcount.formulas import classify_fragment, print_formula
from graphcount.graphs import enumerate_graphs, random_graph
from graphcount.normalform import is_simple, simple_form_violations, to_simple_form
from graphcount.parser import parse_formula

EVEN_DEGREE = "exists (y < ord) . (2*y = #(x2).(E(x1,x2) & x2 = x2))"
PHI1 = ("exists (x2) . (E(x1,x2) & "
        "#(x2).(E(x1,x2) & x2 = x2) < #(x1).(E(x2,x1) & x1 = x1))")


def _agree_on_all(lhs, rhs, max_n, labels=0):
    for n in range(max_n + 1):
        for g in enumerate_graphs(n, labels):
            sess = EvalSession(g)
            for v in g.vertices():
                if sess.formula(lhs, {"x1": v}) != sess.formula(rhs, {"x1": v}):
                    return False
    return True


def test_even_degree_simple_form_equivalent():
    f = parse_formula(EVEN_DEGREE)
    s = to_simple_form(f)
    assert is_simple(s)
    assert _agree_on_all(f, s, 4)


def test_phi1_simple_form_equivalent():
    f = parse_formula(PHI1)
    s = to_simple_form(f)
    assert is_simple(s)
    assert _agree_on_all(f, s, 4)


def test_already_simple_unchanged_modulo_renaming():
    f = parse_formula("exists (y1 < ord*ord) . (y1 = #(x2).(E(x1,x2) & x2 = x2))")
    s = to_simple_form(f)
    assert is_simple(s)
    # unchanged up to renaming of the bound variable
    assert print_formula(s) == print_formula(f).replace("y1", "y2")


def test_dependent_bound_gets_guard():
    f = parse_formula("exists (y < #(x2).(E(x1,x2) & x2 = x2)) . (y = y)")
    s = to_simple_form(f)
    assert is_simple(s)
    assert _agree_on_all(f, s, 4)


def test_fragment_preserved():
    for text in [EVEN_DEGREE, PHI1]:
        f = parse_formula(text)
        s = to_simple_form(f)
        before = classify_fragment(f)
        after = classify_fragment(s)
        assert before.is_MFOC == after.is_MFOC
        assert before.is_GFOC == after.is_GFOC


def test_violations_reported():
    f = parse_formula("1 <= #(x2).(E(x1,x2) & x2 = x2)")
    assert simple_form_violations(f)


def test_simple_binding_ranges():
    # during evaluation of a simple formula, every bound number variable
    # stays below n^deg
    f = parse_formula(PHI1)
    s = to_simple_form(f)
    degs = variable_degrees(s)
    rng = random.Random(5)
    for _ in range(5):
        g = random_graph(rng, 5)
        sess = EvalSession(g, trace_bindings=True, optimize=False)
        for v in g.vertices():
            sess.formula(s, {"x1": v})
        for var, seen in sess.binding_maxima.items():
            assert seen < g.n ** degs[var]
