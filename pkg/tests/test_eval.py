import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphcount.evaluate import (EvalError, EvalSession, evaluate, is_prime, query_set,
                                 standard_registry)
from graphcount.formulas import (And, Compare, Count, Edge, ModRepr, Num, NumVar, Ord,
                                 print_formula)
from graphcount.graphs import (enumerate_graphs, make_complete_bipartite, make_cycle, make_graph,
                               random_graph)
from graphcount.parser import parse_formula, parse_term

DEG_X1 = "#(x2).(E(x1,x2) & x2 = x2)"
EVEN_DEGREE = "exists (y < ord) . (2*y = #(x2).(E(x1,x2) & x2 = x2))"
PHI1 = ("exists (x2) . (E(x1,x2) & "
        "#(x2).(E(x1,x2) & x2 = x2) < #(x1).(E(x2,x1) & x1 = x1))")


def test_degree_on_k23():
    g = make_complete_bipartite(2, 3)
    assert evaluate(g, parse_term(DEG_X1), {"x1": 0}) == 3
    assert evaluate(g, parse_term(DEG_X1), {"x1": 2}) == 2


def test_even_degree_on_c4():
    g = make_cycle(4)
    f = parse_formula(EVEN_DEGREE)
    assert all(evaluate(g, f, {"x1": v}) for v in g.vertices())


def test_even_degree_on_path():
    g = make_graph(3, [(0, 1), (1, 2)])
    f = parse_formula(EVEN_DEGREE)
    # endpoints have odd degree 1, the center has even degree 2
    assert [evaluate(g, f, {"x1": v}) for v in g.vertices()] == [False, True, False]


def test_phi1_selects_smaller_degree_side():
    # vertices with a larger-degree neighbour: on K_{2,3} the degree-2 side
    g = make_complete_bipartite(2, 3)
    assert query_set(g, parse_formula(PHI1)) == frozenset({2, 3, 4})


def test_phi1_on_balanced():
    g = make_complete_bipartite(3, 3)
    assert query_set(g, parse_formula(PHI1)) == frozenset()


def test_query_set_trivial():
    g = make_cycle(5)
    assert query_set(g, parse_formula("x1 = x1")) == frozenset(range(5))


def test_query_set_profile_errors():
    g = make_cycle(4)
    with pytest.raises(EvalError):
        query_set(g, parse_formula("E(x1,x2)"))
    with pytest.raises(EvalError):
        query_set(g, parse_formula("P1(x1) & y = y"))


def test_unbound_variable():
    g = make_cycle(4)
    with pytest.raises(EvalError):
        evaluate(g, parse_formula("P1(x1)"), {})


def test_builtins():
    g = make_cycle(4)
    assert evaluate(g, parse_formula("builtin bit(1, 6)"))
    assert not evaluate(g, parse_formula("builtin prime(1)"))
    assert evaluate(g, parse_formula("builtin prime(97)"))


def test_modrep_example():
    # bits 0..2 set below bound ord=4: (1+2+4) mod 5 = 2
    bit = Compare("<", NumVar("w"), Num(3))
    for r in range(5):
        f = ModRepr("w", bit, Ord(), Num(5), Num(r))
        g = make_cycle(4)
        assert evaluate(g, f) == (r == 2)


def test_modrep_modulus_zero():
    f = ModRepr("w", Compare("<", NumVar("w"), Num(1)), Ord(), Num(0), Num(0))
    with pytest.raises(EvalError):
        evaluate(make_cycle(3), f)


@given(st.integers(min_value=2, max_value=97), st.integers(min_value=0, max_value=300),
       st.integers(min_value=1, max_value=7))
@settings(max_examples=60, deadline=None)
def test_modrep_against_naive_oracle(p, mask_seed, bound_small):
    # bit i set iff bit(i, K) for a pseudo-random constant K
    rng = random.Random(mask_seed)
    bound = rng.randrange(1, 1 << bound_small)
    k = rng.randrange(1 << 14)
    bit = parse_formula(f"builtin bit(w, {k})")
    bit = ModRepr("w", bit, Num(bound), Num(p), NumVar("r"))
    naive = sum(1 << i for i in range(bound) if (k >> i) & 1) % p
    g = make_cycle(3)
    assert evaluate(g, bit, {"r": naive})
    assert not evaluate(g, bit, {"r": (naive + 1) % p})


def test_counting_deterministic():
    g = random_graph(random.Random(7), 8)
    f = parse_formula(PHI1)
    vals = [query_set(g, f) for _ in range(3)]
    assert vals[0] == vals[1] == vals[2]


def test_desugared_count_quant_agrees():
    lhs = parse_formula("exists^{>=2} x2 . (E(x1,x2) & x2 = x2)")
    rhs = parse_formula("2 <= #(x2).(E(x1,x2) & x2 = x2)")
    for n in range(1, 5):
        for g in enumerate_graphs(n, 0):
            sess = EvalSession(g)
            for v in g.vertices():
                assert sess.formula(lhs, {"x1": v}) == sess.formula(rhs, {"x1": v})


def test_optimizations_match_plain_enumeration():
    texts = [
        PHI1,
        EVEN_DEGREE,
        "exists (y1 < ord, y2 < ord) . (y1 = y2 & y2 = " + DEG_X1 + ")",
        "1 <= #(x2, y < ord).(E(x1,x2) & y < " + DEG_X1 + ")",
    ]
    rng = random.Random(3)
    for text in texts:
        f = parse_formula(text)
        for _ in range(6):
            g = random_graph(rng, 5)
            fast = EvalSession(g)
            slow = EvalSession(g, optimize=False)
            for v in g.vertices():
                assert fast.formula(f, {"x1": v}) == slow.formula(f, {"x1": v})


def test_prime_helper():
    assert [p for p in range(30) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert is_prime((1 << 61) - 1)
    assert not is_prime((1 << 67) - 1)


def test_count_with_dependent_bounds():
    # #(y1 < ord, y2 < y1).tt on a 4-vertex graph: sum_{y1<4} y1 = 6
    g = make_cycle(4)
    t = parse_term("#(y1 < ord, y2 < y1).(tt)")
    assert evaluate(g, t) == 6


def test_duplicate_builtin_rejected():
    reg = standard_registry()
    from graphcount.evaluate import Builtin
    with pytest.raises(EvalError):
        reg.register(Builtin("prime", 1, lambda n: True))
