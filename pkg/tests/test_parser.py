import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphcount.formulas import (Add, And, BoolConst, BuiltinRel, Compare, Count, CountQuant,
                                 Edge, Exists, Label, ModRepr, Mul, Not, Num, NumVar, Or, Ord,
                                 VertexEq, print_formula, print_term, swap_vertex_variables)
from graphcount.parser import ParseError, parse_formula, parse_term

DEG_X1 = "#(x2).(E(x1,x2) & x2 = x2)"
EVEN_DEGREE = f"exists (y < ord) . (2*y = {DEG_X1})"
PHI1 = ("exists (x2) . (E(x1,x2) & "
        "#(x2).(E(x1,x2) & x2 = x2) < #(x1).(E(x2,x1) & x1 = x1))")


def test_parse_degree_term():
    t = parse_term(DEG_X1)
    assert t == Count(("x2",), (), And(Edge("x1", "x2"), VertexEq("x2", "x2")))


def test_parse_even_degree():
    f = parse_formula(EVEN_DEGREE)
    assert isinstance(f, Exists)
    assert f.binders == (("y", Ord()),)
    body = f.body
    assert isinstance(body, Compare) and body.op == "="
    assert body.left == Mul(Num(2), NumVar("y"))


def test_parse_self_loop_atom_rejected():
    with pytest.raises(ParseError):
        parse_formula("E(x1,x1)")


def test_parse_error_location():
    with pytest.raises(ParseError) as err:
        parse_formula("E(x1, x2) &")
    assert "line 1" in str(err.value)


def test_two_var_fragment_rejects_x3():
    parse_formula("exists (x3) . (E(x1,x3))")
    with pytest.raises(ParseError):
        parse_formula("exists (x3) . (E(x1,x3))", two_var_fragment=True)


def test_precedence_and_or_not():
    f = parse_formula("!P1(x1) & P2(x1) | P1(x1)")
    assert isinstance(f, Or)
    assert isinstance(f.left, And)
    assert isinstance(f.left.left, Not)


def test_counting_binds_tighter_than_comparison():
    f = parse_formula("1 <= #(x2).(E(x1,x2)) & tt")
    assert isinstance(f, And)
    assert isinstance(f.left, Compare)


def test_count_quant_parse():
    f = parse_formula("exists^{>=2} x2 . (E(x1,x2) & P1(x2))")
    assert f == CountQuant(2, "x2", And(Edge("x1", "x2"), Label(1, "x2")))


def test_builtin_parse():
    f = parse_formula("builtin prime(z)")
    assert f == BuiltinRel("prime", (NumVar("z"),))


def test_modrep_roundtrip():
    f = ModRepr("w", Compare("<", NumVar("w"), Num(3)), Ord(), Num(5), NumVar("r"))
    assert parse_formula(print_formula(f)) == f


def test_trailing_input():
    with pytest.raises(ParseError):
        parse_formula("tt tt")


@pytest.mark.parametrize("text", [
    DEG_X1 + " = " + DEG_X1,
    EVEN_DEGREE,
    PHI1,
    "tt | ff & !tt",
    "exists (y1 < ord, y2 < y1 + 1) . (y2 < y1)",
    "exists^{>=3} x1 . (E(x2,x1) & x1 = x1)",
    "(1+1)*ord <= ord*ord",
    "builtin bit(1, 2+2*2)",
])
def test_print_parse_roundtrip(text):
    f = parse_formula(text)
    assert parse_formula(print_formula(f)) == f


# random-AST round trips


def _terms(depth):
    if depth == 0:
        return st.sampled_from([Num(0), Num(1), Num(7), Ord(), NumVar("y1"), NumVar("z2")])
    sub = _terms(depth - 1)
    return st.one_of(
        sub,
        st.tuples(sub, sub).map(lambda p: Add(*p)),
        st.tuples(sub, sub).map(lambda p: Mul(*p)),
    )


def _formulas(depth):
    atoms = st.sampled_from([
        BoolConst(True), BoolConst(False), VertexEq("x1", "x2"), Edge("x1", "x2"),
        Label(1, "x1"), Label(2, "x2"),
    ])
    cmp = st.tuples(st.sampled_from(["<=", "<", "="]), _terms(1), _terms(1)).map(
        lambda t: Compare(t[0], t[1], t[2]))
    base = st.one_of(atoms, cmp)
    if depth == 0:
        return base
    sub = _formulas(depth - 1)
    return st.one_of(
        base,
        sub.map(Not),
        st.tuples(sub, sub).map(lambda p: And(*p)),
        st.tuples(sub, sub).map(lambda p: Or(*p)),
        st.tuples(st.integers(0, 3), sub).map(lambda p: CountQuant(p[0], "x2", And(Edge("x1", "x2"), p[1]))),
        sub.map(lambda b: Exists((), (("y3", Ord()),), b)),
        st.tuples(sub, _terms(0)).map(lambda p: Count((), (("y4", Ord()),), p[0])).map(
            lambda c: Compare("=", NumVar("y5"), c)),
    )


@given(_formulas(3))
@settings(max_examples=150, deadline=None)
def test_roundtrip_random_ast(f):
    assert parse_formula(print_formula(f)) == f


def test_swap_edge():
    assert swap_vertex_variables(Edge("x1", "x2")) == Edge("x2", "x1")


def test_swap_involution():
    f = parse_formula(EVEN_DEGREE)
    assert swap_vertex_variables(swap_vertex_variables(f)) == f


def test_swap_phi1():
    f = parse_formula(PHI1)
    g = swap_vertex_variables(f)
    assert g.vertex_vars == ("x1",)
    assert swap_vertex_variables(g) == f


def test_swap_rejects_three_vars():
    f = parse_formula("exists (x3) . (E(x1,x3))")
    with pytest.raises(Exception):
        swap_vertex_variables(f)
