import pytest

from graphcount.bounds import (BoundPolynomial, minimal_exponent, term_bound_polynomial,
                               variable_degrees)
from graphcount.formulas import FormulaError, alpha_rename
from graphcount.parser import parse_formula, parse_term

DEG_X1 = "#(x2).(E(x1,x2) & x2 = x2)"


def test_bound_ord():
    assert term_bound_polynomial(parse_term("ord")) == BoundPolynomial((0, 1))


def test_bound_degree_term():
    # a count of one vertex variable is at most n
    assert term_bound_polynomial(parse_term(DEG_X1)) == BoundPolynomial((0, 1))


def test_bound_ord_squared_plus_one():
    p = term_bound_polynomial(parse_term("ord*ord + 1"))
    assert p == BoundPolynomial((1, 0, 1))
    assert p.evaluate(3) == 10


def test_minimal_exponent_examples():
    assert minimal_exponent(BoundPolynomial((0, 1))) == 2       # n < n^2
    assert minimal_exponent(BoundPolynomial((0, 0, 1))) == 3    # n^2 < n^3
    assert minimal_exponent(BoundPolynomial((1, 0, 1))) == 3    # n^2 + 1 < n^3
    assert minimal_exponent(BoundPolynomial(())) == 0
    assert minimal_exponent(BoundPolynomial((5,))) == 3         # 5 < n^3 for all n >= 2


def test_degrees_bounded_by_ord():
    f = parse_formula("exists (y < ord) . (y = y)")
    degs = variable_degrees(alpha_rename(f))
    assert list(degs.values()) == [2]


def test_degrees_bounded_by_ord_squared():
    f = parse_formula("exists (y < ord*ord) . (y = y)")
    degs = variable_degrees(alpha_rename(f))
    assert list(degs.values()) == [3]


def test_degrees_free_passthrough():
    f = parse_formula("y = y")
    degs = variable_degrees(f, {"y": 1})
    assert degs == {"y": 1}


def test_degrees_dependent_bound():
    # y2 < y1 * ord with deg(y1) = 2: raw poly X^2 gives c = 3, times d = 2
    f = parse_formula("exists (y1 < ord, y2 < y1 * ord) . (y2 = y2)")
    degs = variable_degrees(alpha_rename(f))
    vals = sorted(degs.values())
    assert vals == [2, 6]


def test_degrees_missing_declaration():
    with pytest.raises(FormulaError):
        variable_degrees(parse_formula("y = y"))


def test_degrees_duplicate_binder():
    f = parse_formula("exists (y < ord) . (y = y) & exists (y < ord) . (y = y)")
    with pytest.raises(FormulaError):
        variable_degrees(f)
    # after renaming it goes through
    assert len(variable_degrees(alpha_rename(f))) == 2
