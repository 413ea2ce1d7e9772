"""Value-bound polynomials for terms and degree bookkeeping for number variables.

A term's value on any graph is bounded by a univariate polynomial (with
nonnegative integer coefficients) in the maximum of the graph order and the
values assigned to its free number variables.  The degree of a bound number
variable is derived from the bound polynomial of its bounding term.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .formulas import (Add, Count, Edge, Exists, Expression, FormulaError, ModRepr, Mul, Num,
                       NumVar, Ord, Term, children, conjuncts, free_number_vars, is_term,
                       match_ord_power)


@dataclass(frozen=True)
class BoundPolynomial:
    """Polynomial with nonnegative integer coefficients; coeffs[i] is the X^i
    coefficient."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.coeffs):
            raise ValueError("coefficients must be nonnegative")

    @staticmethod
    def constant(c: int) -> "BoundPolynomial":
        return BoundPolynomial((c,) if c else ())

    @staticmethod
    def x_power(k: int) -> "BoundPolynomial":
        return BoundPolynomial((0,) * k + (1,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "BoundPolynomial") -> "BoundPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return BoundPolynomial(_trim(tuple(x + y for x, y in zip(a, b))))

    def __mul__(self, other: "BoundPolynomial") -> "BoundPolynomial":
        if self.is_zero() or other.is_zero():
            return BoundPolynomial(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return BoundPolynomial(_trim(tuple(out)))

    def evaluate(self, x: int) -> int:
        out = 0
        for c in reversed(self.coeffs):
            out = out * x + c
        return out


def _trim(coeffs: tuple[int, ...]) -> tuple[int, ...]:
    n = len(coeffs)
    while n and coeffs[n - 1] == 0:
        n -= 1
    return coeffs[:n]


def minimal_exponent(p: BoundPolynomial) -> int:
    """Minimal c with p(n) < n^c for all n >= 2.

    For c > deg(p), the ratio p(n)/n^c is nonincreasing in n, so p(2) < 2^c
    already settles all n >= 2; c <= deg(p) never works for nonzero p.
    """
    if p.is_zero():
        return 0
    c = p.degree + 1
    v = p.evaluate(2)
    while not v < (1 << c):
        c += 1
    assert all(p.evaluate(n) < n ** c for n in range(2, 65))
    return c


def term_bound_polynomial(t: Term, free_degrees: dict[str, int] | None = None) -> BoundPolynomial:
    """Bound polynomial for a term: its value is at most p(max of the graph
    order and the free number-variable values).  A free number variable of
    declared degree d contributes X^d (d defaults to 1, the raw bound)."""
    if not is_term(t):
        raise FormulaError(f"not a term: {type(t).__name__}")
    degs = free_degrees or {}

    def go(term: Term) -> BoundPolynomial:
        if isinstance(term, Num):
            return BoundPolynomial.constant(term.value)
        if isinstance(term, Ord):
            return BoundPolynomial.x_power(1)
        if isinstance(term, NumVar):
            return BoundPolynomial.x_power(degs.get(term.name, 1))
        if isinstance(term, Add):
            return go(term.left) + go(term.right)
        if isinstance(term, Mul):
            return go(term.left) * go(term.right)
        if isinstance(term, Count):
            out = BoundPolynomial.x_power(len(term.vertex_vars))
            for _, bound in term.binders:
                out = out * go(bound)
            return out
        raise FormulaError(f"not a term: {type(term).__name__}")

    return go(t)


def binder_degree(bound: Term, degrees: dict[str, int]) -> int:
    """Degree of a variable introduced with the given bounding term: the
    minimal c with p(n) < n^c, times the maximal degree of the bound's free
    number variables when there are any."""
    c = minimal_exponent(term_bound_polynomial(bound))
    free = free_number_vars(bound)
    if not free:
        return c
    missing = sorted(v for v in free if v not in degrees)
    if missing:
        raise FormulaError(f"no degree known for number variables {missing}")
    return c * max(degrees[v] for v in free)


def guarded_count_degree(t: Term) -> int | None:
    """Tight value degree for an edge-guarded counting term with ord-power
    number bounds: an edge conjunct pins one vertex factor to a neighbourhood
    (< n values), so the count stays strictly below n^(k + sum of exponents).
    None when the shape does not apply."""
    if not isinstance(t, Count) or not t.vertex_vars:
        return None
    exponents = []
    for _, b in t.binders:
        k = match_ord_power(b)
        if k is None:
            return None
        exponents.append(k)
    for g in conjuncts(t.body):
        if isinstance(g, Edge):
            for bound_var in t.vertex_vars:
                if bound_var in (g.left, g.right):
                    other = g.left if g.right == bound_var else g.right
                    if other != bound_var:
                        return len(t.vertex_vars) + sum(exponents)
    return None


def value_degree(bound: Term, degrees: dict[str, int]) -> int:
    """Degree assignment used by normalization: edge-guarded counting terms
    get their tight degree, everything else the inductive rule."""
    tight = guarded_count_degree(bound)
    return tight if tight is not None else binder_degree(bound, degrees)


def _degree_map(phi: Expression, free_degrees: dict[str, int] | None,
                assign: "Callable[[Term, dict[str, int]], int]") -> dict[str, int]:
    degrees = dict(free_degrees or {})
    free = free_number_vars(phi)
    missing = sorted(v for v in free if v not in degrees)
    if missing:
        raise FormulaError(f"free number variables without declared degree: {missing}")
    introduced: set[str] = set()

    def introduce(name: str, bound: Term) -> None:
        if name in introduced or name in free:
            raise FormulaError(f"number variable {name} introduced twice")
        introduced.add(name)
        degrees[name] = assign(bound, degrees)

    def go(e: Expression) -> None:
        if isinstance(e, (Count, Exists)):
            for name, bound in e.binders:
                go(bound)
                introduce(name, bound)
            go(e.body)
            return
        if isinstance(e, ModRepr):
            go(e.bound)
            go(e.modulus)
            go(e.result)
            introduce(e.bit_var, e.bound)
            go(e.bit_formula)
            return
        for c in children(e):
            go(c)

    go(phi)
    return degrees


def variable_degrees(phi: Expression, free_degrees: dict[str, int] | None = None) -> dict[str, int]:
    """Degree of every number variable of phi per the inductive rule: the
    minimal c with p(n) < n^c for the bounding term's bound polynomial, times
    the maximal degree of the bound's free number variables.  Free number
    variables must carry declared degrees; every bound one must be introduced
    exactly once."""
    return _degree_map(phi, free_degrees, binder_degree)


def annotation_degrees(phi: Expression, free_degrees: dict[str, int] | None = None) -> dict[str, int]:
    """Like variable_degrees, except that a binder already bounded by a
    syntactic ord-power keeps that exponent as its degree, and edge-guarded
    counting bounds get their tight degree.  This is the bookkeeping the
    simple-form normalizer and the guarded-to-modal translation use: it is
    stable under renormalization (the inductive rule would inflate ord^k to
    k+1 on every pass)."""

    def assign(bound: Term, degrees: dict[str, int]) -> int:
        k = match_ord_power(bound)
        return k if k is not None else value_degree(bound, degrees)

    return _degree_map(phi, free_degrees, assign)
