"""Normalization to simple form.

A formula is simple when (i) every number binder is bounded by a syntactic
ord-power matching the variable's degree and (ii) counting terms occur only
as right-hand sides of equations y = #(...).(...) for a number variable y.
Vertex quantification is rewritten through counting; bounded quantification
over number variables remains as a quantifier prefix.
"""

from __future__ import annotations

from .bounds import annotation_degrees, value_degree
from .formulas import (Add, And, BuiltinRel, Compare, Count, CountQuant, Exists, Expression,
                       Formula, FormulaError, FreshNames, ModRepr, Mul, Not, Num, NumVar, Or, Term,
                       alpha_rename, all_number_var_names, children, free_number_vars, is_term,
                       match_ord_power, ord_power, rebuild, subexpressions, substitute_number_var)


def desugar_vertex_quantifiers(f: Expression) -> Expression:
    """Rewrite exists^{>=n} x.psi to n <= #(x).psi and vertex-variable exists
    sugar to 1 <= #(...); number-only exists quantifiers are kept."""

    def go(node):
        node = rebuild(node, [go(c) for c in children(node)])
        if isinstance(node, CountQuant):
            return Compare("<=", Num(node.threshold), Count((node.var,), (), node.body))
        if isinstance(node, Exists) and node.vertex_vars:
            return Compare("<=", Num(1), Count(node.vertex_vars, node.binders, node.body))
        return node

    return go(f)


def _rebind_pass(f: Expression, degrees: dict[str, int]) -> Expression:
    """Condition (i): replace every number binder bound theta by ord^deg and
    conjoin y < theta inside the body (skipped when theta already is the
    ord-power)."""

    def go(node):
        node = rebuild(node, [go(c) for c in children(node)])
        if isinstance(node, (Count, Exists)) and node.binders:
            new_binders = []
            guards = []
            for name, bound in node.binders:
                d = degrees[name]
                target = ord_power(d)
                if bound == target:
                    new_binders.append((name, bound))
                else:
                    new_binders.append((name, target))
                    guards.append(Compare("<", NumVar(name), bound))
            body = node.body
            for g in reversed(guards):
                body = And(g, body)
            return type(node)(node.vertex_vars, tuple(new_binders), body)
        return node

    return go(f)


def _maximal_counts_in_term(t: Term) -> list[Count]:
    out: list[Count] = []

    def go(term: Term):
        if isinstance(term, Count):
            out.append(term)
            return
        if isinstance(term, (Add, Mul)):
            go(term.left)
            go(term.right)

    go(t)
    return out


def _allowed_equation(f: Compare) -> bool:
    """y = #(...) with y not free in the count."""
    return (f.op == "=" and isinstance(f.left, NumVar) and isinstance(f.right, Count)
            and f.left.name not in free_number_vars(f.right))


def _hoist_pass(f: Formula, degrees: dict[str, int], names: FreshNames) -> Formula:
    """Condition (ii): pull counting terms out of term positions through fresh
    existentially quantified variables."""

    def go(node):
        if isinstance(node, Count):
            # bounds are ord-powers already; only the body needs work
            return Count(node.vertex_vars, node.binders, go(node.body))
        if isinstance(node, Compare) and node.op == "=" and isinstance(node.right, NumVar) \
                and isinstance(node.left, Count):
            node = Compare("=", node.right, node.left)
        if isinstance(node, Compare) and _allowed_equation(node):
            return Compare("=", node.left, go(node.right))
        node = rebuild(node, [go(c) for c in children(node)])
        if isinstance(node, (Compare, BuiltinRel, ModRepr)):
            if isinstance(node, Compare):
                term_args = [node.left, node.right]
            elif isinstance(node, BuiltinRel):
                term_args = list(node.args)
            else:
                term_args = [node.bound, node.modulus, node.result]
            counts: list[Count] = []
            for t in term_args:
                for c in _maximal_counts_in_term(t):
                    if c not in counts:
                        counts.append(c)
            base = node
            hoisted: list[tuple[str, int, Count]] = []
            for c in counts:
                d = value_degree(c, degrees)
                fresh = names.fresh()
                degrees[fresh] = d
                base = _replace_term(base, c, NumVar(fresh))
                hoisted.append((fresh, d, c))
            out = base
            for fresh, d, c in reversed(hoisted):
                out = Exists((), ((fresh, ord_power(d)),),
                             And(Compare("=", NumVar(fresh), c), out))
            return out
        return node

    return go(f)


def _replace_term(f: Formula, target: Count, replacement: Term) -> Formula:
    """Replace occurrences of a counting term in the immediate term positions
    of a comparison/builtin/modrep node."""

    def sub(t: Term) -> Term:
        if t == target:
            return replacement
        if isinstance(t, (Add, Mul)):
            return type(t)(sub(t.left), sub(t.right))
        return t

    if isinstance(f, Compare):
        return Compare(f.op, sub(f.left), sub(f.right))
    if isinstance(f, BuiltinRel):
        return BuiltinRel(f.name, tuple(sub(a) for a in f.args))
    if isinstance(f, ModRepr):
        return ModRepr(f.bit_var, f.bit_formula, sub(f.bound), sub(f.modulus), sub(f.result))
    raise FormulaError(f"cannot replace terms in {type(f).__name__}")


def to_simple_form(phi: Formula, free_degrees: dict[str, int] | None = None) -> Formula:
    """Equivalent simple formula (on all graphs; for formulas with free number
    variables, on assignments within the declared degree ranges)."""
    phi = alpha_rename(phi)
    phi = desugar_vertex_quantifiers(phi)
    degrees = annotation_degrees(phi, free_degrees)
    phi = _rebind_pass(phi, degrees)
    names = FreshNames(all_number_var_names(phi))
    phi = _hoist_pass(phi, degrees, names)
    return phi


def simple_form_violations(phi: Formula) -> list[str]:
    """Empty iff phi is simple; otherwise human-readable violations."""
    problems: list[str] = []

    for sub in subexpressions(phi):
        if isinstance(sub, CountQuant):
            problems.append("counting-quantifier sugar present")
        if isinstance(sub, Exists) and sub.vertex_vars:
            problems.append("vertex-variable exists sugar present")
        if isinstance(sub, (Count, Exists)):
            for name, bound in sub.binders:
                if match_ord_power(bound) is None:
                    problems.append(f"binder {name} bounded by a non-ord-power")

    def check(node):
        if isinstance(node, Compare):
            if _allowed_equation(node):
                cnt = node.right
                for _, b in cnt.binders:
                    check_term(b)
                check(cnt.body)
            else:
                check_term(node.left)
                check_term(node.right)
            return
        if isinstance(node, BuiltinRel):
            for a in node.args:
                check_term(a)
            return
        if isinstance(node, ModRepr):
            check(node.bit_formula)
            for t in (node.bound, node.modulus, node.result):
                check_term(t)
            return
        if isinstance(node, (Count, Exists)):
            for _, b in node.binders:
                check_term(b)
            check(node.body)
            return
        for c in children(node):
            check(c)

    def check_term(t):
        if isinstance(t, Count):
            problems.append("counting term outside an equation y = #(...)")
            for _, b in t.binders:
                check_term(b)
            check(t.body)
            return
        if isinstance(t, (Add, Mul)):
            check_term(t.left)
            check_term(t.right)

    check(phi)
    return problems


def is_simple(phi: Formula) -> bool:
    return not simple_form_violations(phi)
