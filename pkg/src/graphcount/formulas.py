"""AST for FO+C terms and formulas, printing, and fragment classification.

Two-sorted syntax: vertex variables x1, x2, ... range over graph vertices,
number variables (y, y1, z3, ...) range over the naturals.  Counting terms
#(x.., y<bound..).body bind their variables; everything is immutable.

The counting-quantifier sugar exists^{>=n} x . f and the bounded quantifier
exists (binders) . f are first-class nodes so that surface syntax round-trips
and the guarded->modal machinery can work syntactically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


class FormulaError(ValueError):
    pass


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Num:
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise FormulaError("number constants are naturals")


@dataclass(frozen=True)
class Ord:
    pass


@dataclass(frozen=True)
class NumVar:
    name: str


@dataclass(frozen=True)
class Add:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Mul:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Count:
    """#(x.., y1<b1, ..).body -- the number of satisfying assignments.

    Bounds are evaluated left to right; bound j may mention binders 1..j-1.
    """

    vertex_vars: tuple[str, ...]
    binders: tuple[tuple[str, "Term"], ...]
    body: "Formula"


Term = Union[Num, Ord, NumVar, Add, Mul, Count]


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class VertexEq:
    left: str
    right: str


@dataclass(frozen=True)
class Edge:
    left: str
    right: str

    def __post_init__(self):
        if self.left == self.right:
            raise FormulaError("edge atom with equal endpoints is disallowed (simple graphs)")


@dataclass(frozen=True)
class Label:
    index: int  # 1-based: P1, P2, ...
    var: str


@dataclass(frozen=True)
class Compare:
    op: str  # "<=", "<", "="
    left: Term
    right: Term

    def __post_init__(self):
        if self.op not in ("<=", "<", "="):
            raise FormulaError(f"bad comparison operator {self.op!r}")


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class CountQuant:
    """exists^{>=n} x' . body  --  the C-fragment counting quantifier."""

    threshold: int
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    """exists (x.., y<b..) . body  --  sugar for 1 <= #(same).body."""

    vertex_vars: tuple[str, ...]
    binders: tuple[tuple[str, Term], ...]
    body: "Formula"


@dataclass(frozen=True)
class BuiltinRel:
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class ModRepr:
    """Truth of: result = (sum of 2^i over i < bound with bit_formula(i)) mod modulus.

    bit_var is the designated free number variable of bit_formula that selects
    the bit index; the represented large number is never materialized.
    """

    bit_var: str
    bit_formula: "Formula"
    bound: Term
    modulus: Term
    result: Term


Formula = Union[BoolConst, VertexEq, Edge, Label, Compare, Not, And, Or,
                CountQuant, Exists, BuiltinRel, ModRepr]

Expression = Union[Term, Formula]

TERM_TYPES = (Num, Ord, NumVar, Add, Mul, Count)
FORMULA_TYPES = (BoolConst, VertexEq, Edge, Label, Compare, Not, And, Or,
                 CountQuant, Exists, BuiltinRel, ModRepr)


def is_term(e: Expression) -> bool:
    return isinstance(e, TERM_TYPES)


def is_formula(e: Expression) -> bool:
    return isinstance(e, FORMULA_TYPES)


def is_vertex_var(name: str) -> bool:
    return name.startswith("x")


TT = BoolConst(True)
FF = BoolConst(False)


def conjuncts(f: Formula) -> Iterator["Formula"]:
    """Top-level conjuncts of a right-or-left-nested conjunction."""
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, And):
            stack.append(node.right)
            stack.append(node.left)
        else:
            yield node


def and_all(parts: list) -> Formula:
    if not parts:
        return TT
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def or_all(parts: list) -> Formula:
    if not parts:
        return FF
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def ord_power(c: int) -> Term:
    """ord^c as a left-associated product; ord^0 is 1."""
    if c < 0:
        raise FormulaError("negative ord power")
    if c == 0:
        return Num(1)
    out: Term = Ord()
    for _ in range(c - 1):
        out = Mul(out, Ord())
    return out


def match_ord_power(t: Term) -> int | None:
    """Exponent c if t is syntactically ord^c (per ord_power), else None."""
    if t == Num(1):
        return 0
    c = 0
    while isinstance(t, Mul) and isinstance(t.right, Ord):
        c += 1
        t = t.left
    if isinstance(t, Ord):
        return c + 1
    return None


# ---------------------------------------------------------------------------
# traversal and variables


def children(e: Expression) -> Iterator[Expression]:
    if isinstance(e, (Add, Mul, And, Or)):
        yield e.left
        yield e.right
    elif isinstance(e, Count):
        for _, b in e.binders:
            yield b
        yield e.body
    elif isinstance(e, Exists):
        for _, b in e.binders:
            yield b
        yield e.body
    elif isinstance(e, Compare):
        yield e.left
        yield e.right
    elif isinstance(e, Not):
        yield e.body
    elif isinstance(e, CountQuant):
        yield e.body
    elif isinstance(e, BuiltinRel):
        yield from e.args
    elif isinstance(e, ModRepr):
        yield e.bit_formula
        yield e.bound
        yield e.modulus
        yield e.result


def subexpressions(e: Expression) -> Iterator[Expression]:
    yield e
    for c in children(e):
        yield from subexpressions(c)


def free_vars(e: Expression) -> tuple[frozenset[str], frozenset[str]]:
    """(free vertex variables, free number variables)."""
    hit = getattr(e, "_free_cache", None)
    if hit is not None:
        return hit
    if isinstance(e, (Num, Ord, BoolConst)):
        out = (frozenset(), frozenset())
    elif isinstance(e, NumVar):
        out = (frozenset(), frozenset([e.name]))
    elif isinstance(e, (VertexEq, Edge)):
        out = (frozenset([e.left, e.right]), frozenset())
    elif isinstance(e, Label):
        out = (frozenset([e.var]), frozenset())
    elif isinstance(e, (Count, Exists)):
        fv: set[str] = set()
        fn: set[str] = set()
        seen_binders: set[str] = set()
        for name, bound in e.binders:
            bv, bn = free_vars(bound)
            fv |= bv
            fn |= bn - seen_binders
            seen_binders.add(name)
        bv, bn = free_vars(e.body)
        fv |= bv - set(e.vertex_vars)
        fn |= bn - seen_binders
        out = (frozenset(fv), frozenset(fn))
    elif isinstance(e, CountQuant):
        bv, bn = free_vars(e.body)
        out = (frozenset(bv - {e.var}), bn)
    elif isinstance(e, ModRepr):
        fv, fn = set(), set()
        bv, bn = free_vars(e.bit_formula)
        fv |= bv
        fn |= bn - {e.bit_var}
        for t in (e.bound, e.modulus, e.result):
            tv, tn = free_vars(t)
            fv |= tv
            fn |= tn
        out = (frozenset(fv), frozenset(fn))
    else:
        fv, fn = set(), set()
        for c in children(e):
            cv, cn = free_vars(c)
            fv |= cv
            fn |= cn
        out = (frozenset(fv), frozenset(fn))
    object.__setattr__(e, "_free_cache", out)
    return out


def free_vertex_vars(e: Expression) -> frozenset[str]:
    return free_vars(e)[0]


def free_number_vars(e: Expression) -> frozenset[str]:
    return free_vars(e)[1]


def all_vertex_vars(e: Expression) -> frozenset[str]:
    out: set[str] = set()
    for sub in subexpressions(e):
        if isinstance(sub, (VertexEq, Edge)):
            out |= {sub.left, sub.right}
        elif isinstance(sub, Label):
            out.add(sub.var)
        elif isinstance(sub, (Count, Exists)):
            out |= set(sub.vertex_vars)
        elif isinstance(sub, CountQuant):
            out.add(sub.var)
    return frozenset(out)


def swap_vertex_variables(e: Expression) -> Expression:
    """x1 <-> x2 swapped throughout; error when other vertex variables occur."""
    used = all_vertex_vars(e)
    if not used <= {"x1", "x2"}:
        raise FormulaError(f"swap needs a two-variable formula, found {sorted(used)}")
    swap = {"x1": "x2", "x2": "x1"}

    def go(node):
        if isinstance(node, VertexEq):
            return VertexEq(swap[node.left], swap[node.right])
        if isinstance(node, Edge):
            return Edge(swap[node.left], swap[node.right])
        if isinstance(node, Label):
            return Label(node.index, swap[node.var])
        if isinstance(node, Count):
            return Count(tuple(swap[v] for v in node.vertex_vars),
                         tuple((n, go(b)) for n, b in node.binders), go(node.body))
        if isinstance(node, Exists):
            return Exists(tuple(swap[v] for v in node.vertex_vars),
                          tuple((n, go(b)) for n, b in node.binders), go(node.body))
        if isinstance(node, CountQuant):
            return CountQuant(node.threshold, swap[node.var], go(node.body))
        return rebuild(node, [go(c) for c in children(node)])

    return go(e)


def rebuild(e: Expression, new_children: list) -> Expression:
    """Reassemble a node with replaced children (same order as children())."""
    if isinstance(e, (Num, Ord, NumVar, BoolConst, VertexEq, Edge, Label)):
        return e
    if isinstance(e, Add):
        return Add(*new_children)
    if isinstance(e, Mul):
        return Mul(*new_children)
    if isinstance(e, And):
        return And(*new_children)
    if isinstance(e, Or):
        return Or(*new_children)
    if isinstance(e, Not):
        return Not(new_children[0])
    if isinstance(e, Compare):
        return Compare(e.op, new_children[0], new_children[1])
    if isinstance(e, Count):
        k = len(e.binders)
        return Count(e.vertex_vars, tuple((n, b) for (n, _), b in zip(e.binders, new_children[:k])),
                     new_children[k])
    if isinstance(e, Exists):
        k = len(e.binders)
        return Exists(e.vertex_vars, tuple((n, b) for (n, _), b in zip(e.binders, new_children[:k])),
                      new_children[k])
    if isinstance(e, CountQuant):
        return CountQuant(e.threshold, e.var, new_children[0])
    if isinstance(e, BuiltinRel):
        return BuiltinRel(e.name, tuple(new_children))
    if isinstance(e, ModRepr):
        return ModRepr(e.bit_var, new_children[0], new_children[1], new_children[2], new_children[3])
    raise FormulaError(f"cannot rebuild {type(e).__name__}")


def substitute_number_var(e: Expression, name: str, replacement: Term) -> Expression:
    """Capture-avoiding-enough substitution: binders are assumed unique."""

    def go(node):
        if isinstance(node, NumVar):
            return replacement if node.name == name else node
        if isinstance(node, (Count, Exists)):
            if any(n == name for n, _ in node.binders):
                # name is rebound here; substitute only in bounds up to that binder
                new_binders = []
                shadowed = False
                for n, b in node.binders:
                    new_binders.append((n, b if shadowed else go(b)))
                    if n == name:
                        shadowed = True
                return type(node)(node.vertex_vars, tuple(new_binders), node.body)
            return type(node)(node.vertex_vars, tuple((n, go(b)) for n, b in node.binders), go(node.body))
        if isinstance(node, ModRepr) and node.bit_var == name:
            return ModRepr(node.bit_var, node.bit_formula, go(node.bound), go(node.modulus), go(node.result))
        return rebuild(node, [go(c) for c in children(node)])

    return go(e)


def rename_number_vars(e: Expression, mapping: dict[str, str]) -> Expression:
    """Simultaneous renaming of number variables (free and bound alike)."""

    def nm(n: str) -> str:
        return mapping.get(n, n)

    def go(node):
        if isinstance(node, NumVar):
            return NumVar(nm(node.name))
        if isinstance(node, (Count, Exists)):
            return type(node)(node.vertex_vars, tuple((nm(n), go(b)) for n, b in node.binders), go(node.body))
        if isinstance(node, ModRepr):
            return ModRepr(nm(node.bit_var), go(node.bit_formula), go(node.bound), go(node.modulus),
                           go(node.result))
        return rebuild(node, [go(c) for c in children(node)])

    return go(e)


class FreshNames:
    """Deterministic fresh number-variable names avoiding a given set."""

    def __init__(self, used: set[str], prefix: str = "y"):
        self.used = set(used)
        self.prefix = prefix
        self.counter = 1

    def fresh(self, prefix: str | None = None) -> str:
        p = prefix or self.prefix
        while True:
            cand = f"{p}{self.counter}"
            self.counter += 1
            if cand not in self.used:
                self.used.add(cand)
                return cand


def all_number_var_names(e: Expression) -> set[str]:
    out: set[str] = set()
    for sub in subexpressions(e):
        if isinstance(sub, NumVar):
            out.add(sub.name)
        elif isinstance(sub, (Count, Exists)):
            out |= {n for n, _ in sub.binders}
        elif isinstance(sub, ModRepr):
            out.add(sub.bit_var)
    return out


def alpha_rename(e: Expression) -> Expression:
    """Make every bound number variable unique (and distinct from free ones)."""
    names = FreshNames(all_number_var_names(e) | free_number_vars(e))

    def go(node, env: dict[str, str]):
        if isinstance(node, NumVar):
            return NumVar(env.get(node.name, node.name))
        if isinstance(node, (Count, Exists)):
            new_env = dict(env)
            new_binders = []
            for n, b in node.binders:
                nb = go(b, new_env)
                fresh = names.fresh()
                new_env[n] = fresh
                new_binders.append((fresh, nb))
            return type(node)(node.vertex_vars, tuple(new_binders), go(node.body, new_env))
        if isinstance(node, ModRepr):
            fresh = names.fresh()
            inner_env = dict(env)
            inner_env[node.bit_var] = fresh
            return ModRepr(fresh, go(node.bit_formula, inner_env), go(node.bound, env),
                           go(node.modulus, env), go(node.result, env))
        return rebuild(node, [go(c, env) for c in children(node)])

    return go(e, {})


# ---------------------------------------------------------------------------
# printing

_TERM_PREC = {"add": 1, "mul": 2, "atom": 3}


def _print_term(t: Term, prec: int) -> str:
    if isinstance(t, Num):
        s, p = str(t.value), 3
    elif isinstance(t, Ord):
        s, p = "ord", 3
    elif isinstance(t, NumVar):
        s, p = t.name, 3
    elif isinstance(t, Add):
        s, p = f"{_print_term(t.left, 1)} + {_print_term(t.right, 2)}", 1
    elif isinstance(t, Mul):
        s, p = f"{_print_term(t.left, 2)} * {_print_term(t.right, 3)}", 2
    elif isinstance(t, Count):
        s, p = f"#({_print_binders(t)}).({print_formula(t.body)})", 3
    else:
        raise FormulaError(f"not a term: {type(t).__name__}")
    return f"({s})" if p < prec else s


def _print_binders(node: Count | Exists) -> str:
    parts = list(node.vertex_vars)
    parts += [f"{n} < {_print_term(b, 1)}" for n, b in node.binders]
    return ", ".join(parts)


def print_term(t: Term) -> str:
    return _print_term(t, 1)


_FORMULA_PREC = {"or": 1, "and": 2, "not": 3, "atom": 4}


def _print_formula(f: Formula, prec: int) -> str:
    if isinstance(f, BoolConst):
        s, p = ("tt" if f.value else "ff"), 4
    elif isinstance(f, VertexEq):
        s, p = f"{f.left} = {f.right}", 4
    elif isinstance(f, Edge):
        s, p = f"E({f.left},{f.right})", 4
    elif isinstance(f, Label):
        s, p = f"P{f.index}({f.var})", 4
    elif isinstance(f, Compare):
        s, p = f"{_print_term(f.left, 1)} {f.op} {_print_term(f.right, 1)}", 4
    elif isinstance(f, Not):
        s, p = f"!{_print_formula(f.body, 3)}", 3
    elif isinstance(f, And):
        s, p = f"{_print_formula(f.left, 2)} & {_print_formula(f.right, 3)}", 2
    elif isinstance(f, Or):
        s, p = f"{_print_formula(f.left, 1)} | {_print_formula(f.right, 2)}", 1
    elif isinstance(f, CountQuant):
        # quantifier bodies extend maximally, so parenthesize in any context
        s, p = f"exists^{{>={f.threshold}}} {f.var} . ({print_formula(f.body)})", 1
    elif isinstance(f, Exists):
        s, p = f"exists ({_print_binders(f)}) . ({print_formula(f.body)})", 1
    elif isinstance(f, BuiltinRel):
        args = ", ".join(_print_term(a, 1) for a in f.args)
        s, p = f"builtin {f.name}({args})", 4
    elif isinstance(f, ModRepr):
        s = (f"modrep({f.bit_var}; {print_formula(f.bit_formula)}; {_print_term(f.bound, 1)}; "
             f"{_print_term(f.modulus, 1)}; {_print_term(f.result, 1)})")
        p = 4
    else:
        raise FormulaError(f"not a formula: {type(f).__name__}")
    return f"({s})" if p < prec else s


def print_formula(f: Formula) -> str:
    return _print_formula(f, 1)


def print_expression(e: Expression) -> str:
    return print_term(e) if is_term(e) else print_formula(e)


# ---------------------------------------------------------------------------
# fragment classification


@dataclass(frozen=True)
class FragmentReport:
    is_C: bool
    is_C2: bool
    is_MC: bool
    is_GC: bool
    is_FOC2: bool
    is_MFOC: bool
    is_GFOC: bool
    is_arithmetical: bool
    vertex_var_count: int
    free_vertex_vars: tuple[str, ...]
    free_number_vars: tuple[str, ...]


def guard_split(body: Formula, bound_var: str) -> tuple[Edge, Formula] | None:
    """If the body is a conjunction containing a guard atom E(x, x') with x'
    the bound variable (per rules (vi)/(vi'), the bound variable is the second
    argument), return (guard, rest-conjunction).  Conjunction chains are
    flattened, so any associativity is accepted."""
    parts = list(conjuncts(body))
    for i, g in enumerate(parts):
        if isinstance(g, Edge) and g.right == bound_var and g.left != bound_var:
            rest = parts[:i] + parts[i + 1:]
            return g, and_all(rest)
    return None


def _guard_shape(body: Formula, bound_var: str) -> tuple[str, Formula] | None:
    """If body = E(x, x') & psi with x' the bound variable and {x, x'} =
    {x1, x2}, return (x, psi)."""
    split = guard_split(body, bound_var)
    if split is None:
        return None
    g, psi = split
    if {g.left, g.right} != {"x1", "x2"}:
        return None
    return g.left, psi


def _is_c_formula(f: Formula, modal_only: bool, guarded_only: bool) -> bool:
    """Membership in C (counting quantifiers only), optionally restricted to
    modal/guarded quantification shapes."""
    if isinstance(f, (BoolConst, VertexEq, Edge, Label)):
        return True
    if isinstance(f, Not):
        return _is_c_formula(f.body, modal_only, guarded_only)
    if isinstance(f, (And, Or)):
        return (_is_c_formula(f.left, modal_only, guarded_only)
                and _is_c_formula(f.right, modal_only, guarded_only))
    if isinstance(f, CountQuant):
        if modal_only or guarded_only:
            shape = _guard_shape(f.body, f.var)
            if shape is None:
                return False
            x, psi = shape
            if modal_only and x in free_vertex_vars(psi):
                return False
            return _is_c_formula(psi, modal_only, guarded_only)
        return _is_c_formula(f.body, modal_only, guarded_only)
    return False


def _is_foc_fragment(e: Expression, modal_only: bool) -> bool:
    """Membership in MFO+C (modal_only) or GFO+C per rules (i)-(vi)/(vi')."""
    if isinstance(e, (Num, Ord, NumVar)):
        return True
    if isinstance(e, (Add, Mul)):
        return _is_foc_fragment(e.left, modal_only) and _is_foc_fragment(e.right, modal_only)
    if isinstance(e, Count):
        if not all(_is_foc_fragment(b, modal_only) for _, b in e.binders):
            return False
        if len(e.vertex_vars) == 0:
            return _is_foc_fragment(e.body, modal_only)  # rule (v)
        if len(e.vertex_vars) != 1:
            return False
        shape = _guard_shape(e.body, e.vertex_vars[0])
        if shape is None:
            return False
        x, psi = shape
        if modal_only and x in free_vertex_vars(psi):
            return False
        return _is_foc_fragment(psi, modal_only)  # rule (vi)/(vi')
    if isinstance(e, BoolConst):
        return True
    if isinstance(e, (VertexEq, Edge)):
        return {e.left, e.right} <= {"x1", "x2"}
    if isinstance(e, Label):
        return e.var in ("x1", "x2")
    if isinstance(e, Compare):
        return _is_foc_fragment(e.left, modal_only) and _is_foc_fragment(e.right, modal_only)
    if isinstance(e, Not):
        return _is_foc_fragment(e.body, modal_only)
    if isinstance(e, (And, Or)):
        return _is_foc_fragment(e.left, modal_only) and _is_foc_fragment(e.right, modal_only)
    if isinstance(e, CountQuant):
        shape = _guard_shape(e.body, e.var)
        if shape is None:
            return False
        x, psi = shape
        if modal_only and x in free_vertex_vars(psi):
            return False
        return _is_foc_fragment(psi, modal_only)
    if isinstance(e, Exists):
        return _is_foc_fragment(Count(e.vertex_vars, e.binders, e.body), modal_only)
    if isinstance(e, BuiltinRel):
        return all(_is_foc_fragment(a, modal_only) for a in e.args)
    if isinstance(e, ModRepr):
        return all(_is_foc_fragment(part, modal_only)
                   for part in (e.bit_formula, e.bound, e.modulus, e.result))
    return False


def classify_fragment(e: Expression) -> FragmentReport:
    used = all_vertex_vars(e) | free_vertex_vars(e)
    two_var = used <= {"x1", "x2"}
    arith = not used
    fvv, fnv = free_vars(e)
    is_c = is_formula(e) and _is_c_formula(e, False, False)
    is_c2 = is_c and two_var
    is_gc = is_c2 and _is_c_formula(e, False, True)
    is_mc = is_gc and _is_c_formula(e, True, True)
    is_foc2 = two_var
    is_gfoc = two_var and _is_foc_fragment(e, False)
    is_mfoc = is_gfoc and _is_foc_fragment(e, True)
    return FragmentReport(
        is_C=is_c, is_C2=is_c2, is_MC=is_mc, is_GC=is_gc,
        is_FOC2=is_foc2, is_MFOC=is_mfoc, is_GFOC=is_gfoc,
        is_arithmetical=arith,
        vertex_var_count=len(used),
        free_vertex_vars=tuple(sorted(fvv)),
        free_number_vars=tuple(sorted(fnv)),
    )


def desugar_count_quant(f: Expression) -> Expression:
    """Map every exists^{>=n} x'.psi to n <= #(x').psi (C inside FO+C)."""

    def go(node):
        node = rebuild(node, [go(c) for c in children(node)])
        if isinstance(node, CountQuant):
            return Compare("<=", Num(node.threshold), Count((node.var,), (), node.body))
        return node

    return go(f)


def desugar_exists(f: Expression) -> Expression:
    """Map every exists-sugar node to 1 <= #(binders).body."""

    def go(node):
        node = rebuild(node, [go(c) for c in children(node)])
        if isinstance(node, Exists):
            return Compare("<=", Num(1), Count(node.vertex_vars, node.binders, node.body))
        return node

    return go(f)
