"""Exact two-sorted evaluation of expressions over labelled graphs.

Counting terms are evaluated by nested enumeration (vertex variables in
declaration order, then number binders left to right).  Three semantics-
preserving optimizations keep nested counting feasible at desk scale:

  * memoization of counting terms and modular representations, keyed by the
    restriction of the valuation to the node's free variables;
  * neighbourhood narrowing for vertex binders guarded by an edge atom;
  * pinned binders: a top-level conjunct y = theta, a functional builtin, or a
    modular-representation node that determines a bound variable collapses its
    enumeration to the single admissible value.

Large numbers represented by modrep nodes are never materialized; the residue
is accumulated with streaming modular arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

from .formulas import (Add, And, BoolConst, BuiltinRel, Compare, Count, CountQuant, Edge, Exists,
                       Expression, Formula, FormulaError, Label, ModRepr, Mul, Not, Num, NumVar,
                       Or, Ord, Term, VertexEq, free_number_vars, free_vars, is_term)
from .graphs import LabelledGraph

Valuation = dict[str, int]


class EvalError(ValueError):
    pass


# ---------------------------------------------------------------------------
# builtin numerical relations


@dataclass(frozen=True)
class Builtin:
    name: str
    arity: int
    func: Callable[..., bool]
    # when set, the relation is functional in its first argument:
    # pin(rest...) returns the unique value making it true, or None
    pin: Callable[..., int | None] | None = None


class BuiltinRegistry:
    def __init__(self):
        self._by_name: dict[str, Builtin] = {}

    def register(self, builtin: Builtin) -> None:
        if builtin.name in self._by_name:
            raise EvalError(f"duplicate builtin {builtin.name!r}")
        self._by_name[builtin.name] = builtin

    def get(self, name: str) -> Builtin:
        try:
            return self._by_name[name]
        except KeyError:
            raise EvalError(f"unregistered builtin {name!r}") from None

    def names(self) -> list[str]:
        return sorted(self._by_name)


class _Primality:
    """Exact primality with a growable sieve for small values."""

    def __init__(self):
        self.limit = 1
        self.sieve = bytearray([0, 0])

    def _grow(self, need: int) -> None:
        limit = max(need, 2 * self.limit, 1 << 16)
        s = bytearray([1]) * (limit + 1)
        s[0:2] = b"\x00\x00"
        p = 2
        while p * p <= limit:
            if s[p]:
                s[p * p::p] = b"\x00" * ((limit - p * p) // p + 1)
            p += 1
        self.limit, self.sieve = limit, s

    def is_prime(self, n: int) -> bool:
        if n < 2:
            return False
        if n <= (1 << 24):
            if n > self.limit:
                self._grow(n)
            return bool(self.sieve[n])
        return self._miller_rabin(n)

    @staticmethod
    def _miller_rabin(n: int) -> bool:
        if n % 2 == 0:
            return n == 2
        d, r = n - 1, 0
        while d % 2 == 0:
            d //= 2
            r += 1
        # deterministic for n < 3.3 * 10^24
        for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
            if a % n == 0:
                continue
            x = pow(a, d, n)
            if x in (1, n - 1):
                continue
            for _ in range(r - 1):
                x = x * x % n
                if x == n - 1:
                    break
            else:
                return False
        return True


PRIMALITY = _Primality()


def is_prime(n: int) -> bool:
    return PRIMALITY.is_prime(n)


def register_standard_builtins(reg: BuiltinRegistry) -> None:
    """prime, bit, leq, parity, divisibility and base-digit extraction (the
    latter is functional in its first argument, so the evaluator can pin it)."""
    reg.register(Builtin("prime", 1, lambda n: is_prime(n)))
    reg.register(Builtin("bit", 2, lambda i, n: (n >> i) & 1 == 1))
    reg.register(Builtin("leq", 2, lambda a, b: a <= b))
    reg.register(Builtin("even", 1, lambda n: n % 2 == 0))
    reg.register(Builtin("divides", 2, lambda a, b: a != 0 and b % a == 0))
    reg.register(Builtin(
        "base_digit", 4,
        lambda a, y, m, j: m >= 2 and a == (y // m ** j) % m,
        pin=lambda y, m, j: (y // m ** j) % m if m >= 2 else None,
    ))


def standard_registry() -> BuiltinRegistry:
    reg = BuiltinRegistry()
    register_standard_builtins(reg)
    return reg


# ---------------------------------------------------------------------------
# evaluation sessions


def _conjuncts(f: Formula) -> Iterable[Formula]:
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, And):
            stack.append(node.right)
            stack.append(node.left)
        else:
            yield node


@dataclass
class _PinSpec:
    kind: str  # "eq" | "modrep" | "builtin"
    source: Formula


class EvalSession:
    """Evaluation of expressions over one graph, with a shared memo cache.

    A session is deterministic and single-threaded; distinct sessions are
    independent.
    """

    def __init__(self, graph: LabelledGraph, registry: BuiltinRegistry | None = None,
                 trace_bindings: bool = False, optimize: bool = True):
        self.graph = graph
        self.registry = registry or standard_registry()
        self._memo: dict[tuple, int] = {}
        self._residues: dict[tuple, int] = {}
        self._plans: dict[int, dict] = {}
        self.optimize = optimize
        self.trace_bindings = trace_bindings
        self.binding_maxima: dict[str, int] = {}

    # -- public API

    def value(self, e: Expression, env: Valuation | None = None):
        env = dict(env or {})
        self._check_env(e, env)
        if is_term(e):
            return self.term(e, env)
        return self.formula(e, env)

    def _check_env(self, e: Expression, env: Valuation) -> None:
        fv, fn = free_vars(e)
        missing = sorted((fv | fn) - set(env))
        if missing:
            raise EvalError(f"unbound variables {missing}")
        for v in fv:
            if not (0 <= env[v] < self.graph.n):
                raise EvalError(f"vertex variable {v} out of range")

    # -- terms

    def term(self, t: Term, env: Valuation) -> int:
        if isinstance(t, Num):
            return t.value
        if isinstance(t, Ord):
            return self.graph.n
        if isinstance(t, NumVar):
            return env[t.name]
        if isinstance(t, Add):
            return self.term(t.left, env) + self.term(t.right, env)
        if isinstance(t, Mul):
            return self.term(t.left, env) * self.term(t.right, env)
        if isinstance(t, Count):
            return self._count(t, env)
        raise EvalError(f"not a term: {type(t).__name__}")

    # -- formulas

    def formula(self, f: Formula, env: Valuation) -> bool:
        if isinstance(f, BoolConst):
            return f.value
        if isinstance(f, VertexEq):
            return env[f.left] == env[f.right]
        if isinstance(f, Edge):
            return self.graph.has_edge(env[f.left], env[f.right])
        if isinstance(f, Label):
            if f.index < 1 or f.index > self.graph.label_width:
                raise EvalError(f"label P{f.index} outside label width {self.graph.label_width}")
            return self.graph.labels[env[f.var]][f.index - 1] == 1
        if isinstance(f, Compare):
            a = self.term(f.left, env)
            b = self.term(f.right, env)
            return a <= b if f.op == "<=" else a < b if f.op == "<" else a == b
        if isinstance(f, Not):
            return not self.formula(f.body, env)
        if isinstance(f, And):
            return self.formula(f.left, env) and self.formula(f.right, env)
        if isinstance(f, Or):
            return self.formula(f.left, env) or self.formula(f.right, env)
        if isinstance(f, CountQuant):
            if f.threshold == 0:
                return True
            return self._count(self._sugar_count(f), env, limit=f.threshold) >= f.threshold
        if isinstance(f, Exists):
            return self._count(self._sugar_count(f), env, limit=1) >= 1
        if isinstance(f, BuiltinRel):
            b = self.registry.get(f.name)
            if len(f.args) != b.arity:
                raise EvalError(f"builtin {f.name!r} expects {b.arity} arguments, got {len(f.args)}")
            return bool(b.func(*(self.term(a, env) for a in f.args)))
        if isinstance(f, ModRepr):
            return self._modrep_residue(f, env) == self.term(f.result, env)
        raise EvalError(f"not a formula: {type(f).__name__}")

    @staticmethod
    def _sugar_count(f: CountQuant | Exists) -> Count:
        cnt = getattr(f, "_sugar_count_node", None)
        if cnt is None:
            if isinstance(f, CountQuant):
                cnt = Count((f.var,), (), f.body)
            else:
                cnt = Count(f.vertex_vars, f.binders, f.body)
            object.__setattr__(f, "_sugar_count_node", cnt)
        return cnt

    # -- modular representation

    def _modrep_key(self, f: ModRepr, env: Valuation) -> tuple:
        fv1, fn1 = free_vars(f.bit_formula)
        fv2, fn2 = free_vars(f.bound)
        fv3, fn3 = free_vars(f.modulus)
        names = sorted((fv1 | fv2 | fv3) | ((fn1 - {f.bit_var}) | fn2 | fn3))
        return (id(f), tuple(env[n] for n in names))

    def _modrep_residue(self, f: ModRepr, env: Valuation) -> int:
        key = self._modrep_key(f, env)
        hit = self._residues.get(key)
        if hit is not None:
            return hit
        p = self.term(f.modulus, env)
        if p == 0:
            raise EvalError("modulus 0 in modular representation")
        bound = self.term(f.bound, env)
        inner = dict(env)
        acc = 0
        pw = 1 % p
        for i in range(bound):
            inner[f.bit_var] = i
            self._trace(f.bit_var, i)
            if self.formula(f.bit_formula, inner):
                acc = (acc + pw) % p
            pw = pw * 2 % p
        self._residues[key] = acc
        return acc

    # -- counting

    def _trace(self, name: str, value: int) -> None:
        if self.trace_bindings:
            prev = self.binding_maxima.get(name, -1)
            if value > prev:
                self.binding_maxima[name] = value

    def _count_plan(self, c: Count) -> dict:
        """Static per-node analysis: free variables, edge guards narrowing
        each vertex binder, and the conjunct pinning each number binder."""
        plan = self._plans.get(id(c))
        if plan is not None:
            return plan
        fv, fn = free_vars(c)
        if not self.optimize:
            plan = {"free": tuple(sorted(fv | fn)),
                    "guards": [None] * len(c.vertex_vars),
                    "pins": [None] * len(c.binders)}
            self._plans[id(c)] = plan
            return plan
        conj = list(_conjuncts(c.body))
        vertex_guards: list[str | None] = []
        for k, var in enumerate(c.vertex_vars):
            later = set(c.vertex_vars[k + 1:])
            guard = None
            for g in conj:
                if isinstance(g, Edge) and var in (g.left, g.right):
                    other = g.left if g.right == var else g.right
                    if other != var and other not in later:
                        guard = other
                        break
            vertex_guards.append(guard)
        binder_names = [n for n, _ in c.binders]
        pins: list[tuple[str, Formula | Term] | None] = []
        for j, (name, _) in enumerate(c.binders):
            later = set(binder_names[j + 1:])
            pin: tuple[str, Formula | Term] | None = None
            for g in conj:
                if isinstance(g, Compare) and g.op == "=":
                    for var_side, term_side in ((g.left, g.right), (g.right, g.left)):
                        if isinstance(var_side, NumVar) and var_side.name == name:
                            tfn = free_vars(term_side)[1]
                            if name not in tfn and not (tfn & later):
                                pin = ("eq", term_side)
                                break
                    if pin:
                        break
                if isinstance(g, ModRepr) and isinstance(g.result, NumVar) and g.result.name == name:
                    parts_free: set[str] = set()
                    for part in (g.bit_formula, g.bound, g.modulus):
                        parts_free |= free_vars(part)[1]
                    parts_free.discard(g.bit_var)
                    if name not in parts_free and not (parts_free & later):
                        pin = ("modrep", g)
                        break
                if isinstance(g, BuiltinRel) and g.args and isinstance(g.args[0], NumVar) \
                        and g.args[0].name == name:
                    b = self.registry.get(g.name)
                    if b.pin is not None:
                        rest_free: set[str] = set()
                        for a in g.args[1:]:
                            rest_free |= free_vars(a)[1]
                        if name not in rest_free and not (rest_free & later):
                            pin = ("builtin", g)
                            break
            pins.append(pin)
        plan = {"free": tuple(sorted(fv | fn)), "guards": vertex_guards, "pins": pins}
        self._plans[id(c)] = plan
        return plan

    def _count(self, c: Count, env: Valuation, limit: int | None = None) -> int:
        plan = self._count_plan(c)
        key = (id(c), tuple(env[n] for n in plan["free"]))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        inner = dict(env)
        total = 0

        def vertex_loop(k: int) -> bool:
            if k == len(c.vertex_vars):
                return binder_loop(0)
            var = c.vertex_vars[k]
            guard = plan["guards"][k]
            if guard is not None and guard in inner:
                candidates = self.graph.neighbours(inner[guard])
            else:
                candidates = self.graph.vertices()
            for v in candidates:
                inner[var] = v
                if vertex_loop(k + 1):
                    return True
            return False

        def pinned_value(pin: tuple[str, Formula | Term]) -> int | None:
            kind, src = pin
            if kind == "eq":
                return self.term(src, inner)
            if kind == "modrep":
                return self._modrep_residue(src, inner)
            b = self.registry.get(src.name)
            return b.pin(*(self.term(a, inner) for a in src.args[1:]))

        def binder_loop(j: int) -> bool:
            nonlocal total
            if j == len(c.binders):
                if self.formula(c.body, inner):
                    total += 1
                    if limit is not None and total >= limit:
                        return True
                return False
            name, bound_term = c.binders[j]
            bound = self.term(bound_term, inner)
            pin = plan["pins"][j]
            if pin is not None:
                value = pinned_value(pin)
                if value is not None:
                    if 0 <= value < bound:
                        inner[name] = value
                        self._trace(name, value)
                        if binder_loop(j + 1):
                            return True
                    return False
            for i in range(bound):
                inner[name] = i
                self._trace(name, i)
                if binder_loop(j + 1):
                    return True
            return False

        hit_limit = vertex_loop(0)
        if not hit_limit:
            self._memo[key] = total
        return total


def evaluate(graph: LabelledGraph, expr: Expression, valuation: Valuation | None = None,
             registry: BuiltinRegistry | None = None):
    """One-shot evaluation: the exact value of a term or the truth of a
    formula under the given valuation."""
    return EvalSession(graph, registry).value(expr, valuation)


def query_set(graph: LabelledGraph, phi: Formula, registry: BuiltinRegistry | None = None,
              session: EvalSession | None = None) -> frozenset[int]:
    """{v : G |= phi(v)} for a formula with exactly one free vertex variable
    and no free number variables."""
    fv, fn = free_vars(phi)
    if len(fv) != 1 or fn:
        raise EvalError(
            f"query formulas need exactly one free vertex variable and no free "
            f"number variables, got vertex={sorted(fv)} number={sorted(fn)}")
    (var,) = fv
    sess = session or EvalSession(graph, registry)
    return frozenset(v for v in graph.vertices() if sess.formula(phi, {var: v}))
