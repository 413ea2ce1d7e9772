"""Formula-to-formula compilers between guarded and modal counting fragments.

Two translations are provided:

  * gc_to_mc: the counting-quantifier fragment, via disjoint DNF splitting of
    the guarded body and a disjunction over threshold compositions;
  * guarded_to_modal: the full two-variable counting logic, via prime
    fingerprinting of the receiver-side relations (valid on graphs of order at
    least a computed n0).

Both come with brute-force equivalence oracles over enumerated or sampled
graphs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .bounds import annotation_degrees
from .evaluate import BuiltinRegistry, EvalSession, is_prime, standard_registry
from .formulas import (And, BoolConst, BuiltinRel, Compare, Count, CountQuant, Edge, Exists,
                       Formula, FreshNames, ModRepr, Mul, Not, Num, NumVar, Or, VertexEq,
                       all_number_var_names, and_all, children, classify_fragment,
                       free_number_vars, free_vertex_vars, guard_split, is_formula, or_all,
                       ord_power, rebuild, substitute_number_var)
from .graphs import CapExceeded, LabelledGraph, enumerate_graphs, random_graph
from .normalform import to_simple_form
from .primes import prime_table

LN2_UPPER = Fraction(6931472, 10 ** 7)  # rational upper bound on ln 2


class TranslationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# GC -> MC (counting-quantifier fragment)


def _push_nnf(f: Formula, positive: bool) -> list[list[tuple[bool, Formula]]]:
    """DNF over literal units; a unit is any non-And/Or/Not node."""
    if isinstance(f, Not):
        return _push_nnf(f.body, not positive)
    if isinstance(f, BoolConst):
        return [[]] if f.value == positive else []
    if (isinstance(f, And) and positive) or (isinstance(f, Or) and not positive):
        out = []
        for left in _push_nnf(f.left, positive):
            for right in _push_nnf(f.right, positive):
                out.append(left + right)
        return out
    if isinstance(f, (And, Or)):
        return _push_nnf(f.left, positive) + _push_nnf(f.right, positive)
    return [[(positive, f)]]


def _disjointify(disjuncts: list[list[tuple[bool, Formula]]]) -> list[list[tuple[bool, Formula]]]:
    """Pairwise-disjoint refinement: each disjunct is split against the
    earlier ones by the position of the first failing literal."""
    out: list[list[tuple[bool, Formula]]] = []
    for i, d in enumerate(disjuncts):
        pool = [list(d)]
        for j in range(i):
            prev = disjuncts[j]
            refined = []
            for conj in pool:
                for t, lit in enumerate(prev):
                    pos, unit = lit
                    prefix = [l for l in prev[:t]]
                    refined.append(conj + prefix + [(not pos, unit)])
            pool = refined
        out.extend(pool)
    return out


def _literal_formula(lit: tuple[bool, Formula]) -> Formula:
    pos, unit = lit
    return unit if pos else Not(unit)


def _split_guarded_disjunct(conj: list[tuple[bool, Formula]], x: str, xp: str) \
        -> tuple[list[Formula], list[Formula]] | None:
    """Simplify a conjunct under the guard E(x, x') and split it into an
    x-side and an x'-side; None when the conjunct dies under the guard."""
    x_side: list[Formula] = []
    xp_side: list[Formula] = []
    for pos, unit in conj:
        if isinstance(unit, Edge) and {unit.left, unit.right} == {x, xp}:
            if pos:
                continue  # true under the guard
            return None  # !E contradicts the guard
        if isinstance(unit, VertexEq) and {unit.left, unit.right} == {x, xp}:
            if pos:
                return None  # x = x' contradicts the guard (simple graphs)
            continue
        if isinstance(unit, VertexEq) and unit.left == unit.right:
            if pos:
                continue
            return None
        fv = free_vertex_vars(unit)
        if fv <= {x}:
            x_side.append(_literal_formula((pos, unit)))
        elif fv <= {xp}:
            xp_side.append(_literal_formula((pos, unit)))
        else:
            raise TranslationError(
                f"disjunct unit with two free vertex variables survived DNF: {unit}")
    return x_side, xp_side


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _translate_guarded_quant(f: CountQuant) -> Formula:
    split = guard_split(f.body, f.var)
    if split is None:
        raise TranslationError("counting quantifier without a guard shape")
    guard, psi = split
    xp = f.var
    x = guard.left

    if f.threshold == 0:
        return BoolConst(True)

    disjuncts = _disjointify(_push_nnf(psi, True))
    splits = []
    for conj in disjuncts:
        split = _split_guarded_disjunct(conj, x, xp)
        if split is not None:
            splits.append(split)
    k = len(splits)
    if k == 0:
        return BoolConst(False)

    out_disjuncts: list[Formula] = []
    for comp in _compositions(f.threshold, k):
        parts: list[Formula] = []
        for i, count in enumerate(comp):
            if count == 0:
                continue
            x_side, xp_side = splits[i]
            neighbour = CountQuant(count, xp, And(guard, and_all(xp_side)))
            parts.append(and_all(x_side + [neighbour]))
        out_disjuncts.append(and_all(parts))
    return or_all(out_disjuncts)


def gc_to_mc(phi: Formula) -> Formula:
    """Translate a GC formula to an equivalent MC formula (all simple
    undirected labelled graphs)."""
    report = classify_fragment(phi)
    if not report.is_GC:
        raise TranslationError("input is not in GC")

    def go(node):
        node = rebuild(node, [go(c) for c in children(node)])
        if isinstance(node, CountQuant):
            return _translate_guarded_quant(node)
        return node

    out = go(phi)
    if not classify_fragment(out).is_MC:
        raise TranslationError("internal error: translation output is not MC")
    return out


# ---------------------------------------------------------------------------
# guarded -> modal for the full two-variable counting logic


def _simplify_bools(f: Formula) -> Formula:
    def go(node):
        node = rebuild(node, [go(c) for c in children(node)])
        if isinstance(node, And):
            if node.left == BoolConst(True):
                return node.right
            if node.right == BoolConst(True):
                return node.left
            if BoolConst(False) in (node.left, node.right):
                return BoolConst(False)
        if isinstance(node, Or):
            if node.left == BoolConst(False):
                return node.right
            if node.right == BoolConst(False):
                return node.left
            if BoolConst(True) in (node.left, node.right):
                return BoolConst(True)
        if isinstance(node, Not) and isinstance(node.body, BoolConst):
            return BoolConst(not node.body.value)
        return node

    return go(f)


def guard_scope_simplify(psi: Formula, x: str, xp: str) -> Formula:
    """Inside the scope of a guard E(x, x'): edge atoms between x and x'
    become true and equality atoms become false.  The rewrite stops at any
    counting node rebinding a vertex variable."""

    def go(node):
        if isinstance(node, Edge) and {node.left, node.right} == {x, xp}:
            return BoolConst(True)
        if isinstance(node, VertexEq) and {node.left, node.right} == {x, xp}:
            return BoolConst(False)
        if isinstance(node, (Count, Exists)) and node.vertex_vars:
            return node
        if isinstance(node, CountQuant):
            return node
        return rebuild(node, [go(c) for c in children(node)])

    return _simplify_bools(go(psi))


@dataclass
class HashingStep:
    """Record of one guarded-counting rewrite (one application of the prime
    fingerprinting construction)."""

    receiver: str                      # x, the free variable of the rewritten equation
    neighbour: str                     # x', the bound variable
    q: int
    k0: int
    d: int
    c: int
    n0: int
    x_formulas: list[tuple[Formula, tuple[str, ...]]] = field(default_factory=list)
    zetas: list[ModRepr] = field(default_factory=list)
    chi_primes: list[Formula] = field(default_factory=list)
    original_equation: Formula | None = None
    phi_prime: Formula | None = None
    z_name: str = ""
    z_i_names: tuple[str, ...] = ()


@dataclass
class TranslationResult:
    formula: Formula
    n0: int
    c: int
    steps: list[HashingStep]

    @property
    def diagnostics(self) -> dict:
        return {
            "n0": self.n0,
            "c": self.c,
            "steps": [
                {"q": s.q, "k0": s.k0, "d": s.d, "c": s.c, "n0": s.n0}
                for s in self.steps
            ],
        }


def _ln_upper(x: int) -> Fraction:
    """Rational upper bound on ln x (x >= 1)."""
    return LN2_UPPER * x.bit_length()


def threshold_order(q: int, exponent: int) -> int:
    """Minimal n0 >= 2 such that 4 q^2 ln(2 q^2 n^exponent) <= n for all
    n >= n0, using a sound rational upper bound for ln.

    With c = exponent + 1 this makes n^c >= 4 q^2 n^exponent
    ln(2 q^2 n^exponent) hold for every n >= n0.
    """

    def ok(n: int) -> bool:
        return 4 * q * q * _ln_upper(2 * q * q * n ** exponent) <= n

    # find a power of two T with the doubling-stability property and a fully
    # checked block [T, 2T]; past it, growth of the left side dominates
    t = 2
    while not (t >= 4 * q * q * LN2_UPPER * exponent and all(ok(n) for n in range(t, 2 * t + 1))):
        t *= 2
        if t > 1 << 30:
            raise TranslationError("threshold search exceeded 2^30")
    n0 = t
    while n0 > 2 and ok(n0 - 1):
        n0 -= 1
    return n0


def _prime_atom(var: str) -> BuiltinRel:
    return BuiltinRel("prime", (NumVar(var),))


class _GuardedToModal:
    def __init__(self, phi: Formula, free_degrees: dict[str, int] | None):
        self.simple = to_simple_form(phi, free_degrees)
        self.degrees = annotation_degrees(self.simple, free_degrees)
        self.d = max([1] + list(self.degrees.values()))
        self.names = FreshNames(all_number_var_names(self.simple) | set(self.degrees), prefix="z")
        self.steps: list[HashingStep] = []

    def run(self) -> TranslationResult:
        out = self._rewrite(self.simple)
        report = classify_fragment(out)
        if not report.is_MFOC:
            raise TranslationError("internal error: translation output is not MFO+C")
        n0 = max([2] + [s.n0 for s in self.steps])
        c = max([0] + [s.c for s in self.steps])
        return TranslationResult(out, n0, c, self.steps)

    def _rewrite(self, node):
        node = rebuild(node, [self._rewrite(c) for c in children(node)])
        if (isinstance(node, Compare) and node.op == "=" and isinstance(node.left, NumVar)
                and isinstance(node.right, Count) and node.right.vertex_vars):
            return self._rewrite_equation(node)
        return node

    def _rewrite_equation(self, eq: Compare) -> Formula:
        cnt: Count = eq.right
        if len(cnt.vertex_vars) != 1:
            raise TranslationError("counting over several vertex variables is outside GFO+C")
        xp = cnt.vertex_vars[0]
        split = guard_split(cnt.body, xp)
        if split is None:
            raise TranslationError("guarded counting without the E(x, x') guard shape")
        guard, rest = split
        x = guard.left
        psi = guard_scope_simplify(rest, x, xp)
        if x not in free_vertex_vars(psi):
            # the simplification made the count modal; no hashing needed
            return Compare("=", eq.left, Count((xp,), cnt.binders, And(guard, psi)))

        # enumerate maximal x-formulas and replace them by their neighbour probes
        x_formulas: list[tuple[Formula, tuple[str, ...]]] = []
        z = self.names.fresh("z")
        z_is: list[str] = []
        zetas: list[ModRepr] = []
        chi_primes: list[Formula] = []

        def chi_index(chi: Formula) -> int:
            for i, (known, _) in enumerate(x_formulas):
                if known == chi:
                    return i
            params = tuple(sorted(free_number_vars(chi)))
            x_formulas.append((chi, params))
            z_is.append(self.names.fresh("z"))
            zetas.append(self._build_zeta(chi, params, x, z, z_is[-1]))
            chi_primes.append(self._build_chi_prime(chi, x, xp, z, z_is[-1], zetas[-1]))
            return len(x_formulas) - 1

        def replace(node):
            if is_formula(node):
                fv = free_vertex_vars(node)
                if fv == frozenset([x]):
                    return chi_primes[chi_index(node)]
                if x not in fv:
                    # an x'-formula or arithmetical part: no free x inside
                    return node
            return rebuild(node, [replace(c) for c in children(node)])

        psi_prime = replace(psi)

        q = len(x_formulas)
        k0 = max(len(params) for _, params in x_formulas)
        exponent = self.d * k0 + 2
        c = exponent + 1
        n0 = threshold_order(q, exponent)

        inner_eq = Compare("=", eq.left, Count((xp,), cnt.binders, And(guard, psi_prime)))
        prefix = and_all(list(zetas) + [inner_eq])
        phi_prime = Exists((), tuple((zi, NumVar(z)) for zi in z_is), prefix)

        all_primes = Count((), ((z, ord_power(c)),), _prime_atom(z))
        good_primes = Count((), ((z, ord_power(c)),), And(_prime_atom(z), phi_prime))
        hashed = Compare("<", all_primes, Mul(Num(2), good_primes))

        self.steps.append(HashingStep(
            receiver=x, neighbour=xp, q=q, k0=k0, d=self.d, c=c, n0=n0,
            x_formulas=x_formulas, zetas=zetas, chi_primes=chi_primes,
            original_equation=eq, phi_prime=phi_prime, z_name=z, z_i_names=tuple(z_is),
        ))
        return hashed

    def _build_zeta(self, chi: Formula, params: tuple[str, ...], x: str, z: str, z_i: str) -> ModRepr:
        k = len(params)
        bit_var = self.names.fresh("w")
        if k == 0:
            bit_formula = chi
        else:
            digits = [self.names.fresh("a") for _ in params]
            subst = chi
            for p, a in zip(params, digits):
                subst = substitute_number_var(subst, p, NumVar(a))
            pins = [BuiltinRel("base_digit", (NumVar(a), NumVar(bit_var), ord_power(self.d), Num(j)))
                    for j, a in enumerate(digits)]
            bit_formula = Exists((), tuple((a, ord_power(self.d)) for a in digits),
                                 and_all(pins + [subst]))
        return ModRepr(bit_var, bit_formula, ord_power(self.d * k), NumVar(z), NumVar(z_i))

    def _build_chi_prime(self, chi: Formula, x: str, xp: str, z: str, z_i: str,
                         zeta: ModRepr) -> Formula:
        return Exists((x,), (), And(Edge(xp, x), And(zeta, chi)))


def guarded_to_modal(phi: Formula, free_degrees: dict[str, int] | None = None) -> TranslationResult:
    """Translate a guarded two-variable counting formula with at most one free
    vertex variable into a modal one, equivalent on all graphs of order at
    least the reported n0 (free number variables within their degree ranges)."""
    report = classify_fragment(phi)
    if not report.is_GFOC:
        raise TranslationError("input is not in GFO+C")
    if len(report.free_vertex_vars) > 1:
        raise TranslationError("at most one free vertex variable is supported")
    missing = sorted(v for v in report.free_number_vars if v not in (free_degrees or {}))
    if missing:
        raise TranslationError(f"free number variables without degrees: {missing}")
    return _GuardedToModal(phi, free_degrees).run()


# ---------------------------------------------------------------------------
# good primes and exact relation encodings


def relation_numbers(graph: LabelledGraph, x_formulas: list[tuple[Formula, tuple[str, ...]]],
                     d: int, registry: BuiltinRegistry | None = None,
                     bit_cap: int = 1 << 20) -> dict[tuple[int, int], int]:
    """Exact big-integer encodings N_i(v) of the receiver-side relations:
    bit <a_1, ..., a_k> (base n^d) of N_i(v) is 1 iff chi_i(v, a_1, ..., a_k).
    """
    sess = EvalSession(graph, registry)
    m = graph.n ** d
    out: dict[tuple[int, int], int] = {}
    for i, (chi, params) in enumerate(x_formulas):
        k = len(params)
        bits = m ** k
        if bits > bit_cap:
            raise CapExceeded(f"relation encoding needs {bits} bits, cap {bit_cap}")
        fv = free_vertex_vars(chi)
        if len(fv) != 1:
            raise TranslationError("x-formulas must have exactly one free vertex variable")
        (xvar,) = fv
        for v in graph.vertices():
            value = 0
            env = {xvar: v}
            for code in range(bits):
                rest = code
                for j, p in enumerate(params):
                    env[p] = rest % m
                    rest //= m
                if sess.formula(chi, env):
                    value |= 1 << code
            out[(i, v)] = value
    return out


def good_prime_check(graph: LabelledGraph, x_formulas: list[tuple[Formula, tuple[str, ...]]],
                     d: int, p: int, registry: BuiltinRegistry | None = None,
                     numbers: dict[tuple[int, int], int] | None = None,
                     bit_cap: int = 1 << 20) -> bool:
    """True iff all distinct relation encodings stay distinct modulo p."""
    if p < 2:
        raise ValueError("prime candidates must be at least 2")
    if numbers is None:
        numbers = relation_numbers(graph, x_formulas, d, registry, bit_cap)
    distinct = set(numbers.values())
    return len({n % p for n in distinct}) == len(distinct)


def good_prime_fraction(graph: LabelledGraph, x_formulas, d: int, c: int,
                        registry: BuiltinRegistry | None = None,
                        bit_cap: int = 1 << 20) -> Fraction:
    """Fraction of good primes among all primes <= n^c."""
    numbers = relation_numbers(graph, x_formulas, d, registry, bit_cap)
    primes = prime_table(graph.n ** c)
    good = sum(1 for p in primes if good_prime_check(graph, x_formulas, d, p, numbers=numbers))
    return Fraction(good, len(primes))


def find_good_prime(graph: LabelledGraph, x_formulas, d: int, c: int,
                    registry: BuiltinRegistry | None = None,
                    bit_cap: int = 1 << 20) -> int:
    numbers = relation_numbers(graph, x_formulas, d, registry, bit_cap)
    for p in prime_table(graph.n ** c):
        if good_prime_check(graph, x_formulas, d, p, numbers=numbers):
            return p
    raise TranslationError("no good prime found (the supply bound is violated?)")


def residues_for(step: HashingStep, graph: LabelledGraph, p: int,
                 registry: BuiltinRegistry | None = None,
                 bit_cap: int = 1 << 20) -> dict[tuple[int, int], int]:
    numbers = relation_numbers(graph, step.x_formulas, step.d, registry, bit_cap)
    return {key: n % p for key, n in numbers.items()}


def verify_hashing_claims(step: HashingStep, graph: LabelledGraph, p: int | None = None,
                          registry: BuiltinRegistry | None = None, rng: random.Random | None = None,
                          samples: int = 6, bit_cap: int = 1 << 20) -> dict:
    """Check the translation's claim chain on a concrete graph at a good
    prime: the residue formulas pin n_i(v, p), the neighbour probes round-trip
    across an edge, and phi' agrees with the rewritten equation."""
    rng = rng or random.Random(0)
    if p is None:
        p = find_good_prime(graph, step.x_formulas, step.d, step.c, registry, bit_cap)
    elif not good_prime_check(graph, step.x_formulas, step.d, p, registry, bit_cap=bit_cap):
        raise TranslationError(f"prime {p} is not good for this graph")
    res = residues_for(step, graph, p, registry, bit_cap)
    sess = EvalSession(graph, registry)
    n = graph.n
    m = n ** step.d
    x, xp, z = step.receiver, step.neighbour, step.z_name

    claim1 = True
    for i, zeta in enumerate(step.zetas):
        zi = step.z_i_names[i]
        for v in graph.vertices():
            good = res[(i, v)]
            if not sess.formula(zeta, {x: v, z: p, zi: good}):
                claim1 = False
            if p > 1 and sess.formula(zeta, {x: v, z: p, zi: (good + 1) % p}):
                claim1 = False

    claim2 = True
    for i, (chi, params) in enumerate(step.x_formulas):
        chi_prime = step.chi_primes[i]
        zi = step.z_i_names[i]
        for u, w in sorted(graph.edges):
            for v, vp in ((u, w), (w, u)):
                for _ in range(samples):
                    assignment = {name: rng.randrange(m) for name in params}
                    lhs = sess.formula(chi, {x: v, **assignment})
                    rhs = sess.formula(chi_prime,
                                       {xp: vp, z: p, zi: res[(i, v)], **assignment})
                    if lhs != rhs:
                        claim2 = False

    claim4 = True
    eq = step.original_equation
    free_nums = sorted(free_number_vars(eq))
    for v in graph.vertices():
        for _ in range(samples):
            assignment = {name: rng.randrange(n + 2) for name in free_nums}
            lhs = sess.formula(eq, {x: v, **assignment})
            rhs = sess.formula(step.phi_prime, {x: v, z: p, **assignment})
            if lhs != rhs:
                claim4 = False

    return {"prime": p, "claim1": claim1, "claim2": claim2, "claim4": claim4,
            "all": claim1 and claim2 and claim4}


# ---------------------------------------------------------------------------
# brute-force equivalence oracle


@dataclass(frozen=True)
class Counterexample:
    graph: LabelledGraph
    assignment: dict
    lhs_value: object
    rhs_value: object


def _assignments(graph: LabelledGraph, vertex_vars: tuple[str, ...]):
    if not vertex_vars:
        yield {}
        return
    def rec(i, env):
        if i == len(vertex_vars):
            yield dict(env)
            return
        for v in graph.vertices():
            env[vertex_vars[i]] = v
            yield from rec(i + 1, env)
    yield from rec(0, {})


def equivalence_check(lhs: Formula, rhs: Formula, *, enum_max: int | None = None,
                      labels: int = 0, min_order: int = 0,
                      samples: int | None = None, order: int | None = None, seed: int = 0,
                      registry: BuiltinRegistry | None = None,
                      enum_cap: int = 7) -> Counterexample | None:
    """Exhaustively (enum_max) or randomly (samples/order/seed) evaluate both
    formulas on all vertex assignments; the first disagreement is returned,
    None means pass.  Assignments range over the union of the free vertex
    variables (a translation may simplify a variable away); free number
    variables are not supported."""
    lv, ln_ = free_vertex_vars(lhs), free_number_vars(lhs)
    rv, rn = free_vertex_vars(rhs), free_number_vars(rhs)
    if ln_ or rn:
        raise TranslationError(
            f"free number variables are not supported by the oracle: "
            f"{sorted(ln_ | rn)}")
    vertex_vars = tuple(sorted(lv | rv))

    def graphs():
        if enum_max is not None:
            for n in range(min_order, enum_max + 1):
                yield from enumerate_graphs(n, labels, cap=max(enum_cap, enum_max))
        if samples is not None:
            if order is None:
                raise TranslationError("random sampling needs an order")
            rng = random.Random(seed)
            for _ in range(samples):
                yield random_graph(rng, order, labels)

    for g in graphs():
        sess = EvalSession(g, registry)
        for env in _assignments(g, vertex_vars):
            a = sess.formula(lhs, env)
            b = sess.formula(rhs, env)
            if a != b:
                return Counterexample(g, env, a, b)
    return None
