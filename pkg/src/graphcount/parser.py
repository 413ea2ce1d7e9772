"""Recursive-descent parser for the formula surface syntax.

Grammar sketch (operator precedence: counting > comparisons > ! > & > |):

    formula  := or_f
    or_f     := and_f ('|' and_f)*
    and_f    := not_f ('&' not_f)*
    not_f    := '!' not_f | atom
    atom     := 'tt' | 'ff' | '(' formula ')' | 'E(' x ',' x ')' | P<k> '(' x ')'
              | x '=' x | 'exists^{>=' INT '}' x '.' or_f
              | 'exists' '(' binders ')' '.' or_f
              | 'builtin' name '(' term,* ')'
              | 'modrep' '(' y ';' formula ';' term ';' term ';' term ')'
              | term ('<='|'<'|'=') term
    term     := mul ('+' mul)*        mul := factor ('*' factor)*
    factor   := INT | 'ord' | y | '#' '(' binders ')' '.' '(' formula ')' | '(' term ')'
    binders  := (x | y '<' term) (',' ...)*

Vertex variables are x1, x2, ...; number variables are any other lowercase
identifiers (y, y1, z3, ...).  Quantifier bodies extend as far right as
possible at the current parenthesis level.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .formulas import (Add, And, BoolConst, BuiltinRel, Compare, Count, CountQuant, Edge, Exists,
                       Formula, FormulaError, Label, ModRepr, Mul, Not, Num, NumVar, Or, Ord, Term,
                       VertexEq, all_vertex_vars)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


_TOKEN_RE = re.compile(r"""
    (?P<WS>\s+)
  | (?P<CARET_GE>\^\{>=)
  | (?P<LE><=)
  | (?P<INT>\d+)
  | (?P<PLABEL>P\d+)
  | (?P<ID>[A-Za-z][A-Za-z0-9_]*)
  | (?P<SYM>[(),.;#&|!+*<={}])
""", re.VERBOSE)

_KEYWORDS = {"ord", "tt", "ff", "exists", "builtin", "modrep", "E"}
_XVAR_RE = re.compile(r"x\d+$")


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        t = m.group()
        if kind != "WS":
            toks.append(_Tok(kind, t, line, col))
        nl = t.count("\n")
        if nl:
            line += nl
            col = len(t) - t.rfind("\n")
        else:
            col += len(t)
        pos = m.end()
    toks.append(_Tok("EOF", "", line, col))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.i = 0

    def peek(self, ahead: int = 0) -> _Tok:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def error(self, msg: str) -> ParseError:
        tok = self.peek()
        shown = tok.text or "end of input"
        return ParseError(f"{msg}, found {shown!r}", tok.line, tok.column)

    def expect(self, text: str) -> _Tok:
        tok = self.peek()
        if tok.text != text:
            raise self.error(f"expected {text!r}")
        return self.next()

    # --- variables

    def is_xvar(self, tok: _Tok) -> bool:
        return tok.kind == "ID" and bool(_XVAR_RE.match(tok.text))

    def is_yvar(self, tok: _Tok) -> bool:
        return (tok.kind == "ID" and tok.text not in _KEYWORDS
                and not _XVAR_RE.match(tok.text) and tok.text[0].islower())

    def xvar(self) -> str:
        tok = self.peek()
        if not self.is_xvar(tok):
            raise self.error("expected a vertex variable x<k>")
        return self.next().text

    # --- terms

    def term(self) -> Term:
        t = self.mul_term()
        while self.peek().text == "+":
            self.next()
            t = Add(t, self.mul_term())
        return t

    def mul_term(self) -> Term:
        t = self.factor()
        while self.peek().text == "*":
            self.next()
            t = Mul(t, self.factor())
        return t

    def factor(self) -> Term:
        tok = self.peek()
        if tok.kind == "INT":
            self.next()
            return Num(int(tok.text))
        if tok.text == "ord":
            self.next()
            return Ord()
        if tok.text == "#":
            self.next()
            self.expect("(")
            vertex_vars, binders = self.binders()
            self.expect(")")
            self.expect(".")
            self.expect("(")
            body = self.formula()
            self.expect(")")
            return Count(vertex_vars, binders, body)
        if tok.text == "(":
            self.next()
            t = self.term()
            self.expect(")")
            return t
        if self.is_yvar(tok):
            self.next()
            return NumVar(tok.text)
        raise self.error("expected a term")

    def binders(self) -> tuple[tuple[str, ...], tuple[tuple[str, Term], ...]]:
        vertex_vars: list[str] = []
        num_binders: list[tuple[str, Term]] = []
        while True:
            tok = self.peek()
            if self.is_xvar(tok):
                if num_binders:
                    raise self.error("vertex binders must precede number binders")
                vertex_vars.append(self.next().text)
            elif self.is_yvar(tok):
                name = self.next().text
                self.expect("<")
                num_binders.append((name, self.term()))
            else:
                raise self.error("expected a binder x<k> or y<k> < term")
            if self.peek().text != ",":
                break
            self.next()
        return tuple(vertex_vars), tuple(num_binders)

    # --- formulas

    def formula(self) -> Formula:
        f = self.and_formula()
        while self.peek().text == "|":
            self.next()
            f = Or(f, self.and_formula())
        return f

    def and_formula(self) -> Formula:
        f = self.not_formula()
        while self.peek().text == "&":
            self.next()
            f = And(f, self.not_formula())
        return f

    def not_formula(self) -> Formula:
        if self.peek().text == "!":
            self.next()
            return Not(self.not_formula())
        return self.atom()

    def atom(self) -> Formula:
        tok = self.peek()
        if tok.text == "tt":
            self.next()
            return BoolConst(True)
        if tok.text == "ff":
            self.next()
            return BoolConst(False)
        if tok.text == "E":
            self.next()
            self.expect("(")
            a = self.xvar()
            self.expect(",")
            b = self.xvar()
            self.expect(")")
            if a == b:
                raise ParseError(f"edge atom E({a},{b}) with equal endpoints", tok.line, tok.column)
            return Edge(a, b)
        if tok.kind == "PLABEL":
            self.next()
            self.expect("(")
            v = self.xvar()
            self.expect(")")
            return Label(int(tok.text[1:]), v)
        if tok.text == "exists":
            self.next()
            if self.peek().kind == "CARET_GE":
                self.next()
                n_tok = self.peek()
                if n_tok.kind != "INT":
                    raise self.error("expected a threshold integer")
                self.next()
                self.expect("}")
                var = self.xvar()
                self.expect(".")
                return CountQuant(int(n_tok.text), var, self.formula())
            self.expect("(")
            vertex_vars, binders = self.binders()
            self.expect(")")
            self.expect(".")
            return Exists(vertex_vars, binders, self.formula())
        if tok.text == "builtin":
            self.next()
            name_tok = self.peek()
            if name_tok.kind != "ID":
                raise self.error("expected a builtin name")
            self.next()
            self.expect("(")
            args = [self.term()]
            while self.peek().text == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
            return BuiltinRel(name_tok.text, tuple(args))
        if tok.text == "modrep":
            self.next()
            self.expect("(")
            if not self.is_yvar(self.peek()):
                raise self.error("expected the bit variable of modrep")
            bit_var = self.next().text
            self.expect(";")
            bit_formula = self.formula()
            self.expect(";")
            bound = self.term()
            self.expect(";")
            modulus = self.term()
            self.expect(";")
            result = self.term()
            self.expect(")")
            return ModRepr(bit_var, bit_formula, bound, modulus, result)
        if self.is_xvar(tok):
            a = self.next().text
            self.expect("=")
            b = self.xvar()
            return VertexEq(a, b)
        if tok.text == "(":
            # either a parenthesized formula or a comparison starting with a
            # parenthesized term; try the formula reading first
            saved = self.i
            try:
                self.next()
                f = self.formula()
                self.expect(")")
                return f
            except ParseError:
                self.i = saved
            return self.comparison()
        return self.comparison()

    def comparison(self) -> Formula:
        left = self.term()
        op_tok = self.peek()
        if op_tok.text not in ("<=", "<", "="):
            raise self.error("expected a comparison operator")
        self.next()
        right = self.term()
        return Compare(op_tok.text, left, right)


def parse_formula(text: str, two_var_fragment: bool = False) -> Formula:
    """Parse a formula; with two_var_fragment, reject vertex variables beyond
    x1, x2."""
    parser = _Parser(_tokenize(text))
    try:
        f = parser.formula()
    except FormulaError as e:
        tok = parser.peek()
        raise ParseError(str(e), tok.line, tok.column) from None
    tok = parser.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.column)
    if two_var_fragment:
        extra = sorted(v for v in all_vertex_vars(f) if v not in ("x1", "x2"))
        if extra:
            raise ParseError(f"vertex variables beyond x1/x2 in a two-variable fragment: {extra}",
                             1, 1)
    return f


def parse_term(text: str) -> Term:
    parser = _Parser(_tokenize(text))
    t = parser.term()
    tok = parser.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.column)
    return t
