"""Recursive-descent parser for polynomials and polyvector fields.

Grammar (whitespace ignored):

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := '-' factor | number ['/' number] | var ['^' int]
            | basis ('^' basis)* | '(' expr ')'
    var    := 'x' digits          basis := 'd' digits

A product of basis vectors is their wedge, so ``x3 * d1^d2`` is the
bivector x3 d1 ^ d2 and ``x1^2 + 3*x2`` is a function (degree -1).
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .polyalg import Poly, PolyVectorField, poly_ring, sort_sign, to_qq

__all__ = ["ExpressionSyntaxError", "parse_poly", "parse_polyvector", "infer_dimension"]


class ExpressionSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int, text: str):
        super().__init__(f"{msg} at position {pos}: {text[:pos]}<here>{text[pos:]}")
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<var>x\d+)|(?P<basis>d\d+)|(?P<op>[-+*/^()]))")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise ExpressionSyntaxError("unexpected character", pos, text)
        kind = mt.lastgroup
        toks.append((kind, mt.group(kind), mt.start(kind)))
        pos = mt.end()
    toks.append(("end", "", len(text)))
    return toks


# intermediate value: {basis index tuple: {exponent: Fraction}}
Value = Dict[Tuple[int, ...], Dict[Tuple[int, ...], Fraction]]


class _Parser:
    def __init__(self, text: str, d: int):
        self.text = text
        self.d = d
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value:
            raise ExpressionSyntaxError(f"expected {value!r}", pos, self.text)

    def fail(self, msg: str):
        raise ExpressionSyntaxError(msg, self.peek()[2], self.text)

    def parse(self) -> Value:
        v = self.expr()
        if self.peek()[0] != "end":
            self.fail("trailing input")
        return v

    def expr(self) -> Value:
        v = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            w = self.term()
            v = _add(v, w if op == "+" else _neg(w))
        return v

    def term(self) -> Value:
        v = self.factor()
        while self.peek()[1] == "*":
            self.take()
            v = _mul(v, self.factor())
        return v

    def factor(self) -> Value:
        kind, val, pos = self.peek()
        if val == "-":
            self.take()
            return _neg(self.factor())
        if kind == "num":
            self.take()
            c = Fraction(int(val))
            if self.peek()[1] == "/":
                self.take()
                k2, v2, p2 = self.take()
                if k2 != "num":
                    raise ExpressionSyntaxError("expected denominator", p2, self.text)
                if int(v2) == 0:
                    raise ExpressionSyntaxError("zero denominator", p2, self.text)
                c /= int(v2)
            return {(): {(0,) * self.d: c}} if c else {}
        if kind == "var":
            self.take()
            idx = int(val[1:])
            if not 1 <= idx <= self.d:
                raise ExpressionSyntaxError(f"variable {val} outside dimension {self.d}", pos, self.text)
            power = 1
            if self.peek()[1] == "^":
                self.take()
                k2, v2, p2 = self.take()
                if k2 != "num":
                    raise ExpressionSyntaxError("expected integer exponent", p2, self.text)
                power = int(v2)
            exp = [0] * self.d
            exp[idx - 1] = power
            return {(): {tuple(exp): Fraction(1)}}
        if kind == "basis":
            idxs = [self._basis(val, pos)]
            self.take()
            while self.peek()[1] == "^":
                self.take()
                k2, v2, p2 = self.take()
                if k2 != "basis":
                    raise ExpressionSyntaxError("expected basis vector after '^'", p2, self.text)
                idxs.append(self._basis(v2, p2))
            sign, key = sort_sign(idxs)
            if sign == 0:
                return {}
            return {key: {(0,) * self.d: Fraction(sign)}}
        if val == "(":
            self.take()
            v = self.expr()
            self.expect(")")
            return v
        self.fail("expected a number, variable, basis vector or '('")

    def _basis(self, val: str, pos: int) -> int:
        idx = int(val[1:])
        if not 1 <= idx <= self.d:
            raise ExpressionSyntaxError(f"basis vector {val} outside dimension {self.d}", pos, self.text)
        return idx - 1


def _add(a: Value, b: Value) -> Value:
    out = {k: dict(v) for k, v in a.items()}
    for k, terms in b.items():
        dst = out.setdefault(k, {})
        for e, c in terms.items():
            dst[e] = dst.get(e, Fraction(0)) + c
    return out


def _neg(a: Value) -> Value:
    return {k: {e: -c for e, c in v.items()} for k, v in a.items()}


def _mul(a: Value, b: Value) -> Value:
    out: Value = {}
    for I, p in a.items():
        for J, q in b.items():
            sign, key = sort_sign(I + J)
            if sign == 0:
                continue
            dst = out.setdefault(key, {})
            for e1, c1 in p.items():
                for e2, c2 in q.items():
                    e = tuple(x + y for x, y in zip(e1, e2))
                    dst[e] = dst.get(e, Fraction(0)) + sign * c1 * c2
    return out


def _clean(v: Value) -> Value:
    out = {}
    for k, terms in v.items():
        t = {e: c for e, c in terms.items() if c}
        if t:
            out[k] = t
    return out


def infer_dimension(text: str, default: int = 2) -> int:
    idx = [int(t) for t in re.findall(r"[xd](\d+)", text)]
    return max([default] + idx)


def parse_polyvector(text: str, d: Optional[int] = None) -> PolyVectorField:
    d = d if d is not None else infer_dimension(text)
    v = _clean(_Parser(text, d).parse())
    degrees = {len(k) - 1 for k in v}
    if len(degrees) > 1:
        raise ExpressionSyntaxError(f"mixed polyvector degrees {sorted(degrees)}", 0, text)
    k = degrees.pop() if degrees else -1
    R = poly_ring(d)
    coeffs = {I: R.from_dict({e: to_qq(c) for e, c in terms.items()}) for I, terms in v.items()}
    return PolyVectorField(d, k, coeffs)


def parse_poly(text: str, d: Optional[int] = None) -> Poly:
    xi = parse_polyvector(text, d)
    if xi.k != -1:
        raise ExpressionSyntaxError("expected a function, found basis vectors", 0, text)
    return xi.as_poly()
