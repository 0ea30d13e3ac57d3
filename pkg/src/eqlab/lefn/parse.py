"""Text grammar for the expression class, with a deterministic printer.

    expr   := ['-'] term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' signed_exponent)?
    atom   := 'x' | 'log(' arg ')' | 'log10(' arg ')' | rational 'p/q'
              | decimal | integer | 'irr(' decimal ',' label ')'

A log argument must be x or a log iterate of x.  ``log10(y)`` is sugar for
``irr(0.43429...,_log10e) * log(y)``.  Decimal literals are exact rationals.
An exponent is a signed rational or decimal; on x it may also be an
``irr(...)`` literal.  Printing emits terms in decreasing growth order and is
a fixed point of ``parse``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .core import (
    LEFunction,
    LETerm,
    LefnError,
    ParseError,
    QLIN_ONE,
    QLin,
    qlin,
)

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<rat>\d+/\d+)|(?P<dec>\d+\.\d+)|(?P<int>\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*^(),]))"
)

# 1/ln(10) to 40 digits; the tag every log10() desugars to.
LOG10E_LABEL = "_log10e"
LOG10E_LITERAL = "0.4342944819032518276511289189166050822944"


def _decimal_to_fraction(text: str) -> Fraction:
    return Fraction(text)


def _fraction_to_decimal(q: Fraction) -> str:
    """Exact terminating decimal of a fraction whose denominator is 2^a 5^b."""
    num, den = q.numerator, q.denominator
    sign = "-" if num < 0 else ""
    num = abs(num)
    a = b = 0
    d = den
    while d % 2 == 0:
        d //= 2
        a += 1
    while d % 5 == 0:
        d //= 5
        b += 1
    if d != 1:
        raise LefnError(f"{q} has no terminating decimal form")
    shift = max(a, b)
    num *= 10**shift // den
    digits = str(num).rjust(shift + 1, "0")
    if shift == 0:
        return sign + digits
    return f"{sign}{digits[:-shift]}.{digits[-shift:]}"


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.items: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m or m.end() == m.start():
                tail = text[pos:].lstrip()
                if not tail:
                    break
                raise ParseError(f"unexpected character {tail[0]!r}", pos)
            kind = m.lastgroup
            self.items.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.items[self.i] if self.i < len(self.items) else (None, None, len(self.text))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}, found {val!r}", pos)


class _Parser:
    def __init__(self, text: str):
        self.toks = _Tokens(text)

    def parse(self) -> LEFunction:
        terms = []
        sign = 1
        kind, val, _ = self.toks.peek()
        if kind == "op" and val == "-":
            self.toks.next()
            sign = -1
        terms.append(self._term(sign))
        while True:
            kind, val, pos = self.toks.peek()
            if kind is None:
                break
            if kind == "op" and val in "+-":
                self.toks.next()
                terms.append(self._term(1 if val == "+" else -1))
            else:
                raise ParseError(f"expected '+' or '-', found {val!r}", pos)
        return LEFunction.from_terms(terms)

    def _term(self, sign: int) -> LETerm:
        coeff = qlin(sign)
        exps: list[QLin] = []
        while True:
            coeff, exps = self._factor(coeff, exps)
            kind, val, _ = self.toks.peek()
            if kind == "op" and val == "*":
                self.toks.next()
                continue
            break
        return LETerm.make(coeff, exps)

    def _factor(self, coeff: QLin, exps: list[QLin]):
        kind, val, pos = self.toks.next()
        if kind == "name":
            if val == "exp":
                raise ParseError("exp(...) grows faster than the subpolynomial class", pos)
            if val == "x":
                depth = 0
            elif val in ("log", "log10"):
                self.toks.expect_op("(")
                depth = self._log_argument_depth() + 1
                self.toks.expect_op(")")
                if val == "log10":
                    coeff = coeff * QLin.irrational(
                        LOG10E_LABEL, _decimal_to_fraction(LOG10E_LITERAL)
                    )
            elif val == "irr":
                coeff = coeff * self._irr_literal(pos)
                return coeff, exps
            else:
                raise ParseError(f"unknown name {val!r}", pos)
            exponent = self._maybe_exponent(allow_irr=(depth == 0))
            while len(exps) <= depth:
                exps.append(qlin(0))
            exps[depth] = exps[depth] + exponent
            return coeff, exps
        if kind in ("rat", "dec", "int"):
            value = Fraction(val) if kind != "dec" else _decimal_to_fraction(val)
            exponent = self._maybe_exponent(allow_irr=False)
            if exponent != QLIN_ONE:
                ev = exponent.value
                if ev.denominator != 1:
                    raise ParseError("fractional powers of literals are not supported", pos)
                value = value ** int(ev) if ev >= 0 else Fraction(1) / value ** int(-ev)
            coeff = coeff * qlin(value)
            return coeff, exps
        raise ParseError(f"expected a factor, found {val!r}", pos)

    def _log_argument_depth(self) -> int:
        """Depth of a log argument: x has depth 0, log(x) depth 1, and so on."""
        kind, val, pos = self.toks.next()
        if kind != "name":
            raise ParseError("log argument must be x or a log iterate of x", pos)
        if val == "x":
            return 0
        if val == "log":
            self.toks.expect_op("(")
            d = self._log_argument_depth() + 1
            self.toks.expect_op(")")
            return d
        raise ParseError("log argument must be x or a log iterate of x", pos)

    def _irr_literal(self, pos: int) -> QLin:
        self.toks.expect_op("(")
        sign = 1
        kind, val, p2 = self.toks.next()
        if kind == "op" and val == "-":
            sign = -1
            kind, val, p2 = self.toks.next()
        if kind not in ("dec", "int"):
            raise ParseError("irr(...) needs a decimal approximation", p2)
        approx = sign * _decimal_to_fraction(val)
        self.toks.expect_op(",")
        kind, label, p3 = self.toks.next()
        if kind != "name":
            raise ParseError("irr(...) needs an identifier label", p3)
        self.toks.expect_op(")")
        if approx == 0:
            raise ParseError("irr(...) approximation must be nonzero", pos)
        return QLin.irrational(label, approx)

    def _maybe_exponent(self, allow_irr: bool) -> QLin:
        kind, val, _ = self.toks.peek()
        if not (kind == "op" and val == "^"):
            return QLIN_ONE
        self.toks.next()
        sign = 1
        kind, val, pos = self.toks.next()
        if kind == "op" and val == "-":
            sign = -1
            kind, val, pos = self.toks.next()
        if kind == "name" and val == "irr":
            if not allow_irr:
                raise ParseError("irrational exponents are only allowed on x", pos)
            return self._irr_literal(pos).scale(sign)
        if kind == "rat" or kind == "int":
            return qlin(sign * Fraction(val))
        if kind == "dec":
            return qlin(sign * _decimal_to_fraction(val))
        raise ParseError(f"expected an exponent, found {val!r}", pos)


def parse(text: str) -> LEFunction:
    """Parse an expression into normal form."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def _iterate_name(depth: int) -> str:
    s = "x"
    for _ in range(depth):
        s = f"log({s})"
    return s


def _exponent_factors(name: str, e: QLin) -> list[str]:
    """Factors realizing one iterate power; mixed exponents split into products."""
    out = []
    for label, approx, mult in e.parts:
        if label is None:
            out.append(name if mult == 1 else f"{name}^{mult}")
        elif mult == 1:
            out.append(f"{name}^irr({_fraction_to_decimal(approx)},{label})")
        else:
            raise LefnError("scaled irrational exponents cannot be printed in the grammar")
    return out


def _part_factors(mult: Fraction, label: str | None, approx: Fraction) -> list[str]:
    out: list[str] = []
    if label is None:
        if abs(mult) != 1:
            out.append(str(abs(mult)))
    else:
        if abs(mult) != 1:
            out.append(str(abs(mult)))
        out.append(f"irr({_fraction_to_decimal(approx)},{label})")
    return out


def to_text(f: LEFunction) -> str:
    """Deterministic rendering; ``parse(to_text(f))`` reproduces f exactly."""
    if f.is_zero:
        return "0"
    pieces: list[tuple[int, str]] = []
    for term in f.terms:
        factors_common: list[str] = []
        for depth, e in enumerate(term.exponents):
            if e.is_zero:
                continue
            factors_common.extend(_exponent_factors(_iterate_name(depth), e))
        for label, approx, mult in term.coeff.parts:
            sign = -1 if mult < 0 else 1
            factors = _part_factors(mult, label, approx) + factors_common
            if not factors:
                factors = [str(abs(mult))]
            pieces.append((sign, "*".join(factors)))
    first_sign, first_body = pieces[0]
    out = ("-" if first_sign < 0 else "") + first_body
    for sign, body in pieces[1:]:
        out += (" - " if sign < 0 else " + ") + body
    return out
