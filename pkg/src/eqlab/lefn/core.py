"""Normal form for the restricted logarithmico-exponential expression class.

An expression is a finite sum of terms

    c * x^a0 * (log x)^a1 * (log log x)^a2 * ... * (log^(k) x)^ak

where every exponent on a log iterate is rational, the exponent on x may be
rational or a tagged irrational literal, and the coefficient c is a rational
linear combination of 1 and tagged irrational literals.  Distinct tags are
treated as rationally independent of each other and of 1; that declaration is
what makes the decision procedures in ``decide`` exact.

Growth comparison reduces to lexicographic comparison of exponent vectors:
x beats every power of log x, log x beats every power of log log x, and so on.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

# Working precision for exact scalar evaluation (bits of mantissa, plus guard
# bits used internally).  96 >= the 80-bit floor the evaluation contract asks.
PRECISION_BITS = 96
_GUARD_BITS = 32

ZERO = Fraction(0)
ONE = Fraction(1)


class LefnError(ValueError):
    """Base error for the symbolic engine."""


class ParseError(LefnError):
    """Syntax or admissibility error while parsing; carries a position."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


# ---------------------------------------------------------------------------
# Rational-linear combinations of 1 and tagged irrationals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QLin:
    """Value of the form  q0 + sum_i qi * irr_i  with rational qi.

    ``parts`` maps each tag to (approx, multiplier); the rational unit uses the
    tag ``None`` with approx 1.  The approx of a tag is the exact rational
    value of its decimal literal and is the single numeric stand-in for the
    irrational it names.
    """

    parts: tuple[tuple[str | None, Fraction, Fraction], ...]

    @staticmethod
    def rational(q) -> "QLin":
        q = Fraction(q)
        if q == 0:
            return QLIN_ZERO
        return QLin(((None, ONE, q),))

    @staticmethod
    def irrational(label: str, approx: Fraction, multiplier=ONE) -> "QLin":
        if approx == 0 or not label:
            raise LefnError("irrational tag needs a nonzero approx and a label")
        return QLin(((label, Fraction(approx), Fraction(multiplier)),))

    @staticmethod
    def _build(acc: dict) -> "QLin":
        items = []
        for label in sorted(acc, key=lambda k: (k is not None, k or "")):
            approx, mult = acc[label]
            if mult != 0:
                items.append((label, approx, mult))
        return QLin(tuple(items))

    def _as_dict(self) -> dict:
        return {label: (approx, mult) for label, approx, mult in self.parts}

    def __add__(self, other: "QLin") -> "QLin":
        acc = self._as_dict()
        for label, approx, mult in other.parts:
            if label in acc:
                a0, m0 = acc[label]
                if a0 != approx:
                    raise LefnError(f"tag {label!r} bound to two different approximations")
                acc[label] = (a0, m0 + mult)
            else:
                acc[label] = (approx, mult)
        return QLin._build(acc)

    def __neg__(self) -> "QLin":
        return QLin(tuple((l, a, -m) for l, a, m in self.parts))

    def __sub__(self, other: "QLin") -> "QLin":
        return self + (-other)

    def __mul__(self, other: "QLin") -> "QLin":
        if self.is_rational:
            q = self.rational_part
            return QLin(tuple((l, a, m * q) for l, a, m in other.parts)) if q else QLIN_ZERO
        if other.is_rational:
            return other * self
        raise LefnError("products of two irrational-tagged values are outside the class")

    def scale(self, q) -> "QLin":
        return self * QLin.rational(q)

    @property
    def is_zero(self) -> bool:
        return not self.parts

    @property
    def is_rational(self) -> bool:
        return all(label is None for label, _, _ in self.parts)

    @property
    def rational_part(self) -> Fraction:
        for label, _, mult in self.parts:
            if label is None:
                return mult
        return ZERO

    @property
    def value(self) -> Fraction:
        """Exact rational stand-in (tags replaced by their approximations)."""
        return sum((a * m for _, a, m in self.parts), ZERO)

    def mpf(self) -> mpmath.mpf:
        with mpmath.workprec(PRECISION_BITS + _GUARD_BITS):
            v = self.value
            return mpmath.mpf(v.numerator) / mpmath.mpf(v.denominator)

    def __float__(self) -> float:
        v = self.value
        return v.numerator / v.denominator

    def cmp(self, other: "QLin") -> int:
        if self == other:
            return 0
        va, vb = self.value, other.value
        if va != vb:
            return -1 if va < vb else 1
        # Distinct by declaration but numerically tied: break by structure so
        # the order stays total and deterministic.
        return -1 if self.parts < other.parts else 1


QLIN_ZERO = QLin(())
QLIN_ONE = QLin.rational(1)


def qlin(value) -> QLin:
    if isinstance(value, QLin):
        return value
    return QLin.rational(value)


# ---------------------------------------------------------------------------
# Terms and functions
# ---------------------------------------------------------------------------

def _trim(exponents: Sequence[QLin]) -> tuple[QLin, ...]:
    exps = list(exponents)
    while exps and exps[-1].is_zero:
        exps.pop()
    return tuple(exps)


@dataclass(frozen=True)
class LETerm:
    """One product c * x^a0 * prod_{j>=1} (log^(j) x)^aj in normal form."""

    coeff: QLin
    exponents: tuple[QLin, ...]

    @staticmethod
    def make(coeff, exponents: Iterable) -> "LETerm":
        c = qlin(coeff)
        exps = _trim([qlin(e) for e in exponents])
        for e in exps[1:]:
            if not e.is_rational:
                raise LefnError("log-iterate exponents must be rational")
        return LETerm(c, exps)

    @property
    def depth(self) -> int:
        """Deepest log iterate used (0 when the term is a pure power of x)."""
        return max(0, len(self.exponents) - 1)

    def exponent(self, j: int) -> QLin:
        return self.exponents[j] if j < len(self.exponents) else QLIN_ZERO

    def is_constant(self) -> bool:
        return not self.exponents


def cmp_vectors(a: Sequence[QLin], b: Sequence[QLin]) -> int:
    """Lexicographic comparison of exponent vectors; encodes growth order."""
    n = max(len(a), len(b))
    for j in range(n):
        ea = a[j] if j < len(a) else QLIN_ZERO
        eb = b[j] if j < len(b) else QLIN_ZERO
        c = ea.cmp(eb)
        if c:
            return c
    return 0


_VEC_KEY = functools.cmp_to_key(lambda u, v: cmp_vectors(u, v))


# Thresholds: log^(j) x > 0 iff x > tower(j-1), where tower(k) = exp^(k)(1).
def _tower(k: int) -> float:
    v = 1.0
    for _ in range(k):
        v = math.exp(v)
    return v


@dataclass(frozen=True)
class LEFunction:
    """Normalized finite sum of LETerms, sorted by decreasing growth.

    ``domain_floor`` is the conservative evaluation floor: the smallest x at
    which every log iterate used by the function is at least e (so every log
    power is at least 1).  Values may still be computed below it, down to the
    strict floor where all iterates are defined.
    """

    terms: tuple[LETerm, ...]

    @staticmethod
    def from_terms(terms: Iterable[LETerm]) -> "LEFunction":
        acc: dict[tuple[QLin, ...], QLin] = {}
        for t in terms:
            acc[t.exponents] = acc.get(t.exponents, QLIN_ZERO) + t.coeff
        kept = [LETerm(c, v) for v, c in acc.items() if not c.is_zero]
        kept.sort(key=lambda t: _VEC_KEY(t.exponents), reverse=True)
        return LEFunction(tuple(kept))

    @staticmethod
    def constant(value) -> "LEFunction":
        return LEFunction.from_terms([LETerm.make(value, ())])

    @staticmethod
    def zero() -> "LEFunction":
        return LEFunction(())

    # -- algebra ------------------------------------------------------------

    def __add__(self, other: "LEFunction") -> "LEFunction":
        return LEFunction.from_terms(self.terms + other.terms)

    def __sub__(self, other: "LEFunction") -> "LEFunction":
        return self + other.scale(-1)

    def scale(self, factor) -> "LEFunction":
        f = qlin(factor)
        if f.is_zero:
            return LEFunction.zero()
        return LEFunction.from_terms([LETerm(t.coeff * f, t.exponents) for t in self.terms])

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def leading(self) -> LETerm:
        if not self.terms:
            raise LefnError("zero function has no leading term")
        return self.terms[0]

    @property
    def depth(self) -> int:
        return max((t.depth for t in self.terms), default=0)

    # -- domain -------------------------------------------------------------

    @property
    def domain_floor(self) -> float:
        """Smallest x with every used log iterate >= e."""
        d = self.depth
        return _tower(d + 1) if d >= 1 else 1.0

    @property
    def strict_floor(self) -> float:
        """Smallest x with every used log iterate defined and positive."""
        d = self.depth
        return _tower(d - 1) if d >= 1 else 0.0

    def defined_boundary(self) -> tuple[float, bool]:
        """(boundary, inclusive): the function is real for x past this point.

        A log iterate raised to a positive exponent may touch zero at the
        boundary (inclusive); negative powers need strict positivity.
        """
        bound, inclusive = 1.0, True
        for t in self.terms:
            d = t.depth
            if d == 0:
                continue
            b = _tower(d - 1)
            inc = t.exponent(d).value > 0
            if b > bound or (b == bound and not inc):
                bound, inclusive = b, inc
            # shallower iterates with negative exponents must stay positive
            for j in range(1, d):
                if t.exponent(j).value < 0:
                    bj = _tower(j - 1)
                    if bj > bound or (bj == bound and inclusive):
                        bound, inclusive = bj, False
        return bound, inclusive

    def first_defined_index(self) -> int:
        """Smallest integer n at which every term evaluates to a real number."""
        bound, inclusive = self.defined_boundary()
        n = math.ceil(bound)
        if n < bound or (n == bound and not inclusive):
            n += 1
        return max(1, n)

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, x) -> mpmath.mpf:
        """Value at x, computed with at least PRECISION_BITS of mantissa."""
        if self.is_zero:
            return mpmath.mpf(0)
        with mpmath.workprec(PRECISION_BITS + _GUARD_BITS):
            xv = mpmath.mpf(x)
            if xv <= self.strict_floor:
                raise LefnError(f"x={x} is below the domain floor of this expression")
            logs = [xv]
            for _ in range(self.depth):
                logs.append(mpmath.log(logs[-1]))
            total = mpmath.mpf(0)
            for t in self.terms:
                v = t.coeff.mpf()
                for j, e in enumerate(t.exponents):
                    if e.is_zero:
                        continue
                    ev = e.value
                    if e.is_rational and ev.denominator == 1:
                        v *= logs[j] ** int(ev)
                    else:
                        v *= mpmath.power(logs[j], e.mpf())
                total += v
            return +total  # round to working precision

    def evaluate_array(self, x: np.ndarray, dtype=np.longdouble) -> np.ndarray:
        """Vectorized values; extended precision by default for stable fractional parts."""
        xv = np.asarray(x, dtype=dtype)
        out = np.zeros_like(xv)
        if self.is_zero:
            return out
        logs = [xv]
        for _ in range(self.depth):
            logs.append(np.log(logs[-1]))
        for t in self.terms:
            v = np.full_like(xv, float(t.coeff))
            for j, e in enumerate(t.exponents):
                if e.is_zero:
                    continue
                ev = e.value
                if e.is_rational and ev.denominator == 1 and abs(ev.numerator) <= 4:
                    v = v * logs[j] ** int(ev)
                else:
                    v = v * np.power(logs[j], np.asarray(float(ev), dtype=dtype))
            out = out + v
        return out

    def frac_array(self, x: np.ndarray) -> np.ndarray:
        """Fractional parts of the values, integer part removed in extended precision."""
        v = self.evaluate_array(x, dtype=np.longdouble)
        return np.asarray(v - np.floor(v), dtype=np.float64)

    # -- calculus -----------------------------------------------------------

    def derivative(self) -> "LEFunction":
        """Exact term-wise derivative, expanded back into the same class."""
        out: list[LETerm] = []
        for t in self.terms:
            for j, a in enumerate(t.exponents):
                if a.is_zero:
                    continue
                exps = list(t.exponents)
                exps[j] = a - QLIN_ONE
                if j >= 1:
                    # d/dx log^(j) x = 1 / (x log x ... log^(j-1) x)
                    exps[0] = exps[0] - QLIN_ONE
                    for i in range(1, j):
                        exps[i] = exps[i] - QLIN_ONE
                out.append(LETerm.make(t.coeff * a, exps))
        return LEFunction.from_terms(out)

    # -- limits -------------------------------------------------------------

    def limit_kind(self) -> str:
        """'zero', 'finite', 'pos_inf' or 'neg_inf' as x -> infinity."""
        if self.is_zero:
            return "zero"
        lead = self.leading
        c = cmp_vectors(lead.exponents, ())
        if c > 0:
            return "pos_inf" if lead.coeff.value > 0 else "neg_inf"
        if c == 0:
            # constant leading term; the rest tends to 0
            return "finite"
        return "zero"

    def finite_limit(self) -> QLin:
        """The limit value when limit_kind() is 'zero' or 'finite'."""
        kind = self.limit_kind()
        if kind == "zero":
            return QLIN_ZERO
        if kind != "finite":
            raise LefnError("function diverges")
        return self.leading.coeff


# ---------------------------------------------------------------------------
# Growth comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthOrder:
    """Result of comparing |f| with |g| as x -> infinity."""

    kind: str  # 'less' | 'equal' | 'greater'
    ratio: float | None = None  # finite nonzero limit of f/g when kind == 'equal'

    @property
    def is_greater(self) -> bool:
        return self.kind == "greater"

    @property
    def is_less(self) -> bool:
        return self.kind == "less"

    @property
    def is_equal(self) -> bool:
        return self.kind == "equal"


def compare_growth(f: LEFunction, g: LEFunction) -> GrowthOrder:
    """Compare asymptotic size of |f| and |g| by their leading terms."""
    if f.is_zero or g.is_zero:
        raise LefnError("compare_growth requires nonzero functions")
    lf, lg = f.leading, g.leading
    c = cmp_vectors(lf.exponents, lg.exponents)
    if c > 0:
        return GrowthOrder("greater")
    if c < 0:
        return GrowthOrder("less")
    ratio = lf.coeff.value / lg.coeff.value
    return GrowthOrder("equal", ratio=float(ratio))


def growth_ratio_exact(f: LEFunction, g: LEFunction) -> Fraction | None:
    """Exact rational stand-in of lim f/g when the leading classes tie."""
    order = compare_growth(f, g)
    if not order.is_equal:
        return None
    return f.leading.coeff.value / g.leading.coeff.value
