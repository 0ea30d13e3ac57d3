"""Decision procedures for weighted equidistribution of expressions.

The central test: write u = P + r with P the rational-polynomial part of u.
Against an admissible normalizer W (W grows to infinity, its derivative w is
positive and non-increasing), the sequence (u(n)) with weights w(n) is

- uniformly distributed mod 1 exactly when r outgrows log W,
- asymptotically supported on finitely many atoms when r has a finite limit,
- and otherwise its weighted averages fail to converge; the finite limit
  a = lim r / log W (zero when r is below log W) controls the exponential-sum
  limsup 1 / |1 + 2 pi i h a|.

Everything here is exact: growth comparisons are lexicographic on exponent
vectors and linear algebra runs over the rationals, with tagged irrational
coefficients treated as rationally independent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .core import (
    LEFunction,
    LETerm,
    LefnError,
    QLIN_ONE,
    QLIN_ZERO,
    QLin,
    cmp_vectors,
    compare_growth,
)


class InadmissibleWeight(LefnError):
    """W is not usable as a weight antiderivative."""


# ---------------------------------------------------------------------------
# Weight admissibility and log-leading behavior
# ---------------------------------------------------------------------------

def validate_admissible(W: LEFunction) -> LEFunction:
    """Check W -> infinity with positive non-increasing derivative; return w = W'."""
    if W.is_zero:
        raise InadmissibleWeight("zero normalizer")
    if W.limit_kind() != "pos_inf":
        raise InadmissibleWeight("normalizer must tend to +infinity")
    w = W.derivative()
    if w.is_zero or w.leading.coeff.value <= 0:
        raise InadmissibleWeight("weight w = W' must be eventually positive")
    w2 = w.derivative()
    if not w2.is_zero and w2.leading.coeff.value > 0:
        raise InadmissibleWeight("weight w = W' must be eventually non-increasing")
    return w


def log_leading(W: LEFunction) -> LEFunction:
    """Leading behavior of log W(x) inside the class.

    For leading term c * x^a0 * prod (log^(j) x)^aj this is
    a0 * log x + sum_j aj * log^(j+1) x; dropped corrections are subdominant,
    which is all growth comparison ever sees.
    """
    validate_admissible(W)
    lead = W.leading
    terms = []
    for j, a in enumerate(lead.exponents):
        if a.is_zero:
            continue
        vec = [QLIN_ZERO] * (j + 1) + [QLIN_ONE]
        terms.append(LETerm.make(a, vec))
    out = LEFunction.from_terms(terms)
    if out.is_zero:
        raise InadmissibleWeight("normalizer has constant leading behavior")
    return out


# ---------------------------------------------------------------------------
# Rational polynomial part
# ---------------------------------------------------------------------------

def _is_poly_vector(exponents: tuple[QLin, ...]) -> bool:
    """True when the vector is x^m with m a nonnegative integer (or constant)."""
    if len(exponents) > 1:
        return False
    if not exponents:
        return True
    a0 = exponents[0]
    return a0.is_rational and a0.rational_part.denominator == 1 and a0.rational_part >= 0


def rational_poly_part(u: LEFunction) -> tuple[LEFunction, LEFunction]:
    """Split u = P + r with P the polynomial over Q contained in u.

    On a polynomial-shaped vector a mixed coefficient splits: its rational
    summand joins P, its tagged summands stay in r.
    """
    p_terms, r_terms = [], []
    for t in u.terms:
        if not _is_poly_vector(t.exponents):
            r_terms.append(t)
            continue
        rat = QLin.rational(t.coeff.rational_part)
        if not rat.is_zero:
            p_terms.append(LETerm(rat, t.exponents))
        rest = t.coeff - rat
        if not rest.is_zero:
            r_terms.append(LETerm(rest, t.exponents))
    return LEFunction.from_terms(p_terms), LEFunction.from_terms(r_terms)


def poly_coefficients(P: LEFunction) -> dict[int, Fraction]:
    """Degree -> coefficient map of a rational polynomial."""
    out: dict[int, Fraction] = {}
    for t in P.terms:
        deg = int(t.exponents[0].rational_part) if t.exponents else 0
        out[deg] = t.coeff.rational_part
    return out


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UDVerdict:
    """Outcome of the weighted-equidistribution decision.

    kind is 'uniform', 'atomic' or 'nonconvergent'.  The decomposition
    u = P + r is always attached.  Atomic verdicts carry the period, the
    distinct atoms in [0, 1) and their weights; nonconvergent verdicts carry
    a = lim r / log W.
    """

    kind: str
    P: LEFunction
    r: LEFunction
    period: int | None = None
    atoms: tuple[float, ...] = ()
    weights: tuple[Fraction, ...] = ()
    a: float | None = None

    @property
    def is_uniform(self) -> bool:
        return self.kind == "uniform"


def _poly_period(coeffs: dict[int, Fraction]) -> int:
    """Minimal M with P(n + M) - P(n) integral for all integers n."""
    M = 1
    for deg, c in coeffs.items():
        if deg >= 1:
            M = lcm(M, c.denominator)
    # the lcm always works; try its divisors for the minimal true period
    def _periodic(m: int) -> bool:
        for n in range(M):
            delta = sum(c * ((n + m) ** d - n**d) for d, c in coeffs.items())
            if delta.denominator != 1:
                return False
        return True

    for m in sorted(d for d in range(1, M + 1) if M % d == 0):
        if _periodic(m):
            return m
    return M


def _atomic_verdict(P: LEFunction, r: LEFunction, shift: Fraction) -> UDVerdict:
    coeffs = poly_coefficients(P)
    period = _poly_period(coeffs)
    mass: dict[Fraction, Fraction] = {}
    for d in range(period):
        value = sum((c * d**deg for deg, c in coeffs.items()), Fraction(0))
        atom = (value + shift) % 1
        mass[atom] = mass.get(atom, Fraction(0)) + Fraction(1, period)
    exact_atoms = sorted(mass)
    return UDVerdict(
        "atomic",
        P=P,
        r=r,
        period=period,
        atoms=tuple(float(a) for a in exact_atoms),
        weights=tuple(mass[a] for a in exact_atoms),
    )


def decide_ud(u: LEFunction, W: LEFunction) -> UDVerdict:
    """Classify the weighted distribution of (u(n)) mod 1 under weights W'."""
    L = log_leading(W)
    P, r = rational_poly_part(u)
    kind = r.limit_kind()
    if kind in ("zero", "finite"):
        shift = r.finite_limit().value
        return _atomic_verdict(P, r, shift)
    order = compare_growth(r, L)
    if order.is_greater:
        return UDVerdict("uniform", P=P, r=r)
    a = order.ratio if order.is_equal else 0.0
    return UDVerdict("nonconvergent", P=P, r=r, a=a)


# ---------------------------------------------------------------------------
# Integer-span decision for tuples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VectorVerdict:
    kind: str  # 'uniform' | 'failing'
    combination: tuple[int, ...] | None = None


def _nullspace_basis(rows: list[list[Fraction]], k: int) -> list[list[Fraction]]:
    """Basis of the rational nullspace of the given constraint rows."""
    mat = [row[:] for row in rows]
    pivots: list[int] = []
    r = 0
    for col in range(k):
        piv = next((i for i in range(r, len(mat)) if mat[i][col] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = Fraction(1) / mat[r][col]
        mat[r] = [v * inv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
        if r == len(mat):
            break
    free = [c for c in range(k) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * k
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -mat[i][fc]
        basis.append(vec)
    return basis


def _smallest_integer_vector(basis: list[list[Fraction]]) -> tuple[int, ...]:
    """Scan small integer combinations of the basis; smallest by (L1, Linf, lex)."""
    def to_ints(vec: list[Fraction]) -> tuple[int, ...]:
        mult = lcm(*(v.denominator for v in vec)) if any(vec) else 1
        ints = [int(v * mult) for v in vec]
        from math import gcd
        g = 0
        for v in ints:
            g = gcd(g, abs(v))
        if g > 1:
            ints = [v // g for v in ints]
        lead = next((v for v in ints if v != 0), 1)
        if lead < 0:
            ints = [-v for v in ints]
        return tuple(ints)

    candidates = set()
    rng = range(-2, 3)
    for combo in itertools.product(rng, repeat=len(basis)):
        if not any(combo):
            continue
        vec = [sum(Fraction(c) * b[j] for c, b in zip(combo, basis)) for j in range(len(basis[0]))]
        if any(vec):
            candidates.add(to_ints(vec))
    return min(candidates, key=lambda v: (sum(abs(x) for x in v), max(abs(x) for x in v), v))


def decide_ud_vector(us: list[LEFunction], W: LEFunction) -> VectorVerdict:
    """Uniform iff every nonzero integer combination of the us is uniform.

    A combination fails exactly when all of its content in growth classes
    above log W collapses into a rational polynomial; with tagged irrationals
    declared independent this is a homogeneous rational linear system, so the
    failing combinations form a subspace.  Returns a smallest failing integer
    vector when one exists.
    """
    L = log_leading(W)
    vL = L.leading.exponents
    k = len(us)
    keys: list[tuple[tuple, str | None]] = []
    index: dict[tuple[tuple, str | None], int] = {}
    rows: list[list[Fraction]] = []
    for i, u in enumerate(us):
        if u.is_zero:
            continue
        for t in u.terms:
            if cmp_vectors(t.exponents, vL) <= 0:
                continue
            poly_vec = _is_poly_vector(t.exponents)
            for label, _, mult in t.coeff.parts:
                if poly_vec and label is None:
                    continue  # absorbed by the rational polynomial part
                key = (t.exponents, label)
                if key not in index:
                    index[key] = len(keys)
                    keys.append(key)
                    rows.append([Fraction(0)] * k)
                rows[index[key]][i] += mult
    basis = _nullspace_basis(rows, k)
    if not basis:
        return VectorVerdict("uniform")
    witness = _smallest_integer_vector(basis)
    return VectorVerdict("failing", combination=witness)


# ---------------------------------------------------------------------------
# Sufficient condition for slow monotone sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TsujiReport:
    holds: bool
    tends_to_infinity: bool
    derivative_vanishes: bool
    ratio_monotone: bool  # automatic in this class; recorded for the contract
    transfer_diverges: bool


def _leading_product_vector(*fns: LEFunction) -> list[QLin]:
    vec: list[QLin] = []
    for f in fns:
        lead = f.leading.exponents
        for j, e in enumerate(lead):
            while len(vec) <= j:
                vec.append(QLIN_ZERO)
            vec[j] = vec[j] + e
    return vec


def check_tsuji(u: LEFunction, W: LEFunction) -> TsujiReport:
    """Sufficient criterion for weighted equidistribution of a slow monotone u.

    Conditions: u -> infinity, u' -> 0 monotonically, u'/w eventually monotone
    (automatic here), and (u'/w) * W -> infinity.
    """
    w = validate_admissible(W)
    if u.is_zero or u.limit_kind() == "neg_inf" or u.leading.coeff.value <= 0:
        raise LefnError("u must be eventually positive")
    du = u.derivative()
    if du.is_zero or du.leading.coeff.value < 0:
        raise LefnError("u must be eventually increasing")
    cond1 = u.limit_kind() == "pos_inf"
    cond2 = du.limit_kind() == "zero"
    # growth class of (u' / w) * W versus constants, via leading vectors
    num = _leading_product_vector(du, W)
    den = w.leading.exponents
    diff = list(num)
    for j, e in enumerate(den):
        while len(diff) <= j:
            diff.append(QLIN_ZERO)
        diff[j] = diff[j] - e
    cond4 = cmp_vectors(diff, ()) > 0
    return TsujiReport(
        holds=cond1 and cond2 and cond4,
        tends_to_infinity=cond1,
        derivative_vanishes=cond2,
        ratio_monotone=True,
        transfer_diverges=cond4,
    )


# ---------------------------------------------------------------------------
# Leading-order substitution x -> x log x
# ---------------------------------------------------------------------------

def substitute_xlogx(u: LEFunction) -> LEFunction:
    """Expansion of u(x log x) to first order in each factor.

    Uses log(x log x) = log x + log log x exactly, x^a -> x^a (log x)^a
    exactly, and for deeper iterates the first-order shift
    eps_1 = log log x, eps_{j+1} = eps_j / log^(j) x.  The discarded tail
    never changes a growth comparison against any admissible log W.
    """
    out: list[LETerm] = []
    for t in u.terms:
        a0 = t.exponent(0)
        if not a0.is_rational:
            raise LefnError("substitution requires a rational exponent on x")
        depth = max(1, t.depth)
        main = [t.exponent(j) for j in range(depth + 1)]
        main[1] = main[1] + a0  # x^a0 -> x^a0 (log x)^a0, exact
        out.append(LETerm.make(t.coeff, main))
        for j in range(1, t.depth + 1):
            aj = t.exponent(j)
            if aj.is_zero:
                continue
            corr = list(main)
            corr[j] = corr[j] - QLIN_ONE
            for i, e in enumerate(_epsilon_vector(j)):
                while len(corr) <= i:
                    corr.append(QLIN_ZERO)
                corr[i] = corr[i] + e
            out.append(LETerm.make(t.coeff * aj, corr))
    return LEFunction.from_terms(out)


def _epsilon_vector(j: int) -> list[QLin]:
    """Exponent vector of the first-order shift of log^(j) under x -> x log x."""
    vec = [QLIN_ZERO, QLIN_ZERO, QLIN_ONE]  # eps_1 = log log x
    for i in range(1, j):
        while len(vec) <= i:
            vec.append(QLIN_ZERO)
        vec[i] = vec[i] - QLIN_ONE  # divide by log^(i) x
    return vec
