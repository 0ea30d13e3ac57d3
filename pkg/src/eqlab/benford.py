"""Leading-digit laws for product sequences under natural, log and loglog densities.

Everything runs on base-10 mantissas: for a positive sequence (x_n) the first
digits of x_n are read off the fractional part of log10 x_n.  Product
sequences (n!, the primorial, mixed products prod k^t1 p_k^t2, products of
iterated logs) accumulate log10 increments; the accumulator keeps the integer
part separate and renormalizes block-wise in extended precision, so the
fractional part stays accurate to well under 1e-6 after 1e7 updates.

A sequence is Benford when its mantissa sequence equidistributes under natural
density, log-Benford under weight 1/n, loglog-Benford under 1/(n log n); the
matching digit-string frequency is log10(1 + 1/S) in every case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import lefn
from .accum import Kahan
from .equidist import PrimeTable, _DEFAULT_TABLE, decide_sum_ud
from .weights import WeightScheme, make_scheme

_BLOCK = 4096


class MantissaAccumulator:
    """Running log10 of a product: wide integer part + compensated fraction."""

    def __init__(self):
        self.integer_part = 0
        self._frac = Kahan()

    def update(self, log10_increment: float) -> None:
        whole = math.floor(log10_increment)
        self.integer_part += whole
        self._frac.add(log10_increment - whole)
        if self._frac.total >= 1.0:
            self._frac.total -= 1.0
            self.integer_part += 1
        elif self._frac.total < 0.0:
            self._frac.total += 1.0
            self.integer_part -= 1

    @property
    def fractional(self) -> float:
        return self._frac.total

    def digits(self, length: int = 1) -> int:
        return int(10 ** (self.fractional + length - 1))


def _cumulative_frac(increments: np.ndarray, carry: float) -> tuple[np.ndarray, float]:
    """Fractional parts of carry + prefix sums, renormalized every block."""
    out = np.empty(len(increments), dtype=np.float64)
    c = np.longdouble(carry)
    inc = np.asarray(increments, dtype=np.longdouble)
    inc = inc - np.floor(inc)  # frac of each increment; sums agree mod 1
    for lo in range(0, len(inc), _BLOCK):
        hi = min(lo + _BLOCK, len(inc))
        cum = np.cumsum(inc[lo:hi]) + c
        cum = cum - np.floor(cum)
        out[lo:hi] = cum.astype(np.float64)
        c = cum[-1]
    return out, float(c)


# ---------------------------------------------------------------------------
# Mantissa streams
# ---------------------------------------------------------------------------

LOG10_2 = math.log(2.0) / math.log(10.0)
_LN10 = math.log(10.0)


@dataclass(frozen=True)
class MantissaStream:
    """Produces fractional parts of log10 x_n for a named sequence family.

    Cumulative kinds accumulate per-index log10 increments; direct kinds give
    log10 x_n in closed form.  ``start`` is the first usable index.
    """

    kind: str
    t1: float = 0.0
    t2: float = 0.0
    j: int = 1
    custom: Callable[[np.ndarray], np.ndarray] | None = None
    label: str = ""

    CUMULATIVE = ("pow2", "factorial", "primorial", "mixed", "logprod", "custom")
    DIRECT = ("simple", "prime_power")

    def __post_init__(self):
        if self.kind not in self.CUMULATIVE + self.DIRECT:
            raise ValueError(f"unknown mantissa stream {self.kind!r}")
        if self.kind == "mixed" and self.t1 == 0 and self.t2 == 0:
            raise ValueError("mixed product needs (t1, t2) != (0, 0)")
        if self.kind == "simple" and self.t1 == 0 and self.t2 == 0:
            raise ValueError("simple product needs (t1, t2) != (0, 0)")

    @property
    def cumulative(self) -> bool:
        return self.kind in self.CUMULATIVE

    @property
    def start(self) -> int:
        if self.kind == "logprod":
            return logprod_start(self.j)
        return 1

    def increments(self, n: np.ndarray, table: PrimeTable) -> np.ndarray:
        """log10 of the n-th factor (cumulative kinds)."""
        nv = np.asarray(n, dtype=np.longdouble)
        if self.kind == "pow2":
            return np.full(len(n), np.log10(np.longdouble(2.0)), dtype=np.longdouble)
        if self.kind == "factorial":
            return np.log10(nv)
        if self.kind == "primorial":
            return np.log10(table.first(int(n[-1]))[n - 1].astype(np.longdouble))
        if self.kind == "mixed":
            p = table.first(int(n[-1]))[n - 1].astype(np.longdouble)
            return np.longdouble(self.t1) * np.log10(nv) + np.longdouble(self.t2) * np.log10(p)
        if self.kind == "logprod":
            v = nv
            for _ in range(self.j):
                v = np.log(v)
            return np.log10(v)
        return np.asarray(self.custom(np.asarray(n)), dtype=np.longdouble)

    def direct_frac(self, n: np.ndarray, table: PrimeTable) -> np.ndarray:
        """Fractional part of log10 x_n (direct kinds)."""
        nv = np.asarray(n, dtype=np.longdouble)
        p = table.first(int(n[-1]))[n - 1].astype(np.longdouble)
        if self.kind == "prime_power":
            v = np.longdouble(self.t2) * np.log10(p)
        else:
            v = np.longdouble(self.t1) * np.log10(nv) + np.longdouble(self.t2) * np.log10(p)
        return np.asarray(v - np.floor(v), dtype=np.float64)


def stream_of(seq, t1: float = 0.0, t2: float = 0.0, j: int = 1) -> MantissaStream:
    if isinstance(seq, MantissaStream):
        return seq
    if callable(seq):
        return MantissaStream("custom", custom=seq, label="custom")
    return MantissaStream(str(seq), t1=t1, t2=t2, j=j, label=str(seq))


def logprod_start(j: int) -> int:
    """Smallest integer where log^(j) exceeds 1."""
    v = 1.0
    for _ in range(j):
        v = math.exp(v)
    return math.floor(v) + 1


# ---------------------------------------------------------------------------
# Digit-law tables
# ---------------------------------------------------------------------------

def digit_predictions(string_len: int) -> dict[int, float]:
    lo = 10 ** (string_len - 1)
    hi = 10**string_len
    return {s: math.log10(1.0 + 1.0 / s) for s in range(lo, hi)}


@dataclass
class DigitLawReport:
    """Weighted digit-string frequencies against log10(1 + 1/S)."""

    sequence: str
    weight: str
    string_len: int
    N: int
    start: int
    observed: dict[int, float] = field(default_factory=dict)
    predicted: dict[int, float] = field(default_factory=dict)
    total_weight: float = 0.0  # sum of weights / W(N); the normalizer ratio

    @property
    def deviations(self) -> dict[int, float]:
        return {s: self.observed[s] - self.predicted[s] for s in self.observed}

    @property
    def max_deviation(self) -> float:
        return max(abs(v) for v in self.deviations.values())

    def rows(self) -> list[dict]:
        return [
            {
                "sequence": self.sequence,
                "density": self.weight,
                "digit_string": s,
                "observed": self.observed[s],
                "predicted": self.predicted[s],
                "deviation": self.observed[s] - self.predicted[s],
                "N": self.N,
            }
            for s in sorted(self.observed)
        ]


def _frac_chunks(stream: MantissaStream, N: int, table: PrimeTable):
    """Yield (n, frac of log10 x_n) over [stream.start, N] in fixed chunks.

    Cumulative products always accumulate from their own first factor; callers
    mask out indices below their weighting start.
    """
    if stream.cumulative and stream.kind in ("primorial", "mixed"):
        table.first(N)
    carry = 0.0
    chunk = 1 << 20
    for lo in range(stream.start, N + 1, chunk):
        hi = min(lo + chunk - 1, N)
        n = np.arange(lo, hi + 1, dtype=np.int64)
        if stream.cumulative:
            frac, carry = _cumulative_frac(stream.increments(n, table), carry)
        else:
            frac = stream.direct_frac(n, table)
        yield n, frac


def benford_table(
    seq,
    scheme: WeightScheme,
    N: int,
    string_len: int = 1,
    table: PrimeTable | None = None,
    t1: float = 0.0,
    t2: float = 0.0,
    j: int = 1,
) -> DigitLawReport:
    """Weighted first-digit-string table for a product or power sequence."""
    if string_len not in (1, 2, 3):
        raise ValueError("digit strings up to length 3 only")
    stream = stream_of(seq, t1=t1, t2=t2, j=j)
    table = table or _DEFAULT_TABLE
    start = max(scheme.n0, stream.start)
    lo_s = 10 ** (string_len - 1)
    counts = np.zeros(10**string_len - lo_s, dtype=np.float64)
    wtotal = Kahan()
    for n, frac in _frac_chunks(stream, N, table):
        keep = n >= start
        if not np.any(keep):
            continue
        n, frac = n[keep], frac[keep]
        w = scheme.weight_values(n)
        digits = np.floor(np.power(10.0, frac + (string_len - 1))).astype(np.int64)
        digits = np.clip(digits, lo_s, 10**string_len - 1)  # guard boundary rounding
        np.add.at(counts, digits - lo_s, w)
        wtotal.add(float(np.sum(w)))
    WN = scheme.normalizer(N)
    report = DigitLawReport(
        sequence=stream.label or stream.kind,
        weight=scheme.text,
        string_len=string_len,
        N=N,
        start=start,
        predicted=digit_predictions(string_len),
        total_weight=wtotal.total / WN,
    )
    report.observed = {lo_s + i: counts[i] / WN for i in range(len(counts))}
    return report


@dataclass
class JointDigitReport:
    """Joint first-digit table for two sequences sharing the index."""

    sequences: tuple[str, str]
    weight: str
    N: int
    start: int
    observed: np.ndarray  # 9x9, row = first digit of A, col = first digit of B
    predicted: np.ndarray
    total_weight: float

    @property
    def deviation(self) -> np.ndarray:
        return self.observed - self.predicted

    @property
    def max_deviation(self) -> float:
        return float(np.max(np.abs(self.deviation)))


def joint_benford(
    seq_a,
    seq_b,
    scheme: WeightScheme,
    N: int,
    table: PrimeTable | None = None,
) -> JointDigitReport:
    """9x9 weighted joint first-digit frequencies versus the product law."""
    sa, sb = stream_of(seq_a), stream_of(seq_b)
    if sa.start != sb.start:
        raise ValueError("joint tables need streams sharing the same first index")
    table = table or _DEFAULT_TABLE
    start = max(scheme.n0, sa.start, sb.start)
    counts = np.zeros((9, 9), dtype=np.float64)
    wtotal = Kahan()
    gen_b = _frac_chunks(sb, N, table)
    for (n, fa), (_, fb) in zip(_frac_chunks(sa, N, table), gen_b):
        keep = n >= start
        if not np.any(keep):
            continue
        n, fa, fb = n[keep], fa[keep], fb[keep]
        w = scheme.weight_values(n)
        da = np.clip(np.floor(np.power(10.0, fa)).astype(np.int64), 1, 9)
        db = np.clip(np.floor(np.power(10.0, fb)).astype(np.int64), 1, 9)
        np.add.at(counts, (da - 1, db - 1), w)
        wtotal.add(float(np.sum(w)))
    WN = scheme.normalizer(N)
    single = np.log10(1.0 + 1.0 / np.arange(1, 10))
    return JointDigitReport(
        sequences=(sa.label or sa.kind, sb.label or sb.kind),
        weight=scheme.text,
        N=N,
        start=start,
        observed=counts / WN,
        predicted=np.outer(single, single),
        total_weight=wtotal.total / WN,
    )


# ---------------------------------------------------------------------------
# Classifiers
# ---------------------------------------------------------------------------

#: density name -> normalizer text
DENSITIES = {"natural": "x", "log": "log(x)", "loglog": "log(log(x))"}


def simple_product_classifier(t1, t2) -> str:
    """Predicted digit law for x_n = n^t1 p_n^t2.

    Decided symbolically: log10 x_n tracks t1 * c * log x + t2 * c * log(x log x)
    with c = log10 e, and the prime index is growth-equivalent to n log n.
    Returns 'log-benford' (not Benford) when t1 + t2 != 0, else
    'loglog-benford' (not log-Benford).
    """
    from fractions import Fraction

    t1, t2 = Fraction(t1), Fraction(t2)
    if t1 == 0 and t2 == 0:
        raise ValueError("degenerate product (t1, t2) = (0, 0)")
    c = lefn.QLin.irrational(lefn.LOG10E_LABEL, Fraction("0.4342944819032518276511289189166050822944"))
    log_x = lefn.parse("log(x)")
    loglog_x = lefn.parse("log(log(x))")
    u = log_x.scale(c.scale(t1 + t2)) + loglog_x.scale(c.scale(t2))
    verdicts = {
        name: lefn.decide_ud(u, lefn.parse(text)).kind for name, text in DENSITIES.items()
    }
    if verdicts["natural"] == "uniform":
        return "benford"
    if verdicts["log"] == "uniform":
        return "log-benford"
    if verdicts["loglog"] == "uniform":
        return "loglog-benford"
    return "none"


@dataclass(frozen=True)
class LogProductVerdict:
    j: int
    benford: bool
    start: int
    resolved: bool  # enough mantissa motion at desk scale to tabulate
    detail: str


def logprod_benford(
    j: int,
    scheme: WeightScheme | None = None,
    N: int | None = None,
    table: PrimeTable | None = None,
) -> tuple[LogProductVerdict, DigitLawReport | None]:
    """Digit law of the products of iterated logs, symbolically then empirically.

    The mantissa sequence is the partial sum of log10 log^(j) k, so the
    partial-sum criterion decides the law exactly; the empirical table is
    produced when the iterate moves enough at the requested N.
    """
    if j < 1:
        raise ValueError("need j >= 1")
    scheme = scheme or make_scheme("x")
    f = lefn.parse("log10(" + "log(" * j + "x" + ")" * j + ")")
    verdict = decide_sum_ud(f, scheme)
    start = logprod_start(j)
    if N is None:
        return LogProductVerdict(j, verdict.uniform, start, True, verdict.detail), None
    top = math.log(float(N))
    for _ in range(j - 1):
        top = math.log(top)
    resolved = start <= N // 10 and top >= 1.1
    lp = LogProductVerdict(
        j,
        verdict.uniform,
        start,
        resolved,
        verdict.detail if resolved else f"log^({j}) barely exceeds 1 below N={N}; table skipped",
    )
    if not resolved:
        return lp, None
    report = benford_table(MantissaStream("logprod", j=j, label=f"logprod({j})"), scheme, N, table=table)
    return lp, report
