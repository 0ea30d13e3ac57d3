"""Weighted Weyl sums, star discrepancy, and the numeric verification probes.

Sequences are described by a ``SequenceSpec``: a sum of components, each a
symbolic function applied to an index stream (naturals, a n + d, primes,
primes in a progression, n log n, or the inverse of x log x), optionally
floored or rounded, then scaled.  All bulk evaluation runs in extended
precision and fractional parts are extracted before rounding to doubles, so
the mod-1 statistics stay trustworthy at desk scale (N up to 1e7).

Sums are accumulated per fixed-size chunk and folded in chunk order through
compensated accumulators; results do not depend on the worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import lefn, primes
from .accum import CHUNK, Kahan, KahanComplex, chunk_slices
from .weights import WeightScheme

TWO_PI = 2.0 * math.pi

# 'strict' evaluates sequences in extended precision before taking fractional
# parts; 'fast' stays in doubles (fine when values are far from 2^53).
_FRAC_DTYPE = np.longdouble


def set_precision(mode: str) -> None:
    global _FRAC_DTYPE
    if mode == "strict":
        _FRAC_DTYPE = np.longdouble
    elif mode == "fast":
        _FRAC_DTYPE = np.float64
    else:
        raise ValueError("precision mode must be 'fast' or 'strict'")


# ---------------------------------------------------------------------------
# Index streams
# ---------------------------------------------------------------------------

class PrimeTable:
    """Lazily grown table of the first k primes shared by prime-based streams."""

    def __init__(self, cache_dir=None):
        self.cache_dir = cache_dir
        self._primes = np.array([], dtype=np.int64)
        self._ap: dict[tuple[int, int], np.ndarray] = {}

    def first(self, count: int) -> np.ndarray:
        if len(self._primes) < count:
            self._primes = primes.first_primes(count, cache_dir=self.cache_dir)
        return self._primes[:count]

    def first_ap(self, a: int, d: int, count: int) -> np.ndarray:
        key = (a, d)
        if key not in self._ap or len(self._ap[key]) < count:
            self._ap[key] = primes.ap_primes(a, d, count, cache_dir=self.cache_dir)
        return self._ap[key][:count]


_DEFAULT_TABLE = PrimeTable()


def solve_inverse_xlogx(t: np.ndarray) -> np.ndarray:
    """Newton solve of y log y = t on the increasing branch (y >= 1)."""
    t = np.asarray(t, dtype=np.float64)
    y = np.maximum(1.5, t / np.maximum(np.log(np.maximum(t, 2.0)), 1.0))
    for _ in range(60):
        ly = np.log(y)
        step = (y * ly - t) / (ly + 1.0)
        y = np.maximum(y - step, 1.0 + 1e-12)
        if np.max(np.abs(step) / np.maximum(y, 1.0)) < 1e-14:
            break
    return y


@dataclass(frozen=True)
class IndexStream:
    """Maps the outer index n to the argument fed into a component function."""

    kind: str  # 'naturals' | 'ap' | 'primes' | 'approimes' | 'nlogn' | 'invg'
    a: int = 1
    d: int = 0

    def __post_init__(self):
        if self.kind not in ("naturals", "ap", "primes", "approimes", "nlogn", "invg"):
            raise ValueError(f"unknown index stream {self.kind!r}")
        if self.kind == "approimes" and math.gcd(self.a, self.d) != 1:
            raise ValueError("progression with gcd(a,d) != 1 holds at most one prime")

    @staticmethod
    def parse(text: str) -> "IndexStream":
        """Parse CLI syntax: naturals | ap:a,d | primes | approimes:a,d | nlogn | invg."""
        name, _, args = text.partition(":")
        if name in ("naturals", "primes", "nlogn", "invg"):
            return IndexStream(name)
        if name in ("ap", "approimes"):
            a_str, _, d_str = args.partition(",")
            return IndexStream(name, a=int(a_str), d=int(d_str))
        raise ValueError(f"unknown index stream {text!r}")

    def values(self, n: np.ndarray, table: PrimeTable) -> np.ndarray:
        """Stream values at the given outer indices, in extended precision."""
        nv = np.asarray(n)
        if self.kind == "naturals":
            return nv.astype(np.longdouble)
        if self.kind == "ap":
            return (self.a * nv + self.d).astype(np.longdouble)
        if self.kind == "primes":
            hi = int(nv.max())
            return table.first(hi)[nv - 1].astype(np.longdouble)
        if self.kind == "approimes":
            hi = int(nv.max())
            return table.first_ap(self.a, self.d, hi)[nv - 1].astype(np.longdouble)
        if self.kind == "nlogn":
            x = nv.astype(np.longdouble)
            return x * np.log(x)
        g = solve_inverse_xlogx(nv.astype(np.float64))
        return g.astype(np.longdouble)

    def first_index_reaching(self, threshold: float, table: PrimeTable) -> int:
        """Smallest n with stream(n) >= threshold (stream values increase)."""
        n = 1
        while float(self.values(np.array([n]), table)[0]) < threshold:
            n += 1
            if n > 10**6:
                raise ValueError("stream never reaches the required domain floor")
        return n


# ---------------------------------------------------------------------------
# Sequence specifications
# ---------------------------------------------------------------------------

def _apply_mode(values: np.ndarray, mode: str) -> np.ndarray:
    if mode == "none":
        return values
    if mode == "floor":
        return np.floor(values)
    if mode == "nearest":
        return np.floor(values + 0.5)
    raise ValueError(f"unknown floor mode {mode!r}")


@dataclass(frozen=True)
class Component:
    f: lefn.LEFunction
    stream: IndexStream = IndexStream("naturals")
    floor_mode: str = "none"  # 'none' | 'floor' | 'nearest'
    scalar: float = 1.0


@dataclass(frozen=True)
class SequenceSpec:
    """x_n = sum_i scalar_i * mode_i(f_i(stream_i(n))), one real per index."""

    components: tuple[Component, ...]
    label: str = ""

    @staticmethod
    def of(f, stream: str | IndexStream = "naturals", floor_mode: str = "none",
           scalar: float = 1.0, label: str = "") -> "SequenceSpec":
        fn = lefn.parse(f) if isinstance(f, str) else f
        st = IndexStream.parse(stream) if isinstance(stream, str) else stream
        return SequenceSpec(
            (Component(fn, st, floor_mode, scalar),),
            label=label or (f if isinstance(f, str) else lefn.to_text(fn)),
        )

    def plus(self, other: "SequenceSpec") -> "SequenceSpec":
        return SequenceSpec(self.components + other.components,
                            label=f"{self.label}+{other.label}")

    def start_index(self, scheme: WeightScheme, table: PrimeTable) -> int:
        n = scheme.n0
        for c in self.components:
            floor = c.f.first_defined_index()
            n = max(n, c.stream.first_index_reaching(floor, table))
        return n

    def values(self, n: np.ndarray, table: PrimeTable) -> np.ndarray:
        """Sequence values (not reduced mod 1), in the active precision mode."""
        dtype = _FRAC_DTYPE
        total = np.zeros(len(n), dtype=dtype)
        for c in self.components:
            x = c.stream.values(n, table).astype(dtype)
            v = c.f.evaluate_array(x, dtype=dtype)
            v = _apply_mode(v, c.floor_mode)
            total = total + dtype(c.scalar) * v
        return total

    def frac(self, n: np.ndarray, table: PrimeTable) -> np.ndarray:
        v = self.values(n, table)
        return np.asarray(v - np.floor(v), dtype=np.float64)


# ---------------------------------------------------------------------------
# Streaming weighted exponential sums
# ---------------------------------------------------------------------------

@dataclass
class WeylReport:
    """Per-frequency magnitudes at each checkpoint, plus the weight diagnostics."""

    label: str
    weight: str
    freqs: tuple[tuple[int, ...], ...]
    checkpoints: tuple[int, ...]
    start: int
    sums: dict = field(default_factory=dict)       # (freq, N) -> complex
    s0: dict = field(default_factory=dict)         # N -> normalizer ratio
    discrepancy: dict = field(default_factory=dict)  # N -> D* (1-D specs only)

    def magnitude(self, freq, N: int) -> float:
        key = freq if isinstance(freq, tuple) else (int(freq),)
        return abs(self.sums[(key, N)])

    def rows(self) -> list[dict]:
        out = []
        for (freq, N), value in sorted(self.sums.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            out.append({
                "sequence_id": self.label,
                "weight": self.weight,
                "h_vector": ";".join(str(h) for h in freq),
                "N": N,
                "abs_S": abs(value),
                "re_S": value.real,
                "im_S": value.imag,
                "s0": self.s0[N],
                "discrepancy": self.discrepancy.get(N, ""),
            })
        return out


def _normalize_freqs(freqs, width: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for h in freqs:
        vec = tuple(int(v) for v in (h if isinstance(h, (tuple, list)) else (h,)))
        if len(vec) != width:
            raise ValueError(f"frequency {vec} does not match {width} sequence(s)")
        if not any(vec):
            raise ValueError("frequency vectors must be nonzero")
        out.append(vec)
    return tuple(out)


def weyl_sums(
    spec: SequenceSpec | Sequence[SequenceSpec],
    scheme: WeightScheme,
    freqs: Iterable,
    checkpoints: Iterable[int],
    table: PrimeTable | None = None,
    threads: int = 1,
    with_discrepancy: bool = False,
) -> WeylReport:
    """Single streaming pass computing S_h(N) at each checkpoint.

    S_h(N) = (1/W(N)) * sum_{n=start}^{N} w(n) e(<h, x_n>), with compensated
    accumulation in fixed chunk order; the worker count never changes results.
    """
    specs = [spec] if isinstance(spec, SequenceSpec) else list(spec)
    table = table or _DEFAULT_TABLE
    freq_vecs = _normalize_freqs(freqs, len(specs))
    cps = sorted(set(int(c) for c in checkpoints))
    start = max(s.start_index(scheme, table) for s in specs)
    if cps[0] < start:
        raise ValueError(f"checkpoint {cps[0]} is below the start index {start}")

    label = " & ".join(s.label for s in specs)
    report = WeylReport(label=label, weight=scheme.text, freqs=freq_vecs,
                        checkpoints=tuple(cps), start=start)
    keep_fracs = with_discrepancy and len(specs) == 1
    # prime tables are grown up front so parallel chunks only read them
    for s in specs:
        for c in s.components:
            if c.stream.kind in ("primes", "approimes"):
                c.stream.values(np.array([cps[-1]], dtype=np.int64), table)

    def eval_chunk(lo: int, hi: int):
        n = np.arange(lo, hi + 1, dtype=np.int64)
        w = scheme.weight_values(n)
        fracs = [s.frac(n, table) for s in specs]
        partials = []
        for h in freq_vecs:
            phase = np.zeros(len(n))
            for hj, fx in zip(h, fracs):
                if hj:
                    phase = phase + hj * fx
            phase *= TWO_PI
            partials.append(complex(np.sum(w * np.cos(phase)), np.sum(w * np.sin(phase))))
        return partials, float(np.sum(w)), (fracs[0], w) if keep_fracs else None

    acc = {h: KahanComplex() for h in freq_vecs}
    wsum = Kahan()
    frac_store: list[np.ndarray] = []
    weight_store: list[np.ndarray] = []
    prev = start
    for N in cps:
        bounds = [(lo, min(lo + CHUNK - 1, N)) for lo in range(prev, N + 1, CHUNK)]
        if threads > 1 and len(bounds) > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(lambda b: eval_chunk(*b), bounds))
        else:
            results = [eval_chunk(lo, hi) for lo, hi in bounds]
        for partials, wpart, kept in results:  # chunk order fixes the reduction
            for h, z in zip(freq_vecs, partials):
                acc[h].add(z)
            wsum.add(wpart)
            if kept is not None:
                frac_store.append(kept[0])
                weight_store.append(kept[1])
        WN = scheme.normalizer(N)
        for h in freq_vecs:
            report.sums[(h, N)] = acc[h].total / WN
        report.s0[N] = wsum.total / WN
        if keep_fracs:
            report.discrepancy[N] = star_discrepancy_arrays(
                np.concatenate(frac_store), np.concatenate(weight_store), WN
            )
        prev = N + 1
    return report


def weyl_running_peak(
    spec: SequenceSpec,
    scheme: WeightScheme,
    freq: int,
    n_lo: int,
    n_hi: int,
    table: PrimeTable | None = None,
) -> float:
    """max over N in [n_lo, n_hi] of |S_freq(N)|, tracked at every index."""
    table = table or _DEFAULT_TABLE
    start = spec.start_index(scheme, table)
    carry = 0.0 + 0.0j
    peak = 0.0
    for sl_lo in range(start, n_hi + 1, CHUNK):
        sl_hi = min(sl_lo + CHUNK - 1, n_hi)
        n = np.arange(sl_lo, sl_hi + 1, dtype=np.int64)
        w = scheme.weight_values(n)
        phase = TWO_PI * freq * spec.frac(n, table)
        running = np.cumsum(w * np.cos(phase) + 1j * w * np.sin(phase)) + carry
        carry = complex(running[-1])
        if sl_hi >= n_lo:
            lo_idx = max(n_lo, sl_lo) - sl_lo
            window = running[lo_idx:]
            norms = scheme.normalizer_array(n[lo_idx:])
            peak = max(peak, float(np.max(np.abs(window) / norms)))
    return peak


# ---------------------------------------------------------------------------
# Star discrepancy
# ---------------------------------------------------------------------------

BINNED_THRESHOLD = 10**7
BINNED_BINS = 10**4


def star_discrepancy_arrays(frac: np.ndarray, w: np.ndarray, WN: float,
                            binned: bool | None = None) -> float:
    """Weighted star discrepancy sup_t |F(t) - t| by exact sort-and-scan.

    The binned variant (10^4 bins, extra error at most one bin width) kicks in
    for very long inputs unless explicitly disabled.
    """
    if binned is None:
        binned = len(frac) > BINNED_THRESHOLD
    if binned:
        hist, _ = np.histogram(frac, bins=BINNED_BINS, range=(0.0, 1.0), weights=w)
        cum = np.cumsum(hist) / WN
        edges = np.arange(1, BINNED_BINS + 1) / BINNED_BINS
        return float(np.max(np.abs(cum - edges)) + 1.0 / BINNED_BINS)
    order = np.argsort(frac, kind="stable")
    y = frac[order]
    cum = np.cumsum(w[order]) / WN
    after = np.max(np.abs(cum - y))
    before = np.max(np.abs(cum - np.append(y[1:], 1.0)))
    return float(max(y[0], after, before))


def discrepancy(
    spec: SequenceSpec,
    scheme: WeightScheme,
    N: int,
    table: PrimeTable | None = None,
    binned: bool | None = None,
) -> float:
    """Weighted star discrepancy of a 1-D spec at N."""
    table = table or _DEFAULT_TABLE
    start = spec.start_index(scheme, table)
    fracs, weights = [], []
    for sl in chunk_slices(N - start + 1):
        n = np.arange(start + sl.start, start + sl.stop, dtype=np.int64)
        fracs.append(spec.frac(n, table))
        weights.append(scheme.weight_values(n))
    return star_discrepancy_arrays(
        np.concatenate(fracs), np.concatenate(weights), scheme.normalizer(N), binned=binned
    )


# ---------------------------------------------------------------------------
# Difference (van der Corput) probe
# ---------------------------------------------------------------------------

def vdc_probe(
    spec: SequenceSpec,
    scheme: WeightScheme,
    h_max: int,
    N: int,
    table: PrimeTable | None = None,
) -> dict[int, float]:
    """|weighted average of e(x_{n+h} - x_n)| for each 1 <= h <= h_max."""
    table = table or _DEFAULT_TABLE
    start = spec.start_index(scheme, table)
    acc = {h: KahanComplex() for h in range(1, h_max + 1)}
    WN = scheme.normalizer(N)
    for sl_lo in range(start, N + 1, CHUNK):
        sl_hi = min(sl_lo + CHUNK - 1, N)
        n_ext = np.arange(sl_lo, sl_hi + h_max + 1, dtype=np.int64)
        values = spec.values(n_ext, table)
        w = scheme.weight_values(n_ext[: sl_hi - sl_lo + 1])
        m = sl_hi - sl_lo + 1
        for h in range(1, h_max + 1):
            diff = values[h : m + h] - values[:m]
            fx = np.asarray(diff - np.floor(diff), dtype=np.float64)
            phase = TWO_PI * fx
            z = np.sum(w * np.cos(phase)) + 1j * np.sum(w * np.sin(phase))
            acc[h].add(complex(z))
    return {h: abs(acc[h].total) / WN for h in acc}


# ---------------------------------------------------------------------------
# Prime substitution and slow perturbations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubstitutionReport:
    N: int
    max_gap: float           # max |f(p_n) - f(n log n)| over n in [N/2, N]
    floor_density: float     # weighted density of floor disagreements up to N
    start: int


def prime_substitution_check(
    f: lefn.LEFunction,
    scheme: WeightScheme,
    N: int,
    table: PrimeTable | None = None,
) -> SubstitutionReport:
    """Contrast f along primes with f along n log n.

    Requires f slow (growth at most log x); then the gap tends to zero and
    floor disagreements carry vanishing weighted density.
    """
    order = lefn.compare_growth(f, lefn.parse("log(x)"))
    if order.is_greater:
        raise ValueError("prime substitution check needs a slow function (<= log x growth)")
    table = table or _DEFAULT_TABLE
    nlogn = IndexStream("nlogn")
    pstream = IndexStream("primes")
    floor_v = f.first_defined_index()
    start = max(scheme.n0,
                nlogn.first_index_reaching(floor_v, table),
                pstream.first_index_reaching(floor_v, table))
    max_gap = 0.0
    dens = Kahan()
    half = N // 2
    for sl_lo in range(start, N + 1, CHUNK):
        sl_hi = min(sl_lo + CHUNK - 1, N)
        n = np.arange(sl_lo, sl_hi + 1, dtype=np.int64)
        fp = f.evaluate_array(pstream.values(n, table), dtype=np.longdouble)
        fn = f.evaluate_array(nlogn.values(n, table), dtype=np.longdouble)
        gap = np.abs(np.asarray(fp - fn, dtype=np.float64))
        in_win = n >= half
        if np.any(in_win):
            max_gap = max(max_gap, float(np.max(gap[in_win])))
        disagree = np.floor(fp) != np.floor(fn)
        w = scheme.weight_values(n)
        dens.add(float(np.sum(w[disagree])))
    return SubstitutionReport(
        N=N, max_gap=max_gap, floor_density=dens.total / scheme.normalizer(N), start=start
    )


@dataclass(frozen=True)
class PerturbationReport:
    d_base: float
    d_plus_n: float
    d_plus_prime: float

    @property
    def comparable(self) -> bool:
        """Perturbed discrepancies within a factor 2 of each other."""
        lo = min(self.d_plus_n, self.d_plus_prime)
        hi = max(self.d_plus_n, self.d_plus_prime)
        return hi <= 2.0 * max(lo, 1e-12)


def perturbation_check(
    base: SequenceSpec,
    u: lefn.LEFunction,
    scheme: WeightScheme,
    N: int,
    table: PrimeTable | None = None,
) -> PerturbationReport:
    """Star discrepancy of the base sequence versus base + u(n) and base + u(p_n).

    u must stay within a bounded multiple of log W (checked symbolically);
    such perturbations preserve weighted equidistribution.
    """
    if not u.is_zero:
        order = lefn.compare_growth(u, scheme.log_leading)
        if order.is_greater:
            raise ValueError("perturbation grows faster than log W; the guarantee fails")
    table = table or _DEFAULT_TABLE
    base_d = discrepancy(base, scheme, N, table)
    if u.is_zero:
        return PerturbationReport(base_d, base_d, base_d)
    plus_n = base.plus(SequenceSpec.of(u, "naturals", label="u(n)"))
    plus_p = base.plus(SequenceSpec.of(u, "primes", label="u(p_n)"))
    return PerturbationReport(
        d_base=base_d,
        d_plus_n=discrepancy(plus_n, scheme, N, table),
        d_plus_prime=discrepancy(plus_p, scheme, N, table),
    )


# ---------------------------------------------------------------------------
# Residue-class filtering via character averaging
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResidueFilterResult:
    direct: complex
    character: complex

    @property
    def agreement(self) -> float:
        return abs(self.direct - self.character)


def residue_filter_sum(
    spec: SequenceSpec,
    scheme: WeightScheme,
    q: int,
    t: int,
    N: int,
    table: PrimeTable | None = None,
    tolerance: float = 1e-12,
) -> ResidueFilterResult:
    """(1/W(N)) sum over n = t mod q of w(n) e(x_n), two ways.

    The direct indicator and the average over additive characters
    (1/q) sum_j e((n - t) j / q) must agree to the stated tolerance; a
    mismatch raises, as it indicates a broken summation kernel.
    """
    if q < 2:
        raise ValueError("need a modulus q >= 2")
    table = table or _DEFAULT_TABLE
    start = spec.start_index(scheme, table)
    direct = KahanComplex()
    char = KahanComplex()
    for sl_lo in range(start, N + 1, CHUNK):
        sl_hi = min(sl_lo + CHUNK - 1, N)
        n = np.arange(sl_lo, sl_hi + 1, dtype=np.int64)
        w = scheme.weight_values(n)
        fx = spec.frac(n, table)
        phase = TWO_PI * fx
        base = w * np.cos(phase) + 1j * w * np.sin(phase)
        mask = (n % q) == (t % q)
        direct.add(complex(np.sum(base[mask])))
        mean = np.zeros(len(n), dtype=np.complex128)
        for j in range(1, q + 1):
            cphase = TWO_PI * (((n - t) * j % q) / q)
            mean += np.cos(cphase) + 1j * np.sin(cphase)
        char.add(complex(np.sum(base * mean / q)))
    WN = scheme.normalizer(N)
    result = ResidueFilterResult(direct.total / WN, char.total / WN)
    if result.agreement > tolerance:
        raise AssertionError(
            f"residue filter mismatch {result.agreement:.3e} exceeds {tolerance:.1e}"
        )
    return result


# ---------------------------------------------------------------------------
# Partial-sum sequences
# ---------------------------------------------------------------------------

def partial_sums(f: lefn.LEFunction, N: int) -> tuple[int, np.ndarray]:
    """(start, prefix sums of f(k) for k = start..N), compensated."""
    start = f.first_defined_index()
    out = np.empty(N - start + 1, dtype=np.longdouble)
    carry = np.longdouble(0.0)
    pos = 0
    for sl in chunk_slices(N - start + 1):
        k = np.arange(start + sl.start, start + sl.stop, dtype=np.int64)
        vals = f.evaluate_array(k, dtype=np.longdouble)
        c = np.cumsum(vals) + carry
        out[pos : pos + len(k)] = c
        carry = c[-1]
        pos += len(k)
    return start, out


@dataclass(frozen=True)
class PartialSumVerdict:
    uniform: bool
    detail: str


def decide_sum_ud(f: lefn.LEFunction, scheme: WeightScheme) -> PartialSumVerdict:
    """Does u_n = sum_{k<=n} f(k) equidistribute under the scheme?

    Criterion: (W/w) |f - q| -> infinity for every rational polynomial q;
    with f = P + r this reduces to r outgrowing w/W strictly.
    """
    _, r = lefn.rational_poly_part(f)
    if r.is_zero:
        return PartialSumVerdict(False, "f is a rational polynomial; partial sums are periodic mod 1")
    num = r.leading.exponents
    den: list[lefn.QLin] = list(scheme.w.leading.exponents)
    for j, e in enumerate(scheme.W.leading.exponents):
        while len(den) <= j:
            den.append(lefn.QLin.rational(0))
        den[j] = den[j] - e
    from .lefn.core import cmp_vectors

    c = cmp_vectors(num, tuple(den))
    if c > 0:
        return PartialSumVerdict(True, "residue outgrows w/W")
    return PartialSumVerdict(False, "residue within w/W scale; averages cannot converge to uniform")
