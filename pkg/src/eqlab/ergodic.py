"""Weighted averages of commuting diagonal unitaries, and recurrence probes.

Commuting normal operators diagonalize simultaneously, so the model keeps
each unitary as a diagonal of phases e(theta).  The weighted average
A_N f = (1/W(N)) sum w(n) U_1^floor(u_1) ... U_k^floor(u_k) f then reduces
coordinate-wise to the same weighted exponential sums the equidist module
computes, and the limit is the projection onto the coordinates whose phases
are all integers.

Recurrence probes scan pattern tuples (q_1(n), ..., floor(u_1(n)), ...)
against the difference set E - E of a finite set E in a box of Z^m; E - E
membership comes from the autocorrelation support computed by FFT, and every
reported witness is re-verified by direct set intersection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.signal import fftconvolve

from . import lefn
from .accum import CHUNK, Kahan, KahanComplex
from .equidist import IndexStream, PrimeTable, _DEFAULT_TABLE
from .weights import WeightScheme

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Diagonal systems
# ---------------------------------------------------------------------------

def _is_integer_phase(theta: float, tol: float = 1e-12) -> bool:
    return abs(theta - round(theta)) <= tol


@dataclass(frozen=True)
class DiagonalSystem:
    """k commuting unitaries U_i = diag(e(theta[i, j])) acting on C^D."""

    phases: tuple[tuple[float, ...], ...]  # shape (k, D)
    f: tuple[complex, ...]

    def __post_init__(self):
        if not self.phases or any(len(row) != self.dimension for row in self.phases):
            raise ValueError("phase rows must all have the system dimension")
        if len(self.f) != self.dimension:
            raise ValueError("vector length must match the system dimension")

    @staticmethod
    def make(phases: Sequence[Sequence[float]], f: Sequence[complex]) -> "DiagonalSystem":
        return DiagonalSystem(tuple(tuple(float(v) for v in row) for row in phases),
                              tuple(complex(v) for v in f))

    @property
    def dimension(self) -> int:
        return len(self.phases[0])

    @property
    def operator_count(self) -> int:
        return len(self.phases)

    def invariant_mask(self) -> np.ndarray:
        """True on coordinates fixed by every unitary (all phases integral)."""
        mask = np.ones(self.dimension, dtype=bool)
        for row in self.phases:
            mask &= np.array([_is_integer_phase(t) for t in row])
        return mask

    def project(self, vec: np.ndarray | None = None) -> np.ndarray:
        """Orthogonal projection onto the joint invariant subspace."""
        v = np.asarray(self.f if vec is None else vec, dtype=np.complex128)
        out = np.where(self.invariant_mask(), v, 0.0 + 0.0j)
        return out


@dataclass(frozen=True)
class AverageReport:
    N: int
    average: np.ndarray          # A_N f
    target: np.ndarray           # normalizer_ratio * Pf
    distance: float              # || A_N f - target ||_2
    normalizer_ratio: float
    span_condition: bool         # symbolic precondition verdict
    exploratory: bool            # True when run despite a failing precondition


def weighted_average(
    system: DiagonalSystem,
    us: Sequence[lefn.LEFunction | str],
    stream: str | IndexStream,
    scheme: WeightScheme,
    N: int,
    table: PrimeTable | None = None,
    allow_exploratory: bool = True,
) -> AverageReport:
    """A_N f = (1/W(N)) sum w(n) prod_i U_i^floor(u_i(idx n)) f, with its limit gap.

    The integer-span condition on the exponents is checked symbolically first;
    when it fails the average is still computed (labelled exploratory) unless
    ``allow_exploratory`` is off.
    """
    fns = [lefn.parse(u) if isinstance(u, str) else u for u in us]
    if len(fns) != system.operator_count:
        raise ValueError("need one exponent function per unitary")
    st = IndexStream.parse(stream) if isinstance(stream, str) else stream
    table = table or _DEFAULT_TABLE
    verdict = lefn.decide_ud_vector(fns, scheme.W)
    span_ok = verdict.kind == "uniform"
    if not span_ok and not allow_exploratory:
        raise ValueError(f"span condition fails: combination {verdict.combination}")

    start = scheme.n0
    for f in fns:
        start = max(start, st.first_index_reaching(f.first_defined_index(), table))
    if st.kind in ("primes", "approimes"):
        st.values(np.array([N], dtype=np.int64), table)

    D = system.dimension
    theta = np.asarray(system.phases, dtype=np.float64)  # (k, D)
    acc = [KahanComplex() for _ in range(D)]
    wsum = Kahan()
    for lo in range(start, N + 1, CHUNK):
        hi = min(lo + CHUNK - 1, N)
        n = np.arange(lo, hi + 1, dtype=np.int64)
        x = st.values(n, table)
        w = scheme.weight_values(n)
        floors = [np.floor(f.evaluate_array(x, dtype=np.longdouble)) for f in fns]
        for jcoord in range(D):
            # same extended-precision path as the Weyl kernel, so the D=1 case
            # agrees with weyl_sums to accumulation accuracy
            total = np.zeros(len(n), dtype=np.longdouble)
            for i in range(system.operator_count):
                t = theta[i, jcoord]
                if t != 0.0:
                    total = total + np.longdouble(t) * floors[i]
            fx = np.asarray(total - np.floor(total), dtype=np.float64)
            phase = TWO_PI * fx
            z = np.sum(w * np.cos(phase)) + 1j * np.sum(w * np.sin(phase))
            acc[jcoord].add(complex(z))
        wsum.add(float(np.sum(w)))
    WN = scheme.normalizer(N)
    ratio = wsum.total / WN
    f_vec = np.asarray(system.f, dtype=np.complex128)
    average = np.array([acc[j].total for j in range(D)]) / WN * f_vec
    target = ratio * system.project()
    return AverageReport(
        N=N,
        average=average,
        target=target,
        distance=float(np.linalg.norm(average - target)),
        normalizer_ratio=ratio,
        span_condition=span_ok,
        exploratory=not span_ok,
    )


# ---------------------------------------------------------------------------
# Recurrence probes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PatternProbe:
    """Finite set E in a box of Z^(m+k) probed against pattern tuples.

    ``poly_coeffs`` lists integer polynomial coefficients (low degree first,
    zero constant term required) for the first m coordinates; ``us`` are the
    floor-sequence functions for the last k coordinates.
    """

    points: np.ndarray                 # (|E|, m+k) integer coordinates in [0, side]
    side: int
    poly_coeffs: tuple[tuple[int, ...], ...]
    us: tuple[lefn.LEFunction, ...]
    seed: int | None = None

    def __post_init__(self):
        for coeffs in self.poly_coeffs:
            if coeffs and coeffs[0] != 0:
                raise ValueError("pattern polynomials must vanish at 0")
        if self.points.ndim != 2 or self.points.shape[1] != len(self.poly_coeffs) + len(self.us):
            raise ValueError("points must be (count, m+k)")

    @property
    def density(self) -> float:
        return len(self.points) / float((self.side + 1) ** self.points.shape[1])

    @staticmethod
    def random(
        side: int,
        density: float,
        poly_coeffs: Sequence[Sequence[int]],
        us: Sequence[lefn.LEFunction | str],
        seed: int,
    ) -> "PatternProbe":
        """Seeded random subset of the box [0, side]^(m+k) of the given density."""
        dims = len(poly_coeffs) + len(us)
        if (side + 1) ** dims > 5 * 10**7:
            raise ValueError("box too large to materialize; shrink side or dimensions")
        rng = np.random.default_rng(seed)
        mask = rng.random((side + 1,) * dims) < density
        points = np.argwhere(mask)
        return PatternProbe(
            points=points,
            side=side,
            poly_coeffs=tuple(tuple(int(c) for c in p) for p in poly_coeffs),
            us=tuple(lefn.parse(u) if isinstance(u, str) else u for u in us),
            seed=seed,
        )

    def indicator(self) -> np.ndarray:
        box = np.zeros((self.side + 1,) * self.points.shape[1], dtype=np.float64)
        box[tuple(self.points.T)] = 1.0
        return box


@dataclass(frozen=True)
class ProbeResult:
    variant: str            # 'D1' | 'D2' | 'D3'
    found: bool
    witness_index: int | None   # n for D1, the prime p for D2/D3
    tuple_hit: tuple[int, ...] | None
    scanned: int            # indices examined before exhausting the box range
    verified: bool          # witness re-checked by direct intersection


def _poly_eval(coeffs: Sequence[int], x: int) -> int:
    return sum(c * x**i for i, c in enumerate(coeffs))


def _difference_support(indicator: np.ndarray) -> np.ndarray:
    """Boolean array over [-side, side]^d marking E - E, via autocorrelation."""
    flipped = indicator[(slice(None, None, -1),) * indicator.ndim]
    corr = fftconvolve(indicator, flipped, mode="full")
    return corr > 0.5  # counts are integers; FFT noise stays far below 1/2


def recurrence_probe(
    probe: PatternProbe,
    variant: str = "D1",
    table: PrimeTable | None = None,
) -> ProbeResult:
    """Scan for n (or a prime p) whose pattern tuple lands in E - E.

    D1 uses (q_1(n), ..., q_m(n), floor(u_1(n)), ...); D2 evaluates the
    polynomial slots at p - 1 and D3 at p + 1 while the floor slots use p.
    The scan is exhaustive until any coordinate leaves the box range; the
    guarantee is asymptotic, so exhaustion is reported, not raised.
    """
    if variant not in ("D1", "D2", "D3"):
        raise ValueError("variant must be D1, D2 or D3")
    table = table or _DEFAULT_TABLE
    support = _difference_support(probe.indicator())
    side = probe.side
    m = len(probe.poly_coeffs)

    def tuple_at(idx_poly: int, idx_floor: float) -> tuple[int, ...] | None:
        out = []
        for coeffs in probe.poly_coeffs:
            out.append(_poly_eval(coeffs, idx_poly))
        for u in probe.us:
            out.append(int(math.floor(float(u.evaluate(idx_floor)))))
        if any(abs(v) > side for v in out):
            return None
        return tuple(out)

    u_floor = max([u.first_defined_index() for u in probe.us], default=1)
    scanned = 0
    if variant == "D1":
        n = max(1, u_floor)
        while True:
            tup = tuple_at(n, n)
            if tup is None:
                return ProbeResult(variant, False, None, None, scanned, False)
            scanned += 1
            if support[tuple(v + side for v in tup)]:
                return ProbeResult(variant, True, n, tup, scanned,
                                   _verify_witness(probe, tup))
            n += 1
    shift = -1 if variant == "D2" else 1
    k = 1
    while True:
        p = int(table.first(k)[-1])
        if p < u_floor:
            k += 1
            continue
        tup = tuple_at(p + shift, p)
        if tup is None:
            return ProbeResult(variant, False, None, None, scanned, False)
        scanned += 1
        if support[tuple(v + side for v in tup)]:
            return ProbeResult(variant, True, p, tup, scanned,
                               _verify_witness(probe, tup))
        k += 1


def _verify_witness(probe: PatternProbe, tup: tuple[int, ...]) -> bool:
    """Direct confirmation that the tuple lies in E - E."""
    pts = set(map(tuple, probe.points))
    shifted = probe.points + np.asarray(tup)
    inside = np.all((shifted >= 0) & (shifted <= probe.side), axis=1)
    return any(tuple(row) in pts for row in shifted[inside])
