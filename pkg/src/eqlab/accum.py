"""Compensated accumulation helpers shared by the numeric engines.

Scalar Kahan accumulators plus a deterministic chunked reduction: arrays are
summed per fixed-size chunk with numpy's pairwise summation, and the chunk
results are folded in chunk order through a Kahan accumulator.  The result is
bit-identical regardless of how many workers computed the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

# Fixed chunk length; determinism depends on this never varying per run.
CHUNK = 1 << 20


class Kahan:
    """Kahan (compensated) running sum of floats."""

    __slots__ = ("total", "carry")

    def __init__(self, total: float = 0.0):
        self.total = total
        self.carry = 0.0

    def add(self, value: float) -> None:
        y = value - self.carry
        t = self.total + y
        self.carry = (t - self.total) - y
        self.total = t


class KahanComplex:
    """Compensated running sum for complex values (real/imag pairs)."""

    __slots__ = ("re", "im")

    def __init__(self):
        self.re = Kahan()
        self.im = Kahan()

    def add(self, value: complex) -> None:
        self.re.add(value.real)
        self.im.add(value.imag)

    @property
    def total(self) -> complex:
        return complex(self.re.total, self.im.total)


def chunk_slices(n: int, chunk: int = CHUNK) -> list[slice]:
    return [slice(i, min(i + chunk, n)) for i in range(0, n, chunk)]


def reduce_sum(values: np.ndarray, threads: int = 1) -> complex:
    """Deterministic compensated sum of a 1-D array (real or complex)."""
    slices = chunk_slices(len(values))
    if threads > 1 and len(slices) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(lambda s: values[s].sum(), slices))
    else:
        partials = [values[s].sum() for s in slices]
    acc = KahanComplex()
    for p in partials:
        acc.add(complex(p))
    return acc.total


def reduce_sum_real(values: np.ndarray, threads: int = 1) -> float:
    return reduce_sum(values, threads=threads).real


def frac_scalar(x: float) -> float:
    """Fractional part in [0, 1)."""
    f = math.fmod(x, 1.0)
    return f + 1.0 if f < 0.0 else f
