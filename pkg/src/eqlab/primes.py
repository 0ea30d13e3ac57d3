"""High-throughput prime generation with classical bound checks.

A segmented, odd-only sieve of Eratosthenes backs everything: the n-th prime,
prime streams, primes in arithmetic progressions, the bracket
n log n <= p_n <= n (log n + log log n), and the totient function.  Segments
default to 2^18 odd flags so each fits in L2 cache; numpy strided clears do
the marking.

An optional on-disk cache ("PRIMESv1": little-endian u64 count followed by
u64 deltas from 0) makes repeated large runs cheap; point EQLAB_CACHE at a
directory to enable it from the CLI.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

SEGMENT_ODDS = 1 << 18
DEFAULT_INDEX_LIMIT = 10**8

_MAGIC = b"PRIMESv1"


class PrimeLimitError(ValueError):
    pass


def _upper_bound_for_nth(n: int) -> int:
    """Sieve ceiling guaranteed to contain the n-th prime."""
    if n < 6:
        return 15
    x = float(n)
    return int(x * (math.log(x) + math.log(math.log(x)))) + 10


def simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit, by a dense sieve; used for base primes."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def sieve_range(limit: int, segment_odds: int = SEGMENT_ODDS) -> Iterator[np.ndarray]:
    """Yield arrays of primes covering [2, limit] in increasing order."""
    if limit < 2:
        return
    base = simple_sieve(math.isqrt(limit))
    # primes up to sqrt(limit) come straight from the base sieve
    yield base if len(base) else np.array([2], dtype=np.int64)
    low = (math.isqrt(limit) + 1) | 1
    span = 2 * segment_odds
    odd_base = base[1:]
    while low <= limit:
        high = min(low + span, limit + 1)
        count = (high - low + 1) // 2
        mask = np.ones(count, dtype=bool)
        for p in odd_base:
            p = int(p)
            start = max(p * p, ((low + p - 1) // p) * p)
            if start % 2 == 0:
                start += p
            if start >= high:
                continue
            mask[(start - low) // 2 :: p] = False
        yield (low + 2 * np.flatnonzero(mask)).astype(np.int64)
        low = high


def primes_upto(limit: int) -> np.ndarray:
    """All primes <= limit as one array."""
    parts = list(sieve_range(limit))
    if not parts:
        return np.array([], dtype=np.int64)
    return np.concatenate(parts)


def first_primes(count: int, cache_dir: str | os.PathLike | None = None) -> np.ndarray:
    """The first ``count`` primes, using and refreshing the cache when enabled."""
    if count <= 0:
        return np.array([], dtype=np.int64)
    if count > DEFAULT_INDEX_LIMIT:
        raise PrimeLimitError(f"requested index {count} exceeds the configured limit")
    cache_dir = cache_dir if cache_dir is not None else os.environ.get("EQLAB_CACHE")
    if cache_dir:
        cached = load_cache(Path(cache_dir) / "primes.bin")
        if cached is not None and len(cached) >= count:
            return cached[:count]
    limit = _upper_bound_for_nth(count)
    primes = primes_upto(limit)
    while len(primes) < count:  # bound is proven for n >= 6; grow just in case
        limit *= 2
        primes = primes_upto(limit)
    primes = primes[:count]
    if cache_dir:
        path = Path(cache_dir)
        path.mkdir(parents=True, exist_ok=True)
        save_cache(path / "primes.bin", primes)
    return primes


def nth_prime(n: int, cache_dir: str | os.PathLike | None = None) -> int:
    """The n-th prime, 1-indexed: nth_prime(1) == 2."""
    if n < 1:
        raise ValueError("prime indices start at 1")
    return int(first_primes(n, cache_dir=cache_dir)[-1])


# ---------------------------------------------------------------------------
# Streams
# ---------------------------------------------------------------------------

@dataclass
class PrimeStream:
    """Single-consumer iterator over p_1, p_2, ... in increasing order."""

    limit: int = DEFAULT_INDEX_LIMIT

    def __iter__(self) -> Iterator[int]:
        produced = 0
        low_exclusive = 1
        ceiling = _upper_bound_for_nth(min(self.limit, 1 << 16))
        while produced < self.limit:
            for block in sieve_range(ceiling):
                for p in block:
                    if p <= low_exclusive:
                        continue
                    produced += 1
                    yield int(p)
                    if produced >= self.limit:
                        return
            low_exclusive = ceiling
            ceiling *= 2


@dataclass
class APPrimeStream:
    """Primes congruent to d mod a, in increasing order."""

    a: int
    d: int
    limit: int = DEFAULT_INDEX_LIMIT

    def __post_init__(self):
        if self.a < 1 or not (1 <= self.d <= self.a):
            raise ValueError("need a >= 1 and 1 <= d <= a")
        if math.gcd(self.a, self.d) != 1:
            raise ValueError(f"gcd({self.a},{self.d}) != 1: the progression holds at most one prime")

    def __iter__(self) -> Iterator[int]:
        for p in PrimeStream(limit=DEFAULT_INDEX_LIMIT):
            if p % self.a == self.d % self.a:
                yield p


def ap_primes(a: int, d: int, count: int, cache_dir=None) -> np.ndarray:
    """First ``count`` primes congruent to d mod a."""
    APPrimeStream(a, d, limit=count)  # argument validation
    if a == 1:
        return first_primes(count, cache_dir=cache_dir)
    # density ~ 1/phi(a) of all primes; oversample then extend if short
    factor = euler_phi(a)
    guess = max(1000, int(1.2 * factor * count))
    while True:
        pool = first_primes(guess, cache_dir=cache_dir)
        sel = pool[pool % a == d % a]
        if len(sel) >= count:
            return sel[:count]
        guess *= 2


def nth_prime_ap(a: int, d: int, n: int, cache_dir=None) -> tuple[int, float]:
    """n-th prime in the progression d mod a, with its PNT diagnostic ratio.

    The ratio p / (phi(a) n log n) tends to 1 slowly from above.
    """
    p = int(ap_primes(a, d, n, cache_dir=cache_dir)[-1])
    ratio = p / (euler_phi(a) * n * math.log(n)) if n >= 2 else float("nan")
    return p, ratio


# ---------------------------------------------------------------------------
# Classical bounds and the totient
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RosserReport:
    n_max: int
    lower_ok: bool
    upper_ok: bool
    max_lower_slack: float  # max of n log n - p_n (negative when the bound holds)
    max_upper_slack: float  # max of p_n - n(log n + log log n) over n >= 6

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def rosser_check(n_max: int, cache_dir=None) -> RosserReport:
    """Verify n log n <= p_n (all n) and p_n <= n(log n + log log n) (n >= 6)."""
    if n_max < 6:
        raise ValueError("need n_max >= 6 to exercise both bounds")
    p = first_primes(n_max, cache_dir=cache_dir).astype(np.float64)
    n = np.arange(1, n_max + 1, dtype=np.float64)
    lower = n * np.log(n)
    lower_slack = float(np.max(lower - p))
    upper = n[5:] * (np.log(n[5:]) + np.log(np.log(n[5:])))
    upper_slack = float(np.max(p[5:] - upper))
    return RosserReport(
        n_max=n_max,
        lower_ok=lower_slack <= 0.0,
        upper_ok=upper_slack <= 0.0,
        max_lower_slack=lower_slack,
        max_upper_slack=upper_slack,
    )


def euler_phi(a: int) -> int:
    """Euler's totient, by trial-division factorization."""
    if a < 1:
        raise ValueError("totient is defined for positive integers")
    result = a
    m = a
    p = 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1 if p == 2 else 2
    if m > 1:
        result -= result // m
    return result


# ---------------------------------------------------------------------------
# On-disk cache
# ---------------------------------------------------------------------------

def save_cache(path: str | os.PathLike, primes: np.ndarray) -> None:
    """Write primes as the PRIMESv1 delta format (little-endian 64-bit)."""
    arr = np.asarray(primes, dtype=np.int64)
    deltas = np.diff(arr, prepend=np.int64(0)).astype("<u8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", len(arr)))
        fh.write(deltas.tobytes())


def load_cache(path: str | os.PathLike) -> np.ndarray | None:
    """Read a PRIMESv1 file; None when absent or malformed."""
    try:
        with open(path, "rb") as fh:
            if fh.read(8) != _MAGIC:
                return None
            (count,) = struct.unpack("<Q", fh.read(8))
            deltas = np.frombuffer(fh.read(8 * count), dtype="<u8")
            if len(deltas) != count:
                return None
            return np.cumsum(deltas.astype(np.int64))
    except (OSError, struct.error):
        return None
