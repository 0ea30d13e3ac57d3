"""Weight schemes w = W' with closed-form normalization.

A scheme wraps an admissible antiderivative W (W -> infinity, w = W' positive
and non-increasing).  Averages are normalized by the closed form W(N) rather
than the discrete sum; the two agree in the limit and the closed form keeps
streaming passes O(1) in memory.  ``normalizer_ratio`` reports the discrete
cross-check.

The scheme start index n0 is the first integer at which all log iterates of W
are strictly positive, so weights and the normalizer are positive from the
first term used.  Reindexed schemes n -> w(a n + d) keep the original's
log-leading behavior, so every equidistribution verdict is unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import lefn
from .accum import reduce_sum_real
from .lefn.core import _tower


@dataclass(frozen=True)
class WeightScheme:
    """Weight w(n) with antiderivative W and closed-form normalizer.

    ``a``/``d`` implement the reindexed variant n -> w(a n + d) whose
    normalizer is W(a x + d)/a.
    """

    W: lefn.LEFunction
    w: lefn.LEFunction
    n0: int
    text: str
    a: int = 1
    d: int = 0
    _log_leading: lefn.LEFunction = field(repr=False, default=None)

    @property
    def log_leading(self) -> lefn.LEFunction:
        return self._log_leading

    def weight_values(self, n: np.ndarray) -> np.ndarray:
        """w at the given indices (float64; weights are O(1) so doubles suffice)."""
        idx = np.asarray(n, dtype=np.float64)
        if self.a != 1 or self.d != 0:
            idx = self.a * idx + self.d
        return np.asarray(self.w.evaluate_array(idx, dtype=np.float64), dtype=np.float64)

    def normalizer(self, N: int) -> float:
        """Closed-form W(N) (reindexed: W(aN + d)/a)."""
        x = self.a * N + self.d
        return float(self.W.evaluate(x)) / self.a

    def normalizer_array(self, N: np.ndarray) -> np.ndarray:
        """Vectorized closed-form normalizer over many checkpoints."""
        x = self.a * np.asarray(N, dtype=np.float64) + self.d
        return np.asarray(self.W.evaluate_array(x, dtype=np.float64), dtype=np.float64) / self.a

    def start_index(self, *functions: lefn.LEFunction) -> int:
        """First index usable for a weighted average of the given sequences."""
        n = self.n0
        for f in functions:
            n = max(n, f.first_defined_index())
        return n

    def reindex(self, a: int, d: int) -> "WeightScheme":
        """Scheme with weight n -> w(a n + d); verdict-equivalent to this one."""
        if a < 1 or d < 0 or d > a - 1:
            raise ValueError("need a >= 1 and 0 <= d <= a-1")
        return WeightScheme(
            W=self.W,
            w=self.w,
            n0=self.n0,
            text=f"{self.text}|reindex:{a},{d}",
            a=a,
            d=d,
            _log_leading=self._log_leading,
        )


def _strict_positive_start(W: lefn.LEFunction, w: lefn.LEFunction) -> int:
    depth = max(W.depth, w.depth)
    if depth == 0:
        return 1
    return math.floor(_tower(depth - 1)) + 1


def make_scheme(W_text: str) -> WeightScheme:
    """Build a scheme from the antiderivative's grammar text, validating it."""
    W = lefn.parse(W_text) if isinstance(W_text, str) else W_text
    w = lefn.validate_admissible(W)
    n0 = _strict_positive_start(W, w)
    # numeric spot check: positive and non-increasing over the first stretch
    probe = np.arange(n0, n0 + 512, dtype=np.float64)
    values = w.evaluate_array(probe, dtype=np.float64)
    if not np.all(values > 0) or not np.all(np.diff(values) <= 1e-15):
        raise lefn.InadmissibleWeight("weight fails positivity or monotonicity near its start")
    return WeightScheme(
        W=W,
        w=w,
        n0=n0,
        text=W_text if isinstance(W_text, str) else lefn.to_text(W),
        _log_leading=lefn.log_leading(W),
    )


def normalizer_ratio(scheme: WeightScheme, N: int) -> float:
    """(sum of w(n) for n0 <= n <= N) / W(N); tends to 1."""
    if N < scheme.n0:
        raise ValueError(f"N={N} is below the scheme start {scheme.n0}")
    total = 0.0
    for lo in range(scheme.n0, N + 1, 1 << 22):
        hi = min(lo + (1 << 22) - 1, N)
        total += reduce_sum_real(scheme.weight_values(np.arange(lo, hi + 1)))
    return total / scheme.normalizer(N)


def reindex(scheme: WeightScheme, a: int, d: int) -> WeightScheme:
    return scheme.reindex(a, d)
