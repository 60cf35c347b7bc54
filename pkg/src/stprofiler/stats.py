"""Order statistics, fixed-bin histograms and divergence measures.

Shared numeric primitives behind the dataset property scores:
linear-interpolation quantiles, Tukey's fences, a mergeable counting
histogram with ``np.histogram`` bin semantics, the base-2 Jensen-Shannon
divergence, and two accumulators whose results do not depend on how an
input stream was batched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, IncompatibleHistogramError, InvalidValueError

DEFAULT_BINS = 10_000


def as_column(values, name: str = "column") -> np.ndarray:
    """Coerce to a 1-D float64 array, rejecting empty or NaN input."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise EmptyInputError(f"{name} is empty")
    if np.isnan(arr).any():
        raise InvalidValueError(f"{name} contains NaN")
    return arr


def quantiles(values, q) -> np.ndarray:
    """Exact quantiles by linear interpolation at position q * (n - 1)."""
    arr = as_column(values)
    q = np.atleast_1d(np.asarray(q, dtype=np.float64))
    if q.size == 0 or (q < 0.0).any() or (q > 1.0).any():
        raise ValueError("quantile levels must lie in [0, 1]")
    return np.quantile(arr, q)


@dataclass(frozen=True)
class TukeyFences:
    """Quartiles plus the inner (1.5 IQR) and outer (3 IQR) fences."""

    q1: float
    q3: float

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1

    @property
    def inner(self) -> tuple[float, float]:
        return (self.q1 - 1.5 * self.iqr, self.q3 + 1.5 * self.iqr)

    @property
    def outer(self) -> tuple[float, float]:
        return (self.q1 - 3.0 * self.iqr, self.q3 + 3.0 * self.iqr)

    @classmethod
    def from_values(cls, values) -> "TukeyFences":
        q1, q3 = quantiles(values, (0.25, 0.75))
        return cls(q1=float(q1), q3=float(q3))


def tukey_filter(values) -> tuple[np.ndarray, TukeyFences]:
    """Return (values inside the closed inner fences, the fences)."""
    arr = as_column(values)
    fences = TukeyFences.from_values(arr)
    lo, hi = fences.inner
    return arr[(arr >= lo) & (arr <= hi)], fences


class Histogram:
    """Fixed-width counting histogram over [lo, hi].

    Edges and bin assignment follow ``np.histogram``: ``bins`` uniform bins,
    the right edge of the last bin inclusive, values outside the range
    ignored. Counts are integers, so accumulation order never changes the
    result and histograms over the same edges merge exactly.
    """

    __slots__ = ("edges", "counts")

    def __init__(self, lo: float, hi: float, bins: int = DEFAULT_BINS):
        if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
            raise ValueError(f"invalid histogram range [{lo}, {hi}]")
        if bins < 1:
            raise ValueError("bins must be >= 1")
        self.edges = np.linspace(lo, hi, bins + 1)
        self.counts = np.zeros(bins, dtype=np.int64)

    @classmethod
    def from_values(cls, values, lo=None, hi=None, bins: int = DEFAULT_BINS):
        arr = as_column(values)
        hist = cls(
            float(arr.min()) if lo is None else lo,
            float(arr.max()) if hi is None else hi,
            bins,
        )
        hist.add(arr)
        return hist

    @property
    def bins(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def add(self, values) -> None:
        arr = np.asarray(values, dtype=np.float64).ravel()
        if arr.size:
            batch, _ = np.histogram(arr, bins=self.edges)
            self.counts += batch

    def merge(self, other: "Histogram") -> None:
        if not np.array_equal(self.edges, other.edges):
            raise IncompatibleHistogramError("histograms have different bin edges")
        self.counts += other.counts

    def normalize(self) -> np.ndarray:
        """Probability vector; bins sum to 1 (exactly, up to division rounding)."""
        total = self.total
        if total == 0:
            raise EmptyInputError("histogram is empty")
        return self.counts / total


def uniform_distribution(bins: int) -> np.ndarray:
    return np.full(bins, 1.0 / bins)


def _kl_base2(p: np.ndarray, m: np.ndarray) -> float:
    mask = p > 0
    return float(np.sum(p[mask] * np.log2(p[mask] / m[mask])))


def jsd(p, q) -> float:
    """Jensen-Shannon divergence with base-2 logarithm, in [0, 1].

    Accepts two probability vectors, or two Histograms sharing identical bin
    edges (normalized internally). Zero bins follow the 0 * log(0/x) = 0
    convention; the result is 0 for identical inputs, 1 for disjoint
    supports, and symmetric in its arguments.
    """
    if isinstance(p, Histogram) and isinstance(q, Histogram):
        if not np.array_equal(p.edges, q.edges):
            raise IncompatibleHistogramError("histograms have different bin edges")
        p, q = p.normalize(), q.normalize()
    elif isinstance(p, Histogram) or isinstance(q, Histogram):
        raise IncompatibleHistogramError("cannot mix a histogram with a raw vector")
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    if p.shape != q.shape:
        raise IncompatibleHistogramError(f"length mismatch: {p.size} vs {q.size}")
    for name, vec in (("p", p), ("q", q)):
        if vec.size == 0:
            raise EmptyInputError(f"{name} is empty")
        if (vec < 0).any() or abs(float(vec.sum()) - 1.0) > 1e-6:
            raise ValueError(f"{name} is not a probability distribution")
    m = 0.5 * (p + q)
    value = 0.5 * (_kl_base2(p, m) + _kl_base2(q, m))
    return min(max(value, 0.0), 1.0)


class ChunkedSum:
    """Streaming sum whose result is independent of input batching.

    Values are folded into fixed-size chunks aligned to the global element
    index; each full chunk is reduced with ``np.sum`` and the chunk subtotals
    are combined exactly (``math.fsum``). Feeding the same element sequence
    in any batch sizes therefore yields bit-identical totals.
    """

    def __init__(self, chunk: int = 4096):
        if chunk < 1:
            raise ValueError("chunk must be >= 1")
        self._chunk = chunk
        self._buffer = np.empty(chunk, dtype=np.float64)
        self._fill = 0
        self._subtotals: list[float] = []
        self.count = 0

    def add(self, values) -> None:
        arr = np.asarray(values, dtype=np.float64).ravel()
        self.count += arr.size
        while arr.size:
            take = min(self._chunk - self._fill, arr.size)
            self._buffer[self._fill : self._fill + take] = arr[:take]
            self._fill += take
            arr = arr[take:]
            if self._fill == self._chunk:
                self._subtotals.append(float(np.sum(self._buffer)))
                self._fill = 0

    def total(self) -> float:
        tail = float(np.sum(self._buffer[: self._fill])) if self._fill else 0.0
        return math.fsum(self._subtotals + [tail])


class Reservoir:
    """Uniform reservoir sample consuming exactly one random draw per row.

    The random stream advances once per incoming row whether or not the row
    is kept, so the sampled content depends only on (seed, global row order)
    and never on batch boundaries. ``width`` switches from scalar values to
    fixed-width rows.
    """

    def __init__(self, capacity: int, seed, width: int | None = None):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self._rng = np.random.default_rng(seed)
        self.capacity = capacity
        shape = (capacity,) if width is None else (capacity, width)
        self._store = np.empty(shape, dtype=np.float64)
        self.seen = 0

    def add(self, rows) -> None:
        rows = np.asarray(rows, dtype=np.float64)
        n = rows.shape[0]
        if n == 0:
            return
        draws = self._rng.random(n)
        pos = self.seen + np.arange(n)
        fill = pos < self.capacity
        if fill.any():
            self._store[pos[fill]] = rows[fill]
        rest = ~fill
        if rest.any():
            slots = (draws[rest] * (pos[rest] + 1.0)).astype(np.int64)
            accept = slots < self.capacity
            slots, kept = slots[accept], rows[rest][accept]
            # replacements must land in arrival order
            for i in range(len(slots)):
                self._store[slots[i]] = kept[i]
        self.seen += n

    @property
    def saturated(self) -> bool:
        return self.seen > self.capacity

    def values(self) -> np.ndarray:
        return self._store[: min(self.seen, self.capacity)].copy()
