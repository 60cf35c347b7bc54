"""The four dataset property scores over streaming column sources.

* sample-imbalance: mean JSD between each feature's outlier-filtered
  histogram and the uniform distribution (0 = perfectly balanced).
* split-shift: mean JSD between two splits' histograms per feature, with
  fences and bin edges shared via the union of both splits.
* input-output sensitivity: mean arctan-normalized absolute incremental
  ratio of each label with respect to each sorted feature.
* outlier presence: mean of a piecewise per-point score driven by the inner
  and outer Tukey fences.

A column source is any zero-argument callable returning a fresh iterator of
``{column -> 1-d array}`` batches; storage handles provide one per split and
``array_source`` wraps in-memory columns. Results are deterministic for a
given seed: identical regardless of batch size or thread count. Columns are
held in memory only up to a configurable budget, beyond which a seeded
reservoir sample drives the quantiles and the report is flagged approximate.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ConfigurationError,
    EmptyInputError,
    InvalidValueError,
    UndefinedScoreError,
    UnsupportedFeatureError,
)
from .stats import (
    DEFAULT_BINS,
    ChunkedSum,
    Histogram,
    Reservoir,
    TukeyFences,
    jsd,
    uniform_distribution,
)

__all__ = [
    "ScoreConfig",
    "ScoreReport",
    "array_source",
    "concat_sources",
    "simb_score",
    "stood_score",
    "io_score",
    "outlier_score",
    "OUTLIER_FUNCTIONS",
]


@dataclass(frozen=True)
class ScoreConfig:
    """Shared scoring configuration.

    ``memory_budget`` caps how many values of a column are held in memory;
    larger columns fall back to a seeded reservoir of that size for the
    quantile estimates. ``sample_cap`` and ``pair_cap`` bound the rows and
    feature-label pairs evaluated by the input-output score.
    """

    bins: int = DEFAULT_BINS
    sample_cap: int = 100_000
    pair_cap: int = 10_000
    memory_budget: int = 1_000_000
    seed: int = 0
    outlier_fn: str = "ramp"
    chunk: int = 4096

    def echo(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ScoreReport:
    """A score with its per-column (or per-pair) sub-scores and provenance."""

    kind: str
    overall: float
    sub_scores: dict
    splits: tuple
    config: dict
    row_counts: dict
    approximate: bool = False

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "overall": self.overall,
            "sub_scores": dict(self.sub_scores),
            "splits": list(self.splits),
            "config": dict(self.config),
            "row_counts": dict(self.row_counts),
            "approximate": self.approximate,
        }

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))


def _finish(kind, subs, splits, config, row_counts, approximate) -> ScoreReport:
    if not subs:
        raise UndefinedScoreError(f"{kind}: no sub-scores were produced")
    overall = math.fsum(subs.values()) / len(subs)
    return ScoreReport(
        kind=kind,
        overall=overall,
        sub_scores=subs,
        splits=tuple(splits),
        config=config.echo(),
        row_counts=row_counts,
        approximate=approximate,
    )


# -- column sources ----------------------------------------------------------


def array_source(columns: dict, batch_size: int = 8192):
    """Wrap in-memory columns as a re-iterable streaming source."""
    columns = {k: np.asarray(v) for k, v in columns.items()}
    sizes = {v.shape[0] for v in columns.values()}
    if len(sizes) > 1:
        raise ValueError(f"ragged columns: lengths {sorted(sizes)}")
    n = sizes.pop() if sizes else 0

    def source():
        for start in range(0, n, batch_size):
            yield {k: v[start : start + batch_size] for k, v in columns.items()}
        if n == 0:
            yield {k: v[:0] for k, v in columns.items()}

    return source


def concat_sources(*sources):
    """Chain column sources; used for scoring the union of splits."""

    def source():
        for src in sources:
            yield from src()

    return source


def _numeric_batch(batch, column):
    values = batch[column]
    arr = np.asarray(values)
    if arr.dtype.kind not in "fiub":
        raise UnsupportedFeatureError(
            f"column '{column}' is not numeric; featurize it before scoring"
        )
    arr = arr.astype(np.float64, copy=False)
    if np.isnan(arr).any():
        raise InvalidValueError(f"column '{column}' contains NaN")
    return arr


class _ColumnCollector:
    """Collects a column exactly up to a budget, then degrades to a reservoir.

    On overflow the already-buffered rows are replayed into the reservoir in
    arrival order, so the final sample is identical to a reservoir that saw
    the whole stream from the start.
    """

    def __init__(self, budget: int, seed_key):
        self._budget = budget
        self._seed_key = seed_key
        self._parts: list[np.ndarray] = []
        self._reservoir: Reservoir | None = None
        self.count = 0

    def add(self, arr: np.ndarray) -> None:
        self.count += arr.size
        if self._reservoir is None and self.count <= self._budget:
            self._parts.append(arr.copy())
            return
        if self._reservoir is None:
            self._reservoir = Reservoir(self._budget, np.random.SeedSequence(self._seed_key))
            for part in self._parts:
                self._reservoir.add(part)
            self._parts = []
        self._reservoir.add(arr)

    def result(self) -> tuple[np.ndarray, bool]:
        if self._reservoir is not None:
            return self._reservoir.values(), True
        if not self._parts:
            return np.empty(0), False
        return np.concatenate(self._parts), False


def _resolve_columns(source, columns):
    if columns is not None:
        return list(columns)
    for batch in source():
        return list(batch.keys())
    raise EmptyInputError("source yielded no batches")


def _collect(source, columns, config: ScoreConfig, salt: int):
    """Pass A: one scan filling a collector per column."""
    collectors = {
        col: _ColumnCollector(config.memory_budget, (config.seed, salt, i))
        for i, col in enumerate(columns)
    }
    rows = 0
    for batch in source():
        first = True
        for col in columns:
            arr = _numeric_batch(batch, col)
            if first:
                rows += arr.size
                first = False
            collectors[col].add(arr)
    results = {col: collectors[col].result() for col in columns}
    for col, (values, _) in results.items():
        if values.size == 0 and rows == 0:
            raise EmptyInputError(f"column '{col}' is empty")
    return results, rows


def _fence_range_pass(source, fences: dict):
    """Min/max of the in-fence values per column, streamed."""
    ranges = {col: (math.inf, -math.inf) for col in fences}
    for batch in source():
        for col, fence in fences.items():
            arr = _numeric_batch(batch, col)
            lo, hi = fence.inner
            kept = arr[(arr >= lo) & (arr <= hi)]
            if kept.size:
                cur_lo, cur_hi = ranges[col]
                ranges[col] = (min(cur_lo, float(kept.min())), max(cur_hi, float(kept.max())))
    return ranges


def _histogram_pass(source, hists: dict):
    for batch in source():
        for col, hist in hists.items():
            hist.add(_numeric_batch(batch, col))


# -- sample imbalance ---------------------------------------------------------


def simb_score(source, columns=None, config: ScoreConfig | None = None, split: str = "train") -> ScoreReport:
    """Mean JSD between each column's filtered histogram and the uniform one.

    Per column: Tukey-filter, histogram the kept range with ``config.bins``
    bins, normalize, and take the JSD against the uniform distribution over
    the same bins. A constant column (collapsed fences, all mass in one bin)
    scores 1 by convention.
    """
    config = config or ScoreConfig()
    columns = _resolve_columns(source, columns)
    collected, rows = _collect(source, columns, config, salt=1)

    subs: dict[str, float] = {}
    hists: dict[str, Histogram] = {}
    pending: dict[str, TukeyFences] = {}
    approximate = False
    for col in columns:
        values, approx = collected[col]
        fences = TukeyFences.from_values(values)
        if approx:
            approximate = True
            pending[col] = fences
            continue
        lo, hi = fences.inner
        kept = values[(values >= lo) & (values <= hi)]
        kmin, kmax = float(kept.min()), float(kept.max())
        if kmin == kmax:
            subs[col] = 1.0
        else:
            hist = Histogram(kmin, kmax, config.bins)
            hist.add(values)  # out-of-range values are out-of-fence by construction
            hists[col] = hist

    if pending:
        ranges = _fence_range_pass(source, pending)
        stream_hists = {}
        for col, (kmin, kmax) in ranges.items():
            if kmin == kmax:
                subs[col] = 1.0
            else:
                stream_hists[col] = Histogram(kmin, kmax, config.bins)
        _histogram_pass(source, stream_hists)
        hists.update(stream_hists)

    uniform = uniform_distribution(config.bins)
    for col in columns:
        if col in hists:
            subs[col] = jsd(hists[col].normalize(), uniform)
    subs = {col: subs[col] for col in columns}
    return _finish("simb", subs, (split,), config, {split: rows}, approximate)


# -- spatio-temporal distribution shift ---------------------------------------


def stood_score(source_a, source_b, columns=None, config: ScoreConfig | None = None,
                splits=("train", "val")) -> ScoreReport:
    """Mean JSD between two splits' histograms per column.

    Fences come from the union of both splits; bin edges span the kept range
    of the union, so the two histograms are directly comparable. Identical
    splits score 0; disjoint supports score 1. A split whose values are all
    filtered out scores 1 against the other; a shared degenerate range
    scores 0.
    """
    config = config or ScoreConfig()
    columns = _resolve_columns(source_a, columns)
    got_a, rows_a = _collect(source_a, columns, config, salt=2)
    got_b, rows_b = _collect(source_b, columns, config, salt=3)

    subs: dict[str, float] = {}
    pending: dict[str, TukeyFences] = {}
    pairs: dict[str, tuple[Histogram, Histogram]] = {}
    approximate = False
    for col in columns:
        vals_a, approx_a = got_a[col]
        vals_b, approx_b = got_b[col]
        fences = TukeyFences.from_values(np.concatenate([vals_a, vals_b]))
        if approx_a or approx_b:
            approximate = True
            pending[col] = fences
            continue
        lo, hi = fences.inner
        kept_a = vals_a[(vals_a >= lo) & (vals_a <= hi)]
        kept_b = vals_b[(vals_b >= lo) & (vals_b <= hi)]
        value = _stood_from_kept(kept_a, kept_b, vals_a, vals_b, config.bins, pairs, col)
        if value is not None:
            subs[col] = value

    if pending:
        ranges_a = _fence_range_pass(source_a, pending)
        ranges_b = _fence_range_pass(source_b, pending)
        stream_pairs = {}
        for col in pending:
            lo_a, hi_a = ranges_a[col]
            lo_b, hi_b = ranges_b[col]
            a_empty, b_empty = lo_a > hi_a, lo_b > hi_b
            if a_empty and b_empty:
                raise EmptyInputError(f"column '{col}': both splits empty after filtering")
            if a_empty or b_empty:
                subs[col] = 1.0
                continue
            kmin, kmax = min(lo_a, lo_b), max(hi_a, hi_b)
            if kmin == kmax:
                subs[col] = 0.0
                continue
            stream_pairs[col] = (
                Histogram(kmin, kmax, config.bins),
                Histogram(kmin, kmax, config.bins),
            )
        _histogram_pass(source_a, {c: p[0] for c, p in stream_pairs.items()})
        _histogram_pass(source_b, {c: p[1] for c, p in stream_pairs.items()})
        pairs.update(stream_pairs)

    for col, (hist_a, hist_b) in pairs.items():
        subs[col] = jsd(hist_a.normalize(), hist_b.normalize())
    subs = {col: subs[col] for col in columns}
    counts = {splits[0]: rows_a, splits[1]: rows_b}
    return _finish("stood", subs, splits, config, counts, approximate)


def _stood_from_kept(kept_a, kept_b, vals_a, vals_b, bins, pairs, col):
    if kept_a.size == 0 and kept_b.size == 0:
        raise EmptyInputError(f"column '{col}': both splits empty after filtering")
    if kept_a.size == 0 or kept_b.size == 0:
        return 1.0
    kmin = min(float(kept_a.min()), float(kept_b.min()))
    kmax = max(float(kept_a.max()), float(kept_b.max()))
    if kmin == kmax:
        return 0.0
    hist_a = Histogram(kmin, kmax, bins)
    hist_b = Histogram(kmin, kmax, bins)
    hist_a.add(vals_a)
    hist_b.add(vals_b)
    pairs[col] = (hist_a, hist_b)
    return None  # filled in once both histograms are complete


# -- input-output sensitivity --------------------------------------------------


def io_score(source, feature_columns, label_columns, config: ScoreConfig | None = None,
             splits=("all",)) -> ScoreReport:
    """Mean arctan-normalized |dlabel/dfeature| over feature-label pairs.

    Rows are ordered by (feature, label) per pair; consecutive rows with
    equal feature values are skipped as undefined ratios. Pairs where every
    ratio is undefined are excluded from the outer mean; if that excludes
    every pair the score is undefined. Rows beyond ``config.sample_cap`` and
    pairs beyond ``config.pair_cap`` are subsampled with the configured seed.
    """
    config = config or ScoreConfig()
    feature_columns = list(feature_columns)
    label_columns = list(label_columns)
    if not feature_columns or not label_columns:
        raise EmptyInputError("io score needs at least one feature and one label column")

    columns = feature_columns + label_columns
    width = len(columns)
    collector = None
    exact_parts: list[np.ndarray] = []
    rows = 0
    for batch in source():
        mat = np.column_stack([_numeric_batch(batch, c) for c in columns]) if len(
            next(iter(batch.values()))
        ) else np.empty((0, width))
        rows += mat.shape[0]
        if collector is None and rows <= config.sample_cap:
            exact_parts.append(mat)
            continue
        if collector is None:
            collector = Reservoir(
                config.sample_cap, np.random.SeedSequence((config.seed, 4)), width=width
            )
            for part in exact_parts:
                collector.add(part)
            exact_parts = []
        collector.add(mat)
    if collector is not None:
        data = collector.values()
        approximate = True
    else:
        data = np.concatenate(exact_parts) if exact_parts else np.empty((0, width))
        approximate = False
    if rows < 2:
        raise EmptyInputError("io score needs at least 2 data points")

    n_f, n_l = len(feature_columns), len(label_columns)
    pair_index = [(k, m) for k in range(n_f) for m in range(n_l)]
    if len(pair_index) > config.pair_cap:
        rng = np.random.default_rng(np.random.SeedSequence((config.seed, 5)))
        chosen = rng.choice(len(pair_index), size=config.pair_cap, replace=False)
        pair_index = [pair_index[i] for i in sorted(chosen)]
        approximate = True

    subs: dict[str, float] = {}
    for k, m in pair_index:
        f = data[:, k]
        l = data[:, n_f + m]
        order = np.lexsort((l, f))
        fs, ls = f[order], l[order]
        df = np.diff(fs)
        defined = df != 0
        if not defined.any():
            continue  # every ratio undefined: pair excluded
        delta = np.diff(ls)[defined] / df[defined]
        alpha = (2.0 / math.pi) * np.arctan(np.abs(delta))
        subs[f"{feature_columns[k]}->{label_columns[m]}"] = float(np.mean(alpha))
    if not subs:
        raise UndefinedScoreError("every feature-label pair had only undefined ratios")
    counts = {splits[0] if len(splits) == 1 else "+".join(splits): rows}
    return _finish("io", subs, splits, config, counts, approximate)


# -- outlier presence ----------------------------------------------------------


def ramp_outlier(values: np.ndarray, fences: TukeyFences) -> np.ndarray:
    """Default piecewise per-point scoring function.

    0 inside the closed inner fences, a linear 0 -> 1 ramp between the inner
    and outer fence (width 1.5 IQR per side), 1 at and beyond the outer
    fence. With collapsed fences (IQR 0) any value off the fence scores 1.
    """
    inner_lo, inner_hi = fences.inner
    width = 1.5 * fences.iqr
    scores = np.zeros(values.shape, dtype=np.float64)
    below = values < inner_lo
    above = values > inner_hi
    if width == 0.0:
        scores[below | above] = 1.0
        return scores
    scores[below] = np.minimum(1.0, (inner_lo - values[below]) / width)
    scores[above] = np.minimum(1.0, (values[above] - inner_hi) / width)
    return scores


OUTLIER_FUNCTIONS = {"ramp": ramp_outlier}


def outlier_score(source, columns=None, config: ScoreConfig | None = None,
                  split: str = "train") -> ScoreReport:
    """Mean per-point outlier score per column, averaged over columns.

    The per-point score comes from the configured piecewise function of each
    column's inner and outer Tukey fences (no outlier removal here).
    """
    config = config or ScoreConfig()
    try:
        fn = OUTLIER_FUNCTIONS[config.outlier_fn]
    except KeyError:
        raise ConfigurationError(
            f"unknown outlier function '{config.outlier_fn}'; valid: {sorted(OUTLIER_FUNCTIONS)}"
        ) from None
    columns = _resolve_columns(source, columns)
    collected, rows = _collect(source, columns, config, salt=6)

    subs: dict[str, float] = {}
    pending: dict[str, TukeyFences] = {}
    approximate = False
    for col in columns:
        values, approx = collected[col]
        fences = TukeyFences.from_values(values)
        if approx:
            approximate = True
            pending[col] = fences
        else:
            subs[col] = float(np.mean(fn(values, fences)))

    if pending:
        sums = {col: ChunkedSum(config.chunk) for col in pending}
        for batch in source():
            for col, fence in pending.items():
                sums[col].add(fn(_numeric_batch(batch, col), fence))
        for col, acc in sums.items():
            subs[col] = acc.total() / acc.count

    subs = {col: subs[col] for col in columns}
    return _finish("outlier", subs, (split,), config, {split: rows}, approximate)
