"""Random-forest baselines: metrics, featurizers and the benchmark harness.

The harness fits a depth-bounded forest on the (optionally subsampled)
training split, evaluates R2 or accuracy on the test split, and meters wall
time. Variable-length inputs are reduced to fixed-length rows first: token
sequences via bag-of-words counts, per-atom tables via element counts plus
property means and standard deviations. Tasks whose labels stay variable
length are rejected as unsupported, matching the baseline's fixed-output
limitation.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ConfigurationError,
    EmptyInputError,
    InvalidValueError,
    UndefinedVarianceError,
    UnsupportedTaskError,
)
from .forest import RandomForest, RFConfig
from .storage import Dataset

__all__ = [
    "RFConfig",
    "RandomForest",
    "r2",
    "accuracy",
    "build_vocabulary",
    "bag_of_words",
    "molecule_aggregate",
    "Featurized",
    "BenchmarkResult",
    "NumericFeaturizer",
    "BagOfWordsFeaturizer",
    "MoleculeFeaturizer",
    "run_benchmark",
    "FEATURIZERS",
]


# -- metrics -----------------------------------------------------------------


def r2(y_true, y_pred) -> float:
    """1 - SS_res / SS_tot with a single global label mean.

    Sums run over every entry of the label matrix, yielding one value per
    dataset also for multi-label outputs. Raises UndefinedVarianceError when
    the labels have zero total variance.
    """
    yt = np.asarray(y_true, dtype=np.float64)
    yp = np.asarray(y_pred, dtype=np.float64)
    if yt.shape != yp.shape:
        raise ValueError(f"shape mismatch: {yt.shape} vs {yp.shape}")
    if yt.size == 0:
        raise EmptyInputError("r2 needs at least one value")
    mean = float(yt.mean())
    ss_tot = float(((yt - mean) ** 2).sum())
    if ss_tot == 0.0:
        raise UndefinedVarianceError("labels have zero total variance; r2 undefined")
    ss_res = float(((yt - yp) ** 2).sum())
    return 1.0 - ss_res / ss_tot


def accuracy(y_true, y_pred) -> float:
    """Share of exact matches."""
    yt = np.asarray(y_true).ravel()
    yp = np.asarray(y_pred).ravel()
    if yt.shape != yp.shape:
        raise ValueError(f"shape mismatch: {yt.shape} vs {yp.shape}")
    if yt.size == 0:
        raise EmptyInputError("accuracy needs at least one value")
    return float(np.mean(yt == yp))


# -- featurization primitives --------------------------------------------------


def build_vocabulary(sequences) -> tuple:
    """Lexicographically sorted vocabulary of every token seen."""
    vocab = set()
    for seq in sequences:
        vocab.update(seq)
    return tuple(sorted(vocab))


def bag_of_words(sequences, vocabulary) -> np.ndarray:
    """Token-count rows over a fixed vocabulary; out-of-vocabulary tokens drop."""
    vocabulary = tuple(vocabulary)
    if not vocabulary:
        raise ConfigurationError("empty vocabulary")
    index = {tok: i for i, tok in enumerate(vocabulary)}
    out = np.zeros((len(sequences), len(vocabulary)), dtype=np.float64)
    for r, seq in enumerate(sequences):
        for tok in seq:
            i = index.get(tok)
            if i is not None:
                out[r, i] += 1.0
    return out


def molecule_aggregate(elements, properties, element_vocabulary) -> np.ndarray:
    """Fixed-length row for one structure: element counts + property stats.

    ``elements`` lists one element id per atom, ``properties`` the per-atom
    numeric property matrix. The row concatenates counts over the element
    vocabulary with each property's mean and population standard deviation
    across atoms (a single atom yields zero deviations).
    """
    elements = list(elements)
    props = np.asarray(properties, dtype=np.float64)
    if len(elements) == 0:
        raise EmptyInputError("structure has no atoms")
    if props.ndim != 2 or props.shape[0] != len(elements):
        raise ValueError("properties must be one row per atom")
    vocabulary = tuple(element_vocabulary)
    index = {e: i for i, e in enumerate(vocabulary)}
    counts = np.zeros(len(vocabulary), dtype=np.float64)
    for e in elements:
        i = index.get(e)
        if i is not None:
            counts[i] += 1.0
    return np.concatenate([counts, props.mean(axis=0), props.std(axis=0)])


@dataclass(frozen=True)
class Featurized:
    """A fixed-length numeric feature matrix with its label matrix."""

    X: np.ndarray
    y: np.ndarray | None
    featurizer: str

    def __post_init__(self):
        if self.X.ndim != 2:
            raise ValueError("features must be a 2-d matrix")
        if not np.isfinite(self.X).all():
            raise InvalidValueError("featurized matrix contains non-finite values")
        if self.y is not None and self.y.shape[0] != self.X.shape[0]:
            raise ValueError("feature and label row counts differ")


# -- featurizers over datasets --------------------------------------------------


def _require_fixed_labels(dataset: Dataset):
    dim = dataset.schema.dimension(labels=True)
    if isinstance(dim, tuple):
        raise UnsupportedTaskError(
            "labels have variable length; the forest baseline needs fixed-length outputs"
        )


def _materialize(dataset: Dataset, split: str, columns) -> np.ndarray:
    source = dataset.column_source(split, columns)
    parts = [np.column_stack([batch[c] for c in columns]) for batch in source()]
    parts = [p for p in parts if p.size]
    if not parts:
        return np.empty((0, len(columns)))
    return np.concatenate(parts).astype(np.float64)


def _numeric_labels(dataset: Dataset, split: str) -> np.ndarray:
    cols = dataset.schema.numeric_columns(labels=True)
    if not cols:
        raise UnsupportedTaskError("dataset has no numeric label columns")
    return _materialize(dataset, split, cols)


class NumericFeaturizer:
    """Pass-through: every fixed-length numeric feature column as-is."""

    id = "numeric"

    def fit(self, dataset: Dataset, split: str = "train") -> "NumericFeaturizer":
        if isinstance(dataset.schema.dimension(labels=False), tuple):
            raise UnsupportedTaskError(
                "features have variable length; use a reducing featurizer (bag-of-words, molecule)"
            )
        _require_fixed_labels(dataset)
        return self

    def featurize(self, dataset: Dataset, split: str) -> Featurized:
        cols = dataset.schema.numeric_columns(labels=False)
        X = _materialize(dataset, split, cols)
        return Featurized(X=X, y=_numeric_labels(dataset, split), featurizer=self.id)


def _token_column(dataset: Dataset, column: str | None) -> str:
    candidates = [
        sub.name
        for sub in dataset.schema.iter_subs(labels=False)
        if sub.value_class == "token-sequence"
    ]
    if column is not None:
        if column not in candidates:
            raise ConfigurationError(f"column '{column}' is not a token-sequence feature")
        return column
    if len(candidates) != 1:
        raise ConfigurationError(
            f"expected exactly one token-sequence feature, found {candidates}"
        )
    return candidates[0]


def _token_sequences(dataset: Dataset, split: str, column: str) -> list:
    store = dataset.side_stores[column]
    sequences = []
    for sl in dataset.stream_slices(split):
        for ident in sl.columns[column]:
            block = store.get(ident)
            # token tuples are [start, end, text]; plain strings pass through
            sequences.append([t[2] if isinstance(t, (list, tuple)) else t for t in block])
    return sequences


class BagOfWordsFeaturizer:
    """Token-count features from one token-sequence column.

    The vocabulary is built from the training split only; other splits drop
    out-of-vocabulary tokens.
    """

    id = "bag-of-words"

    def __init__(self, column: str | None = None):
        self.column = column
        self.vocabulary: tuple = ()

    def fit(self, dataset: Dataset, split: str = "train") -> "BagOfWordsFeaturizer":
        _require_fixed_labels(dataset)
        self.column = _token_column(dataset, self.column)
        self.vocabulary = build_vocabulary(_token_sequences(dataset, split, self.column))
        if not self.vocabulary:
            raise ConfigurationError("training split produced an empty vocabulary")
        return self

    def featurize(self, dataset: Dataset, split: str) -> Featurized:
        X = bag_of_words(_token_sequences(dataset, split, self.column), self.vocabulary)
        return Featurized(X=X, y=_numeric_labels(dataset, split), featurizer=self.id)


class MoleculeFeaturizer:
    """Aggregates per-atom tables into fixed-length structure rows.

    The mapped blocks hold one ``[element, prop...]`` row per atom; the
    element vocabulary comes from the training split.
    """

    id = "molecule"

    def __init__(self, column: str | None = None):
        self.column = column
        self.elements: tuple = ()

    def _atom_column(self, dataset: Dataset) -> str:
        if self.column is not None:
            return self.column
        irregular = [
            sub.name
            for sub in dataset.schema.iter_subs(labels=False)
            if (ref := dataset.schema.mapping_for(sub.name)) is not None and not ref.regular
        ]
        if len(irregular) != 1:
            raise ConfigurationError(
                f"expected exactly one irregular-mapped feature, found {irregular}"
            )
        return irregular[0]

    @staticmethod
    def _atoms(block):
        elements = [row[0] for row in block]
        props = np.asarray([row[1:] for row in block], dtype=np.float64)
        return elements, props

    def fit(self, dataset: Dataset, split: str = "train") -> "MoleculeFeaturizer":
        _require_fixed_labels(dataset)
        self.column = self._atom_column(dataset)
        store = dataset.side_stores[self.column]
        seen = set()
        for sl in dataset.stream_slices(split):
            for ident in sl.columns[self.column]:
                elements, _ = self._atoms(store.get(ident))
                seen.update(elements)
        self.elements = tuple(sorted(seen))
        if not self.elements:
            raise ConfigurationError("training split produced an empty element vocabulary")
        return self

    def featurize(self, dataset: Dataset, split: str) -> Featurized:
        store = dataset.side_stores[self.column]
        rows = []
        for sl in dataset.stream_slices(split):
            for ident in sl.columns[self.column]:
                elements, props = self._atoms(store.get(ident))
                rows.append(molecule_aggregate(elements, props, self.elements))
        X = np.vstack(rows) if rows else np.empty((0, len(self.elements)))
        return Featurized(X=X, y=_numeric_labels(dataset, split), featurizer=self.id)


FEATURIZERS = {
    "numeric": NumericFeaturizer,
    "bag-of-words": BagOfWordsFeaturizer,
    "molecule": MoleculeFeaturizer,
}


# -- the harness ----------------------------------------------------------------


@dataclass(frozen=True)
class BenchmarkResult:
    """Metric, wall time and normalized time for one benchmark run."""

    metric_name: str
    metric_value: float
    wall_time_s: float
    time_per_1000_s: float
    n_train_rows: int
    n_test_rows: int
    featurizer: str
    config: dict

    def to_dict(self) -> dict:
        return {
            "metric_name": self.metric_name,
            "metric_value": self.metric_value,
            "wall_time_s": self.wall_time_s,
            "time_per_1000_s": self.time_per_1000_s,
            "n_train_rows": self.n_train_rows,
            "n_test_rows": self.n_test_rows,
            "featurizer": self.featurizer,
            "config": dict(self.config),
        }

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    def table_row(self, name: str = "") -> str:
        return (
            f"{name}\t{self.config.get('sample_ratio')}\t{self.config.get('max_depth')}\t"
            f"{self.metric_value:.4g}\t{self.wall_time_s:.3f}s\t({self.time_per_1000_s:.4g})"
        )


def run_benchmark(dataset: Dataset, config: RFConfig | None = None, featurizer="numeric",
                  train_split: str = "train", test_split: str = "test") -> BenchmarkResult:
    """Fit on the training split, evaluate on the test split, meter the fit.

    ``featurizer`` is a featurizer id or instance. The forest applies the
    configured sample ratio internally (seeded); wall time covers the fit
    and is normalized per 1,000 training rows actually used.
    """
    config = config or RFConfig()
    if isinstance(featurizer, str):
        try:
            featurizer = FEATURIZERS[featurizer]()
        except KeyError:
            raise ConfigurationError(
                f"unknown featurizer '{featurizer}'; valid: {sorted(FEATURIZERS)}"
            ) from None
    featurizer.fit(dataset, train_split)
    train = featurizer.featurize(dataset, train_split)
    test = featurizer.featurize(dataset, test_split)

    if config.task == "classification":
        y_train, y_test = train.y.ravel(), test.y.ravel()
    else:
        y_train, y_test = train.y, test.y

    forest = RandomForest(config)
    start = time.perf_counter()
    forest.fit(train.X, y_train)
    wall = time.perf_counter() - start

    predicted = forest.predict(test.X)
    if config.task == "classification":
        metric_name, metric_value = "accuracy", accuracy(y_test, predicted)
    else:
        metric_name, metric_value = "r2", r2(y_test.reshape(test.X.shape[0], -1),
                                             np.asarray(predicted).reshape(test.X.shape[0], -1))

    n_used = forest.n_fit_rows_
    return BenchmarkResult(
        metric_name=metric_name,
        metric_value=metric_value,
        wall_time_s=wall,
        time_per_1000_s=wall / (n_used / 1000.0),
        n_train_rows=n_used,
        n_test_rows=test.X.shape[0],
        featurizer=featurizer.id,
        config=config.echo(),
    )
