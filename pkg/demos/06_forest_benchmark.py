"""Walkthrough: random-forest baselines with featurizers and metering.

The baseline is an ensemble of depth-bounded trees (128 trees, depth 20 by
default). Variable-length inputs are reduced to fixed-length rows first:
token sequences via bag-of-words, atom tables via element counts plus
property statistics. Fits are metered in seconds per 1,000 training rows.
"""

import tempfile

import numpy as np

from stprofiler import (
    RFConfig,
    RandomForest,
    accuracy,
    bag_of_words,
    build_vocabulary,
    molecule_aggregate,
    open_dataset,
    r2,
    run_benchmark,
)
from synthetic_helpers import linear_regression_dataset

# Direct use of the forest: noise-free identity is learned almost exactly.
rng = np.random.default_rng(0)
X = rng.random((8000, 2))
y = 3 * X[:, 0] - X[:, 1]
model = RandomForest(RFConfig(trees=64, max_depth=14, seed=0)).fit(X, y)
holdout = rng.random((1500, 2))
print("direct forest r2:", round(r2(3 * holdout[:, 0] - holdout[:, 1],
                                    model.predict(holdout)), 4))

# Featurization primitives.
vocab = build_vocabulary([["feed", "in", "tariff"], ["feed", "out"]])
print("vocabulary:", vocab)
print("bag of words:", bag_of_words([["feed", "feed", "tariff", "oov"]], vocab)[0])

row = molecule_aggregate(["H", "H", "O"], [[1.0, 0.37], [1.0, 0.37], [16.0, 0.66]],
                         ("H", "O", "Pt"))
print("molecule row (counts, means, stds):", np.round(row, 3))

# The full harness: fit on train, evaluate on test, meter the fit.
with tempfile.TemporaryDirectory() as tmp:
    manifest = linear_regression_dataset(tmp, n_train=6000, n_eval=1200, seed=4)
    dataset = open_dataset(manifest)
    result = run_benchmark(dataset, RFConfig(trees=32, max_depth=12, sample_ratio=0.5, seed=1))
    print(f"harness: {result.metric_name} = {result.metric_value:.4f} on "
          f"{result.n_test_rows} test rows")
    print(f"fit took {result.wall_time_s:.2f}s on {result.n_train_rows} rows "
          f"({result.time_per_1000_s:.3f}s per 1,000)")

# Classification shares the same machinery with majority voting.
Xc = rng.random((4000, 3))
yc = (Xc[:, 0] + Xc[:, 1] > 1.0).astype(int)
clf = RandomForest(RFConfig(trees=32, max_depth=10, task="classification", seed=2))
clf.fit(Xc, yc)
holdc = rng.random((1000, 3))
print("classifier accuracy:", accuracy((holdc[:, 0] + holdc[:, 1] > 1.0).astype(int),
                                       clf.predict(holdc)))
