"""Random forest with depth-bounded, histogram-binned trees.

Trees grow breadth first: feature values are quantile-binned once per fit,
and at every depth all active nodes' split candidates are scored from binned
target statistics, so the per-level work is a handful of vectorized passes
over the rows instead of per-node scans. Classification targets are one-hot
encoded internally, which makes the variance-reduction criterion coincide
exactly with the Gini impurity criterion. Multi-output regression predicts
per-output leaf means.

Determinism: each tree derives its generator from (seed, tree index), leaf
aggregation runs in fixed tree order, and vote ties break toward the lowest
class id, so predictions are bit-identical for a given seed regardless of
the thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, EmptyInputError, InvalidValueError

_NODE_CHUNK = 256
# SSE below this fraction of the node's sum of squares counts as zero; keeps
# cancellation noise from splitting constant nodes
_PURITY_EPS = 1e-11


@dataclass(frozen=True)
class RFConfig:
    """Forest configuration; defaults follow the standard benchmark setting
    of 128 trees with maximum depth 20.

    ``sample_ratio`` subsamples the training rows (seeded) before fitting;
    ``feature_subset`` is the number of candidate features per split node,
    defaulting to sqrt(D) for classification and D/3 for regression.
    """

    trees: int = 128
    max_depth: int = 20
    sample_ratio: float = 1.0
    task: str = "regression"
    seed: int = 0
    bootstrap: bool = True
    feature_subset: int | None = None
    max_bins: int = 256
    min_samples_split: int = 2
    threads: int = 1

    def __post_init__(self):
        if self.trees < 1:
            raise ConfigurationError("trees must be >= 1")
        if self.max_depth < 1:
            raise ConfigurationError("max depth must be >= 1")
        if not 0.0 < self.sample_ratio <= 1.0:
            raise ConfigurationError("sample ratio must lie in (0, 1]")
        if self.task not in ("regression", "classification"):
            raise ConfigurationError(f"unknown task kind '{self.task}'")
        if self.max_bins < 2:
            raise ConfigurationError("max_bins must be >= 2")

    def echo(self) -> dict:
        return {
            "trees": self.trees,
            "max_depth": self.max_depth,
            "sample_ratio": self.sample_ratio,
            "task": self.task,
            "seed": self.seed,
            "bootstrap": self.bootstrap,
            "feature_subset": self.feature_subset,
            "max_bins": self.max_bins,
            "min_samples_split": self.min_samples_split,
        }


class _Binner:
    """Per-feature quantile thresholds mapping values to small integer codes."""

    def __init__(self, max_bins: int):
        self.max_bins = max_bins
        self.thresholds: list[np.ndarray] = []
        self.n_bins = 1

    def fit(self, X: np.ndarray) -> "_Binner":
        self.thresholds = []
        for f in range(X.shape[1]):
            col = X[:, f]
            uniq = np.unique(col)
            if uniq.size <= 1:
                thr = np.empty(0)
            elif uniq.size <= self.max_bins:
                thr = (uniq[:-1] + uniq[1:]) / 2.0
            else:
                qs = np.quantile(col, np.arange(1, self.max_bins) / self.max_bins)
                thr = np.unique(qs)
            self.thresholds.append(thr)
        self.n_bins = max((len(t) for t in self.thresholds), default=0) + 1
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        codes = np.empty(X.shape, dtype=np.int64)
        for f, thr in enumerate(self.thresholds):
            codes[:, f] = np.searchsorted(thr, X[:, f], side="left")
        return codes


class _Tree:
    __slots__ = ("feature", "cut", "left", "right", "values")

    def __init__(self, feature, cut, left, right, values):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.cut = np.asarray(cut, dtype=np.int64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.values = np.vstack(values)

    def leaf_values(self, codes: np.ndarray) -> np.ndarray:
        cur = np.zeros(len(codes), dtype=np.int64)
        while True:
            active = np.nonzero(self.feature[cur] >= 0)[0]
            if not active.size:
                return self.values[cur]
            node = cur[active]
            go_left = codes[active, self.feature[node]] <= self.cut[node]
            cur[active] = np.where(go_left, self.left[node], self.right[node])


def _grow_tree(codes, Y, sq, rng, max_depth, min_split, subset, n_bins):
    n, d = codes.shape
    k = Y.shape[1]
    feature = [-1]
    cut = [0]
    left = [0]
    right = [0]
    values = [np.zeros(k)]

    rows = np.arange(n)
    node_of = np.zeros(n, dtype=np.int64)
    act_id = np.array([0], dtype=np.int64)
    act_cnt = np.array([n], dtype=np.float64)
    act_sum = Y.sum(axis=0)[None, :].astype(np.float64)
    act_sq = np.array([float(sq.sum())])
    depth = 0

    while len(act_id):
        A = len(act_id)
        parent_sse = act_sq - (act_sum**2).sum(axis=1) / act_cnt
        eps = _PURITY_EPS * np.maximum(act_sq, 1e-300)
        can = (parent_sse > eps) & (act_cnt >= min_split)
        if depth >= max_depth:
            can[:] = False

        if subset < d:
            keys = rng.random((A, d))
            kth = np.partition(keys, subset - 1, axis=1)[:, subset - 1 : subset]
            fmask = keys <= kth
        else:
            fmask = np.ones((A, d), dtype=bool)

        best_gain = eps.copy()
        best_feat = np.full(A, -1, dtype=np.int64)
        best_cut = np.zeros(A, dtype=np.int64)
        if can.any():
            for lo in range(0, A, _NODE_CHUNK):
                hi = min(lo + _NODE_CHUNK, A)
                if not can[lo:hi].any():
                    continue
                sel = np.nonzero((node_of >= lo) & (node_of < hi))[0]
                local = node_of[sel] - lo
                ch = hi - lo
                c_codes = codes[rows[sel]]
                Ys = Y[rows[sel]]
                sqs = sq[rows[sel]]
                base = local * n_bins
                tot_cnt = act_cnt[lo:hi][:, None]
                tot_sq = act_sq[lo:hi][:, None]
                tot_sum = act_sum[lo:hi][:, None, :]
                for f in range(d):
                    if not (fmask[lo:hi, f] & can[lo:hi]).any():
                        continue
                    idx = base + c_codes[:, f]
                    size = ch * n_bins
                    ccnt = np.cumsum(
                        np.bincount(idx, minlength=size).reshape(ch, n_bins), axis=1
                    )
                    cs2 = np.cumsum(
                        np.bincount(idx, weights=sqs, minlength=size).reshape(ch, n_bins), axis=1
                    )
                    csum = np.empty((ch, n_bins, k))
                    for j in range(k):
                        csum[:, :, j] = np.cumsum(
                            np.bincount(idx, weights=Ys[:, j], minlength=size).reshape(
                                ch, n_bins
                            ),
                            axis=1,
                        )
                    rcnt = tot_cnt - ccnt
                    rs2 = tot_sq - cs2
                    rsum = tot_sum - csum
                    with np.errstate(divide="ignore", invalid="ignore"):
                        sse_l = cs2 - (csum**2).sum(axis=2) / ccnt
                        sse_r = rs2 - (rsum**2).sum(axis=2) / rcnt
                    gain = parent_sse[lo:hi][:, None] - (sse_l + sse_r)
                    gain[(ccnt == 0) | (rcnt == 0)] = -np.inf
                    np.nan_to_num(gain, copy=False, nan=-np.inf)
                    gain[~(fmask[lo:hi, f] & can[lo:hi]), :] = -np.inf
                    g = gain.max(axis=1)
                    better = g > best_gain[lo:hi]
                    if better.any():
                        where = np.nonzero(better)[0]
                        best_gain[lo + where] = g[where]
                        best_feat[lo + where] = f
                        best_cut[lo + where] = gain[where].argmax(axis=1)

        split = can & (best_feat >= 0)
        means = act_sum / act_cnt[:, None]
        for a in np.nonzero(~split)[0]:
            tid = int(act_id[a])
            feature[tid] = -1
            values[tid] = means[a]
        split_idx = np.nonzero(split)[0]
        if not split_idx.size:
            break

        pos_of = np.full(A, -1, dtype=np.int64)
        pos_of[split_idx] = np.arange(len(split_idx))
        next_ids = np.empty(2 * len(split_idx), dtype=np.int64)
        for p, a in enumerate(split_idx):
            tid = int(act_id[a])
            lid = len(feature)
            for child in range(2):
                feature.append(-1)
                cut.append(0)
                left.append(0)
                right.append(0)
                values.append(np.zeros(k))
            feature[tid] = int(best_feat[a])
            cut[tid] = int(best_cut[a])
            left[tid] = lid
            right[tid] = lid + 1
            next_ids[2 * p] = lid
            next_ids[2 * p + 1] = lid + 1

        keep = split[node_of]
        rows = rows[keep]
        a_of_row = node_of[keep]
        go_left = codes[rows, best_feat[a_of_row]] <= best_cut[a_of_row]
        node_of = 2 * pos_of[a_of_row] + (~go_left).astype(np.int64)

        new_A = 2 * len(split_idx)
        Ys = Y[rows]
        act_id = next_ids
        act_cnt = np.bincount(node_of, minlength=new_A).astype(np.float64)
        act_sq = np.bincount(node_of, weights=sq[rows], minlength=new_A)
        act_sum = np.column_stack(
            [np.bincount(node_of, weights=Ys[:, j], minlength=new_A) for j in range(k)]
        )
        depth += 1

    return _Tree(feature, cut, left, right, values)


class RandomForest:
    """Bootstrap ensemble of depth-bounded trees (regression or classification)."""

    def __init__(self, config: RFConfig | None = None):
        self.config = config or RFConfig()
        self._trees: list[_Tree] | None = None
        self._binner: _Binner | None = None
        self.classes_: np.ndarray | None = None
        self.n_outputs_ = None
        self.n_fit_rows_ = None
        self._flat_output = False

    def fit(self, X, y) -> "RandomForest":
        cfg = self.config
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        if not np.isfinite(X).all():
            raise InvalidValueError("features must be finite")
        n = X.shape[0]
        if n < 2:
            raise EmptyInputError("need at least 2 training rows")
        y = np.asarray(y)
        if y.shape[0] != n:
            raise ValueError(f"X has {n} rows but y has {y.shape[0]}")

        ss = np.random.SeedSequence(cfg.seed)
        children = ss.spawn(cfg.trees + 1)
        sub_ss, tree_ss = children[0], children[1:]
        if cfg.sample_ratio < 1.0:
            take = max(2, int(round(cfg.sample_ratio * n)))
            picked = np.sort(np.random.default_rng(sub_ss).permutation(n)[:take])
            X, y = X[picked], y[picked]
            n = take
        self.n_fit_rows_ = n

        if cfg.task == "classification":
            labels = np.asarray(y).ravel()
            self.classes_, index = np.unique(labels, return_inverse=True)
            Y = np.zeros((n, len(self.classes_)))
            Y[np.arange(n), index] = 1.0
            self._flat_output = True
        else:
            Y = np.asarray(y, dtype=np.float64)
            self._flat_output = Y.ndim == 1
            Y = Y.reshape(n, -1)
            if not np.isfinite(Y).all():
                raise InvalidValueError("labels must be finite")
        self.n_outputs_ = Y.shape[1]

        d = X.shape[1]
        if cfg.feature_subset is not None:
            subset = cfg.feature_subset
        elif cfg.task == "classification":
            subset = math.ceil(math.sqrt(d))
        else:
            subset = max(1, d // 3)
        subset = min(max(1, subset), d)

        self._binner = _Binner(cfg.max_bins).fit(X)
        codes = self._binner.transform(X)
        sq = (Y**2).sum(axis=1)
        n_bins = self._binner.n_bins

        def grow(t: int) -> _Tree:
            rng = np.random.default_rng(tree_ss[t])
            idx = rng.integers(0, n, n) if cfg.bootstrap else np.arange(n)
            return _grow_tree(
                codes[idx], Y[idx], sq[idx], rng,
                cfg.max_depth, cfg.min_samples_split, subset, n_bins,
            )

        if cfg.threads > 1:
            with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                self._trees = list(pool.map(grow, range(cfg.trees)))
        else:
            self._trees = [grow(t) for t in range(cfg.trees)]
        return self

    def predict(self, X) -> np.ndarray:
        if self._trees is None:
            raise ValueError("forest is not fitted")
        X = np.asarray(X, dtype=np.float64)
        codes = self._binner.transform(X)
        stacked = np.stack([tree.leaf_values(codes) for tree in self._trees])
        if self.config.task == "classification":
            votes = stacked.argmax(axis=2)  # per-tree majority; ties to lowest id
            counts = np.zeros((X.shape[0], len(self.classes_)), dtype=np.int64)
            rows = np.arange(X.shape[0])
            for t in range(votes.shape[0]):
                counts[rows, votes[t]] += 1
            return self.classes_[counts.argmax(axis=1)]
        mean = stacked.mean(axis=0)
        return mean.ravel() if self._flat_output else mean
