import numpy as np
import pytest

from stprofiler import (
    BagOfWordsFeaturizer,
    MoleculeFeaturizer,
    RandomForest,
    RFConfig,
    accuracy,
    bag_of_words,
    build_vocabulary,
    molecule_aggregate,
    open_dataset,
    r2,
    run_benchmark,
    write_dataset,
)
from stprofiler.errors import (
    ConfigurationError,
    EmptyInputError,
    UndefinedVarianceError,
    UnsupportedTaskError,
)
from stprofiler import (
    CoordinateSpec,
    DatasetSchema,
    FeatureComponent,
    MappingRef,
    SubFeature,
)
from stprofiler.schema import SPACE, SPACE_TIME, TIME

from oracles import ref_accuracy, ref_r2
from synth import mapped_schema, mapped_tables, simple_schema


class TestR2:
    def test_perfect_prediction(self):
        y = np.array([1.0, 2.0, 3.0])
        assert r2(y, y.copy()) == 1.0

    def test_mean_prediction_scores_zero(self):
        y = np.array([1.0, 2.0, 3.0, 10.0])
        assert r2(y, np.full(4, y.mean())) == pytest.approx(0.0, abs=1e-12)

    def test_hand_derived_negative(self):
        assert r2([1.0, 2.0, 3.0], [3.0, 2.0, 1.0]) == pytest.approx(-3.0, abs=1e-12)

    def test_zero_variance_error(self):
        with pytest.raises(UndefinedVarianceError):
            r2([2.0, 2.0], [1.0, 3.0])

    def test_multi_label_uses_global_mean(self):
        rng = np.random.default_rng(0)
        y = rng.random((20, 3))
        p = rng.random((20, 3))
        mean = y.mean()
        want = 1 - ((y - p) ** 2).sum() / ((y - mean) ** 2).sum()
        assert r2(y, p) == pytest.approx(want, abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            r2([1.0, 2.0], [1.0])


class TestAccuracy:
    def test_extremes_and_half(self):
        assert accuracy([1, 2, 3], [1, 2, 3]) == 1.0
        assert accuracy([1, 2, 3], [4, 5, 6]) == 0.0
        assert accuracy([1, 2, 3, 4], [1, 2, 9, 9]) == 0.5

    def test_empty_error(self):
        with pytest.raises(EmptyInputError):
            accuracy([], [])


class TestMetricOracles:
    def test_hundred_random_instances(self):
        rng = np.random.default_rng(77)
        for _ in range(100):
            n = int(rng.integers(2, 60))
            y = rng.normal(0, 5, n)
            p = y + rng.normal(0, 1, n)
            assert r2(y, p) == pytest.approx(ref_r2(y, p), abs=1e-12)
            yc = rng.integers(0, 4, n)
            pc = rng.integers(0, 4, n)
            assert accuracy(yc, pc) == pytest.approx(ref_accuracy(yc, pc), abs=1e-12)


class TestBagOfWords:
    def test_counting(self):
        out = bag_of_words([["a", "b", "a"]], ("a", "b", "c"))
        assert out.tolist() == [[2.0, 1.0, 0.0]]

    def test_empty_sequence_is_zero_vector(self):
        assert bag_of_words([[]], ("a", "b"))[0].tolist() == [0.0, 0.0]

    def test_oov_tokens_dropped(self):
        assert bag_of_words([["x", "y"]], ("a",))[0].tolist() == [0.0]

    def test_empty_vocabulary_rejected(self):
        with pytest.raises(ConfigurationError):
            bag_of_words([["a"]], ())

    def test_vocabulary_sorted_and_duplication_stable(self):
        seqs = [["beta", "alpha"], ["gamma"]]
        assert build_vocabulary(seqs) == ("alpha", "beta", "gamma")
        assert build_vocabulary(seqs + seqs) == ("alpha", "beta", "gamma")


class TestMoleculeAggregate:
    def test_mean_and_population_std(self):
        row = molecule_aggregate(["H", "H"], [[1.0], [3.0]], ("H",))
        assert row.tolist() == [2.0, 2.0, 1.0]  # count, mean, population std

    def test_single_atom_zero_std(self):
        row = molecule_aggregate(["O"], [[5.0, 7.0]], ("H", "O"))
        assert row.tolist() == [0.0, 1.0, 5.0, 7.0, 0.0, 0.0]

    def test_permutation_invariance(self):
        a = molecule_aggregate(["H", "O", "H"], [[1.0], [2.0], [3.0]], ("H", "O"))
        b = molecule_aggregate(["O", "H", "H"], [[2.0], [3.0], [1.0]], ("H", "O"))
        assert np.allclose(a, b)

    def test_empty_molecule(self):
        with pytest.raises(EmptyInputError):
            molecule_aggregate([], np.empty((0, 2)), ("H",))


class TestForest:
    def test_stump_separates_two_classes(self):
        rng = np.random.default_rng(1)
        X = rng.integers(0, 2, (100, 1)).astype(float)
        y = X[:, 0].astype(int)
        cfg = RFConfig(trees=1, max_depth=1, task="classification", seed=5)
        model = RandomForest(cfg).fit(X, y)
        assert accuracy(y, model.predict(X)) == 1.0

    def test_same_seed_identical_predictions(self):
        rng = np.random.default_rng(2)
        X = rng.random((400, 3))
        y = X @ np.array([1.0, -2.0, 0.5]) + rng.normal(0, 0.05, 400)
        cfg = RFConfig(trees=12, max_depth=8, seed=9)
        a = RandomForest(cfg).fit(X, y).predict(X)
        b = RandomForest(cfg).fit(X, y).predict(X)
        assert np.array_equal(a, b)

    def test_thread_count_never_changes_predictions(self):
        rng = np.random.default_rng(3)
        X = rng.random((300, 4))
        y = np.column_stack([X.sum(1), X[:, 0] * 2])
        one = RandomForest(RFConfig(trees=8, max_depth=6, seed=4, threads=1)).fit(X, y)
        four = RandomForest(RFConfig(trees=8, max_depth=6, seed=4, threads=4)).fit(X, y)
        assert np.array_equal(one.predict(X), four.predict(X))

    def test_training_r2_monotone_in_depth(self):
        # without bootstrap every tree sees the full sample, so each extra
        # level only refines the partition and training error cannot grow
        rng = np.random.default_rng(4)
        X = rng.random((2000, 1))
        y = X[:, 0].copy()
        previous = -np.inf
        for depth in (1, 2, 4, 8, 16, 20):
            cfg = RFConfig(trees=4, max_depth=depth, seed=6, bootstrap=False)
            model = RandomForest(cfg).fit(X, y)
            score = r2(y, model.predict(X))
            assert score >= previous - 1e-12
            previous = score

    def test_noise_free_identity_function(self):
        rng = np.random.default_rng(5)
        X = rng.random((3000, 1))
        y = X[:, 0].copy()
        model = RandomForest(RFConfig(trees=32, max_depth=20, seed=7)).fit(X, y)
        holdout = rng.random((800, 1))
        assert r2(holdout[:, 0], model.predict(holdout)) > 0.99

    def test_constant_labels_predict_the_constant(self):
        rng = np.random.default_rng(6)
        X = rng.random((50, 2))
        model = RandomForest(RFConfig(trees=3, seed=1)).fit(X, np.full(50, 4.5))
        assert np.allclose(model.predict(X), 4.5)

    def test_multi_label_regression_shape(self):
        rng = np.random.default_rng(7)
        X = rng.random((120, 3))
        Y = np.column_stack([X[:, 0], X[:, 1] * 3, X.sum(1)])
        model = RandomForest(RFConfig(trees=6, max_depth=6, seed=2)).fit(X, Y)
        assert model.predict(X).shape == (120, 3)

    def test_sample_ratio_subsamples(self):
        rng = np.random.default_rng(8)
        X = rng.random((1000, 2))
        y = X[:, 0]
        model = RandomForest(RFConfig(trees=2, sample_ratio=0.25, seed=3)).fit(X, y)
        assert model.n_fit_rows_ == 250

    def test_needs_two_rows(self):
        with pytest.raises(EmptyInputError):
            RandomForest(RFConfig(trees=1)).fit(np.ones((1, 2)), np.ones(1))

    def test_classification_tie_breaks_to_lowest_class(self):
        # two trees, forced disagreement via bootstrap; with one feature value
        # the leaf shares are deterministic; just check the invariant holds
        rng = np.random.default_rng(9)
        X = rng.integers(0, 2, (60, 1)).astype(float)
        y = rng.integers(0, 3, 60)
        model = RandomForest(RFConfig(trees=2, max_depth=2, task="classification", seed=11)).fit(X, y)
        pred = model.predict(X)
        assert set(np.unique(pred)) <= set(np.unique(y))


def variable_label_schema():
    """is2rs-style task: fixed features, variable-length labels."""
    return DatasetSchema(
        name="relaxed-positions",
        feature_components=(
            FeatureComponent(TIME, (SubFeature("step", 1),)),
            FeatureComponent(SPACE, (SubFeature("cell", 2),)),
        ),
        label_components=(
            FeatureComponent(SPACE_TIME, (SubFeature("positions", (3, 12)),)),
        ),
        coordinates=CoordinateSpec(time=("step",), space=("cell__0",)),
        mapping_refs=(MappingRef("positions", "side/positions.json", False),),
        split_shares={"train": 0.6, "val": 0.2, "test": 0.2},
    )


def write_variable_label_dataset(tmp_path):
    rng = np.random.default_rng(12)
    tables = {}
    for split, n in (("train", 30), ("val", 10), ("test", 10)):
        tables[split] = {
            "step": rng.integers(0, 5, n).astype(float),
            "cell__0": rng.random(n),
            "cell__1": rng.random(n),
            "positions": [f"s{int(i)}" for i in rng.integers(0, 4, n)],
        }
    side = {"positions": {f"s{i}": rng.random(int(rng.integers(3, 13))).tolist() for i in range(4)}}
    return write_dataset(variable_label_schema(), tables, tmp_path, side)


class TestHarness:
    def test_linear_regression_task(self, tmp_path):
        rng = np.random.default_rng(13)
        schema = simple_schema(3, 1)

        def split(n):
            f = {f"f{i}": rng.random(n) * 4 for i in range(3)}
            f["l0"] = 2 * f["f0"] - f["f1"] + 0.25 * f["f2"]
            return f

        write_dataset(schema, {"train": split(3000), "val": split(400), "test": split(700)}, tmp_path)
        ds = open_dataset(tmp_path / "manifest.json")
        result = run_benchmark(ds, RFConfig(trees=24, max_depth=12, seed=1))
        assert result.metric_name == "r2"
        assert result.metric_value > 0.8
        assert result.n_train_rows == 3000
        assert result.time_per_1000_s == pytest.approx(
            result.wall_time_s / 3.0, rel=1e-9
        )

    def test_classification_task(self, tmp_path):
        rng = np.random.default_rng(14)
        schema = simple_schema(2, 1)

        def split(n):
            f0 = rng.random(n)
            return {"f0": f0, "f1": rng.random(n), "l0": (f0 > 0.5).astype(float)}

        write_dataset(schema, {"train": split(1500), "val": split(200), "test": split(500)}, tmp_path)
        ds = open_dataset(tmp_path / "manifest.json")
        result = run_benchmark(ds, RFConfig(trees=16, max_depth=6, seed=2, task="classification"))
        assert result.metric_name == "accuracy"
        assert result.metric_value > 0.95

    def test_independent_labels_score_chance_accuracy(self, tmp_path):
        # 2 balanced classes carrying no signal: accuracy sits at 0.5
        rng = np.random.default_rng(19)
        schema = simple_schema(2, 1)

        def split(n):
            return {
                "f0": rng.random(n),
                "f1": rng.random(n),
                "l0": rng.integers(0, 2, n).astype(float),
            }

        write_dataset(
            schema, {"train": split(10_000), "val": split(1000), "test": split(4000)}, tmp_path
        )
        ds = open_dataset(tmp_path / "manifest.json")
        result = run_benchmark(ds, RFConfig(trees=32, max_depth=10, seed=4, task="classification"))
        assert result.metric_value == pytest.approx(0.5, abs=0.05)

    def test_variable_length_labels_unsupported(self, tmp_path):
        manifest = write_variable_label_dataset(tmp_path)
        ds = open_dataset(manifest)
        with pytest.raises(UnsupportedTaskError):
            run_benchmark(ds, RFConfig(trees=2, seed=0))

    def test_sample_ratio_recorded(self, tmp_path):
        rng = np.random.default_rng(15)
        schema = simple_schema(2, 1)

        def split(n):
            f = {f"f{i}": rng.random(n) for i in range(2)}
            f["l0"] = f["f0"]
            return f

        write_dataset(schema, {"train": split(1000), "val": split(100), "test": split(300)}, tmp_path)
        ds = open_dataset(tmp_path / "manifest.json")
        result = run_benchmark(ds, RFConfig(trees=4, max_depth=6, sample_ratio=0.5, seed=3))
        assert result.n_train_rows == 500
        assert result.config["sample_ratio"] == 0.5

    def test_bag_of_words_featurizer_end_to_end(self, tmp_path):
        rng = np.random.default_rng(16)
        tables, side = mapped_tables(rng)
        manifest = write_dataset(mapped_schema(), tables, tmp_path, side)
        ds = open_dataset(manifest)
        feat = BagOfWordsFeaturizer().fit(ds)
        out = feat.featurize(ds, "train")
        assert out.X.shape == (60, len(feat.vocabulary))
        assert out.y.shape == (60, 2)
        result = run_benchmark(ds, RFConfig(trees=4, max_depth=4, seed=1), featurizer="bag-of-words")
        assert np.isfinite(result.metric_value)

    def test_molecule_featurizer_end_to_end(self, tmp_path):
        rng = np.random.default_rng(17)
        schema = DatasetSchema(
            name="catalyst",
            feature_components=(
                FeatureComponent(TIME, (SubFeature("step", 1),)),
                FeatureComponent(SPACE, (SubFeature("atoms", (2, 6)),)),
            ),
            label_components=(FeatureComponent(SPACE_TIME, (SubFeature("energy", 1),)),),
            coordinates=CoordinateSpec(time=("step",), space=("atoms",)),
            mapping_refs=(MappingRef("atoms", "side/atoms.json", False),),
            split_shares={"train": 0.6, "val": 0.2, "test": 0.2},
        )
        structures = {}
        for i in range(6):
            n_atoms = int(rng.integers(2, 7))
            structures[f"m{i}"] = [
                [("H", "O", "Pt")[int(rng.integers(0, 3))], float(rng.random()), float(rng.random() * 10)]
                for _ in range(n_atoms)
            ]
        def split(n):
            return {
                "step": rng.integers(0, 9, n).astype(float),
                "atoms": [f"m{int(i)}" for i in rng.integers(0, 6, n)],
                "energy": rng.normal(0, 1, n),
            }
        manifest = write_dataset(
            schema, {"train": split(40), "val": split(10), "test": split(15)}, tmp_path,
            {"atoms": structures},
        )
        ds = open_dataset(manifest)
        feat = MoleculeFeaturizer().fit(ds)
        out = feat.featurize(ds, "train")
        assert out.X.shape == (40, 3 + 2 + 2)  # elements + means + stds
        result = run_benchmark(ds, RFConfig(trees=3, max_depth=4, seed=2), featurizer="molecule")
        assert np.isfinite(result.metric_value)

    def test_unknown_featurizer(self, tmp_path):
        rng = np.random.default_rng(18)
        schema = simple_schema(1, 1)
        cols = {"f0": rng.random(20), "l0": rng.random(20)}
        write_dataset(schema, {"train": cols, "val": cols, "test": cols}, tmp_path)
        ds = open_dataset(tmp_path / "manifest.json")
        with pytest.raises(ConfigurationError):
            run_benchmark(ds, featurizer="magic")
