"""Small dataset builders shared by the demo scripts."""

import numpy as np

from stprofiler import (
    CoordinateSpec,
    DatasetSchema,
    FeatureComponent,
    SubFeature,
    write_dataset,
)
from stprofiler.schema import SPACE_TIME


def linear_regression_dataset(out_dir, n_train=5000, n_eval=1000, seed=0):
    """Three features, one linear label, written as train/val/test tables."""
    rng = np.random.default_rng(seed)
    schema = DatasetSchema(
        name="linear-demo",
        feature_components=(
            FeatureComponent(SPACE_TIME, tuple(SubFeature(f"f{i}", 1) for i in range(3))),
        ),
        label_components=(FeatureComponent(SPACE_TIME, (SubFeature("l0", 1),)),),
        coordinates=CoordinateSpec(time=("f0",), space=("f1",)),
        split_shares={"train": 0.7, "val": 0.15, "test": 0.15},
    )

    def split(n):
        cols = {f"f{i}": rng.random(n) * 4 for i in range(3)}
        cols["l0"] = 2 * cols["f0"] - cols["f1"] + 0.5 * cols["f2"]
        return cols

    return write_dataset(
        schema,
        {"train": split(n_train), "val": split(n_eval), "test": split(n_eval)},
        out_dir,
    )
