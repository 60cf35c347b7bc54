"""Regenerates the committed test dataset (deterministic, seed 202)."""

from pathlib import Path

import numpy as np

from stprofiler import write_dataset
from stprofiler import CoordinateSpec, DatasetSchema, FeatureComponent, SubFeature
from stprofiler.schema import SPACE, SPACE_TIME, TIME

OUT = Path(__file__).parent / "dataset"


def main():
    rng = np.random.default_rng(202)
    schema = DatasetSchema(
        name="bindings-fixture",
        feature_components=(
            FeatureComponent(TIME, (SubFeature("day", 1),)),
            FeatureComponent(SPACE, (SubFeature("site", 1),)),
            FeatureComponent(SPACE_TIME, (SubFeature("wind", 1), SubFeature("temp", 1))),
        ),
        label_components=(FeatureComponent(SPACE_TIME, (SubFeature("power", 1),)),),
        coordinates=CoordinateSpec(time=("day",), space=("site",)),
        split_shares={"train": 0.6, "val": 0.2, "test": 0.2},
    )

    def split(n):
        wind = rng.random(n) * 12
        return {
            "day": rng.integers(0, 40, n).astype(float),
            "site": rng.integers(0, 6, n).astype(float),
            "wind": wind,
            "temp": rng.normal(10, 5, n),
            "power": wind**1.5 + rng.normal(0, 0.5, n),
        }

    manifest = write_dataset(
        schema, {"train": split(360), "val": split(120), "test": split(120)}, OUT
    )
    print(f"wrote {manifest}")


if __name__ == "__main__":
    main()
