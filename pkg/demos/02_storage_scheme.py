"""Walkthrough: the two-file storage scheme with streaming reads.

Main tables are fixed-size CSV, one data point per row. Values that are
large and shared (an image histogram reused by millions of rows) or
irregular (token sequences) live in side stores and are referenced by
identifier; resolution happens batch by batch, eagerly or deferred.
"""

import tempfile
from pathlib import Path

import numpy as np

from stprofiler import open_dataset, resolve_mapping, write_dataset
from stprofiler import (
    CoordinateSpec,
    DatasetSchema,
    FeatureComponent,
    MappingRef,
    SubFeature,
)
from stprofiler.schema import SPACE, SPACE_TIME, TIME

schema = DatasetSchema(
    name="storage-demo",
    feature_components=(
        FeatureComponent(TIME, (SubFeature("day", 1),)),
        FeatureComponent(SPACE, (SubFeature("site", 1), SubFeature("image", 6))),
        FeatureComponent(SPACE_TIME, (SubFeature("text", (1, 8), "token-sequence"),)),
    ),
    label_components=(FeatureComponent(SPACE_TIME, (SubFeature("target", 1),)),),
    coordinates=CoordinateSpec(time=("day",), space=("site",)),
    mapping_refs=(
        MappingRef("image", "side/images.csv", True),    # regular: uniform blocks
        MappingRef("text", "side/texts.json", False),    # irregular: ragged blocks
    ),
    split_shares={"train": 0.7, "val": 0.15, "test": 0.15},
)

rng = np.random.default_rng(1)


def one_split(n):
    return {
        "day": rng.integers(0, 30, n).astype(float),
        "site": rng.integers(0, 4, n).astype(float),
        "image": [f"img{int(i)}" for i in rng.integers(0, 4, n)],
        "text": [f"doc{int(i)}" for i in rng.integers(0, 3, n)],
        "target": rng.random(n),
    }


side = {
    "image": {f"img{i}": rng.random(6) * 255 for i in range(4)},
    "text": {
        "doc0": [[0, 4, "wind"], [5, 9, "farm"]],
        "doc1": [[0, 6, "demand"]],
        "doc2": [[0, 5, "solar"], [6, 10, "peak"], [11, 15, "load"]],
    },
}

with tempfile.TemporaryDirectory() as tmp:
    manifest = write_dataset(
        schema, {"train": one_split(500), "val": one_split(100), "test": one_split(100)},
        tmp, side,
    )
    print("wrote", sorted(p.name for p in Path(tmp).rglob("*") if p.is_file()))

    dataset = open_dataset(manifest)
    print("splits:", dataset.splits, "train rows:", dataset.row_count("train"))

    # bounded-memory iteration: each slice is one columnar batch
    for sl in dataset.stream_slices("train", batch_size=200):
        print(f"slice at row {sl.start_row}: {len(sl)} rows, {len(sl.columns)} columns")

    # eager mapping resolution inflates the identifier column into values
    sl = next(dataset.stream_slices("train", batch_size=5))
    eager = resolve_mapping(sl, "image", dataset.side_stores["image"], "eager")
    print("eager columns:", [c for c in eager.columns if c.startswith("image")])

    # deferred resolution keeps an O(1) cursor instead
    cursor = resolve_mapping(sl, "text", dataset.side_stores["text"], "deferred")
    print("row 0 tokens:", [t[2] for t in cursor[0]])
