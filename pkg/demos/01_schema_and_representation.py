"""Walkthrough: declaring a dataset schema and flattening points.

Every data point lives at a coordinate in (virtual) time and space and its
features split into three components: time-variant, space-variant and
space-time-variant. Sub-features keep their own dimensions, so one flat
vector is always recoverable by concatenation in a fixed order.
"""

import numpy as np

from stprofiler import (
    CoordinateSpec,
    DatasetSchema,
    FeatureComponent,
    SubFeature,
    flatten_point,
    polygon_centroid,
    to_unit_sphere,
    validate_schema,
)
from stprofiler.schema import SPACE, SPACE_TIME, TIME

# A building-load style schema: calendar stamps vary only over time, the
# aerial image histogram only over space, weather and the load labels over both.
schema = DatasetSchema(
    name="building-load-demo",
    feature_components=(
        FeatureComponent(TIME, (SubFeature("stamp", 5),)),
        FeatureComponent(SPACE, (SubFeature("image_hist", 300),)),
        FeatureComponent(SPACE_TIME, (SubFeature("weather", 216),)),
    ),
    label_components=(FeatureComponent(SPACE_TIME, (SubFeature("load", 96),)),),
    coordinates=CoordinateSpec(time=("stamp__0", "stamp__1"), space=("image_hist__0",)),
    split_shares={"train": 0.56, "val": 0.09, "test": 0.35},
)

print("violations:", validate_schema(schema) or "none")
print("feature dimension:", schema.dimension())          # 5 + 300 + 216 = 521
print("label dimension:  ", schema.dimension(labels=True))

rng = np.random.default_rng(0)
point = {
    "stamp": [2016, 7, 14, 9, 2],
    "image_hist": rng.integers(0, 255, 300).astype(float),
    "weather": rng.normal(12.0, 4.0, 216),
    "load": rng.random(96) * 30,
}
x, y = flatten_point(point, schema)
print("flattened:", x.shape, "features,", y.shape, "labels")
print("first 8 entries:", np.round(x[:8], 2))

# Spatial regularization for polygon zones: centroid, then the unit sphere.
zone = [(47.37, 8.54), (47.42, 8.55), (47.41, 8.61), (47.36, 8.59)]
lat_c, long_c = polygon_centroid(zone)
print(f"zone centroid: ({lat_c:.4f}, {long_c:.4f})")
print("on the unit sphere:", tuple(round(v, 4) for v in to_unit_sphere(lat_c, long_c)))
