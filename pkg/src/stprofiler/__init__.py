"""Streaming profiler for spatio-temporal ML datasets.

Represents datasets in a unified spatio-temporal format, computes the four
dataset property scores (sample imbalance, split shift, input-output
sensitivity, outlier presence), over-parameterization thresholds,
out-of-distribution splits, and random-forest baselines, all with
bounded-memory streaming over a two-file storage scheme.
"""

__version__ = "0.1.0"

from . import errors
from .capacity import (
    CapacityReport,
    DatasetDims,
    format_magnitude,
    interpolation_threshold,
    smooth_function_threshold,
)
from .benchmark import (
    BagOfWordsFeaturizer,
    BenchmarkResult,
    Featurized,
    MoleculeFeaturizer,
    NumericFeaturizer,
    RFConfig,
    accuracy,
    bag_of_words,
    build_vocabulary,
    molecule_aggregate,
    r2,
    run_benchmark,
)
from .forest import RandomForest
from .geometry import Polygon, polygon_area, polygon_centroid, to_unit_sphere
from .profile import capacity_from_dataset, profile_dataset
from .schema import (
    Coordinate,
    CoordinateSpec,
    DatasetSchema,
    FeatureComponent,
    MappingRef,
    SubFeature,
    flatten_point,
    load_manifest,
    parse_manifest,
    validate_schema,
)
from .scores import (
    OUTLIER_FUNCTIONS,
    ScoreConfig,
    ScoreReport,
    array_source,
    concat_sources,
    io_score,
    outlier_score,
    simb_score,
    stood_score,
)
from .split import (
    SampledCoordinates,
    SplitAssignment,
    SplitSpec,
    VerifyReport,
    assign_splits,
    sample_coordinates,
    verify_ood,
)
from .stats import ChunkedSum, Histogram, Reservoir, TukeyFences, jsd, quantiles, tukey_filter
from .storage import (
    DataFrameSlice,
    Dataset,
    MappingCursor,
    SideStore,
    open_dataset,
    resolve_mapping,
    write_dataset,
)
