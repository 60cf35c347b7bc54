"""Schema manifests for the unified spatio-temporal dataset representation.

Every data point carries a coordinate in (virtual) time and space and splits
its features into up to three components: one varying only across time, one
only across space, and one across both. Components hold ordered sub-features
with fixed or ranged dimensions; labels share the same structure and are
optional. A JSON manifest describes all of this plus the coordinate columns,
mapping references to side-stored value blocks, and the train/val/test
shares. The manifest is the single source of truth for the other modules;
the exact field names are documented in the repository README.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ManifestError, SchemaValidationError, ShapeError

TIME = "time-variant"
SPACE = "space-variant"
SPACE_TIME = "space-time-variant"
KIND_ORDER = (TIME, SPACE, SPACE_TIME)

VALUE_CLASSES = ("numeric", "ordinal-encoded", "one-hot-encoded", "token-sequence")

SHARE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Coordinate:
    """A point's ___location: time components and/or space components."""

    time: tuple[float, ...] = ()
    space: tuple[float, ...] = ()

    def __post_init__(self):
        for part in (self.time, self.space):
            for v in part:
                if not math.isfinite(v):
                    raise ValueError(f"coordinate component {v!r} is not finite")


@dataclass(frozen=True)
class SubFeature:
    """One named block of values inside a component.

    ``dimension`` is either a fixed positive integer or an inclusive
    ``(min, max)`` range for variable-length blocks; variable blocks carry
    their actual length per point instead of being padded.
    """

    name: str
    dimension: int | tuple[int, int]
    value_class: str = "numeric"
    nested: tuple[int, ...] | None = None

    @property
    def is_variable(self) -> bool:
        return isinstance(self.dimension, tuple)

    @property
    def min_dimension(self) -> int:
        return self.dimension[0] if self.is_variable else self.dimension

    @property
    def max_dimension(self) -> int:
        return self.dimension[1] if self.is_variable else self.dimension


@dataclass(frozen=True)
class FeatureComponent:
    """An ordered group of sub-features sharing one variation kind."""

    kind: str
    sub_features: tuple[SubFeature, ...]


@dataclass(frozen=True)
class MappingRef:
    """Declares that a column holds identifiers resolved via a side file."""

    column: str
    path: str
    regular: bool


@dataclass(frozen=True)
class CoordinateSpec:
    """Names of the columns holding the time and space coordinates."""

    time: tuple[str, ...] = ()
    space: tuple[str, ...] = ()


@dataclass(frozen=True)
class DatasetSchema:
    name: str
    feature_components: tuple[FeatureComponent, ...]
    label_components: tuple[FeatureComponent, ...] = ()
    coordinates: CoordinateSpec = field(default_factory=CoordinateSpec)
    mapping_refs: tuple[MappingRef, ...] = ()
    split_shares: dict = field(default_factory=lambda: {"train": 1.0, "val": 0.0, "test": 0.0})
    split_files: dict = field(default_factory=dict)

    # -- derived structure ------------------------------------------------

    def mapping_for(self, column: str) -> MappingRef | None:
        for ref in self.mapping_refs:
            if ref.column == column:
                return ref
        return None

    def ordered_components(self, labels: bool = False) -> tuple[FeatureComponent, ...]:
        """Components in the canonical time -> space -> space-time order."""
        comps = self.label_components if labels else self.feature_components
        return tuple(sorted(comps, key=lambda c: KIND_ORDER.index(c.kind)))

    def sub_columns(self, sub: SubFeature) -> list[str]:
        """Main-table column names a sub-feature occupies."""
        if self.mapping_for(sub.name) is not None:
            return [sub.name]  # single identifier column
        if sub.is_variable:
            raise SchemaValidationError(
                [f"sub-feature '{sub.name}': variable length requires an irregular mapping"]
            )
        if sub.dimension == 1:
            return [sub.name]
        return [f"{sub.name}__{i}" for i in range(sub.dimension)]

    def iter_subs(self, labels: bool = False):
        for comp in self.ordered_components(labels):
            for sub in comp.sub_features:
                yield sub

    def table_columns(self) -> list[tuple[str, str]]:
        """Ordered (column, storage kind) pairs for the main table.

        Storage kind is 'float', 'int' or 'str'. Coordinate columns are not
        listed separately: they name existing feature columns (time stamps
        and positions are regular features in this representation).
        """
        cols: list[tuple[str, str]] = []
        for labels in (False, True):
            for sub in self.iter_subs(labels):
                if self.mapping_for(sub.name) is not None:
                    cols.append((sub.name, "str"))
                else:
                    kind = "int" if sub.value_class in ("ordinal-encoded", "one-hot-encoded") else "float"
                    cols.extend((c, kind) for c in self.sub_columns(sub))
        return cols

    def column_names(self) -> list[str]:
        return [name for name, _ in self.table_columns()]

    def numeric_columns(self, labels: bool = False, resolve_mappings: bool = True) -> list[str]:
        """Scalar numeric column names, expanding regular mapped blocks.

        Irregular mappings (token sequences, variable blocks) are excluded;
        they must be featurized before scoring.
        """
        out: list[str] = []
        for sub in self.iter_subs(labels):
            ref = self.mapping_for(sub.name)
            if ref is None:
                if sub.value_class == "token-sequence":
                    continue
                out.extend(self.sub_columns(sub))
            elif ref.regular and resolve_mappings:
                out.extend(
                    f"{sub.name}__{i}" for i in range(sub.max_dimension)
                )
        return out

    def dimension(self, labels: bool = False) -> int | tuple[int, int]:
        """Total flattened dimension; a (min, max) pair when variable."""
        lo = hi = 0
        variable = False
        for sub in self.iter_subs(labels):
            lo += sub.min_dimension
            hi += sub.max_dimension
            variable = variable or sub.is_variable
        return (lo, hi) if variable else hi

    def feature_slices(self) -> dict[str, slice]:
        """Position of each fixed-dimension sub-feature in the flat vector."""
        out: dict[str, slice] = {}
        offset = 0
        for sub in self.iter_subs(labels=False):
            if sub.is_variable:
                raise ShapeError(f"sub-feature '{sub.name}' has variable length")
            out[sub.name] = slice(offset, offset + sub.dimension)
            offset += sub.dimension
        return out


# -- manifest parsing ------------------------------------------------------


def _parse_dimension(raw, where):
    if isinstance(raw, int) and not isinstance(raw, bool):
        return raw
    if isinstance(raw, (list, tuple)) and len(raw) == 2:
        return (int(raw[0]), int(raw[1]))
    raise ManifestError(f"{where}: dimension must be an integer or a [min, max] pair")


def _parse_component(raw, where) -> FeatureComponent:
    if not isinstance(raw, dict) or "kind" not in raw or "sub_features" not in raw:
        raise ManifestError(f"{where}: expected an object with 'kind' and 'sub_features'")
    subs = []
    for i, s in enumerate(raw["sub_features"]):
        here = f"{where}.sub_features[{i}]"
        if not isinstance(s, dict) or "name" not in s or "dimension" not in s:
            raise ManifestError(f"{here}: expected an object with 'name' and 'dimension'")
        subs.append(
            SubFeature(
                name=str(s["name"]),
                dimension=_parse_dimension(s["dimension"], here),
                value_class=s.get("value_class", "numeric"),
                nested=tuple(s["nested"]) if s.get("nested") else None,
            )
        )
    return FeatureComponent(kind=str(raw["kind"]), sub_features=tuple(subs))


def parse_manifest(text: str) -> DatasetSchema:
    """Parse a manifest document; raises ManifestError with line/position."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(
            f"manifest parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            line=exc.lineno,
            column=exc.colno,
        ) from exc
    if not isinstance(doc, dict):
        raise ManifestError("manifest root must be an object")
    try:
        features = tuple(
            _parse_component(c, f"features[{i}]") for i, c in enumerate(doc.get("features", []))
        )
        labels = tuple(
            _parse_component(c, f"labels[{i}]") for i, c in enumerate(doc.get("labels", []))
        )
        coords = doc.get("coordinates", {})
        shares = doc.get("split_shares", {})
        mappings = tuple(
            MappingRef(column=str(m["column"]), path=str(m["path"]), regular=bool(m["regular"]))
            for m in doc.get("mappings", [])
        )
    except (KeyError, TypeError) as exc:
        raise ManifestError(f"malformed manifest field: {exc}") from exc
    return DatasetSchema(
        name=str(doc.get("name", "unnamed")),
        feature_components=features,
        label_components=labels,
        coordinates=CoordinateSpec(
            time=tuple(coords.get("time", ())), space=tuple(coords.get("space", ()))
        ),
        mapping_refs=mappings,
        split_shares={k: float(v) for k, v in shares.items()},
        split_files=dict(doc.get("splits", {})),
    )


def load_manifest(path) -> DatasetSchema:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    return parse_manifest(path.read_text())


def schema_to_manifest(schema: DatasetSchema) -> dict:
    """Inverse of parse_manifest, for writing datasets to disk."""

    def comp(c: FeatureComponent) -> dict:
        return {
            "kind": c.kind,
            "sub_features": [
                {
                    "name": s.name,
                    "dimension": list(s.dimension) if s.is_variable else s.dimension,
                    "value_class": s.value_class,
                    **({"nested": list(s.nested)} if s.nested else {}),
                }
                for s in c.sub_features
            ],
        }

    return {
        "name": schema.name,
        "split_shares": schema.split_shares,
        "splits": schema.split_files,
        "coordinates": {"time": list(schema.coordinates.time), "space": list(schema.coordinates.space)},
        "features": [comp(c) for c in schema.feature_components],
        "labels": [comp(c) for c in schema.label_components],
        "mappings": [
            {"column": m.column, "path": m.path, "regular": m.regular} for m in schema.mapping_refs
        ],
    }


# -- validation ------------------------------------------------------------


def validate_schema(schema: DatasetSchema) -> list[str]:
    """Check every schema invariant; returns a list of violations (empty if valid)."""
    violations: list[str] = []

    if not schema.feature_components:
        violations.append("at least one feature component required")
    for comps, side in ((schema.feature_components, "feature"), (schema.label_components, "label")):
        kinds = [c.kind for c in comps]
        for k in kinds:
            if k not in KIND_ORDER:
                violations.append(f"{side} component kind '{k}' is not one of {KIND_ORDER}")
        for k in set(kinds):
            if kinds.count(k) > 1:
                violations.append(f"duplicate {side} component kind '{k}'")

    names = [s.name for s in schema.iter_subs(False)] + [s.name for s in schema.iter_subs(True)]
    for n in sorted(set(names)):
        if names.count(n) > 1:
            violations.append(f"sub-feature name '{n}' declared more than once")

    for labels in (False, True):
        for sub in schema.iter_subs(labels):
            lo, hi = sub.min_dimension, sub.max_dimension
            if lo < 1 or hi < 1:
                violations.append(f"sub-feature '{sub.name}': dimension must be positive")
            if sub.is_variable and lo > hi:
                violations.append(f"sub-feature '{sub.name}': dimension range min > max")
            if sub.value_class not in VALUE_CLASSES:
                violations.append(
                    f"sub-feature '{sub.name}': unknown value class '{sub.value_class}'"
                )
            ref = schema.mapping_for(sub.name)
            if sub.is_variable and (ref is None or ref.regular):
                violations.append(
                    f"sub-feature '{sub.name}': variable-length values must map to an irregular side store"
                )
            if sub.value_class == "token-sequence" and (ref is None or ref.regular):
                violations.append(
                    f"sub-feature '{sub.name}': token sequences must map to an irregular side store"
                )

    share_sum = sum(schema.split_shares.values())
    if abs(share_sum - 1.0) > SHARE_TOLERANCE:
        violations.append(f"split shares sum to {share_sum:g}")
    for split, share in schema.split_shares.items():
        if not 0.0 <= share <= 1.0:
            violations.append(f"split share '{split}' = {share:g} outside [0, 1]")

    sub_names = set(names)
    for ref in schema.mapping_refs:
        if ref.column not in sub_names:
            violations.append(f"mapping reference '{ref.column}' names no declared sub-feature")

    try:
        table_cols = schema.column_names()
    except SchemaValidationError as exc:
        table_cols = []
        violations.extend(v for v in exc.violations if v not in violations)
    if table_cols:
        for c in sorted(set(table_cols)):
            if table_cols.count(c) > 1:
                violations.append(f"column '{c}' appears more than once in the main table")
        for c in (*schema.coordinates.time, *schema.coordinates.space):
            if c not in table_cols:
                violations.append(f"coordinate column '{c}' does not exist")
    if not schema.coordinates.time and not schema.coordinates.space:
        violations.append("at least one time or space coordinate column required")

    return violations


# -- flattening ------------------------------------------------------------


def flatten_point(point, schema: DatasetSchema):
    """Concatenate a point's values into (features, labels) vectors.

    Components are laid out time -> space -> space-time with sub-features in
    declared order; variable-length sub-features contribute their actual
    length, which must lie inside the declared range. ``point`` maps
    sub-feature names to scalars or sequences (mapped sub-features supply
    their resolved blocks). Labels are ``None`` when the schema has none.
    """

    def gather(labels: bool):
        parts = []
        for sub in schema.iter_subs(labels):
            if sub.name not in point:
                raise ShapeError(f"point is missing sub-feature '{sub.name}'")
            block = np.asarray(point[sub.name], dtype=np.float64).ravel()
            if sub.is_variable:
                lo, hi = sub.dimension
                if not lo <= block.size <= hi:
                    raise ShapeError(
                        f"sub-feature '{sub.name}': length {block.size} outside [{lo}, {hi}]"
                    )
            elif block.size != sub.dimension:
                raise ShapeError(
                    f"sub-feature '{sub.name}': expected {sub.dimension} values, got {block.size}"
                )
            parts.append(block)
        return np.concatenate(parts) if parts else None

    features = gather(labels=False)
    labels = gather(labels=True) if schema.label_components else None
    return features, labels
