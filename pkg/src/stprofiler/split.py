"""Out-of-distribution train/val/test assignment across coordinates.

Validation and test data are split off by sampling coordinate values: a
fraction of the distinct spatial identifiers and a fraction of each temporal
component's distinct values. A point is out-of-distribution when its spatial
id was sampled, its time stamp matches the sampled temporal values (any or
all components), or both, depending on the combination mode. Sampling ranks
domain values by a salted stable hash, so assignments are fully determined
by (data, spec, seed), nested across fractions, and identical on every
platform and thread count.
"""

from __future__ import annotations

import hashlib
import json
import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, EmptyDomainError, LeakageError, SchemaMismatchError

SPLIT_NAMES = ("train", "val", "test")
TRAIN, VAL, TEST = 0, 1, 2


@dataclass(frozen=True)
class SplitSpec:
    """How to carve out-of-distribution validation/test data.

    ``combination`` decides whether a spatial or temporal match suffices
    ("union") or both are required ("intersection"); ``temporal_rule``
    decides whether one matching time component suffices ("any") or all must
    match ("all"). ``temporal_block`` groups each temporal domain into tiles
    of that many consecutive values before sampling, rounding the sampled
    count up to whole tiles.
    """

    spatial_fraction: float = 0.0
    temporal_fraction: float = 0.0
    combination: str = "union"
    temporal_rule: str = "any"
    val_ratio: float = 0.5
    seed: int = 0
    temporal_block: int | None = None

    def __post_init__(self):
        for name in ("spatial_fraction", "temporal_fraction", "val_ratio"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {v}")
        if self.combination not in ("union", "intersection"):
            raise ConfigurationError(f"unknown combination mode '{self.combination}'")
        if self.temporal_rule not in ("any", "all"):
            raise ConfigurationError(f"unknown temporal rule '{self.temporal_rule}'")
        if self.temporal_block is not None and self.temporal_block < 1:
            raise ConfigurationError("temporal_block must be >= 1")

    def to_dict(self) -> dict:
        return {
            "spatial_fraction": self.spatial_fraction,
            "temporal_fraction": self.temporal_fraction,
            "combination": self.combination,
            "temporal_rule": self.temporal_rule,
            "val_ratio": self.val_ratio,
            "seed": self.seed,
            "temporal_block": self.temporal_block,
        }


def _hash_bytes(parts, salt: bytes) -> bytes:
    h = hashlib.blake2b(salt, digest_size=8)
    for p in parts:
        if isinstance(p, str):
            h.update(b"s" + p.encode("utf-8"))
        else:
            h.update(b"f" + struct.pack("<d", float(p)))
        h.update(b"\x1f")
    return h.digest()


def _hash_rank(value, salt: bytes) -> int:
    parts = value if isinstance(value, tuple) else (value,)
    return int.from_bytes(_hash_bytes(parts, salt), "big")


def _hash01(parts, salt: bytes) -> float:
    return int.from_bytes(_hash_bytes(parts, salt), "big") / 2.0**64


def _salt(seed: int, label: str) -> bytes:
    return f"{seed}:{label}".encode("utf-8")


@dataclass(frozen=True)
class SampledCoordinates:
    """The coordinate values carved out as out-of-distribution."""

    spatial_ids: frozenset
    temporal: dict  # time column -> frozenset of values

    def to_dict(self) -> dict:
        return {
            "spatial_ids": sorted([list(i) for i in self.spatial_ids]),
            "temporal": {c: sorted(v) for c, v in self.temporal.items()},
        }


def _sample_domain(domain, fraction, salt: bytes, block: int | None):
    values = sorted(domain)
    if not values:
        if fraction > 0:
            raise EmptyDomainError("cannot sample a fraction of an empty domain")
        return frozenset()
    target = int(fraction * len(values))
    if target == 0:
        return frozenset()
    if block is None or block <= 1:
        ranked = sorted(values, key=lambda v: _hash_rank(v, salt))
        return frozenset(ranked[:target])
    # tile the sorted domain into runs of `block` consecutive values; the last
    # tile is the final `block` values so every tile has full length
    tiles = [tuple(values[i : i + block]) for i in range(0, len(values) - block + 1, block)]
    if not tiles or len(values) % block:
        tail = tuple(values[-block:]) if len(values) >= block else tuple(values)
        if not tiles or tiles[-1] != tail:
            tiles.append(tail)
    needed = -(-target // block)  # ceil; realized count rounds up to whole tiles
    ranked = sorted(tiles, key=lambda t: _hash_rank(t[0], salt))
    chosen: set = set()
    for tile in ranked[:needed]:
        chosen.update(tile)
    return frozenset(chosen)


def sample_coordinates(spatial_ids, temporal_domains: dict, spec: SplitSpec) -> SampledCoordinates:
    """Sample floor(fraction * |___domain|) values from each coordinate ___domain.

    Spatial identifiers are tuples of the space-coordinate columns; temporal
    domains are the distinct values per time column. Sampling is a salted
    hash ranking: the same seed with a larger fraction yields a superset.
    """
    ids = {tuple(i) if isinstance(i, (tuple, list, np.ndarray)) else (i,) for i in spatial_ids}
    if spec.spatial_fraction > 0 and not ids:
        raise EmptyDomainError("cannot sample a fraction of an empty spatial ___domain")
    target = int(spec.spatial_fraction * len(ids))
    if target:
        ranked = sorted(ids, key=lambda v: _hash_rank(v, _salt(spec.seed, "spatial")))
        sampled_ids = frozenset(ranked[:target])
    else:
        sampled_ids = frozenset()
    if spec.temporal_fraction > 0 and not temporal_domains:
        raise EmptyDomainError("temporal fraction > 0 but the dataset has no time columns")
    temporal = {
        col: _sample_domain(
            dom, spec.temporal_fraction, _salt(spec.seed, f"temporal:{col}"), spec.temporal_block
        )
        for col, dom in temporal_domains.items()
    }
    return SampledCoordinates(spatial_ids=sampled_ids, temporal=temporal)


@dataclass
class SplitAssignment:
    """Per-point split labels plus the sampled coordinates that drove them."""

    labels: np.ndarray  # int8 array of TRAIN/VAL/TEST
    sampled: SampledCoordinates
    spec: SplitSpec
    time_columns: tuple
    space_columns: tuple

    @property
    def counts(self) -> dict:
        return {
            name: int(np.count_nonzero(self.labels == code))
            for code, name in enumerate(SPLIT_NAMES)
        }

    @property
    def shares(self) -> dict:
        n = len(self.labels) or 1
        return {name: count / n for name, count in self.counts.items()}

    def split_names(self) -> list[str]:
        return [SPLIT_NAMES[c] for c in self.labels]

    def save(self, table_path, meta_path=None) -> None:
        table_path = Path(table_path)
        table_path.parent.mkdir(parents=True, exist_ok=True)
        with open(table_path, "w") as fh:
            fh.write("row,split\n")
            for i, code in enumerate(self.labels):
                fh.write(f"{i},{SPLIT_NAMES[code]}\n")
        meta = {
            "spec": self.spec.to_dict(),
            "sampled": self.sampled.to_dict(),
            "counts": self.counts,
            "time_columns": list(self.time_columns),
            "space_columns": list(self.space_columns),
        }
        meta_path = Path(meta_path) if meta_path else table_path.with_suffix(".meta.json")
        meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True))


def _coordinate_domains(source, time_columns, space_columns):
    time_domains: dict = {c: set() for c in time_columns}
    spatial_ids: set = set()
    rows = 0
    for batch in source():
        cols = {}
        for c in (*time_columns, *space_columns):
            if c not in batch:
                raise SchemaMismatchError(f"coordinate column '{c}' missing from the data")
            cols[c] = np.asarray(batch[c])
        for c in time_columns:
            time_domains[c].update(np.unique(cols[c]).tolist())
        if space_columns:
            stacked = np.column_stack([cols[c] for c in space_columns])
            spatial_ids.update(map(tuple, stacked.tolist()))
        rows += len(next(iter(cols.values()))) if cols else 0
    return spatial_ids, time_domains, rows


def _match_batch(batch, sampled: SampledCoordinates, spec: SplitSpec,
                 time_columns, space_columns):
    n = len(batch[next(iter(batch))]) if batch else 0
    if space_columns:
        stacked = np.column_stack([np.asarray(batch[c]) for c in space_columns])
        spatial = np.fromiter(
            (tuple(row) in sampled.spatial_ids for row in stacked.tolist()),
            dtype=bool,
            count=len(stacked),
        )
    else:
        spatial = np.zeros(n, dtype=bool)
    if time_columns:
        per_col = []
        for c in time_columns:
            values = np.asarray(batch[c])
            chosen = np.array(sorted(sampled.temporal.get(c, ())), dtype=values.dtype)
            per_col.append(np.isin(values, chosen) if chosen.size else np.zeros(n, dtype=bool))
        stack = np.vstack(per_col)
        temporal = stack.any(axis=0) if spec.temporal_rule == "any" else stack.all(axis=0)
    else:
        temporal = np.zeros(n, dtype=bool)
    if spec.combination == "union":
        return spatial | temporal
    return spatial & temporal


def _assign_batch(batch, sampled, spec, time_columns, space_columns, salt):
    ood = _match_batch(batch, sampled, spec, time_columns, space_columns)
    labels = np.zeros(len(ood), dtype=np.int8)
    if ood.any():
        coord_cols = [np.asarray(batch[c]) for c in (*time_columns, *space_columns)]
        for i in np.nonzero(ood)[0]:
            parts = tuple(col[i] for col in coord_cols)
            labels[i] = VAL if _hash01(parts, salt) < spec.val_ratio else TEST
    return labels


def assign_splits(source, time_columns, space_columns, spec: SplitSpec,
                  threads: int = 1) -> SplitAssignment:
    """Assign every data point to train, val or test.

    Two passes: the first gathers the distinct coordinate domains, the
    second labels each point. Out-of-distribution points are divided into
    val and test by a salted hash of their coordinates at ``val_ratio``, so
    the division is stable under re-runs and row reordering.
    """
    time_columns = tuple(time_columns)
    space_columns = tuple(space_columns)
    spatial_ids, time_domains, _ = _coordinate_domains(source, time_columns, space_columns)
    sampled = sample_coordinates(spatial_ids, time_domains, spec)
    salt = _salt(spec.seed, "val-test")

    batches = list(source())
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(
                    lambda b: _assign_batch(b, sampled, spec, time_columns, space_columns, salt),
                    batches,
                )
            )
    else:
        parts = [
            _assign_batch(b, sampled, spec, time_columns, space_columns, salt) for b in batches
        ]
    labels = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int8)
    if len(labels) and not (labels == TRAIN).any():
        warnings.warn("assignment leaves no training points", stacklevel=2)
    return SplitAssignment(
        labels=labels,
        sampled=sampled,
        spec=spec,
        time_columns=time_columns,
        space_columns=space_columns,
    )


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of an out-of-distribution leakage audit."""

    leaks: tuple
    counts: dict
    shares: dict

    @property
    def clean(self) -> bool:
        return not self.leaks


def verify_ood(assignment: SplitAssignment, source, max_reported: int = 10) -> VerifyReport:
    """Confirm no sampled coordinate pattern appears in the training split.

    Re-derives each training point's out-of-distribution membership from the
    sampled coordinates; any hit is leakage. Raises LeakageError listing the
    offending coordinates, otherwise reports the realized split shares.
    """
    leaks: list = []
    offset = 0
    for batch in source():
        n = len(batch[next(iter(batch))])
        labels = assignment.labels[offset : offset + n]
        ood = _match_batch(
            batch, assignment.sampled, assignment.spec,
            assignment.time_columns, assignment.space_columns,
        )
        bad = np.nonzero(ood & (labels == TRAIN))[0]
        for i in bad[: max(0, max_reported - len(leaks))]:
            coords = {
                c: np.asarray(batch[c])[i].item()
                for c in (*assignment.time_columns, *assignment.space_columns)
            }
            leaks.append((offset + int(i), coords))
        offset += n
    if offset != len(assignment.labels):
        raise SchemaMismatchError(
            f"assignment covers {len(assignment.labels)} rows but the data has {offset}"
        )
    if leaks:
        raise LeakageError(
            f"{len(leaks)} training points match sampled ood coordinates: "
            + "; ".join(f"row {row} {coords}" for row, coords in leaks),
            offenders=leaks,
        )
    return VerifyReport(leaks=(), counts=assignment.counts, shares=assignment.shares)
