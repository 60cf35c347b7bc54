"""Two-file dataset storage: tabular main files plus mapped side stores.

Main tables are plain CSV with a mandatory header row and one data point per
row. Columns whose values are large, shared, or variable length hold an
identifier instead; the identifier resolves through a side store. Regular
side stores (uniform block length) are CSV keyed by their first column;
irregular ones (variable blocks, token sequences) are JSON objects mapping
identifier to an array of values or token tuples. Iteration is streaming:
peak memory scales with the batch size, never with the file size.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import (
    DanglingReferenceError,
    ParseError,
    SchemaMismatchError,
    SchemaValidationError,
)
from .schema import DatasetSchema, load_manifest, schema_to_manifest, validate_schema

DEFAULT_BATCH = 8192


class DataFrameSlice:
    """A columnar batch of rows. Numeric columns are numpy arrays; mapping
    identifier columns are lists of strings."""

    def __init__(self, columns: dict, start_row: int = 0, schema=None):
        self.columns = columns
        self.start_row = start_row
        self.schema = schema
        sizes = {len(v) for v in columns.values()}
        if len(sizes) > 1:
            raise SchemaMismatchError(f"ragged slice: column lengths {sorted(sizes)}")

    def __len__(self):
        for v in self.columns.values():
            return len(v)
        return 0

    def column(self, name):
        return self.columns[name]


class SideStore:
    """Mapping from identifier to a stored value block."""

    def __init__(self, path, regular: bool, blocks: dict):
        self.path = str(path)
        self.regular = regular
        self.blocks = blocks
        if regular:
            widths = {len(b) for b in blocks.values()}
            if len(widths) > 1:
                raise SchemaMismatchError(
                    f"regular side store '{path}' has non-uniform block lengths {sorted(widths)}"
                )
            self.block_width = widths.pop() if widths else 0
            self._matrix = (
                np.vstack([blocks[i] for i in blocks]) if blocks else np.empty((0, 0))
            )
            self._row_of = {ident: i for i, ident in enumerate(blocks)}
        else:
            self.block_width = None
            self._matrix = None
            self._row_of = None

    def get(self, ident: str):
        try:
            return self.blocks[ident]
        except KeyError:
            raise DanglingReferenceError(
                f"identifier '{ident}' not present in side store '{self.path}'"
            ) from None

    def rows(self, idents) -> np.ndarray:
        """Stacked blocks for a sequence of identifiers (regular stores only)."""
        if not self.regular:
            raise SchemaMismatchError(f"side store '{self.path}' is irregular")
        try:
            index = [self._row_of[i] for i in idents]
        except KeyError as exc:
            raise DanglingReferenceError(
                f"identifier '{exc.args[0]}' not present in side store '{self.path}'"
            ) from None
        return self._matrix[index]

    @classmethod
    def load(cls, path, regular: bool) -> "SideStore":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(str(path))
        if regular:
            blocks: dict = {}
            with open(path, newline="") as fh:
                reader = csv.reader(fh)
                header = next(reader, None)
                if header is None:
                    return cls(path, True, {})
                for i, row in enumerate(reader):
                    ident, raw = row[0], row[1:]
                    if ident in blocks:
                        raise SchemaMismatchError(
                            f"duplicate identifier '{ident}' in side store '{path}'"
                        )
                    try:
                        blocks[ident] = np.asarray(raw, dtype=np.float64)
                    except ValueError:
                        raise ParseError(
                            f"cannot parse block for identifier '{ident}' in '{path}'",
                            row=i,
                        ) from None
            return cls(path, True, blocks)
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(
                f"side store '{path}' parse error at line {exc.lineno}: {exc.msg}",
                row=exc.lineno,
            ) from exc
        if not isinstance(doc, dict):
            raise ParseError(f"side store '{path}' must be a JSON object")
        blocks = {}
        for ident, block in doc.items():
            if block and all(isinstance(v, (int, float)) for v in block):
                blocks[ident] = np.asarray(block, dtype=np.float64)
            else:
                blocks[ident] = block
        return cls(path, False, blocks)

    def write(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        if self.regular:
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["id"] + [f"v{i}" for i in range(self.block_width or 0)])
                for ident, block in self.blocks.items():
                    writer.writerow([ident] + [_render(v) for v in block])
        else:
            serializable = {
                k: (v.tolist() if isinstance(v, np.ndarray) else v)
                for k, v in self.blocks.items()
            }
            path.write_text(json.dumps(serializable, sort_keys=True))


class MappingCursor:
    """Deferred mapping resolution: O(1) lookup per slice row."""

    def __init__(self, idents, store: SideStore):
        self._idents = list(idents)
        self._store = store

    def __len__(self):
        return len(self._idents)

    def __getitem__(self, row: int):
        return self._store.get(self._idents[row])


def _render(v) -> str:
    """Shortest round-trip text for a cell value."""
    if isinstance(v, (np.floating, float)):
        return repr(float(v))
    if isinstance(v, (np.integer, int)):
        return str(int(v))
    return str(v)


def _convert_column(raw: list, kind: str, name: str, start_row: int):
    if kind == "str":
        return raw
    try:
        if kind == "int":
            return np.fromiter((int(v) for v in raw), dtype=np.int64, count=len(raw))
        return np.asarray(raw, dtype=np.float64)
    except ValueError:
        for i, v in enumerate(raw):
            try:
                int(v) if kind == "int" else float(v)
            except ValueError:
                raise ParseError(
                    f"cannot parse {kind} cell {v!r} at row {start_row + i}, column '{name}'",
                    row=start_row + i,
                    column=name,
                ) from None
        raise


class Dataset:
    """An open dataset: schema plus per-split main tables and side stores."""

    def __init__(self, schema: DatasetSchema, base_dir, side_stores: dict):
        self.schema = schema
        self.base_dir = Path(base_dir)
        self.side_stores = side_stores  # column -> SideStore
        self._row_counts: dict[str, int] = {}

    @property
    def splits(self) -> list[str]:
        return list(self.schema.split_files)

    def table_path(self, split: str) -> Path:
        try:
            return self.base_dir / self.schema.split_files[split]
        except KeyError:
            raise SchemaMismatchError(f"dataset has no split '{split}'") from None

    # -- streaming ---------------------------------------------------------

    def stream_slices(self, split: str, batch_size: int = DEFAULT_BATCH):
        """Yield DataFrameSlice batches covering the split's rows in order."""
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        spec = self.schema.table_columns()
        names = [n for n, _ in spec]
        path = self.table_path(split)
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != names:
                raise SchemaMismatchError(
                    f"{path}: header {header} does not match schema columns {names}"
                )
            start = 0
            rows: list[list[str]] = []
            for i, row in enumerate(reader):
                if len(row) != len(names):
                    raise SchemaMismatchError(
                        f"{path}: row {i} has {len(row)} fields, expected {len(names)}"
                    )
                rows.append(row)
                if len(rows) == batch_size:
                    yield self._slice_from_rows(rows, spec, start)
                    start += len(rows)
                    rows = []
            if rows:
                yield self._slice_from_rows(rows, spec, start)

    def _slice_from_rows(self, rows, spec, start) -> DataFrameSlice:
        transposed = list(zip(*rows)) if rows else [[] for _ in spec]
        columns = {
            name: _convert_column(list(col), kind, name, start)
            for (name, kind), col in zip(spec, transposed)
        }
        return DataFrameSlice(columns, start_row=start, schema=self.schema)

    def row_count(self, split: str) -> int:
        if split not in self._row_counts:
            n = 0
            for sl in self.stream_slices(split, batch_size=65536):
                n += len(sl)
            self._row_counts[split] = n
        return self._row_counts[split]

    # -- column sources for the score engines -------------------------------

    def column_source(self, split: str, columns=None, batch_size: int = DEFAULT_BATCH):
        """A re-iterable source of {column -> array} batches.

        Requested names may include expanded regular-mapping columns such as
        ``image__4``; those are resolved through the side store batch by
        batch. Defaults to every numeric feature and label column.
        """
        if columns is None:
            columns = self.schema.numeric_columns(False) + self.schema.numeric_columns(True)
        plain, mapped = [], {}
        table_cols = set(self.schema.column_names())
        for col in columns:
            if col in table_cols:
                plain.append(col)
                continue
            base, _, idx = col.rpartition("__")
            if base in self.side_stores and idx.isdigit():
                mapped.setdefault(base, []).append((col, int(idx)))
            else:
                raise SchemaMismatchError(f"unknown column '{col}'")

        def source():
            for sl in self.stream_slices(split, batch_size):
                out = {}
                for col in plain:
                    out[col] = sl.columns[col]
                for base, wanted in mapped.items():
                    block = self.side_stores[base].rows(sl.columns[base])
                    for col, idx in wanted:
                        out[col] = block[:, idx]
                yield out

        return source

    def concat_column_source(self, splits, columns=None, batch_size: int = DEFAULT_BATCH):
        sources = [self.column_source(s, columns, batch_size) for s in splits]

        def source():
            for src in sources:
                yield from src()

        return source


def resolve_mapping(slice_: DataFrameSlice, column: str, store: SideStore, mode: str = "eager"):
    """Resolve a mapping column of a slice.

    ``eager`` materializes blocks row by row: regular stores replace the
    identifier column with ``column__i`` value columns, irregular stores
    with a list of blocks. ``deferred`` returns an O(1) lookup cursor.
    """
    if column not in slice_.columns:
        raise SchemaMismatchError(f"slice has no column '{column}'")
    idents = slice_.columns[column]
    if mode == "deferred":
        return MappingCursor(idents, store)
    if mode != "eager":
        raise ValueError(f"unknown resolution mode '{mode}'")
    columns = {k: v for k, v in slice_.columns.items() if k != column}
    if store.regular:
        block = store.rows(idents)
        for i in range(store.block_width or 0):
            columns[f"{column}__{i}"] = block[:, i]
    else:
        columns[column] = [store.get(ident) for ident in idents]
    return DataFrameSlice(columns, start_row=slice_.start_row, schema=slice_.schema)


def open_dataset(manifest_path) -> Dataset:
    """Open a dataset from its manifest; validates schema and file presence."""
    manifest_path = Path(manifest_path)
    schema = load_manifest(manifest_path)
    violations = validate_schema(schema)
    if violations:
        raise SchemaValidationError(violations)
    base = manifest_path.parent
    if not schema.split_files:
        raise SchemaValidationError(["manifest declares no split files"])
    for split, rel in schema.split_files.items():
        path = base / rel
        if not path.exists():
            raise FileNotFoundError(str(path))
    stores = {}
    for ref in schema.mapping_refs:
        stores[ref.column] = SideStore.load(base / ref.path, ref.regular)
    dataset = Dataset(schema, base, stores)
    # cheap structural check: headers must match the schema on every split
    names = schema.column_names()
    for split in schema.split_files:
        with open(dataset.table_path(split), newline="") as fh:
            header = next(csv.reader(fh), None)
        if header != names:
            raise SchemaMismatchError(
                f"{dataset.table_path(split)}: header {header} does not match schema columns {names}"
            )
    return dataset


def write_dataset(schema: DatasetSchema, tables: dict, out_dir, side_data: dict | None = None,
                  manifest_name: str = "manifest.json") -> Path:
    """Write main tables, side stores and the manifest under ``out_dir``.

    ``tables`` maps split name to {column -> sequence}; ``side_data`` maps
    mapping column to {identifier -> block}. Floats are serialized as
    shortest round-trip decimal text, so read-back reproduces every value.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = schema.table_columns()
    names = [n for n, _ in spec]

    split_files = dict(schema.split_files) or {split: f"{split}.csv" for split in tables}
    for split in tables:
        split_files.setdefault(split, f"{split}.csv")
    schema = DatasetSchema(
        name=schema.name,
        feature_components=schema.feature_components,
        label_components=schema.label_components,
        coordinates=schema.coordinates,
        mapping_refs=schema.mapping_refs,
        split_shares=schema.split_shares,
        split_files={s: split_files[s] for s in tables},
    )

    violations = validate_schema(schema)
    if violations:
        raise SchemaValidationError(violations)

    for split, columns in tables.items():
        missing = [n for n in names if n not in columns]
        if missing:
            raise SchemaMismatchError(f"split '{split}' is missing columns {missing}")
        path = out_dir / schema.split_files[split]
        path.parent.mkdir(parents=True, exist_ok=True)
        length = {len(columns[n]) for n in names}
        if len(length) > 1:
            raise SchemaMismatchError(f"split '{split}' has ragged columns")
        n_rows = length.pop() if length else 0
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(names)
            cols = [columns[n] for n in names]
            for i in range(n_rows):
                writer.writerow([_render(col[i]) for col in cols])

    side_data = side_data or {}
    for ref in schema.mapping_refs:
        if ref.column not in side_data:
            raise SchemaMismatchError(f"no side data provided for mapping '{ref.column}'")
        store = SideStore("<memory>", ref.regular, dict(side_data[ref.column]))
        store.write(out_dir / ref.path)

    manifest_path = out_dir / manifest_name
    manifest_path.write_text(json.dumps(schema_to_manifest(schema), indent=2, sort_keys=True))
    return manifest_path
