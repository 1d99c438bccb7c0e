"""Domain types, CSV/JSON ingestion, one-hot encoding and splitting."""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import rng
from .errors import (
    ArityMismatch,
    BadFractions,
    EmptyFile,
    InsufficientData,
    MissingColumn,
    SchemaError,
    SchemaMismatch,
    UnknownCategory,
    UnparsableValue,
)

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"
SEQUENCE_COLUMN = "sequence_id"
TRUTH_COLUMN = "true_p"


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str
    categories: tuple[str, ...] = ()
    unit: str = ""

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, CATEGORICAL):
            raise SchemaError(f"feature {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            if len(set(self.categories)) < 2 or len(set(self.categories)) != len(self.categories):
                raise SchemaError(f"feature {self.name!r}: need >= 2 distinct categories")
        elif self.categories:
            raise SchemaError(f"feature {self.name!r}: continuous feature has categories")

    @property
    def is_continuous(self) -> bool:
        return self.kind == CONTINUOUS

    def to_json(self) -> dict:
        d = {"name": self.name, "kind": self.kind}
        if self.kind == CATEGORICAL:
            d["categories"] = list(self.categories)
        d["unit"] = self.unit
        return d


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[FeatureSpec, ...]
    label_name: str = "outcome_incorrect"

    def __post_init__(self):
        if not self.features:
            raise SchemaError("schema needs at least one feature")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate feature names")
        if self.label_name in names:
            raise SchemaError("label name collides with a feature name")

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    def feature(self, name: str) -> FeatureSpec:
        for f in self.features:
            if f.name == name:
                return f
        raise KeyError(name)

    def to_json(self) -> dict:
        return {"features": [f.to_json() for f in self.features], "label": self.label_name}

    @classmethod
    def from_json(cls, obj: Mapping) -> "FeatureSchema":
        try:
            feats = tuple(
                FeatureSpec(
                    name=str(f["name"]),
                    kind=str(f["kind"]),
                    categories=tuple(str(c) for c in f.get("categories", ())),
                    unit=str(f.get("unit", "") or ""),
                )
                for f in obj["features"]
            )
            return cls(feats, str(obj.get("label", "outcome_incorrect")))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed schema: {exc}") from exc


def load_schema(path: str | os.PathLike) -> FeatureSchema:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    return FeatureSchema.from_json(obj)


def save_schema(schema: FeatureSchema, path: str | os.PathLike) -> None:
    atomic_write_text(path, json.dumps(schema.to_json(), indent=2) + "\n")


@dataclass(frozen=True)
class DataPoint:
    values: tuple
    outcome_incorrect: bool | None = None
    sequence_id: str | None = None


@dataclass(frozen=True, eq=False)
class Dataset:
    """Column store of quality-factor values plus the binary label.

    Continuous columns are float64 arrays, categorical columns are object
    arrays of category names. ``labels`` is None for unlabeled data.
    """

    schema: FeatureSchema
    columns: Mapping[str, np.ndarray]
    labels: np.ndarray | None = None
    sequence_ids: np.ndarray | None = None
    provenance: str = ""
    truth: np.ndarray | None = None

    def __len__(self) -> int:
        return len(next(iter(self.columns.values())))

    @property
    def points(self) -> list[DataPoint]:
        names = self.schema.names
        out = []
        for i in range(len(self)):
            vals = tuple(
                float(self.columns[n][i]) if self.schema.feature(n).is_continuous else str(self.columns[n][i])
                for n in names
            )
            y = None if self.labels is None else bool(self.labels[i])
            sid = None if self.sequence_ids is None else str(self.sequence_ids[i])
            out.append(DataPoint(vals, y, sid))
        return out

    @classmethod
    def from_points(cls, schema: FeatureSchema, points: Sequence[DataPoint], provenance: str = "") -> "Dataset":
        cols: dict[str, np.ndarray] = {}
        for j, f in enumerate(schema.features):
            raw = [p.values[j] for p in points]
            for i, v in enumerate(raw):
                _check_value(f, v, i + 1)
            cols[f.name] = np.array(raw, dtype=np.float64 if f.is_continuous else object)
        labels = None
        if points and all(p.outcome_incorrect is not None for p in points):
            labels = np.array([bool(p.outcome_incorrect) for p in points], dtype=bool)
        seq = None
        if points and all(p.sequence_id is not None for p in points):
            seq = np.array([p.sequence_id for p in points], dtype=object)
        for p in points:
            if len(p.values) != len(schema.features):
                raise ArityMismatch(f"point has {len(p.values)} values, schema has {len(schema.features)}")
        return cls(schema, cols, labels, seq, provenance)

    def take(self, idx: np.ndarray, provenance: str | None = None) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(
            self.schema,
            {k: v[idx] for k, v in self.columns.items()},
            None if self.labels is None else self.labels[idx],
            None if self.sequence_ids is None else self.sequence_ids[idx],
            self.provenance if provenance is None else provenance,
            None if self.truth is None else self.truth[idx],
        )

    def without_truth(self) -> "Dataset":
        return Dataset(self.schema, self.columns, self.labels, self.sequence_ids, self.provenance, None)


def _check_value(f: FeatureSpec, v, row: int) -> None:
    if f.is_continuous:
        if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(float(v)):
            raise UnparsableValue(row, f.name, str(v))
    elif v not in f.categories:
        raise UnknownCategory(row, f.name, str(v))


_TRUE = {"1", "true"}
_FALSE = {"0", "false"}


def parse_label(text: str, row: int, column: str) -> bool:
    t = text.strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise UnparsableValue(row, column, text)


def parse_value(f: FeatureSpec, text: str, row: int):
    t = text.strip()
    if f.is_continuous:
        try:
            v = float(t)
        except ValueError:
            raise UnparsableValue(row, f.name, text) from None
        if not math.isfinite(v):
            raise UnparsableValue(row, f.name, text)
        return v
    if t not in f.categories:
        raise UnknownCategory(row, f.name, text)
    return t


def load_dataset(csv_path: str | os.PathLike, schema: FeatureSchema, require_label: bool = True) -> Dataset:
    """Read a CSV file; rows are numbered from 1 (the first data row) in errors."""
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise EmptyFile(f"{csv_path}: no header row")
        header = [h.strip() for h in header]
        pos = {h: i for i, h in enumerate(header)}
        for name in schema.names:
            if name not in pos:
                raise MissingColumn(name)
        has_label = schema.label_name in pos
        if require_label and not has_label:
            raise MissingColumn(schema.label_name)
        has_seq = SEQUENCE_COLUMN in pos
        raw_cols: dict[str, list] = {n: [] for n in schema.names}
        labels: list[bool] = []
        seqs: list[str] = []
        n_rows = 0
        for r, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise UnparsableValue(r, "<row>", ",".join(row))
            for f in schema.features:
                raw_cols[f.name].append(parse_value(f, row[pos[f.name]], r))
            if has_label:
                labels.append(parse_label(row[pos[schema.label_name]], r, schema.label_name))
            if has_seq:
                seqs.append(row[pos[SEQUENCE_COLUMN]].strip())
            n_rows += 1
    if n_rows == 0:
        raise EmptyFile(f"{csv_path}: no data rows")
    cols = {
        f.name: np.array(raw_cols[f.name], dtype=np.float64 if f.is_continuous else object)
        for f in schema.features
    }
    return Dataset(
        schema,
        cols,
        np.array(labels, dtype=bool) if has_label else None,
        np.array(seqs, dtype=object) if has_seq else None,
        provenance=f"csv:{Path(csv_path).name}",
    )


def dataset_to_csv(ds: Dataset, emit_truth: bool = False) -> str:
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = list(ds.schema.names)
    if ds.labels is not None:
        header.append(ds.schema.label_name)
    if ds.sequence_ids is not None:
        header.append(SEQUENCE_COLUMN)
    if emit_truth and ds.truth is not None:
        header.append(TRUTH_COLUMN)
    w.writerow(header)
    feats = ds.schema.features
    for i in range(len(ds)):
        row = [repr(float(ds.columns[f.name][i])) if f.is_continuous else ds.columns[f.name][i] for f in feats]
        if ds.labels is not None:
            row.append("1" if ds.labels[i] else "0")
        if ds.sequence_ids is not None:
            row.append(ds.sequence_ids[i])
        if emit_truth and ds.truth is not None:
            row.append(repr(float(ds.truth[i])))
        w.writerow(row)
    return buf.getvalue()


def save_dataset(ds: Dataset, path: str | os.PathLike, emit_truth: bool = False) -> None:
    atomic_write_text(path, dataset_to_csv(ds, emit_truth))


@dataclass(frozen=True)
class EncodedColumn:
    name: str
    feature: str
    kind: str  # "continuous" or "onehot"
    category: str | None = None


@dataclass(frozen=True, eq=False)
class EncodedDataset:
    schema: FeatureSchema
    columns: tuple[EncodedColumn, ...]
    X: np.ndarray
    y: np.ndarray | None = None

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def arity(self) -> int:
        return len(self.columns)

    def subset(self, idx: np.ndarray) -> "EncodedDataset":
        return EncodedDataset(self.schema, self.columns, self.X[idx], None if self.y is None else self.y[idx])


def encoded_columns(schema: FeatureSchema) -> tuple[EncodedColumn, ...]:
    cols = []
    for f in schema.features:
        if f.is_continuous:
            cols.append(EncodedColumn(f.name, f.name, "continuous"))
        else:
            cols.extend(EncodedColumn(f"{f.name}={c}", f.name, "onehot", c) for c in f.categories)
    return tuple(cols)


def one_hot_encode(ds: Dataset) -> EncodedDataset:
    n = len(ds)
    if n == 0:
        raise InsufficientData("cannot encode an empty dataset")
    cols = encoded_columns(ds.schema)
    X = np.zeros((n, len(cols)), dtype=np.float64)
    j = 0
    for f in ds.schema.features:
        v = ds.columns[f.name]
        if f.is_continuous:
            X[:, j] = v
            j += 1
        else:
            for c in f.categories:
                X[:, j] = (v == c).astype(np.float64)
                j += 1
    y = None if ds.labels is None else ds.labels.astype(np.float64)
    return EncodedDataset(ds.schema, cols, X, y)


def encode_point(schema: FeatureSchema, values: Mapping[str, object] | Sequence) -> np.ndarray:
    """Encode one point given as a name->value mapping or a value sequence."""
    if not isinstance(values, Mapping):
        if len(values) != len(schema.features):
            raise ArityMismatch(f"expected {len(schema.features)} values, got {len(values)}")
        values = dict(zip(schema.names, values))
    out = []
    for f in schema.features:
        if f.name not in values:
            raise MissingColumn(f.name)
        v = values[f.name]
        if f.is_continuous:
            v = parse_value(f, v, 1) if isinstance(v, str) else float(v)
            if not math.isfinite(v):
                raise UnparsableValue(1, f.name, str(v))
            out.append(v)
        else:
            v = parse_value(f, str(v), 1)
            out.extend(1.0 if c == v else 0.0 for c in f.categories)
    extra = set(values) - set(schema.names)
    if extra:
        raise SchemaMismatch(f"unknown feature(s): {', '.join(sorted(extra))}")
    return np.array(out, dtype=np.float64)


def split_dataset(ds: Dataset, fractions: Sequence[float], seed: int) -> list[Dataset]:
    """Deterministic randomized partition.

    With a sequence id column, whole sequences are shuffled and assigned, so no
    sequence straddles two parts.
    """
    fr = [float(f) for f in fractions]
    if not fr or any(not (f > 0) for f in fr) or abs(sum(fr) - 1.0) > 1e-9:
        raise BadFractions(f"fractions must be positive and sum to 1, got {fractions}")
    if ds.sequence_ids is not None:
        groups, inverse = np.unique(ds.sequence_ids.astype(str), return_inverse=True)
        units = len(groups)
    else:
        inverse = None
        units = len(ds)
    perm = rng.permutation(seed, units)
    sizes = [int(math.floor(f * units)) for f in fr[:-1]]
    sizes.append(units - sum(sizes))
    parts = []
    start = 0
    for k, size in enumerate(sizes):
        chosen = perm[start:start + size]
        start += size
        if inverse is None:
            idx = chosen
        else:
            rank = np.full(units, -1, dtype=np.int64)
            rank[chosen] = np.arange(len(chosen))
            rows = np.flatnonzero(rank[inverse] >= 0)
            idx = rows[np.argsort(rank[inverse[rows]], kind="stable")]
        parts.append(ds.take(idx, provenance=f"{ds.provenance}|split{k}/{len(sizes)}@{seed}"))
    return parts


@dataclass(frozen=True)
class TraceEntry:
    leaf_id: str
    path_weight: float
    leaf_uncertainty: float
    conditions: str


@dataclass(frozen=True)
class UncertaintyEstimate:
    value: float
    trace: list[TraceEntry] = field(default_factory=list)
    calibrated: bool = False


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    write_atomic(path, text.encode("utf-8"))


def write_atomic(path: str | os.PathLike, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
