"""Columnar datasets: typed attributes plus a class-label column, and CSV I/O."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

# Categorical split masks are stored in one 64-bit word.
MAX_LEVELS = 64


class SchemaError(ValueError):
    """Raised when data does not fit the declared or inferred schema."""


@dataclass(frozen=True)
class Schema:
    """Attribute names and types plus the class names of the label column.

    ``levels[j]`` is ``None`` for a numeric attribute and the list of level
    names for a categorical one.
    """

    names: tuple[str, ...]
    levels: tuple[tuple[str, ...] | None, ...]
    class_names: tuple[str, ...]

    @property
    def n_attributes(self) -> int:
        return len(self.names)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def is_categorical(self) -> np.ndarray:
        return np.array([lv is not None for lv in self.levels], dtype=bool)

    @property
    def n_levels(self) -> np.ndarray:
        return np.array([0 if lv is None else len(lv) for lv in self.levels], dtype=np.int64)

    def to_dict(self) -> dict:
        return {
            "attributes": [
                {"name": n, "type": "numeric"} if lv is None
                else {"name": n, "type": "categorical", "levels": list(lv)}
                for n, lv in zip(self.names, self.levels)
            ],
            "classes": list(self.class_names),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Schema:
        names = tuple(a["name"] for a in d["attributes"])
        levels = tuple(
            None if a["type"] == "numeric" else tuple(a["levels"]) for a in d["attributes"]
        )
        return cls(names, levels, tuple(d["classes"]))


@dataclass
class Dataset:
    """M attribute columns over N objects with integer class labels.

    Numeric columns hold float64 values; categorical columns hold integer
    level codes (stored as float64 in :attr:`matrix` for the kernels).
    """

    matrix: np.ndarray
    labels: np.ndarray
    schema: Schema
    _hash: str | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.matrix = np.ascontiguousarray(self.matrix, dtype=np.float64)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if self.matrix.ndim != 2:
            raise SchemaError("attribute matrix must be 2-D")
        n, m = self.matrix.shape
        if n < 1 or m < 1:
            raise SchemaError(f"need at least one object and one attribute, got {n}x{m}")
        if self.labels.shape != (n,):
            raise SchemaError(f"labels length {self.labels.shape} does not match N={n}")
        if self.schema.n_attributes != m:
            raise SchemaError("schema attribute count does not match the matrix")
        c = self.schema.n_classes
        if c < 2:
            raise SchemaError(f"need at least two classes, got {c}")
        if self.labels.min() < 0 or self.labels.max() >= c:
            raise SchemaError("label code out of range")
        if not np.all(np.isfinite(self.matrix)):
            raise SchemaError("missing or non-finite values are not supported")
        for j, lv in enumerate(self.schema.levels):
            if lv is None:
                continue
            if len(lv) > MAX_LEVELS:
                raise SchemaError(
                    f"attribute {self.schema.names[j]!r} has {len(lv)} levels; at most {MAX_LEVELS}"
                )
            col = self.matrix[:, j]
            if np.any(col != np.floor(col)) or col.min() < 0 or col.max() >= len(lv):
                raise SchemaError(f"bad level code in attribute {self.schema.names[j]!r}")

    @property
    def n_objects(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_attributes(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_classes(self) -> int:
        return self.schema.n_classes

    @property
    def names(self) -> tuple[str, ...]:
        return self.schema.names

    def column(self, j: int) -> np.ndarray:
        if self.schema.levels[j] is None:
            return self.matrix[:, j]
        return self.matrix[:, j].astype(np.int64)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def take_attributes(self, idx: Sequence[int]) -> Dataset:
        idx = list(idx)
        schema = Schema(
            tuple(self.schema.names[j] for j in idx),
            tuple(self.schema.levels[j] for j in idx),
            self.schema.class_names,
        )
        return Dataset(self.matrix[:, idx], self.labels.copy(), schema)

    def with_labels(self, labels: np.ndarray) -> Dataset:
        return Dataset(self.matrix.copy(), labels, self.schema)

    def hash(self) -> str:
        """SHA-256 over values, labels and schema; stable across runs."""
        if self._hash is None:
            h = hashlib.sha256()
            h.update(self.matrix.tobytes())
            h.update(self.labels.tobytes())
            h.update(json.dumps(self.schema.to_dict(), sort_keys=True).encode())
            self._hash = h.hexdigest()
        return self._hash


def from_arrays(
    X,
    y,
    names: Sequence[str] | None = None,
    categorical: dict[int, int] | None = None,
    n_classes: int | None = None,
) -> Dataset:
    """Build a dataset from a numeric matrix and integer labels.

    ``categorical`` maps column index to level count for columns that
    already hold integer level codes.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim == 1:
        X = X[:, None]
    m = X.shape[1]
    names = tuple(names) if names is not None else tuple(f"V{j + 1}" for j in range(m))
    categorical = categorical or {}
    levels = tuple(
        tuple(str(i) for i in range(categorical[j])) if j in categorical else None
        for j in range(m)
    )
    c = n_classes if n_classes is not None else max(int(y.max()) + 1, 2)
    return Dataset(X, y, Schema(names, levels, tuple(str(i) for i in range(c))))


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _sorted_levels(values: set[str]) -> list[str]:
    if all(_is_number(v) for v in values):
        return sorted(values, key=lambda v: (float(v), v))
    return sorted(values)


def read_csv(path, label: str, schema_path=None) -> Dataset:
    """Load a CSV with a header row; ``label`` names the class column.

    Columns are numeric when every value parses as a number and categorical
    otherwise.  A JSON schema file ``{"column": "numeric"|"categorical"}``
    overrides the inference per column.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    if label not in header:
        raise SchemaError(f"label column {label!r} not found in {path}")
    if not body:
        raise SchemaError(f"{path}: no data rows")
    for i, r in enumerate(body):
        if len(r) != len(header):
            raise SchemaError(f"{path}: row {i + 2} has {len(r)} fields, expected {len(header)}")
    overrides = {}
    if schema_path is not None:
        overrides = json.loads(Path(schema_path).read_text())
        unknown = set(overrides) - set(header)
        if unknown:
            raise SchemaError(f"schema names unknown columns: {sorted(unknown)}")
    li = header.index(label)
    cols = list(zip(*body))
    names, levels, data = [], [], []
    for j, name in enumerate(header):
        if j == li:
            continue
        raw = cols[j]
        if any(v.strip() == "" for v in raw):
            raise SchemaError(f"column {name!r} has missing values")
        kind = overrides.get(name)
        if kind is None:
            kind = "numeric" if all(_is_number(v) for v in raw) else "categorical"
        if kind == "numeric":
            try:
                data.append(np.array([float(v) for v in raw]))
            except ValueError as e:
                raise SchemaError(f"column {name!r} declared numeric: {e}") from None
            levels.append(None)
        elif kind == "categorical":
            lv = _sorted_levels(set(raw))
            code = {v: i for i, v in enumerate(lv)}
            data.append(np.array([code[v] for v in raw], dtype=np.float64))
            levels.append(tuple(lv))
        else:
            raise SchemaError(f"unknown column type {kind!r} for {name!r}")
        names.append(name)
    if not names:
        raise SchemaError(f"{path}: no attribute columns besides the label")
    classes = _sorted_levels(set(cols[li]))
    if len(classes) < 2:
        raise SchemaError(f"label column {label!r} has fewer than two classes")
    ccode = {v: i for i, v in enumerate(classes)}
    y = np.array([ccode[v] for v in cols[li]], dtype=np.int64)
    return Dataset(np.column_stack(data), y, Schema(tuple(names), tuple(levels), tuple(classes)))


def write_csv(data: Dataset, path, label: str = "class") -> None:
    """Write in the format :func:`read_csv` reads; floats use shortest round-trip repr."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*data.names, label])
        cls = data.schema.class_names
        for i in range(data.n_objects):
            row = []
            for j, lv in enumerate(data.schema.levels):
                v = data.matrix[i, j]
                row.append(repr(float(v)) if lv is None else lv[int(v)])
            row.append(cls[data.labels[i]])
            w.writerow(row)
