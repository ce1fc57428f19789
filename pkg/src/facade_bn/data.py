"""Categorical schemas, datasets and contingency tables."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyDataset,
    InvalidLevel,
    MissingValue,
    SchemaMismatch,
    UnknownVariable,
)

logger = logging.getLogger(__name__)

MISSING_TOKENS = frozenset({"", "NA", "NaN", "nan", "null"})


@dataclass(frozen=True)
class VariableSpec:
    name: str
    levels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.name:
            raise ValueError("variable name must be non-empty")
        if len(self.levels) < 2:
            raise ValueError(f"variable {self.name!r} needs at least 2 levels")
        if len(set(self.levels)) != len(self.levels):
            raise ValueError(f"variable {self.name!r} has duplicate level codes")

    @property
    def cardinality(self) -> int:
        return len(self.levels)

    def index(self, level: str) -> int:
        return self.levels.index(level)


@dataclass(frozen=True)
class Schema:
    variables: tuple[VariableSpec, ...]
    _by_name: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if not self.variables:
            raise ValueError("schema needs at least one variable")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique within a schema")
        object.__setattr__(self, "_by_name", {n: i for i, n in enumerate(names)})

    @classmethod
    def from_dict(cls, spec: Mapping[str, Sequence[str]]) -> "Schema":
        return cls(tuple(VariableSpec(name, tuple(levels)) for name, levels in spec.items()))

    def to_dict(self) -> dict[str, list[str]]:
        return {v.name: list(v.levels) for v in self.variables}

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    def __contains__(self, name) -> bool:
        return name in self._by_name

    def __len__(self) -> int:
        return len(self.variables)

    def position(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownVariable(f"unknown variable {name!r}") from None

    def variable(self, name: str) -> VariableSpec:
        return self.variables[self.position(name)]

    def cardinality(self, name: str) -> int:
        return self.variable(name).cardinality

    def state_space_size(self) -> int:
        return int(np.prod(self.cardinalities, dtype=np.int64))


def default_facade_schema() -> Schema:
    """The ten three-level house-front variables in their canonical order."""
    return Schema.from_dict(
        {
            "TR": ["TR_S", "TR_M", "TR_N"],
            "MD": ["MD_S", "MD_M", "MD_N"],
            "CE": ["C_B", "C_E", "C_C"],
            "B": ["B_S", "B_N", "B_W"],
            "T": ["T_S", "T_N", "T_W"],
            "C": ["C_S", "C_N", "C_W"],
            "DC": ["DC_FR", "DC_CN", "DC_HY"],
            "DO": ["DO_FR", "DO_CN", "DO_HY"],
            "PL": ["PL_FR", "PL_CN", "PL_HY"],
            "RF": ["RF_FR", "RF_CN", "RF_HY"],
        }
    )


class Dataset:
    """Complete categorical observations, stored as level indices in schema order.

    ``codes[i, j]`` is the index of row ``i``'s level within ``schema.variables[j]``.
    The array is read-only.
    """

    def __init__(self, schema: Schema, codes, warnings: Iterable[str] = ()):
        codes = np.array(codes, dtype=np.int64, copy=True).reshape(-1, len(schema))
        cards = np.asarray(schema.cardinalities)
        if codes.size and ((codes < 0).any() or (codes >= cards).any()):
            raise ValueError("level index out of range for schema")
        codes.setflags(write=False)
        self.schema = schema
        self.codes = codes
        self.warnings = tuple(warnings)

    @classmethod
    def from_rows(cls, schema: Schema, rows: Iterable[Sequence[str]]) -> "Dataset":
        """Build from rows of level codes given in schema order."""
        codes = []
        for i, row in enumerate(rows):
            if len(row) != len(schema):
                raise SchemaMismatch(f"row {i} has {len(row)} cells, expected {len(schema)}")
            encoded = []
            for var, value in zip(schema.variables, row):
                try:
                    encoded.append(var.index(value))
                except ValueError:
                    raise InvalidLevel(i, var.name, value) from None
            codes.append(encoded)
        return cls(schema, np.array(codes, dtype=np.int64).reshape(-1, len(schema)))

    @property
    def n(self) -> int:
        return self.codes.shape[0]

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.schema == other.schema and np.array_equal(self.codes, other.codes)

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, variables={list(self.schema.names)})"

    @property
    def rows(self) -> list[tuple[str, ...]]:
        levels = [v.levels for v in self.schema.variables]
        return [tuple(levels[j][c] for j, c in enumerate(row)) for row in self.codes.tolist()]

    def column(self, name: str) -> np.ndarray:
        return self.codes[:, self.schema.position(name)]

    def require_rows(self) -> None:
        if self.n < 1:
            raise EmptyDataset("dataset has no rows")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.schema.names)
        writer.writerows(self.rows)
        return buf.getvalue()


def load_dataset(source: str, schema: Schema | None = None, missing_policy: str = "reject") -> Dataset:
    """Parse CSV text into a :class:`Dataset`.

    Columns are reordered to schema order and columns the schema does not
    declare are ignored (with a warning). ``missing_policy`` is ``"reject"``
    (raise :class:`MissingValue`) or ``"drop_row"``; missing cells are never
    imputed. Row numbers in errors are 1-based data-row positions.
    """
    if schema is None:
        schema = default_facade_schema()
    if missing_policy not in ("reject", "drop_row"):
        raise ValueError(f"unknown missing_policy {missing_policy!r}")

    reader = csv.reader(io.StringIO(source))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise SchemaMismatch("CSV source has no header row") from None
    if header and header[0].startswith("﻿"):
        header[0] = header[0][1:]

    absent = [name for name in schema.names if name not in header]
    if absent:
        raise SchemaMismatch(f"header is missing schema variables: {absent}")
    if len(set(header)) != len(header):
        raise SchemaMismatch("header has duplicate column names")

    warnings = []
    extra = [h for h in header if h not in schema]
    if extra:
        msg = f"ignoring columns not in schema: {extra}"
        warnings.append(msg)
        logger.warning(msg)

    columns = [header.index(name) for name in schema.names]
    codes = []
    dropped = 0
    for row_number, record in enumerate(reader, start=1):
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) != len(header):
            raise SchemaMismatch(f"row {row_number} has {len(record)} cells, header has {len(header)}")
        encoded = []
        missing_column = None
        for var, col in zip(schema.variables, columns):
            value = record[col].strip()
            if value in MISSING_TOKENS:
                missing_column = var.name
                break
            try:
                encoded.append(var.index(value))
            except ValueError:
                raise InvalidLevel(row_number, var.name, value) from None
        if missing_column is not None:
            if missing_policy == "reject":
                raise MissingValue(row_number, missing_column)
            dropped += 1
            continue
        codes.append(encoded)

    if dropped:
        msg = f"dropped {dropped} rows with missing cells"
        warnings.append(msg)
        logger.warning(msg)
    if not codes:
        raise EmptyDataset("no complete observation rows")
    return Dataset(schema, np.array(codes, dtype=np.int64), warnings)


def read_dataset(path, schema: Schema | None = None, missing_policy: str = "reject") -> Dataset:
    with open(path, encoding="utf-8", newline="") as fh:
        return load_dataset(fh.read(), schema, missing_policy)


@dataclass(frozen=True)
class CountTable:
    axes: tuple[str, ...]
    given: Mapping[str, str]
    counts: np.ndarray
    total: int


def _encode_assignment(schema: Schema, assignment: Mapping[str, str]) -> dict[int, int]:
    encoded = {}
    for name, level in assignment.items():
        var = schema.variable(name)
        try:
            encoded[schema.position(name)] = var.index(level)
        except ValueError:
            raise InvalidLevel(None, name, level) from None
    return encoded


def contingency_table(data: Dataset, axes: Sequence[str], given: Mapping[str, str] | None = None) -> CountTable:
    """Cross-tabulate ``axes`` over the rows matching the ``given`` assignment."""
    given = dict(given or {})
    axes = tuple(axes)
    if not axes:
        raise ValueError("at least one axis is required")
    if len(set(axes)) != len(axes):
        raise ValueError("axes must be distinct")
    overlap = set(axes) & set(given)
    if overlap:
        raise ValueError(f"axes and conditioning variables overlap: {sorted(overlap)}")

    schema = data.schema
    positions = [schema.position(a) for a in axes]
    mask = np.ones(data.n, dtype=bool)
    for pos, level in _encode_assignment(schema, given).items():
        mask &= data.codes[:, pos] == level

    shape = tuple(schema.cardinalities[p] for p in positions)
    selected = data.codes[mask][:, positions]
    flat = np.ravel_multi_index(selected.T, shape) if len(selected) else np.empty(0, dtype=np.int64)
    counts = np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape)
    counts.setflags(write=False)
    return CountTable(axes, given, counts, int(mask.sum()))
