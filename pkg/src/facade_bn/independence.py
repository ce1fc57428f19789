"""Conditional-independence tests on categorical data and per-arc strengths."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import Dataset
from .errors import DomainError
from .graph import Dag
from .special import chi2_sf

TEST_KINDS = ("mi", "x2")


@dataclass(frozen=True)
class CITestResult:
    x_var: str
    y_var: str
    given: tuple[str, ...]
    statistic: float
    df: int
    p_value: float
    kind: str

    def to_dict(self) -> dict:
        return {
            "x": self.x_var,
            "y": self.y_var,
            "given": list(self.given),
            "test": self.kind,
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
        }


def stratified_table(data: Dataset, x: str, y: str, given: Sequence[str] = ()) -> np.ndarray:
    """Counts with shape ``(strata, r_x, r_y)``; strata enumerate ``given`` in C order."""
    schema = data.schema
    rx, ry = schema.cardinality(x), schema.cardinality(y)
    if given:
        shape = tuple(schema.cardinality(z) for z in given)
        stratum = np.ravel_multi_index(tuple(data.column(z) for z in given), shape)
        k = int(np.prod(shape))
    else:
        stratum = np.zeros(data.n, dtype=np.int64)
        k = 1
    flat = (stratum * rx + data.column(x)) * ry + data.column(y)
    return np.bincount(flat, minlength=k * rx * ry).reshape(k, rx, ry)


def expected_counts(table: np.ndarray) -> np.ndarray:
    """Independence expectations row * col / stratum total (0 in empty strata)."""
    rows = table.sum(axis=2, keepdims=True)
    cols = table.sum(axis=1, keepdims=True)
    totals = table.sum(axis=(1, 2), keepdims=True)
    return np.divide(rows * cols, totals, out=np.zeros(table.shape), where=totals > 0)


def g2_statistic(table: np.ndarray) -> float:
    expected = expected_counts(table)
    mask = table > 0
    return float(2.0 * np.sum(table[mask] * np.log(table[mask] / expected[mask])))


def pearson_statistic(table: np.ndarray) -> float:
    expected = expected_counts(table)
    mask = expected > 0
    return float(np.sum((table[mask] - expected[mask]) ** 2 / expected[mask]))


def _validate(data: Dataset, x: str, y: str, given: Sequence[str]) -> tuple[str, ...]:
    given = tuple(given)
    for name in (x, y, *given):
        data.schema.position(name)
    if x == y:
        raise DomainError("x and y must differ")
    if x in given or y in given or len(set(given)) != len(given):
        raise DomainError("conditioning set must be distinct and disjoint from x and y")
    data.require_rows()
    return given


def ci_test(data: Dataset, x: str, y: str, given: Sequence[str] = (), kind: str = "mi") -> CITestResult:
    """Test ``x`` independent of ``y`` given ``given``.

    ``kind="mi"`` is the likelihood-ratio G2 statistic (2N times the
    conditional mutual information in nats); ``kind="x2"`` is Pearson's.
    Degrees of freedom count every stratum, observed or not.
    """
    if kind not in TEST_KINDS:
        raise ValueError(f"unknown test {kind!r}; expected one of {TEST_KINDS}")
    given = _validate(data, x, y, given)
    table = stratified_table(data, x, y, given)
    stat = g2_statistic(table) if kind == "mi" else pearson_statistic(table)
    stat = max(stat, 0.0)
    schema = data.schema
    df = (schema.cardinality(x) - 1) * (schema.cardinality(y) - 1)
    for z in given:
        df *= schema.cardinality(z)
    return CITestResult(x, y, given, stat, df, chi2_sf(stat, df), kind)


def mi_test(data: Dataset, x: str, y: str, given: Sequence[str] = ()) -> CITestResult:
    return ci_test(data, x, y, given, "mi")


def x2_test(data: Dataset, x: str, y: str, given: Sequence[str] = ()) -> CITestResult:
    return ci_test(data, x, y, given, "x2")


@dataclass(frozen=True)
class ArcStrengthReport:
    entries: tuple[tuple[str, str, float], ...]
    criterion: str

    def as_dict(self) -> dict[tuple[str, str], float]:
        return {(u, v): p for u, v, p in self.entries}

    def to_list(self) -> list[dict]:
        return [{"from": u, "to": v, "strength": p} for u, v, p in self.entries]


def arc_strength(dag: Dag, data: Dataset, criterion: str = "x2") -> ArcStrengthReport:
    """p-value of each arc ``u -> v`` tested given the other parents of ``v``.

    Entries follow the order of ``v`` in the DAG's node list, then ``u``.
    """
    entries = []
    for v in dag.nodes:
        parents = dag.parents(v)
        for u in parents:
            others = tuple(p for p in parents if p != u)
            result = ci_test(data, u, v, others, criterion)
            entries.append((u, v, result.p_value))
    return ArcStrengthReport(tuple(entries), criterion)
