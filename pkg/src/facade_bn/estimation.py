"""Maximum-likelihood CPTs and decomposable network scores."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.special import gammaln

from .data import Dataset, Schema
from .errors import DomainError, SchemaMismatch
from .graph import Dag


def family_counts(dag: Dag, data: Dataset, node: str) -> np.ndarray:
    """Counts of ``node`` levels per parent configuration, shape ``(q, r)``.

    Parent configurations are enumerated in C order over ``dag.parents(node)``,
    so the last parent varies fastest.
    """
    schema = data.schema
    parents = dag.parents(node)
    r = schema.cardinality(node)
    child = data.column(node)
    if parents:
        shape = tuple(schema.cardinality(p) for p in parents)
        config = np.ravel_multi_index(tuple(data.column(p) for p in parents), shape)
        q = int(np.prod(shape))
    else:
        config = np.zeros(data.n, dtype=np.int64)
        q = 1
    flat = np.bincount(config * r + child, minlength=q * r)
    return flat.reshape(q, r)


def parent_configurations(schema: Schema, parents) -> list[tuple[str, ...]]:
    return list(itertools.product(*(schema.variable(p).levels for p in parents)))


@dataclass(frozen=True)
class Cpt:
    node: str
    parents: tuple[str, ...]
    table: np.ndarray
    support: np.ndarray

    @property
    def unsupported(self) -> np.ndarray:
        return self.support == 0

    def row(self, config: int) -> np.ndarray:
        return self.table[config]


@dataclass(frozen=True)
class FittedNetwork:
    dag: Dag
    schema: Schema
    cpts: Mapping[str, Cpt]
    n: int

    def config_index(self, node: str, assignment: Mapping[str, str]) -> int:
        parents = self.cpts[node].parents
        if not parents:
            return 0
        idx = tuple(self.schema.variable(p).index(assignment[p]) for p in parents)
        shape = tuple(self.schema.cardinality(p) for p in parents)
        return int(np.ravel_multi_index(idx, shape))

    def to_dict(self) -> dict:
        cpts = {}
        for node in self.dag.nodes:
            cpt = self.cpts[node]
            cpts[node] = {
                "parents": list(cpt.parents),
                "levels": list(self.schema.variable(node).levels),
                "parent_config_order": [list(c) for c in parent_configurations(self.schema, cpt.parents)],
                "rows": cpt.table.tolist(),
                "support": cpt.support.tolist(),
            }
        return {
            "model_string": self.dag.model_string(),
            "n": self.n,
            "schema": self.schema.to_dict(),
            "cpts": cpts,
        }

    @classmethod
    def from_dict(cls, payload: Mapping, schema: Schema | None = None) -> "FittedNetwork":
        from .graph import parse_model_string

        if schema is None:
            schema = Schema.from_dict(payload["schema"])
        dag = parse_model_string(payload["model_string"], schema)
        cpts = {}
        for node in dag.nodes:
            entry = payload["cpts"][node]
            parents = tuple(entry["parents"])
            if set(parents) != set(dag.parents(node)):
                raise SchemaMismatch(f"CPT parents for {node} disagree with the model string")
            if parents != dag.parents(node):
                raise SchemaMismatch(f"CPT parents for {node} must be listed in schema order")
            table = np.asarray(entry["rows"], dtype=float)
            q = int(np.prod([schema.cardinality(p) for p in parents], dtype=np.int64))
            if table.shape != (q, schema.cardinality(node)):
                raise SchemaMismatch(f"CPT for {node} has shape {table.shape}")
            if (table < 0).any() or not np.allclose(table.sum(axis=1), 1.0, atol=1e-9):
                raise SchemaMismatch(f"CPT rows for {node} are not probability vectors")
            support = np.asarray(entry.get("support", [1] * q), dtype=np.int64)
            cpts[node] = Cpt(node, parents, table, support)
        return cls(dag, schema, cpts, int(payload.get("n", 0)))


def _check_covers(dag: Dag, data: Dataset) -> None:
    missing = [n for n in dag.nodes if n not in data.schema]
    if missing:
        raise SchemaMismatch(f"dataset lacks DAG nodes {missing}")


def fit_mle(dag: Dag, data: Dataset) -> FittedNetwork:
    """Relative-frequency CPTs.

    Parent configurations never observed are marked unsupported (support 0)
    and hold a uniform placeholder row.
    """
    _check_covers(dag, data)
    data.require_rows()
    cpts = {}
    for node in dag.nodes:
        counts = family_counts(dag, data, node)
        support = counts.sum(axis=1)
        table = np.full(counts.shape, 1.0 / counts.shape[1])
        seen = support > 0
        table[seen] = counts[seen] / support[seen, None]
        table.setflags(write=False)
        support.setflags(write=False)
        cpts[node] = Cpt(node, dag.parents(node), table, support)
    return FittedNetwork(dag, data.schema, cpts, data.n)


def _node_loglik(counts: np.ndarray) -> float:
    totals = counts.sum(axis=1, keepdims=True)
    nz = counts > 0
    return float(np.sum(counts[nz] * np.log((counts / np.where(totals > 0, totals, 1))[nz])))


def node_param_count(dag: Dag, schema: Schema, node: str) -> int:
    q = 1
    for p in dag.parents(node):
        q *= schema.cardinality(p)
    return (schema.cardinality(node) - 1) * q


def param_count(dag: Dag, schema: Schema) -> int:
    """Free parameters: sum over nodes of (r - 1) * q."""
    return sum(node_param_count(dag, schema, n) for n in dag.nodes)


@dataclass(frozen=True)
class ScoreReport:
    score_type: str
    per_node: dict[str, float]
    total: float
    d: int
    n: int
    iss: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "score_type": self.score_type,
            "total": self.total,
            "per_node": dict(self.per_node),
            "d": self.d,
            "n": self.n,
        }
        if self.iss is not None:
            out["iss"] = self.iss
        return out


def _report(score_type, per_node, dag, data, iss=None) -> ScoreReport:
    total = math.fsum(per_node.values())
    return ScoreReport(score_type, per_node, total, param_count(dag, data.schema), data.n, iss)


def loglik_score(dag: Dag, data: Dataset) -> ScoreReport:
    _check_covers(dag, data)
    data.require_rows()
    per_node = {n: _node_loglik(family_counts(dag, data, n)) for n in dag.nodes}
    return _report("loglik", per_node, dag, data)


def log_likelihood(dag: Dag, data: Dataset) -> float:
    """Natural-log likelihood of ``data`` under its own MLE fit."""
    return loglik_score(dag, data).total


def bic_score(dag: Dag, data: Dataset) -> ScoreReport:
    """``loglik - d/2 * ln(n)`` per node; higher is better."""
    _check_covers(dag, data)
    data.require_rows()
    log_n = math.log(data.n)
    per_node = {}
    for node in dag.nodes:
        ll = _node_loglik(family_counts(dag, data, node))
        per_node[node] = ll - 0.5 * node_param_count(dag, data.schema, node) * log_n
    return _report("bic", per_node, dag, data)


def bdeu_score(dag: Dag, data: Dataset, iss: float = 1.0) -> ScoreReport:
    """Log marginal likelihood under the uniform BDe prior with sample size ``iss``."""
    if not iss > 0:
        raise DomainError("imaginary sample size must be positive")
    _check_covers(dag, data)
    data.require_rows()
    per_node = {}
    for node in dag.nodes:
        counts = family_counts(dag, data, node)
        q, r = counts.shape
        a_config = iss / q
        a_cell = iss / (q * r)
        n_config = counts.sum(axis=1)
        per_node[node] = float(
            np.sum(gammaln(a_config) - gammaln(a_config + n_config))
            + np.sum(gammaln(a_cell + counts) - gammaln(a_cell))
        )
    return _report("bdeu", per_node, dag, data, iss)


def score(dag: Dag, data: Dataset, score_type: str = "bic", iss: float = 1.0) -> ScoreReport:
    if score_type == "bic":
        return bic_score(dag, data)
    if score_type == "bdeu":
        return bdeu_score(dag, data, iss)
    if score_type == "loglik":
        return loglik_score(dag, data)
    raise ValueError(f"unknown score type {score_type!r}")


@dataclass(frozen=True)
class HeldOutLikelihood:
    value: float
    zero_probability_rows: tuple[int, ...]
    unsupported_rows: tuple[int, ...]


def evaluate_log_likelihood(fitted: FittedNetwork, data: Dataset) -> HeldOutLikelihood:
    """Log-likelihood of arbitrary rows under a fitted network.

    Rows landing on an unsupported parent configuration contribute 0 and are
    listed; rows with a zero-probability cell make the value ``-inf`` and are
    listed as well.
    """
    if data.schema != fitted.schema:
        raise SchemaMismatch("dataset schema differs from the fitted network's")
    total = np.zeros(data.n)
    unsupported = np.zeros(data.n, dtype=bool)
    for node in fitted.dag.nodes:
        cpt = fitted.cpts[node]
        if cpt.parents:
            shape = tuple(fitted.schema.cardinality(p) for p in cpt.parents)
            config = np.ravel_multi_index(tuple(data.column(p) for p in cpt.parents), shape)
        else:
            config = np.zeros(data.n, dtype=np.int64)
        probs = cpt.table[config, data.column(node)]
        off = cpt.unsupported[config]
        unsupported |= off
        with np.errstate(divide="ignore"):
            total += np.where(off, 0.0, np.log(probs))
    zero = np.flatnonzero(np.isneginf(total))
    return HeldOutLikelihood(
        float(total.sum()), tuple(zero.tolist()), tuple(np.flatnonzero(unsupported).tolist())
    )
