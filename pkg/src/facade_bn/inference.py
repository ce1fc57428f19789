"""Exact evidence queries by enumeration, and ancestral sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .data import Dataset, Schema
from .errors import (
    DomainError,
    InvalidLevel,
    UnknownVariable,
    UnsupportedConfiguration,
    ZeroProbabilityEvidence,
)
from .estimation import FittedNetwork

MAX_ENUMERATION_STATES = 5_000_000


@dataclass(frozen=True)
class Posterior:
    target: str
    distribution: dict[str, float]
    evidence_probability: float
    evidence: dict[str, str]
    degenerate: bool = False

    def mode(self) -> str:
        return max(self.distribution, key=self.distribution.get)

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "evidence": dict(self.evidence),
            "distribution": dict(self.distribution),
            "evidence_probability": self.evidence_probability,
            "degenerate": self.degenerate,
        }


def _broadcast_factor(schema: Schema, axes: tuple[str, ...], values: np.ndarray) -> np.ndarray:
    """Lay ``values`` (indexed by ``axes``) out along schema positions, size 1 elsewhere."""
    positions = [schema.position(a) for a in axes]
    order = np.argsort(positions)
    values = np.transpose(values, order)
    shape = [1] * len(schema)
    for pos in positions:
        shape[pos] = schema.cardinality(schema.names[pos])
    return values.reshape(shape)


def joint_table(fitted: FittedNetwork) -> tuple[np.ndarray, np.ndarray]:
    """Full joint distribution over the schema, and a mask of states that
    pass through an unsupported (placeholder) CPT row."""
    schema = fitted.schema
    if schema.state_space_size() > MAX_ENUMERATION_STATES:
        raise DomainError(f"joint state space of {schema.state_space_size()} is too large to enumerate")
    cards = schema.cardinalities
    joint = np.ones(cards)
    placeholder = np.zeros(cards, dtype=bool)
    for node in fitted.dag.nodes:
        cpt = fitted.cpts[node]
        parent_shape = tuple(schema.cardinality(p) for p in cpt.parents)
        table = cpt.table.reshape(parent_shape + (schema.cardinality(node),))
        joint = joint * _broadcast_factor(schema, cpt.parents + (node,), table)
        if cpt.parents and cpt.unsupported.any():
            mask = cpt.unsupported.reshape(parent_shape)
            placeholder = placeholder | _broadcast_factor(schema, cpt.parents, mask)
        elif not cpt.parents and cpt.unsupported.any():
            placeholder[...] = True
    return joint, placeholder


def _check_assignment(schema: Schema, assignment: Mapping[str, str]) -> dict[str, int]:
    encoded = {}
    for name, level in assignment.items():
        var = schema.variable(name)
        if level not in var.levels:
            raise InvalidLevel(None, name, level)
        encoded[name] = var.index(level)
    return encoded


def joint_probability(fitted: FittedNetwork, assignment: Mapping[str, str], with_flag: bool = False):
    """Product of CPT entries for a full assignment.

    With ``with_flag=True`` returns ``(probability, hit_placeholder)`` where the
    flag reports that some factor came from an unsupported row.
    """
    missing = [n for n in fitted.dag.nodes if n not in assignment]
    if missing:
        raise DomainError(f"assignment does not cover {missing}")
    _check_assignment(fitted.schema, assignment)
    prob = 1.0
    flagged = False
    for node in fitted.dag.nodes:
        cpt = fitted.cpts[node]
        config = fitted.config_index(node, assignment)
        flagged |= bool(cpt.unsupported[config])
        prob *= float(cpt.table[config, fitted.schema.variable(node).index(assignment[node])])
    return (prob, flagged) if with_flag else prob


def query(fitted: FittedNetwork, target: str, evidence: Mapping[str, str] | None = None, joint=None) -> Posterior:
    """Exact ``P(target | evidence)`` by summing the enumerated joint.

    ``joint`` may carry a precomputed :func:`joint_table` result when many
    queries run against the same network.
    """
    schema = fitted.schema
    evidence = dict(evidence or {})
    if target not in schema:
        raise UnknownVariable(f"unknown variable {target!r}")
    if target in evidence:
        raise DomainError(f"target {target!r} also appears in the evidence")
    encoded = _check_assignment(schema, evidence)

    probs, placeholder = joint if joint is not None else joint_table(fitted)
    index = [slice(None)] * len(schema)
    for name, level in encoded.items():
        index[schema.position(name)] = slice(level, level + 1)
    sub = probs[tuple(index)]
    sub_placeholder = placeholder[tuple(index)]

    t = schema.position(target)
    other_axes = tuple(i for i in range(len(schema)) if i != t)
    marginal = sub.sum(axis=other_axes)
    p_evidence = float(marginal.sum())
    if p_evidence <= 0.0:
        raise ZeroProbabilityEvidence(f"evidence {evidence} has probability 0")
    dist = marginal / p_evidence
    degenerate = bool((sub_placeholder & (sub > 0)).any())
    levels = schema.variable(target).levels
    return Posterior(target, {lv: float(p) for lv, p in zip(levels, dist)}, p_evidence, evidence, degenerate)


def forward_sample(fitted: FittedNetwork, n: int, seed=None, allow_unsupported: bool = False) -> Dataset:
    """Draw ``n`` rows ancestrally, parents before children."""
    if n < 0:
        raise ValueError("n must be non-negative")
    schema = fitted.schema
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    codes = np.zeros((n, len(schema)), dtype=np.int64)
    for node in fitted.dag.topological_order():
        cpt = fitted.cpts[node]
        if cpt.parents:
            shape = tuple(schema.cardinality(p) for p in cpt.parents)
            config = np.ravel_multi_index(
                tuple(codes[:, schema.position(p)] for p in cpt.parents), shape
            )
        else:
            config = np.zeros(n, dtype=np.int64)
        if not allow_unsupported and cpt.unsupported[config].any():
            raise UnsupportedConfiguration(f"sampling reached an unsupported parent configuration of {node}")
        cum = np.cumsum(cpt.table, axis=1)[config]
        u = rng.random(n)
        level = (u[:, None] >= cum[:, :-1]).sum(axis=1)
        codes[:, schema.position(node)] = level
    return Dataset(schema, codes)
