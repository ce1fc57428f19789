"""DAGs over schema variables and the bracketed model-string grammar.

A model string has one block per node, ``[node]`` or ``[node|p1:p2]``, e.g.
``[B][C][DO][PL][T][DC|B][CE|DC][RF|DC][TR|RF][MD|TR]``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .data import Schema
from .errors import (
    CycleDetected,
    DuplicateArc,
    GenerationExhausted,
    MalformedModelString,
    UnknownVariable,
)

# Misspelling of MD in a published listing; accepted only when lenient.
LENIENT_ALIASES = {"MOD": "MD"}

_BLOCK = re.compile(r"\[([^\[\]|:]+)(?:\|([^\[\]|]+))?\]")


@dataclass(frozen=True)
class Dag:
    """An immutable DAG. Mutators return new instances."""

    nodes: tuple[str, ...]
    arcs: frozenset[tuple[str, str]] = frozenset()
    _parents: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "arcs", frozenset(self.arcs))
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("duplicate node names")
        node_set = set(self.nodes)
        for u, v in self.arcs:
            if u not in node_set or v not in node_set:
                raise UnknownVariable(f"arc {u}->{v} references an unknown node")
            if u == v:
                raise CycleDetected(f"self-arc on {u}")
        parents = {n: [] for n in self.nodes}
        for u, v in self.arcs:
            parents[v].append(u)
        order = {n: i for i, n in enumerate(self.nodes)}
        object.__setattr__(
            self, "_parents", {n: tuple(sorted(ps, key=order.__getitem__)) for n, ps in parents.items()}
        )
        if _find_cycle(self.nodes, self._parents):
            raise CycleDetected("graph contains a directed cycle")

    @classmethod
    def empty(cls, schema_or_nodes) -> "Dag":
        nodes = schema_or_nodes.names if isinstance(schema_or_nodes, Schema) else schema_or_nodes
        return cls(tuple(nodes))

    def parents(self, node: str) -> tuple[str, ...]:
        """Parents of ``node`` in node (schema) order."""
        try:
            return self._parents[node]
        except KeyError:
            raise UnknownVariable(f"unknown node {node!r}") from None

    def children(self, node: str) -> tuple[str, ...]:
        return tuple(v for v in self.nodes if (node, v) in self.arcs)

    def in_degree(self, node: str) -> int:
        return len(self.parents(node))

    def out_degree(self, node: str) -> int:
        return sum(1 for u, _ in self.arcs if u == node)

    def __len__(self) -> int:
        return len(self.arcs)

    def topological_order(self) -> tuple[str, ...]:
        """Kahn's algorithm, always taking the alphabetically smallest ready node."""
        remaining = {n: set(self._parents[n]) for n in self.nodes}
        order = []
        while remaining:
            ready = sorted(n for n, ps in remaining.items() if not ps)
            node = ready[0]
            order.append(node)
            del remaining[node]
            for ps in remaining.values():
                ps.discard(node)
        return tuple(order)

    def skeleton(self) -> frozenset[frozenset[str]]:
        return frozenset(frozenset(a) for a in self.arcs)

    def set_arc(self, source: str, target: str) -> "Dag":
        for n in (source, target):
            if n not in self._parents:
                raise UnknownVariable(f"unknown node {n!r}")
        if source == target:
            raise CycleDetected(f"self-arc on {source}")
        if (source, target) in self.arcs:
            raise DuplicateArc(f"arc {source}->{target} already present")
        if self.has_path(target, source):
            raise CycleDetected(f"adding {source}->{target} would create a cycle")
        return Dag(self.nodes, self.arcs | {(source, target)})

    def drop_arc(self, source: str, target: str) -> "Dag":
        return Dag(self.nodes, self.arcs - {(source, target)})

    def has_path(self, source: str, target: str) -> bool:
        children = {n: [] for n in self.nodes}
        for u, v in self.arcs:
            children[u].append(v)
        stack, seen = [source], {source}
        while stack:
            node = stack.pop()
            if node == target:
                return True
            for c in children[node]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False

    def model_string(self) -> str:
        return to_model_string(self)

    def __str__(self) -> str:
        return to_model_string(self)


def _find_cycle(nodes, parents) -> bool:
    indeg = {n: len(parents[n]) for n in nodes}
    children = {n: [] for n in nodes}
    for v in nodes:
        for u in parents[v]:
            children[u].append(v)
    ready = [n for n in nodes if indeg[n] == 0]
    seen = 0
    while ready:
        node = ready.pop()
        seen += 1
        for c in children[node]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return seen != len(nodes)


def parse_model_string(text: str, schema: Schema, lenient: bool = False) -> Dag:
    """Parse a bracketed model string into a :class:`Dag` over ``schema``.

    Every schema variable must appear exactly once as a block head. With
    ``lenient=True`` surrounding whitespace is stripped and the ``MOD``
    alias for ``MD`` is accepted.
    """
    if lenient:
        text = "".join(text.split())
    if not text:
        raise MalformedModelString("empty model string")

    blocks = []
    pos = 0
    for match in _BLOCK.finditer(text):
        if match.start() != pos:
            raise MalformedModelString(f"unexpected text at offset {pos}: {text[pos:match.start()]!r}")
        pos = match.end()
        blocks.append((match.group(1), match.group(2)))
    if pos != len(text):
        raise MalformedModelString(f"unexpected text at offset {pos}: {text[pos:]!r}")

    def resolve(token):
        if lenient:
            token = LENIENT_ALIASES.get(token, token)
        if token not in schema:
            raise UnknownVariable(f"unknown variable {token!r} in model string")
        return token

    seen = []
    arcs = set()
    for head, parent_text in blocks:
        node = resolve(head)
        if node in seen:
            raise MalformedModelString(f"node {node!r} appears more than once")
        seen.append(node)
        if parent_text is None:
            continue
        for token in parent_text.split(":"):
            if not token:
                raise MalformedModelString(f"empty parent name in block for {node!r}")
            parent = resolve(token)
            if parent == node:
                raise CycleDetected(f"self-arc on {node}")
            if (parent, node) in arcs:
                raise MalformedModelString(f"parent {parent!r} repeated in block for {node!r}")
            arcs.add((parent, node))

    absent = [n for n in schema.names if n not in seen]
    if absent:
        raise MalformedModelString(f"model string does not mention {absent}")
    return Dag(schema.names, frozenset(arcs))


def to_model_string(dag: Dag) -> str:
    """Canonical form: topological order with alphabetical tie-breaking, sorted parents."""
    parts = []
    for node in dag.topological_order():
        ps = sorted(dag.parents(node))
        parts.append(f"[{node}|{':'.join(ps)}]" if ps else f"[{node}]")
    return "".join(parts)


@dataclass(frozen=True)
class DagConstraints:
    sink_variable: str = "CE"
    min_arcs: int = 5
    require_sink_in_degree: int = 1
    forbid_sink_out_arcs: bool = True

    def __post_init__(self):
        if self.min_arcs < 0:
            raise ValueError("min_arcs must be non-negative")
        if self.require_sink_in_degree < 0:
            raise ValueError("require_sink_in_degree must be non-negative")

    def validate_for(self, schema: Schema) -> None:
        if self.sink_variable not in schema:
            raise UnknownVariable(f"sink variable {self.sink_variable!r} not in schema")
        p = len(schema)
        if self.min_arcs > p * (p - 1) // 2 or self.require_sink_in_degree > p - 1:
            raise GenerationExhausted("constraints cannot be met on this schema")

    def to_dict(self) -> dict:
        return {
            "sink_variable": self.sink_variable,
            "min_arcs": self.min_arcs,
            "require_sink_in_degree": self.require_sink_in_degree,
            "forbid_sink_out_arcs": self.forbid_sink_out_arcs,
        }


def check_constraints(dag: Dag, constraints: DagConstraints) -> tuple[bool, list[str]]:
    """Return ``(ok, violations)``."""
    violations = []
    sink = constraints.sink_variable
    if sink not in dag.nodes:
        return False, [f"sink {sink} not in graph"]
    if dag.in_degree(sink) < constraints.require_sink_in_degree:
        violations.append(
            f"sink in-degree {dag.in_degree(sink)} < {constraints.require_sink_in_degree}"
        )
    if constraints.forbid_sink_out_arcs and dag.out_degree(sink) > 0:
        violations.append("sink emits arc")
    if len(dag.arcs) < constraints.min_arcs:
        violations.append(f"arc count {len(dag.arcs)} < {constraints.min_arcs}")
    return not violations, violations


def _draw_dag(nodes: tuple[str, ...], rng: np.random.Generator, arc_prob: float) -> Dag:
    order = [nodes[i] for i in rng.permutation(len(nodes))]
    p = len(order)
    upper = rng.random((p, p)) < arc_prob
    arcs = frozenset(
        (order[i], order[j]) for i in range(p) for j in range(i + 1, p) if upper[i, j]
    )
    return Dag(nodes, arcs)


def random_dag(
    schema: Schema,
    constraints: DagConstraints | None = None,
    seed=None,
    arc_prob: float = 0.25,
    max_tries: int = 10000,
) -> Dag:
    """Draw a random DAG that satisfies ``constraints``.

    A uniformly random node permutation fixes the topological order, each
    forward arc is kept with probability ``arc_prob``, and the draw is
    repeated until the constraints hold. ``seed`` may be an int, a
    ``SeedSequence`` or a ``Generator``.
    """
    constraints = constraints or DagConstraints()
    constraints.validate_for(schema)
    if not 0.0 <= arc_prob <= 1.0:
        raise ValueError("arc_prob must lie in [0, 1]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for _ in range(max_tries):
        dag = _draw_dag(schema.names, rng, arc_prob)
        if check_constraints(dag, constraints)[0]:
            return dag
    raise GenerationExhausted(f"no constraint-satisfying DAG in {max_tries} draws")


def dag_from_arcs(schema: Schema, arcs: Iterable[tuple[str, str]]) -> Dag:
    dag = Dag.empty(schema)
    for u, v in arcs:
        dag = dag.set_arc(u, v)
    return dag
