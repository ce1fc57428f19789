"""Random constrained structure search with top-k selection."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .data import Dataset, Schema
from .errors import GenerationExhausted
from .estimation import score
from .graph import Dag, DagConstraints, check_constraints, random_dag, to_model_string


@dataclass(frozen=True)
class ScoredModel:
    model_string: str
    score: float
    rank: int

    def to_dict(self) -> dict:
        return {"rank": self.rank, "model_string": self.model_string, "score": self.score}


@dataclass(frozen=True)
class SearchResult:
    pool_size: int
    constraints: DagConstraints
    seed: int
    candidates_satisfying: int
    top: tuple[ScoredModel, ...]
    pool: tuple[tuple[str, float], ...] = ()
    score_type: str = "bic"

    def to_dict(self) -> dict:
        return {
            "pool_size": self.pool_size,
            "constraints": self.constraints.to_dict(),
            "seed": self.seed,
            "score_type": self.score_type,
            "candidates_satisfying": self.candidates_satisfying,
            "top": [m.to_dict() for m in self.top],
        }


def candidate_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Per-candidate seed stream, independent of how many candidates are drawn."""
    return np.random.SeedSequence(seed, spawn_key=(index,))


def generate_candidates(
    schema: Schema,
    constraints: DagConstraints | None = None,
    count: int = 200,
    seed: int = 0,
    arc_prob: float = 0.25,
    max_draws: int | None = None,
) -> list[Dag]:
    """Draw ``count`` distinct constraint-satisfying DAGs.

    Candidate ``i`` is drawn from its own seed stream; duplicates (by
    canonical model string) are skipped and the next stream fills the gap.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    constraints = constraints or DagConstraints()
    max_draws = max_draws if max_draws is not None else 50 * count + 1000
    dags, seen = [], set()
    index = 0
    while len(dags) < count:
        if index >= max_draws:
            raise GenerationExhausted(
                f"only {len(dags)} distinct candidates after {max_draws} draws"
            )
        rng = np.random.default_rng(candidate_seed(seed, index))
        index += 1
        dag = random_dag(schema, constraints, rng, arc_prob=arc_prob)
        key = to_model_string(dag)
        if key in seen:
            continue
        seen.add(key)
        dags.append(dag)
    return dags


def score_networks(
    dags: Sequence[Dag],
    data: Dataset,
    score_type: str = "bic",
    iss: float = 1.0,
    workers: int = 1,
) -> list[tuple[str, float]]:
    """``(model_string, score)`` per input DAG, in input order."""
    if not dags:
        raise ValueError("no networks to score")

    def one(dag):
        return to_model_string(dag), score(dag, data, score_type, iss).total

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, dags))
    return [one(d) for d in dags]


def top_networks(scored: Iterable[tuple[str, float]], k: int = 5) -> list[ScoredModel]:
    """The ``k`` best entries by descending score; ties go to the smaller name."""
    if k < 1:
        raise ValueError("k must be at least 1")
    ranked = sorted(scored, key=lambda item: (-item[1], item[0]))
    return [ScoredModel(name, float(s), i + 1) for i, (name, s) in enumerate(ranked[:k])]


def search(
    data: Dataset,
    constraints: DagConstraints | None = None,
    count: int = 200,
    k: int = 5,
    seed: int = 0,
    score_type: str = "bic",
    iss: float = 1.0,
    arc_prob: float = 0.25,
    extra: Sequence[Dag] = (),
    workers: int = 1,
) -> SearchResult:
    """Generate, score and rank a candidate pool.

    ``extra`` DAGs are appended to the pool (deduplicated) before scoring,
    which lets callers plant a known structure among the random draws.
    """
    constraints = constraints or DagConstraints()
    dags = generate_candidates(data.schema, constraints, count, seed, arc_prob)
    known = {to_model_string(d) for d in dags}
    for dag in extra:
        if to_model_string(dag) not in known:
            known.add(to_model_string(dag))
            dags.append(dag)
    scored = score_networks(dags, data, score_type, iss, workers)
    satisfying = sum(1 for d in dags if check_constraints(d, constraints)[0])
    return SearchResult(
        pool_size=len(dags),
        constraints=constraints,
        seed=seed,
        candidates_satisfying=satisfying,
        top=tuple(top_networks(scored, k)),
        pool=tuple(scored),
        score_type=score_type,
    )
