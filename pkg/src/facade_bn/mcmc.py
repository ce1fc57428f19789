"""Posterior sampling of CPT parameters under Dirichlet priors.

Each CPT row is an independent Dirichlet-multinomial posterior. Rows are
moved with random-walk Metropolis in additive log-ratio coordinates
(last level as reference), one proposal per row per iteration. Step sizes
adapt per row during warmup toward a 30% acceptance rate and are frozen
afterwards.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .data import Dataset
from .errors import DomainError, NoData
from .estimation import family_counts, parent_configurations
from .graph import Dag

logger = logging.getLogger(__name__)

TARGET_ACCEPTANCE = 0.3
ADAPT_BATCH = 50


@dataclass(frozen=True)
class CoefficientId:
    child: str
    label: str

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class ChainSet:
    coefficient: CoefficientId
    chains: np.ndarray
    warmup_dropped: int
    seed: int

    def __post_init__(self):
        chains = np.asarray(self.chains, dtype=float)
        if chains.ndim != 2 or chains.shape[0] < 2:
            raise ValueError("a ChainSet needs at least two chains")
        chains.setflags(write=False)
        object.__setattr__(self, "chains", chains)


def chain_seed(seed: int, chain: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(chain,))


class _RowBlock:
    """All CPT rows sharing one child cardinality, updated together."""

    def __init__(self, counts: np.ndarray, alpha: np.ndarray):
        self.weights = counts + alpha[:, None]
        self.rows, self.r = counts.shape

    def log_theta(self, eta: np.ndarray) -> np.ndarray:
        full = np.concatenate([eta, np.zeros((eta.shape[0], 1))], axis=1)
        return full - logsumexp(full, axis=1, keepdims=True)

    def log_target(self, eta: np.ndarray) -> np.ndarray:
        # Dirichlet kernel in log-ratio coordinates, Jacobian included.
        return np.sum(self.weights * self.log_theta(eta), axis=1)


def _run_chain(blocks, rng, iters, warmup):
    states, log_p, steps = [], [], []
    for block in blocks:
        theta0 = rng.dirichlet(np.ones(block.r), size=block.rows)
        theta0 = np.clip(theta0, 1e-12, None)
        eta = np.log(theta0[:, :-1]) - np.log(theta0[:, -1:])
        states.append(eta)
        log_p.append(block.log_target(eta))
        steps.append(np.full(block.rows, 2.4 / np.sqrt(block.r - 1)))

    traces = [np.empty((iters - warmup, b.rows, b.r)) for b in blocks]
    accepted = [np.zeros(b.rows) for b in blocks]
    post_accepted = [np.zeros(b.rows) for b in blocks]
    for it in range(iters):
        for i, block in enumerate(blocks):
            proposal = states[i] + steps[i][:, None] * rng.standard_normal(states[i].shape)
            lp = block.log_target(proposal)
            accept = np.log(rng.random(block.rows)) < lp - log_p[i]
            states[i] = np.where(accept[:, None], proposal, states[i])
            log_p[i] = np.where(accept, lp, log_p[i])
            if it < warmup:
                accepted[i] += accept
                if (it + 1) % ADAPT_BATCH == 0:
                    rate = accepted[i] / ADAPT_BATCH
                    steps[i] = steps[i] * np.exp(2.0 * (rate - TARGET_ACCEPTANCE))
                    accepted[i][:] = 0
            else:
                post_accepted[i] += accept
                traces[i][it - warmup] = np.exp(block.log_theta(states[i]))
    kept = iters - warmup
    rates = [a / kept for a in post_accepted]
    return traces, rates


def _logit(p):
    return np.log(p) - np.log1p(-p)


def sample_posterior(
    dag: Dag,
    data: Dataset,
    prior_iss: float = 1.0,
    chains: int = 4,
    iters: int = 6000,
    warmup: int = 1000,
    seed: int = 0,
    cells: bool = False,
) -> dict[CoefficientId, ChainSet]:
    """Sample CPT posteriors and return coefficient traces.

    Each CPT cell gets a Dirichlet pseudo-count ``prior_iss / (r * q)``.
    ``iters`` counts warmup, so each chain keeps ``iters - warmup`` draws.

    For every arc ``parent -> child`` the coefficient ``child.parent`` is the
    log-odds of the child's most frequent level at the parent's last level
    minus that at its first level, other parents held at their most frequent
    joint configuration. Parentless nodes report ``child``, the log-odds of
    their most frequent level. With ``cells=True`` every CPT cell is also
    returned, labelled ``child[level|parent=level,...]``.
    """
    if data.n < 1:
        raise NoData("cannot sample a posterior without observations")
    if not prior_iss > 0:
        raise DomainError("prior imaginary sample size must be positive")
    if chains < 2:
        raise DomainError("at least two chains are required")
    if not 0 <= warmup < iters:
        raise DomainError("need 0 <= warmup < iters")

    schema = data.schema
    nodes = dag.nodes
    counts = {node: family_counts(dag, data, node) for node in nodes}

    by_r: dict[int, list[str]] = {}
    for node in nodes:
        by_r.setdefault(counts[node].shape[1], []).append(node)
    blocks, where = [], {}
    for r, members in sorted(by_r.items()):
        stacked, alphas, start = [], [], 0
        for node in members:
            q = counts[node].shape[0]
            where[node] = (len(blocks), start, start + q)
            stacked.append(counts[node])
            alphas.append(np.full(q, prior_iss / (q * r)))
            start += q
        blocks.append(_RowBlock(np.vstack(stacked).astype(float), np.concatenate(alphas)))

    per_chain = []
    for c in range(chains):
        rng = np.random.default_rng(chain_seed(seed, c))
        traces, rates = _run_chain(blocks, rng, iters, warmup)
        logger.debug("chain %d acceptance %s", c, [float(r.mean()) for r in rates])
        per_chain.append(traces)

    def node_trace(node, c):
        b, lo, hi = where[node]
        return per_chain[c][b][:, lo:hi, :]

    result = {}
    for node in nodes:
        modal = int(np.argmax(counts[node].sum(axis=0)))
        parents = dag.parents(node)
        shape = tuple(schema.cardinality(p) for p in parents)
        if not parents:
            cid = CoefficientId(node, node)
            series = [_logit(node_trace(node, c)[:, 0, modal]) for c in range(chains)]
            result[cid] = ChainSet(cid, np.array(series), warmup, seed)
        for k, parent in enumerate(parents):
            j_first, j_last = _contrast_configs(dag, data, node, k, shape)
            cid = CoefficientId(node, f"{node}.{parent}")
            series = []
            for c in range(chains):
                t = node_trace(node, c)
                series.append(_logit(t[:, j_last, modal]) - _logit(t[:, j_first, modal]))
            result[cid] = ChainSet(cid, np.array(series), warmup, seed)
        if cells:
            configs = parent_configurations(schema, parents)
            levels = schema.variable(node).levels
            for j, config in enumerate(configs):
                cond = ",".join(f"{p}={v}" for p, v in zip(parents, config))
                for lv_i, lv in enumerate(levels):
                    label = f"{node}[{lv}|{cond}]" if parents else f"{node}[{lv}]"
                    cid = CoefficientId(node, label)
                    series = [node_trace(node, c)[:, j, lv_i] for c in range(chains)]
                    result[cid] = ChainSet(cid, np.array(series), warmup, seed)
    return result


def _contrast_configs(dag, data, node, k, shape):
    """Parent-configuration indices for parent ``k`` at its first and last level."""
    parents = dag.parents(node)
    others = [i for i in range(len(parents)) if i != k]
    base = [0] * len(parents)
    if others:
        cols = np.stack([data.column(parents[i]) for i in others], axis=1)
        combos, freq = np.unique(cols, axis=0, return_counts=True)
        modal = combos[int(np.argmax(freq))]
        for i, v in zip(others, modal):
            base[i] = int(v)
    first = list(base)
    last = list(base)
    first[k] = 0
    last[k] = shape[k] - 1
    return int(np.ravel_multi_index(first, shape)), int(np.ravel_multi_index(last, shape))


def posterior_cell_means(dag: Dag, data: Dataset, prior_iss: float = 1.0) -> dict[str, float]:
    """Closed-form Dirichlet-multinomial posterior means, keyed like cell coefficients."""
    schema = data.schema
    out = {}
    for node in dag.nodes:
        counts = family_counts(dag, data, node)
        q, r = counts.shape
        alpha = prior_iss / (q * r)
        means = (counts + alpha) / (counts.sum(axis=1, keepdims=True) + r * alpha)
        parents = dag.parents(node)
        levels = schema.variable(node).levels
        for j, config in enumerate(parent_configurations(schema, parents)):
            cond = ",".join(f"{p}={v}" for p, v in zip(parents, config))
            for i, lv in enumerate(levels):
                label = f"{node}[{lv}|{cond}]" if parents else f"{node}[{lv}]"
                out[label] = float(means[j, i])
    return out
