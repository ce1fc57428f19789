import numpy as np
import pytest

from facade_bn.data import Dataset, Schema
from facade_bn.diagnostics import diagnose, diagnostics_report
from facade_bn.errors import DomainError, NoData
from facade_bn.graph import Dag, parse_model_string
from facade_bn.inference import forward_sample
from facade_bn.mcmc import ChainSet, CoefficientId, posterior_cell_means, sample_posterior

from .conftest import random_network

BIN = Schema.from_dict({"A": ["a", "b"]})


def test_conjugate_binary_mean():
    data = Dataset.from_rows(BIN, [["a"], ["a"], ["a"], ["b"]])
    sets = sample_posterior(Dag.empty(BIN), data, prior_iss=2.0, seed=1, cells=True)
    diag = diagnose(sets[CoefficientId("A", "A[a]")].chains)
    assert abs(diag.mean - 4 / 6) <= 3 * diag.mcse


def test_determinism_and_chain_independence():
    data = Dataset.from_rows(BIN, [["a"], ["b"], ["a"]])
    kw = dict(prior_iss=1.0, iters=400, warmup=100, seed=9)
    first = sample_posterior(Dag.empty(BIN), data, chains=2, **kw)
    second = sample_posterior(Dag.empty(BIN), data, chains=2, **kw)
    more = sample_posterior(Dag.empty(BIN), data, chains=3, **kw)
    cid = CoefficientId("A", "A")
    assert np.array_equal(first[cid].chains, second[cid].chains)
    assert np.array_equal(first[cid].chains, more[cid].chains[:2])


def test_coefficient_labels():
    schema = Schema.from_dict({"P": ["p0", "p1", "p2"], "Q": ["q0", "q1"], "C": ["c0", "c1", "c2"]})
    rng = np.random.default_rng(0)
    data = Dataset(schema, np.column_stack([rng.integers(0, 3, 90), rng.integers(0, 2, 90), rng.integers(0, 3, 90)]))
    dag = parse_model_string("[P][Q][C|P:Q]", schema)
    sets = sample_posterior(dag, data, iters=300, warmup=100, seed=1, cells=True)
    labels = {cid.label for cid in sets}
    assert {"P", "Q", "C.P", "C.Q"} <= labels
    assert "C[c0|P=p0,Q=q1]" in labels
    assert all(cs.chains.shape == (4, 200) for cs in sets.values())
    assert all(cs.warmup_dropped == 100 for cs in sets.values())


def test_bad_arguments():
    data = Dataset.from_rows(BIN, [["a"]])
    with pytest.raises(DomainError):
        sample_posterior(Dag.empty(BIN), data, prior_iss=0.0)
    with pytest.raises(DomainError):
        sample_posterior(Dag.empty(BIN), data, chains=1)
    with pytest.raises(DomainError):
        sample_posterior(Dag.empty(BIN), data, iters=100, warmup=100)
    empty = Dataset(BIN, np.zeros((0, 1), dtype=int))
    with pytest.raises(NoData):
        sample_posterior(Dag.empty(BIN), empty)


def test_chain_set_requires_two_chains():
    with pytest.raises(ValueError):
        ChainSet(CoefficientId("A", "A"), np.zeros((1, 200)), 0, 0)


def test_short_run_fails_ess_threshold():
    rng = np.random.default_rng(3)
    net = random_network(rng, n_nodes=3, concentration=3.0)
    data = forward_sample(net, 300, seed=3)
    sets = sample_posterior(net.dag, data, iters=200, warmup=50, seed=2)
    report = diagnostics_report(sets)
    assert any(not d.passed and any("ess" in f for f in d.failures) for d in report.values())


def test_closed_form_means_sum_to_one():
    rng = np.random.default_rng(4)
    net = random_network(rng, n_nodes=3)
    data = forward_sample(net, 100, seed=1)
    means = posterior_cell_means(net.dag, data, 1.0)
    for node in net.dag.nodes:
        if not net.dag.parents(node):
            total = sum(v for k, v in means.items() if k.startswith(f"{node}["))
            assert total == pytest.approx(1.0)
