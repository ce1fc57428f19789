"""Discrete Bayesian networks over categorical house-front data."""

__version__ = "0.1.0"

from .data import (
    CountTable,
    Dataset,
    Schema,
    VariableSpec,
    contingency_table,
    default_facade_schema,
    load_dataset,
    read_dataset,
)
from .diagnostics import Diagnostics, acf, diagnostics_report, ess, mcse, psrf
from .estimation import (
    Cpt,
    FittedNetwork,
    ScoreReport,
    bdeu_score,
    bic_score,
    fit_mle,
    log_likelihood,
    param_count,
)
from .graph import Dag, DagConstraints, check_constraints, parse_model_string, random_dag, to_model_string
from .independence import ArcStrengthReport, CITestResult, arc_strength, mi_test, x2_test
from .inference import Posterior, forward_sample, joint_probability, query
from .mcmc import ChainSet, CoefficientId, sample_posterior
from .search import ScoredModel, SearchResult, generate_candidates, score_networks, top_networks
from .special import chi2_sf

__all__ = [
    "ArcStrengthReport",
    "CITestResult",
    "ChainSet",
    "CoefficientId",
    "CountTable",
    "Cpt",
    "Dag",
    "DagConstraints",
    "Dataset",
    "Diagnostics",
    "FittedNetwork",
    "Posterior",
    "Schema",
    "ScoreReport",
    "ScoredModel",
    "SearchResult",
    "VariableSpec",
    "acf",
    "arc_strength",
    "bdeu_score",
    "bic_score",
    "check_constraints",
    "chi2_sf",
    "contingency_table",
    "default_facade_schema",
    "diagnostics_report",
    "ess",
    "fit_mle",
    "forward_sample",
    "generate_candidates",
    "joint_probability",
    "load_dataset",
    "log_likelihood",
    "mcse",
    "mi_test",
    "param_count",
    "parse_model_string",
    "psrf",
    "query",
    "random_dag",
    "read_dataset",
    "sample_posterior",
    "score_networks",
    "to_model_string",
    "top_networks",
    "x2_test",
]
