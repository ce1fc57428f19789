"""``facade-bn`` command-line interface.

Exit codes: 0 success, 2 input/data error, 3 constraint or statistical
error, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import Schema, default_facade_schema, load_dataset
from .diagnostics import diagnose
from .errors import DataError, FacadeBNError, StatisticalError, ZeroProbabilityEvidence
from .estimation import FittedNetwork, bdeu_score, bic_score, fit_mle, score
from .graph import DagConstraints, check_constraints, parse_model_string, random_dag, to_model_string
from .independence import arc_strength, ci_test
from .inference import forward_sample, joint_table, query
from .mcmc import ChainSet, CoefficientId, sample_posterior
from .published import INITIAL_MODEL
from .search import search

EXIT_OK = 0
EXIT_DATA = 2
EXIT_STATS = 3
EXIT_USAGE = 64

DEFAULT_SEED = 1

logger = logging.getLogger(__name__)


class UsageError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(payload, out=None) -> None:
    text = json.dumps(payload, indent=2, allow_nan=True)
    (out or sys.stdout).write(text + "\n")


def _resolve_seed(value):
    if value is not None:
        return value
    env = os.environ.get("FACADE_BN_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"FACADE_BN_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None


def _schema(args) -> Schema:
    if getattr(args, "schema", None):
        try:
            return Schema.from_dict(json.loads(_read_text(args.schema)))
        except (ValueError, TypeError, AttributeError) as exc:
            raise DataError(f"invalid schema file {args.schema}: {exc}") from None
    return default_facade_schema()


def _dataset(args, schema=None):
    schema = schema or _schema(args)
    policy = "drop_row" if getattr(args, "missing", "reject") == "drop" else "reject"
    return load_dataset(_read_text(args.data), schema, policy)


def _model(args, schema):
    return parse_model_string(args.model, schema, lenient=args.lenient)


def _constraints(args) -> DagConstraints:
    return DagConstraints(sink_variable=args.sink, min_arcs=args.min_arcs)


def _parse_evidence(text):
    evidence = {}
    if not text:
        return evidence
    for item in text.split(","):
        if "=" not in item:
            raise UsageError(f"evidence item {item!r} is not VAR=LEVEL")
        name, level = item.split("=", 1)
        evidence[name.strip()] = level.strip()
    return evidence


# -- commands ---------------------------------------------------------------


def cmd_validate(args):
    data = _dataset(args)
    _emit({"n": data.n, "variables": list(data.schema.names), "warnings": list(data.warnings)})


def cmd_schema(args):
    _emit(default_facade_schema().to_dict() if not args.schema else _schema(args).to_dict())


def cmd_dag(args):
    schema = _schema(args)
    constraints = _constraints(args)
    if args.action == "random":
        seed = _resolve_seed(args.seed)
        dag = random_dag(schema, constraints, seed, arc_prob=args.arc_prob)
    else:
        if not args.text:
            raise UsageError("dag parse/print needs a model string")
        dag = parse_model_string(args.text, schema, lenient=args.lenient)
        seed = None
    if args.action == "print":
        print(to_model_string(dag))
        return
    ok, violations = check_constraints(dag, constraints)
    payload = {
        "model_string": to_model_string(dag),
        "arcs": sorted([list(a) for a in dag.arcs]),
        "n_arcs": len(dag.arcs),
        "constraints_ok": ok,
        "violations": violations,
    }
    if seed is not None:
        payload["seed"] = seed
    _emit(payload)


def cmd_score(args):
    schema = _schema(args)
    data = _dataset(args, schema)
    dag = _model(args, schema)
    report = score(dag, data, args.type, args.iss)
    payload = report.to_dict()
    payload["model_string"] = to_model_string(dag)
    _emit(payload)


def cmd_citest(args):
    data = _dataset(args)
    given = [g for g in (args.given or "").split(",") if g]
    _emit(ci_test(data, args.x, args.y, given, args.test).to_dict())


def cmd_arc_strength(args):
    schema = _schema(args)
    data = _dataset(args, schema)
    _emit(arc_strength(_model(args, schema), data, args.criterion).to_list())


def cmd_search(args):
    seed = _resolve_seed(args.seed)
    data = _dataset(args)
    result = search(
        data,
        _constraints(args),
        count=args.n,
        k=args.top,
        seed=seed,
        score_type=args.score,
        iss=args.iss,
        arc_prob=args.arc_prob,
        workers=args.workers,
    )
    if args.emit_pool:
        with open(args.emit_pool, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["model_string", "score"])
            for model, value in result.pool:
                writer.writerow([model, repr(value)])
    _emit(result.to_dict())


def cmd_fit(args):
    schema = _schema(args)
    data = _dataset(args, schema)
    fitted = fit_mle(_model(args, schema), data)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            _emit(fitted.to_dict(), fh)
    else:
        _emit(fitted.to_dict())


def cmd_query(args):
    schema = _schema(args)
    data = _dataset(args, schema)
    fitted = fit_mle(_model(args, schema), data)
    _emit(query(fitted, args.target, _parse_evidence(args.evidence)).to_dict())


def cmd_simulate(args):
    seed = _resolve_seed(args.seed)
    try:
        payload = json.loads(_read_text(args.params))
    except ValueError as exc:
        raise DataError(f"invalid parameter file: {exc}") from None
    schema = Schema.from_dict(payload["schema"]) if "schema" in payload else _schema(args)
    fitted = FittedNetwork.from_dict(payload, schema)
    if args.model:
        expected = parse_model_string(args.model, schema, lenient=args.lenient)
        if expected.arcs != fitted.dag.arcs:
            raise DataError("--model disagrees with the model in the parameter file")
    data = forward_sample(fitted, args.n, seed, allow_unsupported=args.allow_unsupported)
    if args.out:
        Path(args.out).write_text(data.to_csv(), encoding="utf-8")
        _emit({"n": data.n, "seed": seed, "out": args.out})
    else:
        sys.stdout.write(data.to_csv())


def _safe_name(label: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "._-=" else "_" for ch in label)


def write_traces(chain_sets, out_dir) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    index = {}
    for cid, cs in chain_sets.items():
        name = _safe_name(cid.label) + ".csv"
        with open(out_dir / name, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["iteration"] + [f"chain_{c + 1}" for c in range(cs.chains.shape[0])])
            for i, row in enumerate(cs.chains.T):
                writer.writerow([i + 1] + [repr(float(v)) for v in row])
        index[cid.label] = {"child": cid.child, "file": name}
    meta = {
        "coefficients": index,
        "warmup_dropped": next(iter(chain_sets.values())).warmup_dropped if chain_sets else 0,
        "seed": next(iter(chain_sets.values())).seed if chain_sets else None,
    }
    (out_dir / "index.json").write_text(json.dumps(meta, indent=2), encoding="utf-8")
    return meta


def read_traces(trace_dir) -> dict:
    trace_dir = Path(trace_dir)
    meta = json.loads(_read_text(trace_dir / "index.json"))
    out = {}
    for label, entry in meta["coefficients"].items():
        with open(trace_dir / entry["file"], newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        chains = np.array([[float(v) for v in row[1:]] for row in rows[1:]]).T
        cid = CoefficientId(entry["child"], label)
        out[cid] = ChainSet(cid, chains, meta.get("warmup_dropped", 0), meta.get("seed") or 0)
    return out


def _diagnostics_payload(chain_sets, args):
    report = {}
    for cid, cs in chain_sets.items():
        diag = diagnose(cs.chains, args.psrf_max, args.ess_min, args.max_lag, with_series=args.series)
        report[cid.label] = diag.to_dict(include_series=args.series)
    return report


def cmd_mcmc(args):
    seed = _resolve_seed(args.seed)
    schema = _schema(args)
    data = _dataset(args, schema)
    dag = _model(args, schema)
    chain_sets = sample_posterior(
        dag, data, args.iss, args.chains, args.iters, args.warmup, seed, cells=args.cells
    )
    diagnostics = _diagnostics_payload(chain_sets, args)
    payload = {
        "model_string": to_model_string(dag),
        "seed": seed,
        "chains": args.chains,
        "iters": args.iters,
        "warmup": args.warmup,
        "prior_iss": args.iss,
        "diagnostics": diagnostics,
        "all_passed": all(d["passed"] for d in diagnostics.values()),
    }
    if args.out_dir:
        write_traces(chain_sets, args.out_dir)
        (Path(args.out_dir) / "diagnostics.json").write_text(json.dumps(payload, indent=2), encoding="utf-8")
    _emit(payload)


def cmd_mcmc_diag(args):
    diagnostics = _diagnostics_payload(read_traces(args.traces), args)
    _emit({"diagnostics": diagnostics, "all_passed": all(d["passed"] for d in diagnostics.values())})


# -- pipeline ---------------------------------------------------------------


def _stage(name, fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except (FacadeBNError, OSError, ValueError, KeyError) as exc:
        raise StageError(name, exc) from exc


def _posteriors(fitted, target, evidence_var, joint):
    out = []
    for level in fitted.schema.variable(evidence_var).levels:
        try:
            out.append(query(fitted, target, {evidence_var: level}, joint).to_dict())
        except ZeroProbabilityEvidence:
            out.append({"target": target, "evidence": {evidence_var: level}, "distribution": None,
                        "evidence_probability": 0.0, "degenerate": False})
    return out


def run_pipeline(data, seed=DEFAULT_SEED, n_candidates=200, k=5, constraints=None,
                 initial_model=INITIAL_MODEL, mcmc_chains=4, mcmc_iters=6000, mcmc_warmup=1000,
                 iss=1.0, workers=1) -> dict:
    """Run every analysis stage on a loaded dataset and collect one report."""
    schema = data.schema
    constraints = constraints or DagConstraints()
    sink = constraints.sink_variable

    initial = _stage("initial_model", parse_model_string, initial_model, schema, lenient=True)
    initial_block = _stage("initial_scores", lambda: {
        "model_string": to_model_string(initial),
        "bic": bic_score(initial, data).total,
        "bdeu": bdeu_score(initial, data, iss).total,
        "constraints_ok": check_constraints(initial, constraints)[0],
    })
    initial_block["arc_strength"] = _stage("arc_strength", lambda: {
        crit: arc_strength(initial, data, crit).to_list() for crit in ("x2", "mi")
    })

    result = _stage("search", search, data, constraints, n_candidates, k, seed, "bic", iss, workers=workers)

    def top_model_tests():
        blocks = []
        for model in result.top:
            dag = parse_model_string(model.model_string, schema)
            tests = []
            for parent in dag.parents(sink):
                given = dag.parents(parent)
                tests.append({
                    "arc": [parent, sink],
                    "mi": ci_test(data, sink, parent, given, "mi").to_dict(),
                    "x2": ci_test(data, sink, parent, given, "x2").to_dict(),
                })
            blocks.append({
                "rank": model.rank,
                "model_string": model.model_string,
                "score": model.score,
                "arc_strength": {crit: arc_strength(dag, data, crit).to_list() for crit in ("x2", "mi")},
                "ci_tests": tests,
            })
        return blocks

    model_tests = _stage("ci_tests", top_model_tests)

    best = parse_model_string(result.top[0].model_string, schema)

    def queries():
        fitted = fit_mle(best, data)
        joint = joint_table(fitted)
        out = {"model_string": to_model_string(best)}
        for var in ("DC", "RF"):
            if var in schema and var != sink:
                out[f"{sink}|{var}"] = _posteriors(fitted, sink, var, joint)
        return out

    query_block = _stage("queries", queries) if sink in schema else {}

    def mcmc():
        chain_sets = sample_posterior(best, data, iss, mcmc_chains, mcmc_iters, mcmc_warmup, seed)
        diag = {cid.label: diagnose(cs.chains).to_dict() for cid, cs in chain_sets.items()}
        return {
            "model_string": to_model_string(best),
            "chains": mcmc_chains,
            "iters": mcmc_iters,
            "warmup": mcmc_warmup,
            "diagnostics": diag,
            "all_passed": all(d["passed"] for d in diag.values()),
        }

    mcmc_block = _stage("mcmc", mcmc)

    return {
        "version": __version__,
        "seed": seed,
        "config": {
            "n_candidates": n_candidates,
            "top": k,
            "constraints": constraints.to_dict(),
            "iss": iss,
            "mcmc": {"chains": mcmc_chains, "iters": mcmc_iters, "warmup": mcmc_warmup},
        },
        "data": {"n": data.n, "warnings": list(data.warnings)},
        "initial_model": initial_block,
        "search": result.to_dict(),
        "top_models": model_tests,
        "queries": query_block,
        "mcmc": mcmc_block,
    }


def cmd_pipeline(args):
    seed = _resolve_seed(args.seed)
    data = _stage("load", _dataset, args)
    report = run_pipeline(
        data,
        seed=seed,
        n_candidates=args.n,
        k=args.top,
        constraints=_constraints(args),
        mcmc_chains=args.chains,
        mcmc_iters=args.iters,
        mcmc_warmup=args.warmup,
        iss=args.iss,
        workers=args.workers,
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            _emit(report, fh)
    _emit(report)


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="facade-bn", description="Discrete Bayesian-network toolkit.")
    parser.add_argument("--version", action="version", version=f"facade-bn {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def data_args(p, schema=True):
        p.add_argument("--data", required=True)
        if schema:
            p.add_argument("--schema", help="JSON file mapping variable -> levels")
        p.add_argument("--missing", choices=["reject", "drop"], default="reject")

    def model_args(p):
        p.add_argument("--model", required=True)
        p.add_argument("--lenient", action="store_true", help="accept whitespace and the MOD alias")

    def constraint_args(p):
        p.add_argument("--min-arcs", type=int, default=5)
        p.add_argument("--sink", default="CE")

    p = sub.add_parser("validate", help="load and validate a dataset")
    data_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("schema", help="dump a schema as JSON")
    p.add_argument("action", nargs="?", choices=["dump"], default="dump")
    p.add_argument("--schema")
    p.set_defaults(func=cmd_schema)

    p = sub.add_parser("dag", help="parse, print or draw DAGs")
    p.add_argument("action", choices=["parse", "print", "random"])
    p.add_argument("text", nargs="?")
    p.add_argument("--schema")
    p.add_argument("--seed", type=int)
    p.add_argument("--arc-prob", type=float, default=0.25)
    p.add_argument("--lenient", action="store_true")
    constraint_args(p)
    p.set_defaults(func=cmd_dag)

    p = sub.add_parser("score", help="score a model on data")
    data_args(p)
    model_args(p)
    p.add_argument("--type", choices=["bic", "bdeu", "loglik"], default="bic")
    p.add_argument("--iss", type=float, default=1.0)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("citest", help="conditional independence test")
    data_args(p)
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--given", default="")
    p.add_argument("--test", choices=["mi", "x2"], default="mi")
    p.set_defaults(func=cmd_citest)

    p = sub.add_parser("arc-strength", help="per-arc independence p-values")
    data_args(p)
    model_args(p)
    p.add_argument("--criterion", choices=["mi", "x2"], default="x2")
    p.set_defaults(func=cmd_arc_strength)

    p = sub.add_parser("search", help="random constrained structure search")
    data_args(p)
    constraint_args(p)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--top", type=int, default=5)
    p.add_argument("--seed", type=int)
    p.add_argument("--score", choices=["bic", "bdeu", "loglik"], default="bic")
    p.add_argument("--iss", type=float, default=1.0)
    p.add_argument("--arc-prob", type=float, default=0.25)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--emit-pool")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("fit", help="fit CPTs and write the parameter JSON")
    data_args(p)
    model_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("query", help="exact posterior of a target given evidence")
    data_args(p)
    model_args(p)
    p.add_argument("--target", required=True)
    p.add_argument("--evidence", default="")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("simulate", help="forward-sample a fitted network")
    p.add_argument("--model")
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--params", required=True)
    p.add_argument("--schema")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--allow-unsupported", action="store_true")
    p.set_defaults(func=cmd_simulate)

    def diag_args(p):
        p.add_argument("--psrf-max", type=float, default=1.1)
        p.add_argument("--ess-min", type=float, default=400.0)
        p.add_argument("--max-lag", type=int, default=50)
        p.add_argument("--series", action="store_true", help="include plot series")

    p = sub.add_parser("mcmc", help="posterior sampling with diagnostics")
    data_args(p)
    model_args(p)
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--iters", type=int, default=6000, help="iterations per chain, warmup included")
    p.add_argument("--warmup", type=int, default=1000)
    p.add_argument("--iss", type=float, default=1.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--cells", action="store_true")
    p.add_argument("--out-dir")
    diag_args(p)
    p.set_defaults(func=cmd_mcmc)

    p = sub.add_parser("mcmc-diag", help="recompute diagnostics from stored traces")
    p.add_argument("--traces", required=True)
    diag_args(p)
    p.set_defaults(func=cmd_mcmc_diag)

    p = sub.add_parser("pipeline", help="run every analysis stage")
    data_args(p)
    constraint_args(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--top", type=int, default=5)
    p.add_argument("--iss", type=float, default=1.0)
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--iters", type=int, default=6000)
    p.add_argument("--warmup", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args.func(args)
    except UsageError as exc:
        print(f"facade-bn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        _emit({"error": str(exc.cause), "stage": exc.stage, "type": type(exc.cause).__name__}, sys.stderr)
        if isinstance(exc.cause, (DataError, OSError, KeyError)):
            return EXIT_DATA
        return EXIT_STATS
    except DataError as exc:
        _emit({"error": str(exc), "type": type(exc).__name__}, sys.stderr)
        return EXIT_DATA
    except (StatisticalError, ValueError) as exc:
        _emit({"error": str(exc), "type": type(exc).__name__}, sys.stderr)
        return EXIT_STATS
    except KeyError as exc:
        _emit({"error": f"missing key {exc}", "type": "KeyError"}, sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
