import json

import pytest

from facade_bn.cli import EXIT_DATA, EXIT_STATS, EXIT_USAGE, main
from facade_bn.estimation import bic_score
from facade_bn.graph import parse_model_string
from facade_bn.inference import forward_sample
from facade_bn.published import candidate

from .conftest import m13_network

M13 = candidate("M13")


@pytest.fixture(scope="module")
def sampled_csv(tmp_path_factory):
    data = forward_sample(m13_network(seed=1), 200, seed=5)
    path = tmp_path_factory.mktemp("data") / "m13.csv"
    path.write_text(data.to_csv())
    return path, data


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0
    assert out.strip() == "facade-bn 0.1.0"


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = run(capsys, "--frobnicate")
    assert code == EXIT_USAGE
    assert "usage" in err


def test_schema_dump(capsys):
    code, out, _ = run(capsys, "schema", "dump")
    payload = json.loads(out)
    assert code == 0
    assert len(payload) == 10 and all(len(v) == 3 for v in payload.values())


def test_validate(capsys, sampled_csv):
    path, data = sampled_csv
    code, out, _ = run(capsys, "validate", "--data", path)
    assert code == 0 and json.loads(out)["n"] == data.n


def test_validate_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "validate", "--data", tmp_path / "nope.csv")
    assert code == EXIT_DATA
    assert "cannot read" in err


def test_dag_commands(capsys):
    code, out, _ = run(capsys, "dag", "print", "[CE|DC][B][C][DO][PL][T][DC|B][RF|DC][TR|RF][MD|TR]")
    assert code == 0 and out.strip() == "[B][C][DC|B][CE|DC][DO][PL][RF|DC][T][TR|RF][MD|TR]"
    code, out, _ = run(capsys, "dag", "random", "--seed", 4)
    first = json.loads(out)
    assert first["constraints_ok"] and first["seed"] == 4
    code, out, _ = run(capsys, "dag", "random", "--seed", 4)
    assert json.loads(out) == first
    code, _, _ = run(capsys, "dag", "parse", "[A]")
    assert code == EXIT_DATA


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("FACADE_BN_SEED", "17")
    code, out, _ = run(capsys, "dag", "random")
    assert json.loads(out)["seed"] == 17


def test_score(capsys, sampled_csv):
    path, data = sampled_csv
    code, out, _ = run(capsys, "score", "--data", path, "--model", M13, "--type", "bic")
    payload = json.loads(out)
    assert code == 0
    assert payload["total"] == pytest.approx(bic_score(parse_model_string(M13, data.schema), data).total)
    assert set(payload) >= {"total", "per_node", "d", "n"}
    code, out, _ = run(capsys, "score", "--data", path, "--model", M13, "--type", "bdeu", "--iss", 1)
    assert json.loads(out)["iss"] == 1.0


def test_citest_and_arc_strength(capsys, sampled_csv):
    path, _ = sampled_csv
    code, out, _ = run(capsys, "citest", "--data", path, "CE", "DC", "--given", "B", "--test", "mi")
    payload = json.loads(out)
    assert code == 0 and payload["df"] == 12 and 0 <= payload["p_value"] <= 1
    code, out, _ = run(capsys, "arc-strength", "--data", path, "--model", M13, "--criterion", "x2")
    assert len(json.loads(out)) == 5


def test_search_with_pool(capsys, sampled_csv, tmp_path):
    path, _ = sampled_csv
    pool = tmp_path / "pool.csv"
    argv = ["search", "--data", path, "--n", 30, "--top", 3, "--seed", 2, "--emit-pool", pool]
    code, out, _ = run(capsys, *argv)
    payload = json.loads(out)
    assert code == 0 and len(payload["top"]) == 3 and payload["seed"] == 2
    assert len(pool.read_text().strip().splitlines()) == 31
    code, again, _ = run(capsys, *argv)
    assert again == out


def test_query(capsys, sampled_csv):
    path, _ = sampled_csv
    code, out, _ = run(capsys, "query", "--data", path, "--model", M13, "--target", "CE", "--evidence", "DC=DC_HY")
    payload = json.loads(out)
    assert code == 0
    assert sum(payload["distribution"].values()) == pytest.approx(1.0)
    code, _, _ = run(capsys, "query", "--data", path, "--model", M13, "--target", "CE", "--evidence", "DC")
    assert code == EXIT_USAGE


def test_fit_and_simulate(capsys, sampled_csv, tmp_path):
    path, _ = sampled_csv
    params = tmp_path / "fitted.json"
    code, _, _ = run(capsys, "fit", "--data", path, "--model", M13, "--out", params)
    assert code == 0
    stored = json.loads(params.read_text())
    assert set(stored) >= {"model_string", "n", "cpts"}
    assert set(stored["cpts"]["CE"]) >= {"parents", "parent_config_order", "rows"}
    out_csv = tmp_path / "sim.csv"
    code, out, _ = run(capsys, "simulate", "--model", M13, "--params", params, "--n", 50, "--seed", 3, "--out", out_csv)
    assert code == 0 and json.loads(out)["n"] == 50
    code, _, _ = run(capsys, "validate", "--data", out_csv)
    assert code == 0


def test_mcmc_and_diag(capsys, sampled_csv, tmp_path):
    path, _ = sampled_csv
    out_dir = tmp_path / "traces"
    code, out, _ = run(
        capsys, "mcmc", "--data", path, "--model", M13, "--chains", 2, "--iters", 400,
        "--warmup", 100, "--seed", 5, "--out-dir", out_dir,
    )
    payload = json.loads(out)
    assert code == 0 and "CE.DC" in payload["diagnostics"]
    assert (out_dir / "index.json").exists()
    code, out, _ = run(capsys, "mcmc-diag", "--traces", out_dir)
    recomputed = json.loads(out)["diagnostics"]
    for label, diag in payload["diagnostics"].items():
        assert recomputed[label]["ess"] == pytest.approx(diag["ess"], rel=1e-12)
        assert recomputed[label]["psrf"] == pytest.approx(diag["psrf"], rel=1e-12)


def test_pipeline(capsys, sampled_csv):
    path, _ = sampled_csv
    argv = ["pipeline", "--data", path, "--n", 40, "--seed", 3, "--iters", 600, "--warmup", 100]
    code, out, _ = run(capsys, *argv)
    report = json.loads(out)
    assert code == 0
    assert report["seed"] == 3
    assert {"initial_model", "search", "top_models", "queries", "mcmc"} <= set(report)
    assert len(report["search"]["top"]) == 5
    assert all(block["ci_tests"] for block in report["top_models"])
    assert "CE|DC" in report["queries"]
    _, again, _ = run(capsys, *argv)
    assert again == out


def test_pipeline_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "pipeline", "--data", tmp_path / "missing.csv")
    assert code == EXIT_DATA
    assert json.loads(err)["stage"] == "load"


def test_statistical_error_exit_code(capsys, sampled_csv):
    path, _ = sampled_csv
    code, _, _ = run(capsys, "score", "--data", path, "--model", "[B][C][DO][PL][T][DC|B:CE][CE|DC][RF|DC][TR|RF][MD|TR]")
    assert code == EXIT_STATS
