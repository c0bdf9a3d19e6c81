import csv
import hashlib
import json
import subprocess
import sys

import pytest

from ridelasso import cli
from ridelasso.trip_data import synthesize_green_trips, write_trips

PLANTED = cli.bundled_fixture().parent / "green_tripdata_planted_sample.csv"


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("pipeline")
    assert run("pipeline", "--out", out, "--seed", 1, "-q") == 0
    return out


def test_pipeline_artifacts(pipeline_dir):
    manifest = json.loads((pipeline_dir / "manifest.json").read_text())
    expected = {
        "graph_edges.csv", "components.csv", "distance_matrix.csv", "path.csv", "solution.csv",
        "predictions.csv", "path_predictions.csv", "train_nodes.csv", "test_nodes.csv",
        "feature_stats.json", "weekday_hist.csv", "hour_hist.csv", "day_of_month_hist.csv",
        "pickup_dropoff_pairs.csv", "feature_correlation.csv",
    }
    assert set(manifest["artifacts"]) == expected
    for name, digest in manifest["artifacts"].items():
        assert hashlib.sha256((pipeline_dir / name).read_bytes()).hexdigest() == digest
    assert manifest["seed"] == 1 and manifest["config"]["k"] == 5
    assert "out" not in manifest["config"]
    path = read_csv(pipeline_dir / "path.csv")
    assert len(path) == 10 and float(path[0]["lambda"]) == 0.0
    assert len(read_csv(pipeline_dir / "train_nodes.csv")) == 147
    assert len(read_csv(pipeline_dir / "predictions.csv")) == 49


def test_more_neighbors_more_edges(tmp_path):
    assert run("graph", "--out", tmp_path / "k5", "--k", 5, "-q") == 0
    assert run("graph", "--out", tmp_path / "k10", "--k", 10, "-q") == 0
    e5 = read_csv(tmp_path / "k5" / "graph_edges.csv")
    e10 = read_csv(tmp_path / "k10" / "graph_edges.csv")
    assert len(e10) > len(e5)


def test_planted_fixture_best_row_has_two_clusters(tmp_path):
    assert run("pipeline", "--trips", PLANTED, "--out", tmp_path, "--seed", 1, "-q") == 0
    rows = read_csv(tmp_path / "path.csv")
    best = min(rows, key=lambda r: float(r["test_mse"]))
    assert int(best["num_clusters"]) == 2


def test_predict_reuses_saved_model(pipeline_dir, tmp_path):
    trips = tmp_path / "new.csv"
    write_trips(synthesize_green_trips(30, seed=99), trips)
    assert run("predict", "--model", pipeline_dir, "--trips", trips, "--out", tmp_path / "p", "-q") == 0
    preds = read_csv(tmp_path / "p" / "predictions.csv")
    assert len(preds) == 30
    assert sum(float(r["squared_error"]) for r in preds) / 30 < 1.0


def test_predict_needs_model(tmp_path, capsys):
    trips = tmp_path / "new.csv"
    write_trips(synthesize_green_trips(3, seed=1), trips)
    assert run("predict", "--model", tmp_path, "--trips", trips, "--out", tmp_path / "p") == 2
    assert "'model'" in capsys.readouterr().err


def test_stats_outputs(tmp_path):
    assert run("stats", "--out", tmp_path, "-q") == 0
    for kind in ("weekday_hist", "hour_hist", "day_of_month_hist", "pickup_dropoff_pairs",
                 "feature_correlation"):
        with open(tmp_path / f"{kind}.csv") as fh:
            assert fh.readline().strip()
    hours = read_csv(tmp_path / "hour_hist.csv")
    assert sum(int(r["count"]) for r in hours) == 196


def test_stats_no_valid_records(tmp_path, capsys):
    trips = tmp_path / "t.csv"
    recs = synthesize_green_trips(3, seed=0)
    for r in recs:
        r.pickup_lat = r.pickup_lon = 0.0
    write_trips(recs, trips)
    assert run("stats", "--trips", trips, "--out", tmp_path / "o") != 0
    assert "no valid records" in capsys.readouterr().err


def test_schema_error_names_column(tmp_path, capsys):
    trips = tmp_path / "t.csv"
    trips.write_text("a,b\n1,2\n")
    assert run("stats", "--trips", trips, "--out", tmp_path / "o") == 1
    assert "pickup_time" in capsys.readouterr().err


def test_schema_flag(tmp_path):
    schema = tmp_path / "schema.txt"
    schema.write_text("total_amount=Total\n")
    trips = tmp_path / "t.csv"
    write_trips(synthesize_green_trips(20, seed=0), trips, {"total_amount": "Total"})
    assert run("stats", "--trips", trips, "--schema", schema, "--out", tmp_path / "o", "-q") == 0


@pytest.mark.parametrize("argv, field", [
    (["synth-lasso", "--out", "X", "--seed", "1", "--rho", "-1"], "rho"),
    (["synth-lasso", "--out", "X", "--seed", "1", "--alpha", "3"], "alpha"),
    (["synth-lasso", "--out", "X"], "seed"),
    (["synth-lasso", "--out", "X", "--seed", "x"], "seed"),
    (["synth-lasso", "--out", "X", "--seed", "1", "--lambdas", "1e-3,abc"], "lambdas"),
    (["synth-lasso", "--out", "X", "--seed", "1", "--density", "0"], "density"),
    (["pipeline", "--out", "X", "--seed", "1", "--lambdas", "1,0.5"], "lambdas"),
    (["pipeline", "--out", "X", "--seed", "1", "--train", "190", "--test", "10"], "train"),
    (["pipeline", "--out", "X", "--seed", "1", "--k", "0"], "k"),
    (["pipeline", "--out", "X", "--seed", "1", "--eps", "0"], "eps"),
    (["graph", "--out", "X", "--weight-scale", "0"], "weight_scale"),
])
def test_invalid_config_names_field(argv, field, capsys, tmp_path):
    argv = [str(tmp_path / a) if a == "X" else a for a in argv]
    assert cli.main(argv) == 2
    assert f"'{field}'" in capsys.readouterr().err


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# smoke run\nn = 10\nd = 10\nrho = not-a-number\nlambdas=0.5\n")
    out = tmp_path / "o"
    assert run("synth-lasso", "--config", cfg, "--rho", 2.0, "--seed", 4, "--out", out, "-q") == 0
    conf = json.loads((out / "manifest.json").read_text())["config"]
    assert conf["n"] == 10 and conf["rho"] == 2.0 and conf["lambdas"] == [0.5]
    cfg.write_text("bogus_key = 1\n")
    assert run("synth-lasso", "--config", cfg, "--seed", 4, "--out", out) == 2
    cfg.write_text("no equals sign\n")
    assert run("synth-lasso", "--config", cfg, "--seed", 4, "--out", out) == 2
    assert run("synth-lasso", "--config", tmp_path / "missing.cfg", "--seed", 4, "--out", out) == 2


def test_synth_lasso_outputs(tmp_path):
    assert run("synth-lasso", "--out", tmp_path, "--seed", 0, "-q") == 0
    counts = read_csv(tmp_path / "nonzero_counts.csv")
    nnz = [int(r["nonzero_count"]) for r in counts]
    assert nnz[0] > nnz[1] > nnz[2]
    for i in range(3):
        hist = read_csv(tmp_path / f"objective_history_{i}.csv")
        assert len(hist) == int(counts[i]["iterations"])


def test_smoke_config_is_fast(tmp_path):
    import time

    t0 = time.perf_counter()
    assert run("synth-lasso", "--n", 10, "--d", 10, "--density", 0.3, "--seed", 1,
               "--out", tmp_path, "-q") == 0
    assert time.perf_counter() - t0 < 1.0


def test_absolute_lambda_scale(tmp_path):
    assert run("synth-lasso", "--n", 20, "--d", 30, "--density", 0.2, "--seed", 1,
               "--lambdas", "0.01,0.1", "--lambda-scale", "absolute", "--out", tmp_path, "-q") == 0
    counts = read_csv(tmp_path / "nonzero_counts.csv")
    assert [float(r["lambda"]) for r in counts] == [0.01, 0.1]


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "ridelasso.cli", "stats", "--out", str(tmp_path), "-q"],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "manifest.json" in proc.stdout


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit):
        cli.main(["--help"])
    out = capsys.readouterr().out
    for name in ("synth-lasso", "pipeline", "stats", "graph", "predict"):
        assert name in out
