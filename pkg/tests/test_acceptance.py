"""Acceptance suite: one check per numbered criterion.

Each test prints a ``criterion N: PASS|FAIL ...`` line and the collected
lines are repeated in the pytest terminal summary. Run standalone with
``python tests/test_acceptance.py``.
"""
import csv
import filecmp
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

sys.path.insert(0, str(Path(__file__).parent))

from oracles import edge_objective, fista_lasso, lasso_objective, numeric_edge_prox, pooled_ridge, ridge  # noqa: E402
from ridelasso import cli  # noqa: E402
from ridelasso.graph import build_knn_graph, components  # noqa: E402
from ridelasso.lasso_admm import AdmmConfig, LassoProblem, lambda_max, lambda_sweep, solve_lasso  # noqa: E402
from ridelasso.network_lasso import (  # noqa: E402
    NetworkProblem,
    edge_prox,
    forcing_level,
    regularization_path,
    solve_network_lasso,
)
from ridelasso.trip_data import generate_synthetic_lasso, load_trips, planted_network  # noqa: E402

RESULTS = {}

LASSO_TIGHT = AdmmConfig(rho=1.2, alpha=1.8, max_iters=100000, eps_abs=1e-12, eps_rel=1e-12)
NETWORK_TIGHT = AdmmConfig(rho=1.2, alpha=1.0, max_iters=100000, eps_abs=1e-9, eps_rel=1e-9)


def report(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    RESULTS[number] = line
    print(line)
    assert passed, line


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------- Lasso

def test_criterion_01_lasso_matches_proximal_gradient():
    rng = np.random.default_rng(20240601)
    gaps = []
    admm_time = 0.0
    t0 = time.perf_counter()
    for _ in range(20):
        rows, cols = int(rng.integers(20, 61)), int(rng.integers(50, 151))
        A = rng.normal(size=(rows, cols))
        b = rng.normal(size=rows)
        lam = float(rng.uniform(0.05, 0.5)) * lambda_max(A, b)
        t1 = time.perf_counter()
        sol = solve_lasso(LassoProblem(A, b, lam), LASSO_TIGHT)
        admm_time += time.perf_counter() - t1
        ref = lasso_objective(A, b, lam, fista_lasso(A, b, lam, tol=1e-10))
        gaps.append(abs(sol.objective - ref) / max(abs(ref), 1e-300))
    total = time.perf_counter() - t0
    worst = max(gaps)
    report(1, worst <= 1e-6 and total < 10.0,
           f"max relative objective gap {worst:.2e} (<= 1e-6) over 20 problems; "
           f"ADMM {admm_time:.2f} s, total with oracle {total:.2f} s (< 10 s)")


@pytest.fixture(scope="module")
def sparsity_sweep():
    problem, _ = generate_synthetic_lasso(150, 500, density=0.02, seed=0)
    lmax = lambda_max(problem.A, problem.b)
    grid = [1e-4, 1e-3, 1e-2]
    t0 = time.perf_counter()
    sols = lambda_sweep(problem, [g * lmax for g in grid], AdmmConfig(rho=1.2, alpha=1.8))
    return grid, sols, time.perf_counter() - t0


def test_criterion_02_sparsity_decreases_with_lambda(sparsity_sweep):
    grid, sols, elapsed = sparsity_sweep
    counts = [s.nonzero_count for s in sols]
    ok = all(a > b for a, b in zip(counts, counts[1:])) and elapsed < 30.0
    report(2, ok, f"nonzero counts {counts} at {grid} x lambda_max, strictly decreasing; "
                  f"{elapsed:.2f} s (< 30 s)")


def test_criterion_03_middle_lambda_converges_fast(sparsity_sweep):
    _, sols, _ = sparsity_sweep
    mid = sols[1]
    report(3, mid.converged and mid.iterations <= 60,
           f"middle lambda stopped by the residual rule after {mid.iterations} iterations (<= 60)")


# ---------------------------------------------------------------- Network Lasso limits

@pytest.fixture(scope="module")
def hundred_node_problem():
    pn = planted_network(side=10, rows=5, test_count=0, seed=0)
    graph = build_knn_graph(pn.train, k=5)
    return NetworkProblem(pn.train, graph)


def test_criterion_04_zero_lambda_decouples(hundred_node_problem):
    prob = hundred_node_problem
    sol = solve_network_lasso(prob)
    gap = max(np.linalg.norm(sol.x[i] - ridge(n.features, n.response, prob.mu))
              for i, n in enumerate(prob.nodes))
    report(4, len(prob.nodes) == 100 and gap <= 1e-6,
           f"lambda=0 on {len(prob.nodes)} nodes: max distance to per-node ridge {gap:.2e} (<= 1e-6)")


def test_criterion_05_large_lambda_reaches_pooled_model(hundred_node_problem):
    prob = hundred_node_problem
    connected = components(prob.graph.node_count, prob.graph.edges).max() == 0
    lam = 1e3 * forcing_level(prob)
    sol = solve_network_lasso(prob.with_lambda(lam), NETWORK_TIGHT)
    x = sol.x
    spread = max(np.linalg.norm(x - x[i], axis=1).max() for i in range(len(x)))
    pooled = pooled_ridge(prob.A, prob.b, prob.mu)
    to_pooled = np.linalg.norm(x - pooled, axis=1).max()
    report(5, connected and spread <= 1e-4 and to_pooled <= 1e-5,
           f"lambda={lam:.4g} on a connected 100-node graph: max pairwise gap {spread:.2e} "
           f"(<= 1e-4), max gap to pooled ridge {to_pooled:.2e} (<= 1e-5)")


def test_criterion_06_edge_prox_is_optimal():
    rng = np.random.default_rng(6)
    worst = -np.inf
    for _ in range(100):
        p = int(rng.integers(1, 5))
        vj, vk = rng.normal(size=p) * rng.uniform(0.1, 3), rng.normal(size=p)
        lamw, rho = float(rng.uniform(0.01, 3.0)), float(rng.uniform(0.2, 5.0))
        zj, zk = edge_prox(vj, vk, lamw, rho)
        closed = edge_objective(zj, zk, vj, vk, lamw, rho)
        worst = max(worst, closed - numeric_edge_prox(vj, vk, lamw, rho))
    report(6, worst <= 1e-8,
           f"100 edge subproblems: max(closed form - numeric minimum) = {worst:.2e} (<= 1e-8)")


# ---------------------------------------------------------------- planted recovery

def test_criterion_07_planted_clusters_recovered():
    t0 = time.perf_counter()
    pn = planted_network(seed=0)
    prob = NetworkProblem(pn.train, build_knn_graph(pn.train, k=5))
    F = forcing_level(prob)
    lams = [0.0] + list(np.geomspace(1e-3, 1e3, 9) * F)
    path = regularization_path(prob, lams, pn.test, NETWORK_TIGHT)
    elapsed = time.perf_counter() - t0
    mse0 = path.entries[0].test_mse
    mse_inf = path.entries[-1].test_mse
    hits = []
    for e in path.entries:
        ari = adjusted_rand_score(pn.train_labels, e.solution.clusters)
        if e.num_clusters == 2 and ari == 1.0 and e.test_mse < min(mse0, mse_inf):
            hits.append((e.lam, e.test_mse))
    ok = bool(hits) and path.entries[-1].consensus_fraction == 1.0 and elapsed < 120
    detail = (f"{len(hits)} of 10 path points give 2 clusters with ARI 1.0 and MSE below both "
              f"limits (lambda=0 MSE {mse0:.3g}, consensus MSE {mse_inf:.3g}")
    if hits:
        detail += f", best such point lambda={hits[0][0]:.3g} MSE {min(h[1] for h in hits):.3g}"
    report(7, ok, detail + f"); {elapsed:.2f} s (< 120 s)")


# ---------------------------------------------------------------- fixture pipeline

@pytest.fixture(scope="module")
def pipeline_runs(tmp_path_factory):
    a = tmp_path_factory.mktemp("run_a")
    b = tmp_path_factory.mktemp("run_b")
    codes = [cli.main(["pipeline", "--out", str(d), "--seed", "7", "-q"]) for d in (a, b)]
    return codes, a, b


def valley_shaped(values, rel_tol=1e-3):
    """Non-increasing up to the minimum and non-decreasing after it.

    Steps smaller than ``rel_tol`` of the local value count as flat, so a
    monotone curve that levels off qualifies as well as a U shape.
    """
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        return False
    i = int(np.argmin(v))
    slack = rel_tol * np.maximum(np.abs(v[:-1]), np.abs(v[1:]))
    steps = np.diff(v)
    return bool(np.all(steps[:i] <= slack[:i]) and np.all(steps[i:] >= -slack[i:]))


def test_criterion_08_fixture_pipeline(pipeline_runs):
    codes, out, _ = pipeline_runs
    path = read_csv(out / "path.csv")
    mse = [float(r["test_mse"]) for r in path]
    objective = [float(r["objective"]) for r in path]
    last_consensus = float(path[-1]["consensus_fraction"])
    ok = (codes[0] == 0 and last_consensus == 1.0 and valley_shaped(mse)
          and np.all(np.isfinite(objective)))
    report(8, ok, f"pipeline exit {codes[0]}, consensus at largest lambda {last_consensus}, "
                  f"test MSE along the path {[f'{m:.3g}' for m in mse]} "
                  f"(finite, monotone-then-flat or U-shaped)")


def test_criterion_09_descriptive_statistics(tmp_path):
    code = cli.main(["stats", "--out", str(tmp_path), "-q"])
    records, _ = load_trips(cli.bundled_fixture())
    hour_total = sum(int(r["count"]) for r in read_csv(tmp_path / "hour_hist.csv"))
    rows = read_csv(tmp_path / "feature_correlation.csv")
    names = [r["feature"] for r in rows]
    C = np.array([[float(r[n]) for n in names] for r in rows])
    symmetric = bool(np.array_equal(C, C.T))
    unit = bool(np.all(np.diag(C) == 1.0))
    fare_dist = C[names.index("fare_amount"), names.index("trip_distance")]
    ok = code == 0 and hour_total == len(records) and symmetric and unit and fare_dist > 0.5
    report(9, ok, f"hour_hist total {hour_total} vs {len(records)} records, correlation symmetric "
                  f"{symmetric}, unit diagonal {unit}, fare/trip_distance {fare_dist:.3f} (> 0.5)")


def _same_tree(a, b):
    names_a = sorted(p.name for p in a.iterdir())
    names_b = sorted(p.name for p in b.iterdir())
    if names_a != names_b:
        return False, names_a
    match, mismatch, errors = filecmp.cmpfiles(a, b, names_a, shallow=False)
    return not mismatch and not errors, names_a


def test_criterion_10_determinism(pipeline_runs, tmp_path):
    codes, a, b = pipeline_runs
    checks = {"pipeline": (codes == [0, 0],) + _same_tree(a, b)}
    predict_trips = cli.bundled_fixture().parent / "green_tripdata_planted_sample.csv"
    commands = {
        "synth-lasso": ["synth-lasso", "--seed", "3"],
        "stats": ["stats"],
        "graph": ["graph", "--k", "10"],
        "predict": ["predict", "--model", str(a), "--trips", str(predict_trips)],
    }
    for name, argv in commands.items():
        outs = [tmp_path / f"{name}_{i}" for i in range(2)]
        rc = [cli.main(argv + ["--out", str(o), "-q"]) for o in outs]
        same, files = _same_tree(*outs)
        checks[name] = (rc == [0, 0], same, files)
    ok = all(rc_ok and same for rc_ok, same, _ in checks.values())
    summary = ", ".join(f"{k} {'identical' if s and r else 'DIFFERENT'} ({len(f)} files)"
                        for k, (r, s, f) in checks.items())
    report(10, ok, f"two runs per command: {summary}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
