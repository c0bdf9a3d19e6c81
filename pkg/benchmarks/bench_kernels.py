"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--nodes 2000] [--repeat 5]

Reports the best-of-``repeat`` wall time per call for each available
backend, plus the end-to-end network solve on a planted instance.
"""
import argparse
import timeit

import numpy as np

from ridelasso import kernels
from ridelasso.graph import EARTH_RADIUS_KM, build_knn_graph
from ridelasso.lasso_admm import AdmmConfig
from ridelasso.network_lasso import NetworkProblem, forcing_level, solve_network_lasso
from ridelasso.trip_data import NodeProblem


def random_nodes(m, p, seed):
    rng = np.random.default_rng(seed)
    lat = 40.70 + 0.1 * rng.random(m)
    lon = -73.95 + 0.1 * rng.random(m)
    return [NodeProblem(i, np.append(rng.standard_normal(p - 1), 1.0), float(rng.standard_normal()),
                        float(lat[i]), float(lon[i])) for i in range(m)]


def best_time(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=2000)
    ap.add_argument("--features", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    nodes = random_nodes(args.nodes, args.features, args.seed)
    lat = np.array([n.pickup_lat for n in nodes])
    lon = np.array([n.pickup_lon for n in nodes])
    graph = build_knn_graph(nodes, k=5)
    problem = NetworkProblem(nodes, graph, lam=0.1 * forcing_level(NetworkProblem(nodes, graph)))
    edges = graph.edges
    lamw = problem.lam * graph.weights
    deg = np.bincount(edges.ravel(), minlength=args.nodes).astype(float)
    config = AdmmConfig(rho=1.2, alpha=1.0, max_iters=200, eps_abs=1e-12, eps_rel=1e-12)

    print(f"{args.nodes} nodes, {graph.edge_count} edges, {args.features} features")
    print(f"{'kernel':<28}" + "".join(f"{name:>14}" for name in kernels.available_backends()))
    results = {}
    for name, mod in kernels.available_backends().items():
        x = np.zeros((args.nodes, args.features))
        z = np.zeros((len(edges), 2, args.features))
        u = np.zeros_like(z)
        results[name] = {
            "haversine_matrix": best_time(
                lambda: mod.haversine_matrix(lat, lon, lat, lon, EARTH_RADIUS_KM),
                args.repeat, 1),
            "network_iteration": best_time(
                lambda: mod.network_iteration(problem.A, problem.b, x, z, u, edges, lamw, deg,
                                              1.2, problem.mu),
                args.repeat, 10),
            "solve (200 iterations)": best_time(
                lambda: solve_network_lasso(problem, config, backend=mod), args.repeat, 1),
        }
    for kernel in next(iter(results.values())):
        cells = "".join(f"{results[b][kernel] * 1e3:>11.3f} ms" for b in results)
        print(f"{kernel:<28}{cells}")
    if "cython" in results:
        for kernel in results["python"]:
            speedup = results["python"][kernel] / results["cython"][kernel]
            print(f"speedup {kernel}: {speedup:.1f}x")


if __name__ == "__main__":
    main()
