"""Network Lasso over a trip graph.

Minimizes

    sum_i 1/2 (a_i^T x_i - b_i)^2 + mu/2 ||x_i||^2 + lam sum_(j,k) w_jk ||x_j - x_k||_2

with ADMM. Every edge direction holds a copy ``z_jk`` of ``x_j`` and a
scaled dual ``u_jk``. One iteration is a node phase (closed-form ridge
solve with a rank-one Sherman-Morrison update), an edge phase (the
two-copy proximal step, which either averages the copies or pulls them
toward each other) and a dual step.

Edges whose penalty ``lam * w_jk`` is zero contribute nothing to the
objective and are left out of the splitting, so ``lam = 0`` decouples into
independent ridge problems solved in one pass.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .graph import components, pairwise_km
from .lasso_admm import AdmmConfig
from .trip_data import Table

DEFAULT_MU = 1e-3
DEFAULT_EPS = 1e-3
# bottlenecked graphs drift slowly toward consensus, so the looser Lasso
# defaults stop far from the optimum
NETWORK_CONFIG = AdmmConfig(rho=1.2, alpha=1.0, max_iters=20000, eps_abs=1e-6, eps_rel=1e-6)


@dataclass
class NetworkProblem:
    nodes: list
    graph: object
    lam: float = 0.0
    mu: float = DEFAULT_MU

    def __post_init__(self):
        self.nodes = list(self.nodes)
        if self.graph.node_count != len(self.nodes):
            raise ValueError(
                f"graph has {self.graph.node_count} nodes but {len(self.nodes)} node problems given"
            )
        if not self.nodes:
            raise ValueError("network problem needs at least one node")
        widths = {len(n.features) for n in self.nodes}
        if len(widths) != 1:
            raise ValueError(f"feature vectors have differing lengths {sorted(widths)}")
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lam must be non-negative, got {self.lam}")
        if not (np.isfinite(self.mu) and self.mu >= 0):
            raise ValueError(f"mu must be non-negative, got {self.mu}")
        self.A = np.ascontiguousarray([n.features for n in self.nodes], dtype=float)
        self.b = np.ascontiguousarray([n.response for n in self.nodes], dtype=float)
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))):
            raise ValueError("node features and responses must be finite")

    @property
    def dim(self):
        return self.A.shape[1]

    def with_lambda(self, lam):
        return replace(self, lam=float(lam))

    def objective(self, x):
        r = np.einsum("ij,ij->i", self.A, x) - self.b
        j, k = self.graph.edges[:, 0], self.graph.edges[:, 1]
        edge = np.linalg.norm(x[j] - x[k], axis=1)
        return float(
            0.5 * r @ r + 0.5 * self.mu * np.sum(x * x)
            + self.lam * np.sum(self.graph.weights * edge)
        )


@dataclass
class NetworkSolution:
    x: np.ndarray
    z: np.ndarray
    u: np.ndarray
    lam: float
    iterations: int
    converged: bool
    objective: float
    consensus_fraction: float
    clusters: np.ndarray
    primal_residuals: list = field(default_factory=list)
    dual_residuals: list = field(default_factory=list)

    @property
    def num_clusters(self):
        return int(self.clusters.max()) + 1 if len(self.clusters) else 0

    def table(self, node_ids=None):
        m, p = self.x.shape
        ids = range(m) if node_ids is None else node_ids
        rows = [[int(i), int(c)] + [float(v) for v in xi]
                for i, c, xi in zip(ids, self.clusters, self.x)]
        return Table(["node_id", "cluster_id"] + [f"x_{t}" for t in range(p)], rows)


def _edge_gaps(x, graph, eps):
    j, k = graph.edges[:, 0], graph.edges[:, 1]
    gap = np.linalg.norm(x[j] - x[k], axis=1)
    return gap <= eps * (1.0 + np.linalg.norm(x[j], axis=1))


def consensus_fraction(solution, graph, eps=DEFAULT_EPS):
    """Fraction of edges whose endpoint models agree to relative tolerance ``eps``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    x = solution.x if isinstance(solution, NetworkSolution) else np.asarray(solution)
    if graph.edge_count == 0:
        return 1.0
    return float(np.mean(_edge_gaps(x, graph, eps)))


def extract_clusters(x, graph, eps=DEFAULT_EPS):
    """Connected components of the graph restricted to in-consensus edges."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    x = x.x if isinstance(x, NetworkSolution) else np.asarray(x)
    if graph.edge_count == 0:
        return np.arange(graph.node_count)
    return components(graph.node_count, graph.edges[_edge_gaps(x, graph, eps)])


def edge_prox(v_j, v_k, lamw, rho):
    """Minimize ``lamw ||z_j - z_k|| + rho/2 (||v_j - z_j||^2 + ||v_k - z_k||^2)``.

    Returns the pair ``(z_j, z_k)``. When ``||v_j - v_k|| <= 2 lamw / rho``
    both copies equal the average of the inputs.
    """
    v_j = np.asarray(v_j, dtype=float)
    v_k = np.asarray(v_k, dtype=float)
    nrm = np.linalg.norm(v_j - v_k)
    if rho * nrm <= 2.0 * lamw:
        avg = 0.5 * (v_j + v_k)
        return avg, avg.copy()
    theta = 1.0 - lamw / (rho * nrm)
    return theta * v_j + (1.0 - theta) * v_k, theta * v_k + (1.0 - theta) * v_j


def solve_network_lasso(problem, config=None, eps=DEFAULT_EPS, warm_start=None, backend=None):
    """Run ADMM on a ``NetworkProblem``.

    Parameters
    ----------
    problem : NetworkProblem
    config : AdmmConfig, optional
        ``rho``, ``max_iters`` and the stopping tolerances are used;
        ``alpha`` is ignored.
    eps : float
        Relative tolerance for consensus and cluster extraction.
    warm_start : NetworkSolution, optional
        Iterates from a solve on the same graph.
    backend : module, optional
        Kernel module; defaults to the one chosen at import.

    Returns
    -------
    NetworkSolution
    """
    config = config or NETWORK_CONFIG
    kern = backend or kernels
    graph = problem.graph
    A, b = problem.A, problem.b
    m, p = A.shape
    rho = float(config.rho)
    edges = graph.edges
    n_e = len(edges)

    if warm_start is not None:
        if warm_start.x.shape != (m, p) or warm_start.z.shape != (n_e, 2, p):
            raise ValueError("warm start does not match the problem dimensions")
        x = warm_start.x.copy()
        z = warm_start.z.copy()
        u = warm_start.u.copy()
    else:
        x = np.zeros((m, p))
        z = np.zeros((n_e, 2, p))
        u = np.zeros((n_e, 2, p))

    lamw_all = problem.lam * graph.weights
    active = lamw_all > 0
    e_act = np.ascontiguousarray(edges[active])
    z_act = np.ascontiguousarray(z[active])
    u_act = np.ascontiguousarray(u[active])
    lamw = np.ascontiguousarray(lamw_all[active])
    deg = np.bincount(e_act.ravel(), minlength=m).astype(float)

    sqrt_pri = np.sqrt(2 * len(e_act) * p)
    sqrt_dual = np.sqrt(m * p)
    primal, dual = [], []
    converged = False
    it = 0
    for it in range(1, config.max_iters + 1):
        r2, s2, ax2, z2, atu2 = kern.network_iteration(
            A, b, x, z_act, u_act, e_act, lamw, deg, rho, float(problem.mu)
        )
        r, s = np.sqrt(r2), np.sqrt(s2)
        primal.append(float(r))
        dual.append(float(s))
        eps_pri = sqrt_pri * config.eps_abs + config.eps_rel * max(np.sqrt(ax2), np.sqrt(z2))
        eps_dual = sqrt_dual * config.eps_abs + config.eps_rel * rho * np.sqrt(atu2)
        if r <= eps_pri and s <= eps_dual:
            converged = True
            break

    z[active] = z_act
    u[active] = u_act
    idle = ~active
    if np.any(idle):
        z[idle, 0] = x[edges[idle, 0]]
        z[idle, 1] = x[edges[idle, 1]]
        u[idle] = 0.0

    return NetworkSolution(
        x=x, z=z, u=u, lam=problem.lam, iterations=it, converged=converged,
        objective=problem.objective(x),
        consensus_fraction=consensus_fraction(x, graph, eps),
        clusters=extract_clusters(x, graph, eps),
        primal_residuals=primal, dual_residuals=dual,
    )


def forcing_level(problem):
    """Penalty scale at which edges start forcing agreement.

    The largest node-loss gradient norm at the pooled ridge model, divided
    by the smallest edge weight. Any penalty above ``node_count`` times this
    value makes the pooled model optimal on a connected graph.
    """
    A, b, mu = problem.A, problem.b, problem.mu
    m, p = A.shape
    pooled = np.linalg.solve(A.T @ A + m * mu * np.eye(p), A.T @ b)
    grads = A * (A @ pooled - b)[:, None] + mu * pooled
    w_min = problem.graph.weights.min() if problem.graph.edge_count else 1.0
    return float(np.linalg.norm(grads, axis=1).max() / w_min)


# --------------------------------------------------------------------------
# prediction

@dataclass
class Predictions:
    node_ids: list
    cluster_ids: np.ndarray
    predicted: np.ndarray
    actual: np.ndarray

    @property
    def squared_errors(self):
        return (self.predicted - self.actual) ** 2

    @property
    def mse(self):
        return float(np.mean(self.squared_errors))

    def table(self):
        rows = [[int(i), int(c), float(p), float(a), float(e)]
                for i, c, p, a, e in zip(self.node_ids, self.cluster_ids, self.predicted,
                                         self.actual, self.squared_errors)]
        return Table(["node_id", "cluster_id", "predicted", "actual", "squared_error"], rows)


def cluster_models(x, clusters):
    """Mean model of each cluster, indexed by cluster id."""
    n_c = int(clusters.max()) + 1
    sums = np.zeros((n_c, x.shape[1]))
    np.add.at(sums, clusters, x)
    counts = np.bincount(clusters, minlength=n_c)
    return sums / counts[:, None]


def assign_clusters(train_lat, train_lon, clusters, test_lat, test_lon, k_assign=5):
    """Majority cluster among each test point's ``k_assign`` nearest training pickups.

    Ties go to the cluster with the smallest summed distance, then the
    smaller cluster id.
    """
    if k_assign < 1:
        raise ValueError("k_assign must be at least 1")
    k = min(k_assign, len(train_lat))
    D = pairwise_km(test_lat, test_lon, train_lat, train_lon)
    out = np.empty(len(test_lat), dtype=np.int64)
    idx = np.arange(len(train_lat))
    for t in range(len(test_lat)):
        near = np.lexsort((idx, D[t]))[:k]
        votes = {}
        for i in near:
            c = int(clusters[i])
            cnt, dsum = votes.get(c, (0, 0.0))
            votes[c] = (cnt + 1, dsum + D[t, i])
        out[t] = min(votes, key=lambda c: (-votes[c][0], votes[c][1], c))
    return out


def predict_fares(solution, train_nodes, test_nodes, k_assign=5):
    """Predict test responses with the model of each test node's assigned cluster."""
    test_nodes = list(test_nodes)
    if not test_nodes:
        raise ValueError("test set is empty")
    train_nodes = list(train_nodes)
    x = solution.x if isinstance(solution, NetworkSolution) else solution[0]
    clusters = solution.clusters if isinstance(solution, NetworkSolution) else solution[1]
    models = cluster_models(x, clusters)
    assigned = assign_clusters(
        [n.pickup_lat for n in train_nodes], [n.pickup_lon for n in train_nodes], clusters,
        [n.pickup_lat for n in test_nodes], [n.pickup_lon for n in test_nodes], k_assign,
    )
    F = np.array([n.features for n in test_nodes], dtype=float)
    if F.shape[1] != models.shape[1]:
        raise ValueError("test features do not match the model dimension")
    predicted = np.einsum("ij,ij->i", F, models[assigned])
    actual = np.array([n.response for n in test_nodes], dtype=float)
    return Predictions([n.node_id for n in test_nodes], assigned, predicted, actual)


# --------------------------------------------------------------------------
# regularization path

@dataclass
class PathEntry:
    lam: float
    solution: NetworkSolution
    objective: float
    consensus_fraction: float
    num_clusters: int
    test_mse: float
    predictions: Predictions | None


@dataclass
class PathResult:
    entries: list

    @property
    def lambdas(self):
        return [e.lam for e in self.entries]

    def best(self):
        """Entry with the lowest test MSE (first one on ties)."""
        scored = [e for e in self.entries if np.isfinite(e.test_mse)]
        if not scored:
            return self.entries[-1]
        return min(scored, key=lambda e: e.test_mse)

    def table(self):
        rows = [[e.lam, e.objective, e.consensus_fraction, e.num_clusters, e.test_mse,
                 e.solution.iterations, int(e.solution.converged)]
                for e in self.entries]
        return Table(["lambda", "objective", "consensus_fraction", "num_clusters", "test_mse",
                      "iterations", "converged"], rows)


def regularization_path(problem, lambdas, test_nodes=None, config=None, k_assign=5,
                        eps=DEFAULT_EPS, warm_start=True, backend=None):
    """Solve along an increasing penalty grid, scoring each solution on ``test_nodes``."""
    lambdas = [float(v) for v in lambdas]
    if not lambdas:
        raise ValueError("lambdas must be non-empty")
    if any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise ValueError("lambdas must be strictly increasing")
    test_nodes = list(test_nodes) if test_nodes else []
    entries = []
    prev = None
    for lam in lambdas:
        sol = solve_network_lasso(
            problem.with_lambda(lam), config, eps=eps,
            warm_start=prev if warm_start else None, backend=backend,
        )
        preds = predict_fares(sol, problem.nodes, test_nodes, k_assign) if test_nodes else None
        entries.append(PathEntry(
            lam=lam, solution=sol, objective=sol.objective,
            consensus_fraction=sol.consensus_fraction, num_clusters=sol.num_clusters,
            test_mse=preds.mse if preds is not None else float("nan"), predictions=preds,
        ))
        prev = sol
    return PathResult(entries)


def load_solution(path):
    """Read a solution CSV back as ``(node_ids, cluster_ids, x)``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["node_id", "cluster_id"]:
            raise ValueError(f"{path}: not a solution export")
        ids, clusters, xs = [], [], []
        for row in reader:
            ids.append(int(row[0]))
            clusters.append(int(row[1]))
            xs.append([float(v) for v in row[2:]])
    return ids, np.array(clusters, dtype=np.int64), np.array(xs, dtype=float)
