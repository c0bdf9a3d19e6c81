"""ADMM solver for the Lasso, ``min 1/2 ||Ax - b||^2 + lam ||x||_1``.

The splitting uses a copy ``z`` of ``x`` tied by ``x - z = 0``. Dual
variables are kept unscaled, so the iterates read

    x <- (A^T A + rho I)^{-1} (A^T b + rho z - u)
    z <- S_{lam/rho}(xh + u / rho)
    u <- u + rho (xh - z)

with the over-relaxed point ``xh = alpha x + (1 - alpha) z_prev``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import factor_normal_equations, soft_threshold

NONZERO_TOL = 1e-8


@dataclass
class LassoProblem:
    A: np.ndarray
    b: np.ndarray
    lam: float = 0.0

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.A.ndim != 2:
            raise ValueError(f"A must be two-dimensional, got shape {self.A.shape}")
        if self.b.shape != (self.A.shape[0],):
            raise ValueError(
                f"b has shape {self.b.shape}, expected ({self.A.shape[0]},) to match A"
            )
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))):
            raise ValueError("A and b must be finite")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lam must be non-negative, got {self.lam}")

    def with_lambda(self, lam):
        return LassoProblem(self.A, self.b, lam)

    def objective(self, x):
        r = self.A @ x - self.b
        return 0.5 * float(r @ r) + self.lam * float(np.abs(x).sum())


@dataclass(frozen=True)
class AdmmConfig:
    rho: float = 1.2
    alpha: float = 1.8
    max_iters: int = 1000
    eps_abs: float = 1e-4
    eps_rel: float = 1e-3

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not 1.0 <= self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in [1, 2], got {self.alpha}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters}")
        if not (self.eps_abs > 0 and self.eps_rel > 0):
            raise ValueError("eps_abs and eps_rel must be positive")


@dataclass
class LassoSolution:
    x: np.ndarray
    z: np.ndarray
    u: np.ndarray
    lam: float
    iterations: int
    converged: bool
    objective_history: list = field(default_factory=list)
    primal_residuals: list = field(default_factory=list)
    dual_residuals: list = field(default_factory=list)

    @property
    def nonzero_count(self):
        return int(np.count_nonzero(np.abs(self.z) > NONZERO_TOL))

    @property
    def objective(self):
        return self.objective_history[-1] if self.objective_history else float("nan")


def lambda_max(A, b):
    """Smallest penalty for which the Lasso solution is identically zero."""
    return float(np.max(np.abs(np.asarray(A).T @ np.asarray(b))))


def solve_lasso(problem, config=None, warm_start=None, factor=None):
    """Run over-relaxed ADMM on ``problem``.

    Parameters
    ----------
    problem : LassoProblem
    config : AdmmConfig, optional
    warm_start : LassoSolution, optional
        Iterates ``(x, z, u)`` to start from.
    factor : FactoredSystem, optional
        A cached factorization of ``A^T A + rho I`` for ``config.rho``.

    Returns
    -------
    LassoSolution
        ``converged`` is False when ``max_iters`` was reached first.
    """
    config = config or AdmmConfig()
    A, b, lam = problem.A, problem.b, problem.lam
    n = A.shape[1]
    rho, alpha = config.rho, config.alpha

    if factor is None:
        factor = factor_normal_equations(A, rho)
    elif factor.shape != A.shape or factor.rho != rho:
        raise ValueError("cached factorization does not match problem and rho")

    if warm_start is not None:
        if warm_start.z.shape != (n,):
            raise ValueError("warm start iterates do not match the problem dimension")
        x, z, u = warm_start.x.copy(), warm_start.z.copy(), warm_start.u.copy()
    else:
        x, z, u = np.zeros(n), np.zeros(n), np.zeros(n)

    Atb = A.T @ b
    sqrt_n = np.sqrt(n)
    sol = LassoSolution(x, z, u, lam, 0, False)

    for k in range(1, config.max_iters + 1):
        x = factor.solve(Atb + rho * z - u)

        z_old = z
        x_hat = alpha * x + (1.0 - alpha) * z_old
        z = soft_threshold(x_hat + u / rho, lam / rho)
        u = u + rho * (x_hat - z)

        r_norm = float(np.linalg.norm(x - z))
        s_norm = float(np.linalg.norm(rho * (z - z_old)))
        eps_pri = sqrt_n * config.eps_abs + config.eps_rel * max(
            np.linalg.norm(x), np.linalg.norm(z)
        )
        eps_dual = sqrt_n * config.eps_abs + config.eps_rel * np.linalg.norm(u)

        sol.objective_history.append(problem.objective(z))
        sol.primal_residuals.append(r_norm)
        sol.dual_residuals.append(s_norm)
        sol.iterations = k

        if r_norm <= eps_pri and s_norm <= eps_dual:
            sol.converged = True
            break

    sol.x, sol.z, sol.u = x, z, u
    return sol


def lambda_sweep(problem, lambdas, config=None, warm_start=True):
    """Solve the Lasso for each penalty in ``lambdas``.

    Penalties are visited from largest to smallest, each solve starting from
    the iterates of the previous (sparser) one unless ``warm_start`` is
    False. Solutions are returned in the order of ``lambdas``. The
    factorization is computed once for the whole sweep.
    """
    lambdas = [float(lam) for lam in lambdas]
    if not lambdas:
        raise ValueError("lambdas must be non-empty")
    if any(not np.isfinite(lam) or lam < 0 for lam in lambdas):
        raise ValueError("lambdas must be finite and non-negative")
    config = config or AdmmConfig()
    factor = factor_normal_equations(problem.A, config.rho)
    order = sorted(range(len(lambdas)), key=lambda i: -lambdas[i])
    solutions = [None] * len(lambdas)
    prev = None
    for i in order:
        sol = solve_lasso(
            problem.with_lambda(lambdas[i]), config,
            warm_start=prev if warm_start else None, factor=factor,
        )
        solutions[i] = sol
        prev = sol
    return solutions
