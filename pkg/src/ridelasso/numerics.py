"""Proximal operators and the cached linear solve shared by the ADMM solvers."""
from __future__ import annotations

import numpy as np
from scipy import linalg


def _as_finite_vector(v, name="v"):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def _check_kappa(kappa):
    kappa = float(kappa)
    if not np.isfinite(kappa) or kappa < 0:
        raise ValueError(f"kappa must be a finite non-negative number, got {kappa}")
    return kappa


def soft_threshold(v, kappa):
    """Elementwise shrinkage ``sign(v) * max(|v| - kappa, 0)``.

    This is the proximal operator of ``kappa * ||.||_1``.
    """
    v = _as_finite_vector(v)
    kappa = _check_kappa(kappa)
    if kappa == 0.0:
        return v.copy()
    return np.sign(v) * np.maximum(np.abs(v) - kappa, 0.0)


def group_shrink(v, kappa):
    """Block shrinkage ``max(1 - kappa / ||v||_2, 0) * v``.

    Proximal operator of ``kappa * ||.||_2``. A zero vector, or any vector
    with norm at most ``kappa``, maps to zero.
    """
    v = _as_finite_vector(v)
    kappa = _check_kappa(kappa)
    if kappa == 0.0:
        return v.copy()
    norm = np.linalg.norm(v)
    if norm <= kappa:
        return np.zeros_like(v)
    return (1.0 - kappa / norm) * v


class FactoredSystem:
    """Cholesky factorization of ``A^T A + rho I`` reusable across iterations.

    When ``A`` has fewer rows than columns the ``rows x rows`` matrix
    ``I + A A^T / rho`` is factored instead and the solve goes through the
    matrix inversion lemma::

        (A^T A + rho I)^{-1} q = q / rho - A^T (I + A A^T / rho)^{-1} A q / rho^2

    Instances are immutable after construction.
    """

    def __init__(self, A, rho, form="auto"):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2:
            raise ValueError(f"A must be two-dimensional, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValueError("A contains non-finite entries")
        rho = float(rho)
        if not np.isfinite(rho) or rho <= 0:
            raise ValueError(f"rho must be positive, got {rho}")
        rows, cols = A.shape
        if form == "auto":
            form = "dual" if rows < cols else "primal"
        if form not in ("primal", "dual"):
            raise ValueError(f"unknown form {form!r}")
        self.A = A
        self.rho = rho
        self.form = form
        self.shape = A.shape
        if form == "primal":
            gram = A.T @ A
            gram[np.diag_indices(cols)] += rho
        else:
            gram = (A @ A.T) / rho
            gram[np.diag_indices(rows)] += 1.0
        self._chol = linalg.cho_factor(gram, lower=True, check_finite=False)

    def solve(self, rhs):
        """Return ``v`` with ``(A^T A + rho I) v = rhs``."""
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape != (self.shape[1],):
            raise ValueError(f"rhs must have shape ({self.shape[1]},), got {rhs.shape}")
        if self.form == "primal":
            return linalg.cho_solve(self._chol, rhs, check_finite=False)
        A, rho = self.A, self.rho
        inner = linalg.cho_solve(self._chol, A @ rhs, check_finite=False)
        return rhs / rho - (A.T @ inner) / rho**2


def factor_normal_equations(A, rho, form="auto"):
    """Factor ``A^T A + rho I`` (or its dual-sized counterpart) once."""
    return FactoredSystem(A, rho, form=form)
