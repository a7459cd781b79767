"""Dense symmetric eigenvalues via cyclic Jacobi rotations, and the
Gram-matrix route to singular values.

Embedding dimensions stay small (at most a few hundred), so an exact
O(sweeps * n^3) Jacobi sweep is affordable and keeps the numerics fully
deterministic: rotations are applied in a fixed row-cyclic order with no
pivot searching.
"""

from __future__ import annotations

import numpy as np

__all__ = ["gram_singular_values", "jacobi_eigenvalues"]

_DEFAULT_TOL = 1e-12
_MAX_SWEEPS = 60


def _off_norm(a: np.ndarray) -> float:
    """Frobenius norm of the strictly lower triangle."""
    return float(np.sqrt(np.sum(np.tril(a, -1) ** 2)))


def jacobi_eigenvalues(
    a: np.ndarray, tol: float = _DEFAULT_TOL, max_sweeps: int = _MAX_SWEEPS
) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, descending, by cyclic Jacobi.

    Sweeps stop once the off-diagonal Frobenius norm falls below
    tol * ||A||_F. Raises ValueError for a non-square or asymmetric input
    and RuntimeError if max_sweeps is exhausted without convergence.
    """
    a = np.array(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    scale = float(np.linalg.norm(a))
    if not np.allclose(a, a.T, atol=1e-10 * max(scale, 1.0)):
        raise ValueError("matrix is not symmetric")
    if n == 1 or scale == 0.0:
        return np.sort(np.diag(a))[::-1].copy()

    a = 0.5 * (a + a.T)
    for _ in range(max_sweeps):
        off = _off_norm(a)
        if off <= tol * scale:
            return np.sort(np.diag(a))[::-1].copy()
        # One cyclic sweep: zero each (p, q) in row order. Rotations on
        # later pairs disturb earlier zeros, hence the repeated sweeps.
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta == 0.0:
                        t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
    raise RuntimeError(f"Jacobi sweep did not converge in {max_sweeps} sweeps")


def gram_singular_values(x: np.ndarray) -> np.ndarray:
    """Singular values of a real matrix, descending, as square roots of
    Gram-matrix eigenvalues.

    The Gram matrix is formed on the smaller side of x (m x m when m < d),
    which carries the same nonzero spectrum as the d x d form; exactly
    min(m, d) values are returned. Eigenvalues at or below the Jacobi
    convergence noise floor are treated as exact zeros: the square root
    would otherwise inflate O(tol) residuals of a rank-deficient Gram into
    visible singular values.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.size == 0:
        raise ValueError(f"expected a nonempty 2-D matrix, got shape {x.shape}")
    m, d = x.shape
    gram = x @ x.T if m <= d else x.T @ x
    evals = np.clip(jacobi_eigenvalues(gram), 0.0, None)
    if evals[0] > 0.0:
        noise_floor = evals[0] * np.sqrt(evals.size) * _DEFAULT_TOL
        evals[evals < noise_floor] = 0.0
    return np.sqrt(evals)
