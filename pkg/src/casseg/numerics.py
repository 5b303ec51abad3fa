"""Dense linear-algebra kernels and proximal operators shared by the solvers.

Matrices are float64 numpy arrays of shape (d, n) in C order; columns are
samples. All functions are pure and safe to call concurrently.
"""

from dataclasses import dataclass

import numpy as np

# Single source of truth for factorization tolerances.
ORTHO_TOL = 1e-10      # orthonormality of SVD factors
FACTOR_TOL = 1e-8      # relative SVD reconstruction error


def check_matrix(M, name="M"):
    """Validate and return a finite 2-D float64 array with >= 1 row and column."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={M.ndim}")
    if M.shape[0] < 1 or M.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return M


def check_vector(v, length=None, name="v"):
    """Validate and return a finite 1-D float64 array, optionally of fixed length."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={v.ndim}")
    if length is not None and v.shape[0] != length:
        raise ValueError(f"{name} must have length {length}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return v


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD M = U @ diag(singular_values) @ V.T with r = min(d, n)."""

    U: np.ndarray                 # d x r, orthonormal columns
    singular_values: np.ndarray   # length r, nonincreasing, >= 0
    V: np.ndarray                 # n x r, orthonormal columns


def svd(M):
    """Thin singular value decomposition.

    Raises numpy.linalg.LinAlgError if the underlying factorization fails to
    converge; never returns unchecked factors.
    """
    M = check_matrix(M)
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    return SvdFactors(U=U, singular_values=s, V=Vt.T)


def nuclear_norm(M):
    """Sum of singular values of M."""
    M = check_matrix(M)
    return float(np.linalg.svd(M, compute_uv=False).sum())


def svt(M, tau):
    """Singular value thresholding: soft-threshold M's singular values at tau.

    Returns the minimizer of tau*||J||_* + 1/2*||J - M||_F^2.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    M = check_matrix(M)
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    shrunk = s - tau
    keep = shrunk > 0
    if not keep.any():
        return np.zeros_like(M)
    return (U[:, keep] * shrunk[keep]) @ Vt[keep]


def soft_threshold(v, tau):
    """Elementwise sign(v) * max(|v| - tau, 0)."""
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def col_shrink_l21(M, tau):
    """Proximal operator of tau * sum_j ||M_j||_2: shrink each column's norm.

    Column j becomes max(0, 1 - tau/||M_j||) * M_j; a zero column stays zero.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    M = check_matrix(M)
    norms = np.linalg.norm(M, axis=0)
    scale = np.zeros_like(norms)
    pos = norms > 0
    scale[pos] = np.maximum(0.0, 1.0 - tau / norms[pos])
    return M * scale


def pca_basis(X, p):
    """Column mean and top-p principal directions of the columns of X.

    Directions are eigenvectors of the sample covariance ordered by
    decreasing variance; each direction's sign is fixed so its
    largest-magnitude entry is positive.
    """
    X = check_matrix(X, "X")
    d, n = X.shape
    if not 1 <= p <= min(d, n):
        raise ValueError(f"p must satisfy 1 <= p <= min(d, n) = {min(d, n)}, got {p}")
    mean = X.mean(axis=1, keepdims=True)
    U, _, _ = np.linalg.svd(X - mean, full_matrices=False)
    comps = U[:, :p].copy()
    for j in range(p):
        i = int(np.argmax(np.abs(comps[:, j])))
        if comps[i, j] < 0:
            comps[:, j] = -comps[:, j]
    return mean, comps


def pca_project(X, p):
    """Coordinates of the mean-centered columns of X in the top-p principal directions.

    Returns a p x n matrix.
    """
    mean, comps = pca_basis(X, p)
    return comps.T @ (X - mean)


def normalize_columns(X):
    """Scale every column of X to unit l2 norm; error on a zero column."""
    X = check_matrix(X, "X")
    norms = np.linalg.norm(X, axis=0)
    bad = np.flatnonzero(norms < np.finfo(np.float64).tiny)
    if bad.size:
        raise ValueError(f"column {bad[0]} has zero norm and cannot be normalized")
    return X / norms
