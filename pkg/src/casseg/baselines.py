"""Reference self-representation solvers: LSR, SSC (lasso), and LRR.

Objective scalings are pinned here because the tests' optimality thresholds
depend on them:

    LSR:  min_w ||y - X@w||_2^2 + lam*||w||_2^2
    SSC:  min_w ||y - X@w||_2^2 + lam*||w||_1
    LRR:  min_{W,E} ||W||_* + lam*||E||_{2,1}  s.t.  X = X@W + E
"""

from dataclasses import dataclass

import numpy as np

from .numerics import check_matrix, check_vector, col_shrink_l21, soft_threshold, svt

# One ADM penalty schedule repo-wide (matches trace_lasso defaults).
_MU0 = 0.1
_RHO = 1.1
_MU_MAX = 1e10


def solve_lsr(X, y, lam):
    """Ridge regression: the unique minimizer (X.T@X + lam*I)^-1 @ X.T @ y."""
    X = check_matrix(X, "X")
    y = check_vector(y, length=X.shape[0], name="y")
    if not lam > 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    n = X.shape[1]
    return np.linalg.solve(X.T @ X + lam * np.eye(n), X.T @ y)


@dataclass
class SscResult:
    """Lasso solve output; objectives holds the per-iteration objective values."""

    w: np.ndarray
    iterations: int
    converged: bool
    objectives: np.ndarray


def _lasso_objective(X, y, lam, w):
    return float(np.sum((y - X @ w) ** 2) + lam * np.abs(w).sum())


def solve_ssc(X, y, lam, tol=1e-10, max_iter=10000):
    """Lasso by accelerated proximal gradient with a monotone restart rule.

    Gradient steps of size 1/(2*sigma_max(X)^2) on ||y - X@w||^2 followed by
    soft thresholding; momentum is reset whenever it would increase the
    objective, so the objective sequence is nonincreasing. Stops when the
    per-iteration objective decrease drops to tol; exhausting max_iter
    returns the best iterate flagged converged=False.
    """
    X = check_matrix(X, "X")
    y = check_vector(y, length=X.shape[0], name="y")
    if not lam > 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    n = X.shape[1]
    smax = float(np.linalg.norm(X, 2))
    if smax == 0.0:
        raise ValueError("X is identically zero")
    step = 1.0 / (2.0 * smax**2)

    w = np.zeros(n)
    v = w
    tk = 1.0
    f = _lasso_objective(X, y, lam, w)
    objs = [f]
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        grad = 2.0 * (X.T @ (X @ v - y))
        wn = soft_threshold(v - step * grad, step * lam)
        fn = _lasso_objective(X, y, lam, wn)
        if fn > f:
            # restart: plain proximal-gradient step from w is a descent step
            tk = 1.0
            grad = 2.0 * (X.T @ (X @ w - y))
            wn = soft_threshold(w - step * grad, step * lam)
            fn = _lasso_objective(X, y, lam, wn)
            if fn > f:  # rounding noise at a fixpoint; stay put
                wn, fn = w, f
        tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
        v = wn + ((tk - 1.0) / tn) * (wn - w)
        tk = tn
        decrease = f - fn
        w = wn
        f = fn
        objs.append(f)
        if 0 <= decrease <= tol:
            converged = True
            break
    return SscResult(w=w, iterations=iterations, converged=converged,
                     objectives=np.asarray(objs))


@dataclass
class LrrResult:
    """Low-rank representation output; converged means both constraint
    residuals max|X - X@W - E| and max|W - J| fell below the tolerance."""

    W: np.ndarray
    E: np.ndarray
    iterations: int
    converged: bool


def solve_lrr(X, lam, tol=1e-6, max_iter=2000):
    """Low-rank representation by inexact augmented Lagrangian iteration.

    Splits J = W; updates J by singular value thresholding, W by a linear
    solve against (I + X.T@X) (factored once), and E by columnwise l2
    shrinkage, then the two multipliers and the growing penalty.
    """
    X = check_matrix(X, "X")
    if not lam > 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    if not X.any():
        raise ValueError("X is identically zero")
    d, n = X.shape
    evals, Q = np.linalg.eigh(X.T @ X)
    xtx = X.T @ X

    def apply_inv(M):  # (I + X.T@X)^-1 @ M
        return Q @ ((Q.T @ M) / (evals + 1.0)[:, None])

    W = np.zeros((n, n))
    E = np.zeros((d, n))
    Y1 = np.zeros((d, n))
    Y2 = np.zeros((n, n))
    mu = _MU0
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        J = svt(W + Y2 / mu, 1.0 / mu)
        W = apply_inv(xtx - X.T @ E + J + (X.T @ Y1 - Y2) / mu)
        E = col_shrink_l21(X - X @ W + Y1 / mu, lam / mu)
        R1 = X - X @ W - E
        R2 = W - J
        Y1 += mu * R1
        Y2 += mu * R2
        mu = min(_RHO * mu, _MU_MAX)
        if np.abs(R1).max() <= tol and np.abs(R2).max() <= tol:
            converged = True
            break
    return LrrResult(W=W, E=E, iterations=iterations, converged=converged)
