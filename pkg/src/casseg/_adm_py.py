"""Pure-numpy inner loop of the trace-lasso ADM solver.

Reference implementation of the hot kernel; `casseg._admcore` is the compiled
twin and must stay step-for-step identical to this loop.
"""

import numpy as np


def adm_solve(X, xty, Q, evals, lam, mu0, rho, mu_max, eps, max_iter, w0):
    """Run the alternating-direction iteration for

        min_w  1/2*||y - X@w||^2 + lam*||X@diag(w)||_*

    on a dictionary with unit columns. `Q` and `evals` form the
    eigendecomposition of X.T@X so the w-step resolvent (X.T@X + mu*I)^-1
    is applied in O(n^2) for every penalty value.

    Returns (w, J, iterations, converged, final_residual) where
    final_residual = max|J - X@diag(w)| at exit.
    """
    d, n = X.shape
    w = w0.copy()
    J = X * w
    Y = np.zeros((d, n))
    mu = mu0
    c3 = np.inf
    for t in range(max_iter):
        tau = lam / mu
        # J-step: singular value thresholding of X@diag(w) - Y/mu at lam/mu
        G = X * w - Y / mu
        U, s, Vt = np.linalg.svd(G, full_matrices=False)
        shrunk = s - tau
        keep = shrunk > 0
        if keep.any():
            Jn = (U[:, keep] * shrunk[keep]) @ Vt[keep]
        else:
            Jn = np.zeros((d, n))
        # w-step: (X.T@X + mu*I) w = X.T@y + diag(X.T @ (Y + mu*J))
        b = xty + np.einsum("ij,ij->j", X, Y + mu * Jn)
        wn = Q @ ((Q.T @ b) / (evals + mu))
        # multiplier and penalty
        R = Jn - X * wn
        Y += mu * R
        c1 = np.abs(Jn - J).max()
        c2 = np.abs(wn - w).max()
        c3 = np.abs(R).max()
        J = Jn
        w = wn
        mu = min(rho * mu, mu_max)
        if c1 <= eps and c2 <= eps and c3 <= eps:
            return w, J, t + 1, True, float(c3)
    return w, J, max_iter, False, float(c3)
