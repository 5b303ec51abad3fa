"""Trace-lasso norm and its alternating-direction solver.

The trace lasso of a coefficient vector w over a dictionary X with unit
columns is ||X @ diag(w)||_*. It equals ||w||_1 when the columns are
orthonormal, ||w||_2 when they are all identical, and interpolates in
between, which makes it adapt to the correlation structure of the data.

`solve_noisy` minimizes

    1/2*||y - X@w||_2^2 + lam*||X@diag(w)||_*

by an alternating-direction method on the split J = X@diag(w);
`solve_exact` approximates the equality-constrained problem
min ||X@diag(w)||_* s.t. y = X@w by continuation over a decreasing lam
schedule.

The inner loop has two interchangeable backends: a compiled Cython kernel
(`casseg._admcore`, built at install time when a toolchain is available)
and a pure-numpy twin (`casseg._adm_py`). The compiled one is selected at
import when present; set CASSEG_PURE_PYTHON=1 to force the fallback.
"""

import os
from dataclasses import dataclass, replace

import numpy as np

from . import _adm_py
from .numerics import check_matrix, check_vector, nuclear_norm

try:
    from . import _admcore
except ImportError:  # extension not built; keep the numpy loop
    _admcore = None

_FORCE_PYTHON = os.environ.get("CASSEG_PURE_PYTHON", "") not in ("", "0")

UNIT_COLUMN_TOL = 1e-8


def active_backend():
    """Name of the inner-loop backend selected at import: 'compiled' or 'python'."""
    if _admcore is not None and not _FORCE_PYTHON:
        return "compiled"
    return "python"


def _kernel(backend):
    if backend is None:
        backend = active_backend()
    if backend == "compiled":
        if _admcore is None:
            raise ValueError("compiled backend requested but casseg._admcore is not built")
        return _admcore.adm_solve
    if backend == "python":
        return _adm_py.adm_solve
    raise ValueError(f"unknown backend {backend!r}; expected 'compiled' or 'python'")


@dataclass(frozen=True)
class AdmConfig:
    """Parameters of the alternating-direction iteration.

    lam is the regularization weight; mu0, rho and mu_max drive the penalty
    schedule mu <- min(rho*mu, mu_max); eps is the common tolerance of the
    three infinity-norm stopping conditions.
    """

    lam: float
    mu0: float = 0.1
    rho: float = 1.1
    mu_max: float = 1e10
    eps: float = 1e-6
    max_iter: int = 2000

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if not self.mu0 > 0:
            raise ValueError(f"mu0 must be > 0, got {self.mu0}")
        if not self.rho > 1:
            raise ValueError(f"rho must be > 1, got {self.rho}")
        if not self.mu_max >= self.mu0:
            raise ValueError(f"mu_max must be >= mu0, got {self.mu_max}")
        if not self.eps > 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if not self.max_iter >= 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass
class AdmResult:
    """Solver output: coefficients, split variable, and convergence diagnostics.

    final_residual is max|J - X@diag(w)| at exit; objective is the true
    value 1/2*||y - X@w||^2 + lam*||X@diag(w)||_* at the returned w.
    """

    w: np.ndarray
    J: np.ndarray
    iterations: int
    converged: bool
    final_residual: float
    objective: float


def trace_lasso_norm(X, w):
    """||X @ diag(w)||_*.

    For unit-norm columns this lies between ||w||_2 and ||w||_1. Columns
    are not rescaled here; unit normalization is the caller's obligation
    when those bounds are relied on.
    """
    X = check_matrix(X, "X")
    w = check_vector(w, length=X.shape[1], name="w")
    return nuclear_norm(X * w)


def _check_unit_columns(X):
    norms = np.linalg.norm(X, axis=0)
    bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_COLUMN_TOL)
    if bad.size:
        j = int(bad[0])
        if norms[j] < np.finfo(np.float64).tiny:
            raise ValueError(f"column {j} is zero; dictionary columns must be nonzero")
        raise ValueError(
            f"column {j} has norm {norms[j]:.6g}; dictionary columns must be "
            "unit-normalized (see casseg.numerics.normalize_columns)"
        )


def solve_noisy(X, y, config, w0=None, backend=None):
    """Minimize 1/2*||y - X@w||^2 + lam*||X@diag(w)||_* by alternating directions.

    Parameters
    ----------
    X : (d, n) array with unit-normalized columns
    y : (d,) array
    config : AdmConfig
    w0 : optional (n,) warm-start point; defaults to zero
    backend : optional 'compiled' | 'python'; defaults to the imported kernel

    Returns
    -------
    AdmResult. Exhausting max_iter is reported via converged=False, never
    raised; when converged is True all three stopping conditions, including
    the constraint residual, are below config.eps.
    """
    X = check_matrix(X, "X")
    d, n = X.shape
    y = check_vector(y, length=d, name="y")
    _check_unit_columns(X)
    if not isinstance(config, AdmConfig):
        raise TypeError("config must be an AdmConfig")
    if w0 is None:
        w0 = np.zeros(n)
    else:
        w0 = check_vector(w0, length=n, name="w0")

    gram = X.T @ X
    evals, Q = np.linalg.eigh(gram)
    xty = X.T @ y
    w, J, iters, converged, resid = _kernel(backend)(
        X, xty, Q, evals,
        config.lam, config.mu0, config.rho, config.mu_max,
        config.eps, config.max_iter, w0,
    )
    obj = 0.5 * float(np.sum((y - X @ w) ** 2)) + config.lam * nuclear_norm(X * w)
    return AdmResult(
        w=w, J=J, iterations=iters, converged=converged,
        final_residual=resid, objective=obj,
    )


def solve_exact(X, y, config, continuation_steps=4, backend=None):
    """Approximate min ||X@diag(w)||_* s.t. y = X@w by lam-continuation.

    Runs solve_noisy over the schedule lam_k = config.lam * 10**-k for
    k = 0..continuation_steps-1, warm-starting each stage from the previous
    w. Raises ValueError if the final residual ||y - X@w|| exceeds
    1e-4*||y|| (y not representable, or the schedule too short).
    """
    X = check_matrix(X, "X")
    d, n = X.shape
    y = check_vector(y, length=d, name="y")
    if continuation_steps < 1:
        raise ValueError("continuation_steps must be >= 1")
    ny = float(np.linalg.norm(y))
    if ny == 0.0:
        return np.zeros(n)
    w = np.zeros(n)
    for k in range(continuation_steps):
        stage = replace(config, lam=config.lam * 10.0 ** (-k))
        w = solve_noisy(X, y, stage, w0=w, backend=backend).w
    resid = float(np.linalg.norm(y - X @ w))
    if resid > 1e-4 * ny:
        raise ValueError(
            f"equality-constrained solve infeasible: residual {resid:.3e} "
            f"exceeds 1e-4*||y|| = {1e-4 * ny:.3e}"
        )
    return w
