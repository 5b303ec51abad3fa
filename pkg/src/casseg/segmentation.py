"""End-to-end segmentation pipeline.

For each point, a representation problem is solved over the leave-one-out
dictionary (all other columns); the coefficients form an n x n matrix W with
zero diagonal, symmetrized into the affinity (|W| + |W.T|)/2, which is then
clustered by normalized spectral clustering into k groups.
"""

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import solve_lrr, solve_lsr, solve_ssc
from .numerics import check_matrix, normalize_columns
from .trace_lasso import AdmConfig, solve_noisy

METHODS = ("cass", "ssc", "lrr", "lsr", "knn")


@dataclass(frozen=True)
class SegmentationConfig:
    """Pipeline parameters: method, cluster count, solver and k-means controls."""

    method: str
    k: int
    lam: float = 0.1
    tol: float = 1e-6
    max_iter: int = 2000
    kmeans_restarts: int = 50
    seed: int = 0
    knn_neighbors: int = 6
    workers: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if self.kmeans_restarts < 1:
            raise ValueError("kmeans_restarts must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class PointDiagnostics:
    point: int
    iterations: int
    converged: bool
    residual: float


@dataclass
class CoefficientMatrix:
    """n x n representation coefficients with an exactly zero diagonal."""

    W: np.ndarray
    diagnostics: list = field(default_factory=list)


@dataclass
class SegmentationResult:
    labels: np.ndarray
    coefficients: CoefficientMatrix
    affinity: np.ndarray
    accuracy: float | None = None
    error: float | None = None


def _solve_point(Xn, i, config):
    """Coefficients of x_i over the dictionary excluding column i."""
    dictionary = np.delete(Xn, i, axis=1)
    y = Xn[:, i]
    if config.method == "cass":
        res = solve_noisy(
            dictionary, y,
            AdmConfig(lam=config.lam, eps=config.tol, max_iter=config.max_iter),
        )
        return res.w, PointDiagnostics(i, res.iterations, res.converged, res.final_residual)
    if config.method == "ssc":
        res = solve_ssc(dictionary, y, config.lam, tol=config.tol * 1e-4,
                        max_iter=config.max_iter)
        return res.w, PointDiagnostics(i, res.iterations, res.converged,
                                       float(res.objectives[-1] - res.objectives[-2])
                                       if len(res.objectives) > 1 else 0.0)
    if config.method == "lsr":
        w = solve_lsr(dictionary, y, config.lam)
        return w, PointDiagnostics(i, 0, True, 0.0)
    raise ValueError(f"no per-point solver for method {config.method!r}")


def _knn_weights(Xn, neighbors):
    """exp(-||x_i - x_j|| / sigma) on each point's nearest neighbors."""
    n = Xn.shape[1]
    g = Xn.T @ Xn
    sq = np.maximum(np.diag(g)[:, None] + np.diag(g)[None, :] - 2 * g, 0.0)
    dist = np.sqrt(sq)
    offdiag = dist[~np.eye(n, dtype=bool)]
    sigma = max(float(np.median(offdiag)), np.finfo(np.float64).tiny)
    W = np.zeros((n, n))
    m = min(neighbors, n - 1)
    for i in range(n):
        d_i = dist[:, i].copy()
        d_i[i] = np.inf
        nn = np.argsort(d_i, kind="stable")[:m]
        W[nn, i] = np.exp(-d_i[nn] / sigma)
    return W


def coefficient_matrix(X, config):
    """Per-point representation coefficients, scattered into an n x n matrix.

    Column i holds the solution for target x_i over the other n-1 columns
    (re-indexed so W[i, i] = 0). For method 'lrr' the whole-matrix problem
    is solved once and the diagonal zeroed; 'knn' fills similarity weights
    instead of solving anything.
    """
    X = check_matrix(X, "X")
    n = X.shape[1]
    if n < config.k + 1:
        raise ValueError(f"need at least k+1 = {config.k + 1} samples, got {n}")
    Xn = normalize_columns(X)

    if config.method == "lrr":
        res = solve_lrr(Xn, config.lam, tol=config.tol, max_iter=config.max_iter)
        W = res.W.copy()
        np.fill_diagonal(W, 0.0)
        diags = [PointDiagnostics(-1, res.iterations, res.converged, 0.0)]
        return CoefficientMatrix(W=W, diagnostics=diags)

    if config.method == "knn":
        return CoefficientMatrix(W=_knn_weights(Xn, config.knn_neighbors))

    def run(i):
        try:
            return _solve_point(Xn, i, config)
        except Exception as exc:
            raise RuntimeError(f"{config.method} solver failed at point {i}: {exc}") from exc

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(run, range(n)))
    else:
        results = [run(i) for i in range(n)]

    W = np.zeros((n, n))
    diags = []
    mask = np.arange(n)
    for i, (coeff, diag) in enumerate(results):
        W[mask != i, i] = coeff
        diags.append(diag)
    return CoefficientMatrix(W=W, diagnostics=diags)


def affinity(W):
    """Symmetrize coefficients into (|W| + |W.T|)/2."""
    if isinstance(W, CoefficientMatrix):
        W = W.W
    W = check_matrix(W, "W")
    if W.shape[0] != W.shape[1]:
        raise ValueError(f"W must be square, got {W.shape}")
    if np.diag(W).any():
        raise ValueError("W must have a zero diagonal")
    return (np.abs(W) + np.abs(W.T)) / 2.0


def _canonical_order(E):
    """Lexicographic row order; position-independent under input permutation."""
    return np.lexsort(E[:, ::-1].T)


def _kmeanspp_centers(S, k, rng):
    """k-means++ seeding over canonically ordered rows S."""
    n = S.shape[0]
    centers = np.empty((k, S.shape[1]))
    centers[0] = S[rng.integers(n)]
    d2 = ((S - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:  # fewer distinct rows than centers
            centers[c] = centers[c - 1]
            continue
        u = rng.random() * total
        idx = int(np.searchsorted(np.cumsum(d2), u, side="right"))
        idx = min(idx, n - 1)
        centers[c] = S[idx]
        d2 = np.minimum(d2, ((S - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(E, centers, max_iter=300):
    n, k = E.shape[0], centers.shape[0]
    labels = None
    for _ in range(max_iter):
        D = ((E[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = D.argmin(axis=1)
        # repair empty clusters with the point farthest from its center
        for c in range(k):
            if not (new_labels == c).any():
                worst = int(np.argmax(D[np.arange(n), new_labels]))
                new_labels[worst] = c
                D[worst, :] = 0.0
        if labels is not None and np.array_equal(labels, new_labels):
            break
        labels = new_labels
        for c in range(k):
            members = labels == c
            if members.any():
                centers[c] = E[members].mean(axis=0)
    D = ((E[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    inertia = float(D[np.arange(n), labels].sum())
    return labels, inertia


def _kmeans(E, k, restarts, seed):
    """Seeded k-means over rows of E; best inertia, ties broken by the
    lexicographically smallest assignment."""
    order = _canonical_order(E)
    S = E[order]
    inverse = np.empty_like(order)
    inverse[order] = np.arange(len(order))
    best_labels = None
    best_inertia = np.inf
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        centers = _kmeanspp_centers(S, k, rng)
        labels_sorted, inertia = _lloyd(S, centers)
        labels = labels_sorted[inverse]
        if (
            best_labels is None
            or inertia < best_inertia
            or (inertia == best_inertia and tuple(labels) < tuple(best_labels))
        ):
            best_labels = labels
            best_inertia = inertia
    return best_labels


def spectral_cluster(A, k, restarts=50, seed=0):
    """Normalized spectral clustering of a symmetric nonnegative affinity.

    Embeds the points in the k eigenvectors of the smallest eigenvalues of
    I - D^{-1/2} A D^{-1/2}, row-normalizes, and runs seeded k-means.
    """
    A = check_matrix(A, "A")
    n = A.shape[0]
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"affinity must be square, got {A.shape}")
    if (A != A.T).any():
        raise ValueError("affinity must be exactly symmetric")
    if (A < 0).any():
        raise ValueError("affinity must be entrywise nonnegative")
    if np.diag(A).any():
        raise ValueError("affinity must have a zero diagonal")
    if not A.any():
        raise ValueError("affinity is identically zero")
    if not 2 <= k <= n:
        raise ValueError(f"k must satisfy 2 <= k <= n = {n}, got {k}")

    deg = A.sum(axis=1)
    isolated = deg <= 0
    if isolated.any():
        warnings.warn(
            f"{int(isolated.sum())} isolated point(s) in the affinity; "
            "k-means will place them arbitrarily"
        )
    dinv = np.zeros(n)
    dinv[~isolated] = deg[~isolated] ** -0.5
    L = np.eye(n) - dinv[:, None] * A * dinv[None, :]
    L = (L + L.T) / 2.0
    _, vecs = np.linalg.eigh(L)
    E = vecs[:, :k].copy()
    for j in range(k):  # fix eigenvector signs for determinism
        i = int(np.argmax(np.abs(E[:, j])))
        if E[i, j] < 0:
            E[:, j] = -E[:, j]
    norms = np.linalg.norm(E, axis=1)
    zero_rows = norms <= 0
    if zero_rows.any():
        warnings.warn("zero rows in the spectral embedding left at the origin")
        norms[zero_rows] = 1.0
    E /= norms[:, None]
    return _kmeans(E, k, restarts, seed)


def run_segmentation(X, config):
    """coefficient_matrix -> affinity -> spectral_cluster, with diagnostics."""
    coeff = coefficient_matrix(X, config)
    A = affinity(coeff)
    labels = spectral_cluster(A, config.k, restarts=config.kmeans_restarts,
                              seed=config.seed)
    return SegmentationResult(labels=labels, coefficients=coeff, affinity=A)


def segment(X, config):
    """Cluster the columns of X into config.k groups; returns integer labels."""
    return run_segmentation(X, config).labels
