"""Compiled inner loop of the trace-lasso ADM solver.

Step-for-step twin of `casseg._adm_py.adm_solve`; runs the whole iteration
without touching the interpreter (LAPACK dgesdd for the SVT step, BLAS for
the w-step) and releases the GIL so per-point solves can run in parallel
threads.
"""

from libc.math cimport fabs

import numpy as np

from scipy.linalg.cython_blas cimport dgemm, dgemv
from scipy.linalg.cython_lapack cimport dgesdd


cdef int _adm_loop(
    int d, int n, int r,
    double* X,        # d*n, Fortran order, unit columns
    double* xty,      # n
    double* Q,        # n*n eigenvectors of X^T X, Fortran order
    double* evals,    # n eigenvalues of X^T X
    double lam, double mu0, double rho, double mu_max,
    double eps, int max_iter,
    double* w,        # n; in: start point, out: solution
    double* J,        # d*n out
    double* Y,        # d*n scratch, zeroed by caller
    double* G,        # d*n scratch (SVD input / shrunk reconstruction)
    double* U,        # d*r scratch
    double* VT,       # r*n scratch
    double* s,        # r scratch
    double* b,        # n scratch
    double* tmp,      # n scratch
    double* wn,       # n scratch
    double* work, int lwork, int* iwork,
    int* out_iters, int* out_converged, double* out_resid,
) noexcept nogil:
    cdef double mu = mu0
    cdef double one = 1.0, zero = 0.0
    cdef double tau, c1, c2, c3, acc, v
    cdef int t, i, j, p, info = 0, inc = 1
    cdef char jobz = b'S', cn = b'N', ct = b'T'

    for j in range(n):
        for i in range(d):
            J[j * d + i] = X[j * d + i] * w[j]
            Y[j * d + i] = 0.0

    for t in range(max_iter):
        tau = lam / mu
        for j in range(n):
            for i in range(d):
                G[j * d + i] = X[j * d + i] * w[j] - Y[j * d + i] / mu
        dgesdd(&jobz, &d, &n, G, &d, s, U, &d, VT, &r, work, &lwork, iwork, &info)
        if info != 0:
            return info
        p = 0
        while p < r and s[p] > tau:
            p += 1
        if p > 0:
            for j in range(p):
                v = s[j] - tau
                for i in range(d):
                    U[j * d + i] *= v
            dgemm(&cn, &cn, &d, &n, &p, &one, U, &d, VT, &r, &zero, G, &d)
        else:
            for i in range(d * n):
                G[i] = 0.0
        # G now holds the new J iterate
        for j in range(n):
            acc = 0.0
            for i in range(d):
                acc += X[j * d + i] * (Y[j * d + i] + mu * G[j * d + i])
            b[j] = xty[j] + acc
        dgemv(&ct, &n, &n, &one, Q, &n, b, &inc, &zero, tmp, &inc)
        for j in range(n):
            tmp[j] /= evals[j] + mu
        dgemv(&cn, &n, &n, &one, Q, &n, tmp, &inc, &zero, wn, &inc)
        c1 = 0.0
        c3 = 0.0
        for j in range(n):
            for i in range(d):
                v = G[j * d + i] - X[j * d + i] * wn[j]
                Y[j * d + i] += mu * v
                if fabs(v) > c3:
                    c3 = fabs(v)
                v = G[j * d + i] - J[j * d + i]
                if fabs(v) > c1:
                    c1 = fabs(v)
                J[j * d + i] = G[j * d + i]
        c2 = 0.0
        for j in range(n):
            v = fabs(wn[j] - w[j])
            if v > c2:
                c2 = v
            w[j] = wn[j]
        mu = rho * mu
        if mu > mu_max:
            mu = mu_max
        out_iters[0] = t + 1
        out_resid[0] = c3
        if c1 <= eps and c2 <= eps and c3 <= eps:
            out_converged[0] = 1
            return 0
    out_converged[0] = 0
    return 0


def adm_solve(X, xty, Q, evals, double lam, double mu0, double rho,
              double mu_max, double eps, int max_iter, w0):
    """Compiled equivalent of `casseg._adm_py.adm_solve`; same signature."""
    cdef double[::1, :] X_f = np.asfortranarray(X, dtype=np.float64)
    cdef double[::1, :] Q_f = np.asfortranarray(Q, dtype=np.float64)
    cdef double[::1] xty_v = np.ascontiguousarray(xty, dtype=np.float64)
    cdef double[::1] evals_v = np.ascontiguousarray(evals, dtype=np.float64)
    cdef int d = X_f.shape[0]
    cdef int n = X_f.shape[1]
    cdef int r = min(d, n)

    w_arr = np.ascontiguousarray(w0, dtype=np.float64).copy()
    J_arr = np.zeros((d, n), order="F")
    cdef double[::1] w_v = w_arr
    cdef double[::1, :] J_v = J_arr
    cdef double[::1, :] Y_v = np.zeros((d, n), order="F")
    cdef double[::1, :] G_v = np.zeros((d, n), order="F")
    cdef double[::1, :] U_v = np.zeros((d, r), order="F")
    cdef double[::1, :] VT_v = np.zeros((r, n), order="F")
    cdef double[::1] s_v = np.zeros(r)
    cdef double[::1] b_v = np.zeros(n)
    cdef double[::1] tmp_v = np.zeros(n)
    cdef double[::1] wn_v = np.zeros(n)
    cdef int[::1] iwork = np.zeros(8 * r, dtype=np.intc)

    # LAPACK workspace query for dgesdd
    cdef char jobz = b'S'
    cdef double wkopt = 0.0
    cdef int lwork = -1, info = 0
    dgesdd(&jobz, &d, &n, &G_v[0, 0], &d, &s_v[0], &U_v[0, 0], &d,
           &VT_v[0, 0], &r, &wkopt, &lwork, &iwork[0], &info)
    if info != 0:
        raise np.linalg.LinAlgError(f"SVD workspace query failed (info={info})")
    lwork = int(wkopt)
    cdef double[::1] work = np.zeros(lwork)

    cdef int iters = 0, converged = 0
    cdef double resid = 0.0
    cdef int status
    with nogil:
        status = _adm_loop(
            d, n, r, &X_f[0, 0], &xty_v[0], &Q_f[0, 0], &evals_v[0],
            lam, mu0, rho, mu_max, eps, max_iter,
            &w_v[0], &J_v[0, 0], &Y_v[0, 0], &G_v[0, 0], &U_v[0, 0],
            &VT_v[0, 0], &s_v[0], &b_v[0], &tmp_v[0], &wn_v[0],
            &work[0], lwork, &iwork[0], &iters, &converged, &resid)
    if status != 0:
        raise np.linalg.LinAlgError(
            f"SVD failed to converge in ADM loop (info={status})")
    return w_arr, np.ascontiguousarray(J_arr), iters, bool(converged), resid
