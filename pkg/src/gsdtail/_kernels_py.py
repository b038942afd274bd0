"""Pure-Python (numpy) versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np

_CHUNK = 65536


def tail_hits(R, U, A, T):
    """Count, for each row t of ``T``, the samples with R_n * (A^T U_n) > t componentwise.

    ``T`` may hold -inf for unconstrained coordinates.
    """
    R = np.asarray(R, dtype=float)
    U = np.asarray(U, dtype=float)
    A = np.asarray(A, dtype=float)
    T = np.atleast_2d(np.asarray(T, dtype=float))
    hits = np.zeros(T.shape[0], dtype=np.int64)
    for start in range(0, R.size, _CHUNK):
        X = R[start:start + _CHUNK, None] * (U[start:start + _CHUNK] @ A)
        hits += np.all(X[:, None, :] > T[None, :, :], axis=2).sum(axis=0)
    return hits


def pgd_box_qp(P, b, X0, max_iter, tol, lipschitz):
    """FISTA with function-value restart for min x^T P x over x >= b, one run per row of X0.

    Returns (X, values, converged); convergence is a projected-gradient step
    below ``tol * (1 + max|x|)``.
    """
    P = np.asarray(P, dtype=float)
    b = np.asarray(b, dtype=float)
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    n = X0.shape[0]
    X = np.empty_like(X0)
    values = np.empty(n)
    converged = np.zeros(n, dtype=bool)
    step = 1.0 / lipschitz
    for s in range(n):
        x = np.maximum(X0[s], b)
        y = x.copy()
        t = 1.0
        f = x @ P @ x
        for _ in range(max_iter):
            x_new = np.maximum(b, y - step * 2.0 * (P @ y))
            f_new = x_new @ P @ x_new
            if f_new > f:
                # momentum overshot: restart from x
                t = 1.0
                y = x.copy()
                x_new = np.maximum(b, x - step * 2.0 * (P @ x))
                f_new = x_new @ P @ x_new
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            y = x_new + ((t - 1.0) / t_new) * (x_new - x)
            x, t, f = x_new, t_new, f_new
            pg = np.maximum(b, x - step * 2.0 * (P @ x)) - x
            if np.abs(pg).max() <= tol * (1.0 + np.abs(x).max()):
                converged[s] = True
                break
        X[s] = x
        values[s] = f
    return X, values, converged
