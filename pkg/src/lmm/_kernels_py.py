"""Pure-Python kernels. Reference implementation and fallback for ``_kernels``."""

import numpy as np

OPTIMAL = 0
ITERATION_LIMIT = 1
UNBOUNDED = 2


def falling_factorial_sums(p, n, K):
    """Return ``F[l] = sum_i prod_{l'<l} (p_i - l'/n)`` for ``l = 0..K``."""
    p = np.asarray(p, dtype=np.float64)
    out = np.empty(K + 1)
    prod = np.ones_like(p)
    out[0] = p.size
    for l in range(1, K + 1):
        prod = prod * (p - (l - 1) / n)
        out[l] = prod.sum()
    return out


def phase1_simplex(A, b, max_iter, tol=1e-9):
    """Phase-1 simplex with Bland's rule on ``A x = b, x >= 0`` (``b >= 0``).

    One artificial variable per row. Returns ``(x, infeasibility, iterations,
    status)`` where ``infeasibility`` is the optimal sum of artificials.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    m, N = A.shape
    T = np.zeros((m + 1, N + m + 1))
    T[:m, :N] = A
    T[:m, N : N + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :N] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = np.arange(N, N + m)

    it = 0
    while True:
        entering = np.flatnonzero(T[m, :-1] < -tol)
        if entering.size == 0:
            status = OPTIMAL
            break
        if it >= max_iter:
            status = ITERATION_LIMIT
            break
        e = entering[0]
        col = T[:m, e]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            status = UNBOUNDED
            break
        ratios = T[rows, -1] / col[rows]
        rmin = ratios.min()
        ties = rows[ratios <= rmin + 1e-12 * max(1.0, abs(rmin))]
        r = ties[np.argmin(basis[ties])]

        T[r] /= T[r, e]
        factors = T[:, e].copy()
        factors[r] = 0.0
        T -= np.outer(factors, T[r])
        T[:m, -1] = np.maximum(T[:m, -1], 0.0)
        basis[r] = e
        it += 1

    x = np.zeros(N + m)
    x[basis] = T[:m, -1]
    return x[:N], float(x[N:].sum()), it, status
