"""Dense symmetric linear algebra used by the regression solvers.

Everything here is written against small d x d matrices (Gram matrices
of the covariates).  eigen_extremes runs a cyclic Jacobi sweep rather
than delegating to a library eigensolver so that the spectral values
used by the diagnostics are produced by code under test in this
repository; solve_ls factors the normal equations with diagonal-pivoted
Cholesky and falls back to the minimum-norm solution on rank
deficiency.
"""

from dataclasses import dataclass

import numpy as np

SYM_TOL = 1e-12
PIVOT_RTOL = 1e-10  # pivot < PIVOT_RTOL * max initial diagonal => deficient
JACOBI_OFFDIAG_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def gram(x: np.ndarray) -> np.ndarray:
    """Gram matrix sum_i x_i x_i', explicitly symmetrized."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    g = x.T @ x
    return (g + g.T) / 2.0


def _check_symmetric(m: np.ndarray) -> np.ndarray:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix must be finite")
    scale = max(1.0, float(np.abs(m).max()))
    if np.abs(m - m.T).max() > SYM_TOL * scale:
        raise ValueError("matrix is not symmetric")
    return (m + m.T) / 2.0


def eigen_extremes(m: np.ndarray) -> tuple:
    """(lambda_min, lambda_max) of a symmetric matrix by cyclic Jacobi.

    Rotations sweep the upper triangle until the largest off-diagonal
    magnitude drops below 1e-12 (or below 1e-15 relative to the
    diagonal scale, whichever is reached first), capped at 100 sweeps.
    """
    a = _check_symmetric(m).copy()
    d = a.shape[0]
    if d == 1:
        return float(a[0, 0]), float(a[0, 0])
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.abs(a - np.diag(np.diag(a))).max()
        diag_scale = max(1e-300, np.abs(np.diag(a)).max())
        if off < JACOBI_OFFDIAG_TOL or off < 1e-15 * diag_scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * diag_scale:
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                # smaller-angle root; guard overflow in theta**2
                if abs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                    if theta == 0.0:
                        t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = a[q, p] = 0.0
    diag = np.diag(a)
    return float(diag.min()), float(diag.max())


@dataclass(frozen=True)
class LsResult:
    beta: np.ndarray
    rank: int
    rank_deficient: bool


def _pivoted_cholesky(g: np.ndarray):
    """Diagonal-pivoted Cholesky of a PSD matrix.

    Returns (perm, L, rank) with g[perm][:, perm] ~= L @ L.T restricted
    to the leading rank columns of L.
    """
    d = g.shape[0]
    a = g.copy()
    perm = list(range(d))
    threshold = PIVOT_RTOL * max(0.0, float(np.diag(g).max(initial=0.0)))
    lower = np.zeros((d, d))
    rank = 0
    for j in range(d):
        diag = np.diag(a)[j:]
        piv = j + int(np.argmax(diag))
        if a[piv, piv] <= threshold:
            break
        if piv != j:
            a[[j, piv], :] = a[[piv, j], :]
            a[:, [j, piv]] = a[:, [piv, j]]
            lower[[j, piv], :] = lower[[piv, j], :]
            perm[j], perm[piv] = perm[piv], perm[j]
        lower[j, j] = np.sqrt(a[j, j])
        if j + 1 < d:
            lower[j + 1 :, j] = a[j + 1 :, j] / lower[j, j]
            a[j + 1 :, j + 1 :] -= np.outer(lower[j + 1 :, j], lower[j + 1 :, j])
        rank = j + 1
    return np.array(perm), lower[:, :rank], rank


def solve_ls(x: np.ndarray, y: np.ndarray) -> LsResult:
    """Least squares via pivoted Cholesky of the normal equations.

    Full rank: two triangular solves on X'X beta = X'y.  Deficient rank
    (pivot below 1e-10 of the largest initial diagonal): returns the
    minimum-norm solution built from the partial factor, with the
    rank_deficient flag set.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape[0] != y.shape[0]:
        raise ValueError("x and y disagree on the number of samples")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("x and y must be finite")
    d = x.shape[1]
    g = gram(x)
    c = x.T @ y
    perm, lower, rank = _pivoted_cholesky(g)
    if rank == 0:
        return LsResult(beta=np.zeros(d), rank=0, rank_deficient=True)
    if rank == d:
        z = np.linalg.solve(lower, c[perm])
        w = np.linalg.solve(lower.T, z)
        beta = np.empty(d)
        beta[perm] = w
        return LsResult(beta=beta, rank=d, rank_deficient=False)
    # minimum-norm solution: with U = P L (full column rank, G = U U'),
    # beta = U (U'U)^{-1} (U'U)^{-1} U' c lies in range(G), orthogonal
    # to the null space, and satisfies the (consistent) normal equations.
    u = np.zeros((d, rank))
    u[perm, :] = lower
    utu = u.T @ u
    rhs = np.linalg.solve(utu, u.T @ c)
    t = np.linalg.solve(utu, rhs)
    return LsResult(beta=u @ t, rank=rank, rank_deficient=True)
