"""Dense two-phase primal simplex with Bland's rule.

Solves  min c'v  s.t.  A v <= b,  v >= 0  on a full numpy tableau.
Rows with negative right-hand sides are negated and given artificial
variables; phase 1 drives the artificials to zero, phase 2 optimizes
the real objective.  Entering column: lowest index with negative
reduced cost; leaving row: lowest basis-variable index among the
minimum ratios.  Bland's rule makes cycling impossible at the cost of
speed, which is fine at the problem sizes this is used for.
"""

import numpy as np

_RC_TOL = 1e-9
_PIV_TOL = 1e-11


class InfeasibleError(ValueError):
    pass


class UnboundedError(ValueError):
    pass


def _pivot(tab, basis, row, col):
    tab[row, :] /= tab[row, col]
    for r in range(tab.shape[0]):
        if r != row and tab[r, col] != 0.0:
            tab[r, :] -= tab[r, col] * tab[row, :]
    basis[row] = col


def _bland_iterate(tab, basis, ncols, maxiter):
    # objective row is tab[-1, :]; rhs column is tab[:, -1]
    for _ in range(maxiter):
        col = -1
        for j in range(ncols):
            if tab[-1, j] < -_RC_TOL:
                col = j
                break
        if col < 0:
            return
        row = -1
        best_ratio = np.inf
        for i in range(tab.shape[0] - 1):
            a = tab[i, col]
            if a > _PIV_TOL:
                ratio = tab[i, -1] / a
                if ratio < best_ratio - 1e-12 or (
                    abs(ratio - best_ratio) <= 1e-12
                    and (row < 0 or basis[i] < basis[row])
                ):
                    best_ratio = ratio
                    row = i
        if row < 0:
            raise UnboundedError("LP is unbounded")
        _pivot(tab, basis, row, col)
    raise RuntimeError("simplex iteration limit reached")


def solve_lp(c, a, b, maxiter: int = 100000):
    """Minimize c'v subject to A v <= b, v >= 0.

    Returns (v, objective).  Raises InfeasibleError / UnboundedError.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float)).copy()
    c = np.atleast_1d(np.asarray(c, dtype=float))
    m, n = a.shape
    if b.shape[0] != m or c.shape[0] != n:
        raise ValueError("inconsistent LP dimensions")

    rows = a.copy()
    flip = b < 0
    rows[flip] *= -1.0
    b[flip] *= -1.0
    slack = np.eye(m)
    slack[flip] *= -1.0  # negated rows carry surplus columns
    art_rows = np.flatnonzero(flip)
    n_slack = m
    n_art = art_rows.size

    ncols = n + n_slack + n_art
    tab = np.zeros((m + 1, ncols + 1))
    tab[:m, :n] = rows
    tab[:m, n : n + n_slack] = slack
    for idx, r in enumerate(art_rows):
        tab[r, n + n_slack + idx] = 1.0
    tab[:m, -1] = b

    basis = np.empty(m, dtype=int)
    basis[:] = n + np.arange(m)  # slacks
    for idx, r in enumerate(art_rows):
        basis[r] = n + n_slack + idx

    if n_art:
        # phase 1: minimize the sum of artificials
        tab[-1, :] = 0.0
        tab[-1, n + n_slack : ncols] = 1.0
        for r in art_rows:
            tab[-1, :] -= tab[r, :]
        _bland_iterate(tab, basis, ncols, maxiter)
        if tab[-1, -1] < -1e-7:
            raise InfeasibleError("LP is infeasible")
        # drive lingering artificials out of the basis where possible;
        # rows that cannot pivot are redundant and get dropped
        drop = []
        for i in range(m):
            if basis[i] >= n + n_slack:
                for j in range(n + n_slack):
                    if abs(tab[i, j]) > _PIV_TOL:
                        _pivot(tab, basis, i, j)
                        break
                else:
                    drop.append(i)
        if drop:
            keep_rows = [i for i in range(m) if i not in drop]
            tab = np.ascontiguousarray(tab[keep_rows + [m], :])
            basis = basis[keep_rows]
            m = len(keep_rows)

    # phase 2 objective row over original + slack columns only
    real = n + n_slack
    tab[-1, :] = 0.0
    tab[-1, :n] = c
    for i in range(m):
        if basis[i] < n and c[basis[i]] != 0.0:
            tab[-1, :] -= c[basis[i]] * tab[i, :]
    tab2 = np.ascontiguousarray(tab[:, list(range(real)) + [ncols]])
    _bland_iterate(tab2, basis, real, maxiter)

    v = np.zeros(n)
    for i in range(m):
        if basis[i] < n:
            v[basis[i]] = tab2[i, -1]
    return v, float(c @ v)
