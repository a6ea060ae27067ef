"""Single-cluster regression under a norm constraint.

fit() minimizes sum_i |y_i - x_i' beta|**p subject to ||beta||_q <=
bound, dispatching on (p, q):

* p=2, none: pivoted normal equations (linalg.solve_ls)
* p=2, l2:   secular equation ||(X'X + mu I)^{-1} X'y|| = bound,
             safeguarded Newton with bisection fallback
* p=2, l1:   projected gradient, exact sort-based l1-ball projection,
             constant step 1/lambda_max(X'X)
* p=2, l0:   exhaustive support enumeration, least squares per support
* p=1, none: least absolute deviations; the LP min sum t, t_i >=
             +-(y_i - x_i' beta) solved in its condensed
             interpolation-basis form (vertex exchange with a
             breakpoint line search; every exchange strictly decreases
             the objective, so the iteration cannot cycle)
* p=1, l1:   the same LP with beta = beta+ - beta- and
             sum(beta+ + beta-) <= bound, solved on a dense two-phase
             Bland tableau

(p=1, l2) and (p=1, l0) are rejected as unsupported.
"""

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import RegConstraint, loss_exponent
from .linalg import PIVOT_RTOL, eigen_extremes, gram, solve_ls
from .simplex import solve_lp

L0_ENUM_GUARD = 100000
SECULAR_RTOL = 1e-10
PGD_RTOL = 1e-10
PGD_MAX_ITERS = 100000
ACTIVE_TOL = 1e-8
LAD_ZERO_RTOL = 1e-12

_SUPPORTED = {(2, "none"), (2, "l2"), (2, "l1"), (2, "l0"), (1, "none"), (1, "l1")}


@dataclass(eq=False)
class FitReport:
    """beta, unnormalized loss sum_i |r_i|**p, constraint activity, iterations."""

    beta: np.ndarray
    loss: float
    active: bool
    iterations: int


def supported(p, kind: str) -> bool:
    return (loss_exponent(p), kind) in _SUPPORTED


def check_supported(p, kind: str) -> None:
    if not supported(p, kind):
        raise ValueError(
            f"unsupported loss/regularization combination: p={loss_exponent(p)}, q={kind}"
        )


def _loss(x, y, beta, pexp) -> float:
    r = y - x @ beta
    return float(np.sum(np.abs(r) ** pexp))


def fit(x: np.ndarray, y: np.ndarray, p=2, reg: RegConstraint | None = None) -> FitReport:
    """Constrained single-cluster fit; see the module docstring for the map.

    An empty sample set (n == 0) fits beta = 0 with zero loss, which is
    feasible for every constraint kind.
    """
    reg = reg or RegConstraint.none()
    pexp = loss_exponent(p)
    check_supported(pexp, reg.kind)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape[0] != y.shape[0]:
        raise ValueError("x and y disagree on the number of samples")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("x and y must be finite")
    d = x.shape[1]
    if x.shape[0] == 0:
        return FitReport(beta=np.zeros(d), loss=0.0, active=False, iterations=0)
    if reg.kind == "none":
        if pexp == 2:
            beta = solve_ls(x, y).beta
            return FitReport(beta, _loss(x, y, beta, 2), active=False, iterations=0)
        return _fit_lad(x, y)
    bound = reg.bound()
    if reg.kind == "l2":
        return _fit_l2_ball(x, y, bound)
    if reg.kind == "l1":
        if pexp == 2:
            return _fit_l1_ball(x, y, bound)
        return _fit_lad_l1(x, y, bound)
    return _fit_l0_subset(x, y, int(bound))


# ---------------------------------------------------------------- p=2, l2


def _fit_l2_ball(x, y, bound):
    ls = solve_ls(x, y)
    nrm = float(np.linalg.norm(ls.beta))
    if nrm <= bound:
        return FitReport(ls.beta, _loss(x, y, ls.beta, 2), active=False, iterations=0)
    if bound == 0.0:
        beta = np.zeros(x.shape[1])
        return FitReport(beta, _loss(x, y, beta, 2), active=True, iterations=0)
    g = gram(x)
    c = x.T @ y
    eye = np.eye(x.shape[1])
    lo = 0.0
    hi = float(np.linalg.norm(c)) / bound  # ||beta(hi)|| <= bound always
    mu = hi / 2.0
    beta = ls.beta
    iters = 0
    for iters in range(1, 201):
        beta = np.linalg.solve(g + mu * eye, c)
        nrm = float(np.linalg.norm(beta))
        f = nrm - bound
        if abs(f) <= SECULAR_RTOL * bound:
            break
        if f > 0.0:
            lo = mu
        else:
            hi = mu
        # Newton step on f(mu) = ||beta(mu)|| - bound
        w = np.linalg.solve(g + mu * eye, beta)
        fprime = -float(beta @ w) / nrm
        step = mu - f / fprime if fprime != 0.0 else mu
        mu = step if lo < step < hi else 0.5 * (lo + hi)
    return FitReport(beta, _loss(x, y, beta, 2), active=True, iterations=iters)


# ---------------------------------------------------------------- p=2, l1


def project_l1(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto the l1 ball (sort-and-threshold)."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    if radius == 0.0:
        return np.zeros_like(v)
    u = np.sort(a)[::-1]
    cum = np.cumsum(u)
    j = np.arange(1, len(u) + 1)
    rho = np.max(np.where(u - (cum - radius) / j > 0.0)[0]) + 1
    theta = (cum[rho - 1] - radius) / rho
    return np.sign(v) * np.maximum(a - theta, 0.0)


def _fit_l1_ball(x, y, bound):
    d = x.shape[1]
    g = gram(x)
    c = x.T @ y
    lmax = eigen_extremes(g)[1]
    if lmax <= 0.0:  # x is the zero matrix; the loss is constant
        beta = np.zeros(d)
        return FitReport(beta, _loss(x, y, beta, 2), active=False, iterations=0)
    step = 1.0 / lmax
    beta = project_l1(solve_ls(x, y).beta, bound)
    iters = 0
    for iters in range(1, PGD_MAX_ITERS + 1):
        grad = g @ beta - c
        nxt = project_l1(beta - step * grad, bound)
        delta = float(np.linalg.norm(nxt - beta))
        beta = nxt
        if delta <= PGD_RTOL * max(1.0, float(np.linalg.norm(beta))):
            break
    active = float(np.abs(beta).sum()) >= bound - ACTIVE_TOL * max(1.0, bound)
    return FitReport(beta, _loss(x, y, beta, 2), active=active, iterations=iters)


# ---------------------------------------------------------------- p=2, l0


def _fit_l0_subset(x, y, k0):
    d = x.shape[1]
    if k0 > d:
        raise ValueError("l0 bound exceeds the number of covariates")
    if math.comb(d, k0) > L0_ENUM_GUARD:
        raise ValueError(
            f"l0 enumeration guard: C({d},{k0}) exceeds {L0_ENUM_GUARD}"
        )
    best_beta = np.zeros(d)
    best_loss = _loss(x, y, best_beta, 2)
    best_size = 0
    count = 0
    for size in range(1, k0 + 1):
        for support in combinations(range(d), size):
            count += 1
            sub = solve_ls(x[:, support], y).beta
            beta = np.zeros(d)
            beta[list(support)] = sub
            loss = _loss(x, y, beta, 2)
            if loss < best_loss:
                best_loss = loss
                best_beta = beta
                best_size = size
    return FitReport(best_beta, best_loss, active=best_size == k0, iterations=count)


# ---------------------------------------------------------------- p=1, none


def _independent_columns(x):
    """Greedy maximal set of independent columns (modified Gram-Schmidt)."""
    work = x.astype(float).copy()
    d = work.shape[1]
    norms0 = np.linalg.norm(work, axis=0)
    tol = PIVOT_RTOL * max(norms0.max(initial=0.0), 0.0)
    chosen = []
    remaining = list(range(d))
    for _ in range(d):
        norms = np.linalg.norm(work[:, remaining], axis=0) if remaining else []
        if len(norms) == 0 or np.max(norms) <= tol:
            break
        j = remaining[int(np.argmax(norms))]
        chosen.append(j)
        q = work[:, j] / np.linalg.norm(work[:, j])
        remaining.remove(j)
        for m in remaining:
            work[:, m] -= q * (q @ work[:, m])
    return sorted(chosen)


def _initial_basis(xc):
    """d independent row indices by eliminination with partial pivoting."""
    work = xc.astype(float).copy()
    n, r = work.shape
    used = np.zeros(n, dtype=bool)
    basis = []
    for j in range(r):
        col = np.abs(work[:, j])
        col[used] = -1.0
        i = int(np.argmax(col))
        if col[i] <= 0.0:
            raise ValueError("rank collapse while seeding the LAD basis")
        used[i] = True
        basis.append(i)
        factors = work[:, j] / work[i, j]
        factors[used] = 0.0
        work -= np.outer(factors, work[i, :])
    return basis


def _fit_lad(x, y):
    """LAD by interpolation-vertex exchange (condensed primal simplex).

    The iterate always interpolates r = rank(X) rows.  For each basis
    position the two one-sided directional derivatives are evaluated;
    a negative one triggers a line search over the residual breakpoints
    (slope increases by 2|g_i| past each), and the first breakpoint
    where the slope turns nonnegative enters the basis.  Strict descent
    at every exchange guarantees termination at a global optimum.
    """
    n, d = x.shape
    cols = _independent_columns(x)
    if not cols:
        beta = np.zeros(d)
        return FitReport(beta, float(np.abs(y).sum()), active=False, iterations=0)
    xc = x[:, cols]
    xc_abs = np.abs(xc)
    y_abs = np.abs(y)
    r_dim = len(cols)
    basis = _initial_basis(xc)
    xb = xc[basis, :]
    beta_c = np.linalg.solve(xb, y[np.asarray(basis)])
    exchanges = 0
    max_exchanges = 200 * (n + r_dim) + 100
    scale_floor = 1e-30
    while True:
        resid = y - xc @ beta_c
        # residuals below rounding scale carry no sign information and
        # would fake descent directions; fold them into the kink mass
        row_scale = y_abs + xc_abs @ np.abs(beta_c) + 1.0
        resid[np.abs(resid) <= LAD_ZERO_RTOL * row_scale] = 0.0
        resid[np.asarray(basis)] = 0.0
        curr_obj = float(np.abs(y - xc @ beta_c).sum())
        improved = False
        for ell in range(r_dim):
            e = np.zeros(r_dim)
            e[ell] = 1.0
            delta = np.linalg.solve(xc[basis, :], e)
            gvec = xc @ delta
            gvec[np.asarray(basis)] = 0.0
            gvec[basis[ell]] = 1.0
            zero = resid == 0.0
            base = -float(np.sum(np.sign(resid[~zero]) * gvec[~zero]))
            bulge = float(np.sum(np.abs(gvec[zero])))
            scale = max(float(np.sum(np.abs(gvec))), scale_floor)
            if base + bulge < -1e-12 * scale:
                sign = 1.0
                slope = base + bulge
            elif -base + bulge < -1e-12 * scale:
                sign = -1.0
                slope = -base + bulge
            else:
                continue
            step_g = sign * gvec
            # positive breakpoints: residual and direction share a sign
            cand = (~zero) & (np.sign(resid) == np.sign(step_g)) & (step_g != 0.0)
            idx = np.flatnonzero(cand)
            ts = resid[idx] / step_g[idx]
            order = np.argsort(ts, kind="stable")
            enter = -1
            for pos in order:
                slope += 2.0 * abs(step_g[idx[pos]])
                if slope >= 0.0:
                    enter = int(idx[pos])
                    break
            if enter < 0:  # cannot happen: far-field slope is sum|g| > 0
                raise RuntimeError("LAD line search failed to terminate")
            leave = basis[ell]
            basis[ell] = enter
            new_beta = np.linalg.solve(xc[basis, :], y[np.asarray(basis)])
            new_obj = float(np.abs(y - xc @ new_beta).sum())
            if not new_obj < curr_obj:
                # descent is strict in exact arithmetic, so a stall is
                # rounding noise: revert and accept the current vertex
                basis[ell] = leave
                break
            beta_c = new_beta
            exchanges += 1
            improved = True
            break
        if not improved:
            break
        if exchanges > max_exchanges:
            raise RuntimeError("LAD exchange limit reached")
    beta = np.zeros(d)
    beta[cols] = beta_c
    return FitReport(beta, _loss(x, y, beta, 1), active=False, iterations=exchanges)


# ---------------------------------------------------------------- p=1, l1


def _fit_lad_l1(x, y, bound):
    """LAD with an l1 bound: split beta and solve the LP on a dense tableau.

    Variables v = [t (n), beta+ (d), beta- (d)]; rows are the two
    residual inequalities per sample plus the norm row.  At a simplex
    vertex beta+_j and beta-_j are never both basic (their columns are
    dependent), so the split sum equals ||beta||_1.
    """
    n, d = x.shape
    nv = n + 2 * d
    a = np.zeros((2 * n + 1, nv))
    b = np.zeros(2 * n + 1)
    # t_i + x_i'b+ - x_i'b- >= y_i   ->  -t - x b+ + x b- <= -y
    a[:n, :n] = -np.eye(n)
    a[:n, n : n + d] = -x
    a[:n, n + d :] = x
    b[:n] = -y
    # t_i - x_i'b+ + x_i'b- >= -y_i  ->  -t + x b+ - x b- <= y
    a[n : 2 * n, :n] = -np.eye(n)
    a[n : 2 * n, n : n + d] = x
    a[n : 2 * n, n + d :] = -x
    b[n : 2 * n] = y
    a[2 * n, n:] = 1.0
    b[2 * n] = bound
    c = np.zeros(nv)
    c[:n] = 1.0
    v, _ = solve_lp(c, a, b)
    beta = v[n : n + d] - v[n + d :]
    active = float(np.abs(beta).sum()) >= bound - ACTIVE_TOL * max(1.0, bound)
    return FitReport(beta, _loss(x, y, beta, 1), active=active, iterations=0)
