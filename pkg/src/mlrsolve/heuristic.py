"""Alternating minimization for the mixture objective.

alternate_minimize rotates between the best-response assignment (each
sample to its minimal-residual cluster) and per-cluster constrained
refits.  Clusters that lose all samples are reseeded with the globally
worst-fit sample before refitting, which keeps the objective monotone
(the moved sample can only fit better alone, its donor cluster only
better without it).  multistart reruns the procedure from seeds
seed + restart_index and keeps the best run.
"""

import time
from dataclasses import dataclass, replace

import numpy as np

from . import regress
from .core import (
    Assignment,
    CoefficientSet,
    Dataset,
    RegConstraint,
    SolveResult,
    best_assignment,
    loss_exponent,
    residual_matrix,
)
from .rng import Xoshiro256PP

_INITS = ("random_coefficients", "random_assignment", "given")


@dataclass(frozen=True)
class AmOptions:
    restarts: int = 32
    max_iters: int = 200
    seed: int = 0
    init: str = "random_coefficients"

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be positive")
        if self.init not in _INITS:
            raise ValueError(f"unknown init mode {self.init!r}")


def _check_reg(reg: RegConstraint, k: int) -> RegConstraint:
    if reg.kind != "none" and reg.bounds.size != k:
        raise ValueError("regularization bounds must have one entry per cluster")
    return reg


def _repair_empty(labels: np.ndarray, dataset: Dataset, coeffs: CoefficientSet, k: int):
    """Move the worst-fit sample into each empty cluster (lowest k first)."""
    for empty in range(k):
        counts = np.bincount(labels, minlength=k)
        if counts[empty] > 0:
            continue
        movable = counts[labels] >= 2  # donors must keep at least one sample
        if not np.any(movable):
            continue
        resid = np.abs(
            dataset.y - np.einsum("ij,ij->i", dataset.x, coeffs.betas[labels])
        )
        resid[~movable] = -1.0
        labels[int(np.argmax(resid))] = empty


def _refit(dataset: Dataset, labels: np.ndarray, k: int, pexp: int, reg: RegConstraint):
    betas = np.zeros((k, dataset.d))
    total = 0.0
    for kk in range(k):
        mask = labels == kk
        rep = regress.fit(dataset.x[mask], dataset.y[mask], pexp, reg.cluster(kk))
        betas[kk] = rep.beta
        total += rep.loss
    return CoefficientSet(betas), total / dataset.n


def alternate_minimize(
    dataset: Dataset,
    k: int,
    p=2,
    reg: RegConstraint | None = None,
    init_coeffs: CoefficientSet | None = None,
    opts: AmOptions | None = None,
    _trace: list | None = None,
) -> SolveResult:
    """One alternating-minimization run; stops at an assignment fixed point.

    init modes: "random_coefficients" draws each beta entry uniformly
    from [-r, r] with r = max|y| / max(1, min_i ||x_i||); "random_
    assignment" draws labels uniformly; "given" starts from init_coeffs.
    At a fixed point the returned assignment is exactly the best
    response to the returned coefficients.
    """
    opts = opts or AmOptions()
    reg = _check_reg(reg or RegConstraint.none(), k)
    pexp = loss_exponent(p)
    regress.check_supported(pexp, reg.kind)
    if k < 1:
        raise ValueError("k must be positive")
    t0 = time.perf_counter()
    rng = Xoshiro256PP(opts.seed)

    if opts.init == "given":
        if init_coeffs is None:
            raise ValueError("init='given' requires init_coeffs")
        start = init_coeffs
    elif opts.init == "random_coefficients":
        radius = float(np.abs(dataset.y).max()) / max(
            1.0, float(np.linalg.norm(dataset.x, axis=1).min())
        )
        draws = rng.uniforms(k * dataset.d).reshape(k, dataset.d)
        start = CoefficientSet((2.0 * draws - 1.0) * radius)
    else:
        start = None

    if start is not None:
        labels = best_assignment(dataset, start, pexp).labels
        _repair_empty(labels, dataset, start, k)
    else:
        labels = np.array([rng.below(k) for _ in range(dataset.n)], dtype=np.int64)

    coeffs, obj = _refit(dataset, labels, k, pexp, reg)
    if _trace is not None:
        _trace.append(obj)
    for _ in range(opts.max_iters - 1):
        new_labels = best_assignment(dataset, coeffs, pexp).labels
        _repair_empty(new_labels, dataset, coeffs, k)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        coeffs, obj = _refit(dataset, labels, k, pexp, reg)
        if _trace is not None:
            _trace.append(obj)
    return SolveResult(
        coefficients=coeffs,
        assignment=Assignment(labels),
        objective=obj,
        certified_optimal=False,
        nodes_explored=0,
        wall_time=time.perf_counter() - t0,
    )


def multistart(
    dataset: Dataset,
    k: int,
    p=2,
    reg: RegConstraint | None = None,
    opts: AmOptions | None = None,
) -> SolveResult:
    """Best of opts.restarts runs, restart j seeded with opts.seed + j.

    Ties keep the earliest restart, so results are reproducible and
    restarts=1 coincides with a single alternate_minimize call.
    """
    opts = opts or AmOptions()
    t0 = time.perf_counter()
    best = None
    for j in range(opts.restarts):
        child = replace(opts, seed=opts.seed + j)
        result = alternate_minimize(dataset, k, p, reg, opts=child)
        if best is None or result.objective < best.objective:
            best = result
    best.wall_time = time.perf_counter() - t0
    return best
