"""Convergence-rate diagnostics for single-cluster regression.

rate_trace refits growing prefixes of a dataset and records, per
checkpoint n, the Gram extremes lambda_min(n)/lambda_max(n), the
coefficient error against the generating truth, and three theoretical
rate shapes evaluated with constant 1:

    bound_thm2      sqrt(lambda_max) log(lambda_max)^(1/2+delta) / lambda_min
    bound_thm3      sqrt(lambda_max) log(lambda_max)^(1/2)       / lambda_min
    bound_classical log(lambda_max)^(1/2) / sqrt(lambda_min)

The bounds are asymptotic envelopes with unknown constants, so they are
meant for shape and slope comparisons, never level comparisons.  When
lambda_max <= 1 (nonpositive log) or lambda_min <= 0 the three bounds
are recorded as missing (NaN) for that row rather than raising.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import linalg, regress
from .core import Dataset, RegConstraint, loss_exponent

CSV_HEADER = "n,lambda_min,lambda_max,error,bound_thm2,bound_thm3,bound_classical"
MIN_SLOPE_ROWS = 4


@dataclass(frozen=True)
class RateRow:
    n: int
    lambda_min: float
    lambda_max: float
    error: float
    bound_thm2: float
    bound_thm3: float
    bound_classical: float
    delta_slack: float


def _bounds(lam_min: float, lam_max: float, delta_slack: float):
    if lam_max <= 1.0 or lam_min <= 0.0:
        return math.nan, math.nan, math.nan
    log_max = math.log(lam_max)
    thm2 = math.sqrt(lam_max) * log_max ** (0.5 + delta_slack) / lam_min
    thm3 = math.sqrt(lam_max) * math.sqrt(log_max) / lam_min
    classical = math.sqrt(log_max) / math.sqrt(lam_min)
    return thm2, thm3, classical


def rate_trace(
    dataset: Dataset,
    checkpoints,
    p=2,
    reg: RegConstraint | None = None,
    delta_slack: float = 0.1,
) -> list[RateRow]:
    """Fit the first n samples at each checkpoint and report rate rows.

    Requires a single-cluster ground truth with coefficients; the
    checkpoints must be strictly increasing, each at least d and at
    most the dataset size.
    """
    reg = reg or RegConstraint.none()
    pexp = loss_exponent(p)
    truth = dataset.truth
    if truth is None or truth.coefficients is None:
        raise ValueError("rate_trace requires a dataset with ground-truth coefficients")
    if truth.coefficients.k != 1:
        raise ValueError("rate_trace requires a single-cluster ground truth")
    if delta_slack <= 0:
        raise ValueError("delta_slack must be positive")
    points = [int(c) for c in checkpoints]
    if not points:
        raise ValueError("checkpoints must be nonempty")
    if any(b <= a for a, b in zip(points, points[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    if points[0] < dataset.d:
        raise ValueError("checkpoints must be at least the covariate dimension")
    if points[-1] > dataset.n:
        raise ValueError("checkpoint exceeds the dataset size")

    beta_true = truth.coefficients.betas[0]
    rows = []
    for m in points:
        xs, ys = dataset.x[:m], dataset.y[:m]
        rep = regress.fit(xs, ys, pexp, reg.cluster(0))
        err = float(np.linalg.norm(rep.beta - beta_true))
        lam_min, lam_max = linalg.eigen_extremes(linalg.gram(xs))
        thm2, thm3, classical = _bounds(lam_min, lam_max, delta_slack)
        rows.append(
            RateRow(
                n=m,
                lambda_min=lam_min,
                lambda_max=lam_max,
                error=err,
                bound_thm2=thm2,
                bound_thm3=thm3,
                bound_classical=classical,
                delta_slack=delta_slack,
            )
        )
    return rows


def rate_slope(rows) -> float:
    """Least-squares slope of log(error) against log(n).

    Rows with nonpositive error carry no log information and are
    skipped; fewer than four usable rows is an error.
    """
    usable = [(r.n, r.error) for r in rows if r.error > 0]
    if len(usable) < MIN_SLOPE_ROWS:
        raise ValueError(
            f"rate_slope needs at least {MIN_SLOPE_ROWS} rows with positive error"
        )
    logs_n = np.array([math.log(n) for n, _ in usable])
    logs_e = np.array([math.log(e) for _, e in usable])
    design = np.column_stack([np.ones(len(usable)), logs_n])
    res = linalg.solve_ls(design, logs_e)
    return float(res.beta[1])


def _field(v: float) -> str:
    return "" if math.isnan(v) else f"{v:.17g}"


def write_rate_csv(rows, path) -> None:
    """CSV with the fixed 7-column header; missing bounds are empty
    fields.  delta_slack is a computation parameter, not a column."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    str(r.n),
                    _field(r.lambda_min),
                    _field(r.lambda_max),
                    _field(r.error),
                    _field(r.bound_thm2),
                    _field(r.bound_thm3),
                    _field(r.bound_classical),
                ]
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_rate_csv(path) -> list[RateRow]:
    """Inverse of write_rate_csv up to delta_slack, which is not
    serialized and comes back as NaN."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}:1: expected header {CSV_HEADER!r}")
    rows = []
    for ln_no, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 7:
            raise ValueError(f"{path}:{ln_no}: expected 7 fields, found {len(parts)}")
        try:
            n = int(parts[0])
            vals = [float(p) if p else math.nan for p in parts[1:]]
        except ValueError:
            raise ValueError(f"{path}:{ln_no}: malformed numeric field") from None
        rows.append(RateRow(n, *vals, delta_slack=math.nan))
    return rows
