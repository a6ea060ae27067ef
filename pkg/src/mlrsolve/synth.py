"""Synthetic mixed-regression datasets with reproducible streams.

generate() consumes one Xoshiro256PP stream in a fixed, documented
order: (1) the label shuffle (exact per-cluster counts, Fisher-Yates),
(2) covariate draws row-major, (3) noise draws.  Changing any spec
field changes the data; equal specs produce bit-identical datasets.

Covariate kinds: "uniform01_with_intercept" (d-1 uniform [0,1) columns
plus a trailing all-ones column), "iid_gaussian", and "custom" (matrix
supplied in the spec).  Noise kinds: "gaussian", "uniform_pm1"
(uniform on [-1, 1)), "rademacher" (+-1), and "mds_scaled", a
martingale-difference sequence eps_i = eta_i * s_i with eta iid
standard normal and s_i = 1 + min(|eps_{i-1}|, 1)/2 (eps_0 taken as 0).

counterexample() builds the one-covariate instance y = beta_label +
sigma * eps with beta in {delta, 0} and eps in {+1, -1}: when n is
divisible by 4 the four (beta, eps) combinations appear in exact
quarters (then shuffled), otherwise both coins are drawn per sample.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import CoefficientSet, Dataset, GroundTruth
from .rng import Xoshiro256PP

_COVARIATE_KINDS = ("uniform01_with_intercept", "iid_gaussian", "custom")
_NOISE_KINDS = ("gaussian", "uniform_pm1", "rademacher", "mds_scaled")


@dataclass(eq=False)
class GeneratorSpec:
    n: int
    d: int
    k: int
    weights: np.ndarray
    coefficients: np.ndarray  # (k, d) truth
    covariates: str = "uniform01_with_intercept"
    noise: str = "gaussian"
    noise_scale: float = 0.0
    seed: int = 0
    custom_x: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 1 or self.d < 1 or self.k < 1:
            raise ValueError("n, d and k must be positive")
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if w.shape != (self.k,):
            raise ValueError("weights must have one entry per cluster")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        if self.n * w.min() < 1.0:
            raise ValueError("every cluster needs an expected count of at least 1")
        b = np.atleast_2d(np.asarray(self.coefficients, dtype=float))
        if b.shape != (self.k, self.d):
            raise ValueError("coefficients must be a k x d matrix")
        if not np.all(np.isfinite(b)):
            raise ValueError("coefficients must be finite")
        if self.covariates not in _COVARIATE_KINDS:
            raise ValueError(f"unknown covariate kind {self.covariates!r}")
        if self.noise not in _NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.noise!r}")
        if not (math.isfinite(self.noise_scale) and self.noise_scale >= 0):
            raise ValueError("noise_scale must be finite and nonnegative")
        if self.covariates == "custom":
            if self.custom_x is None:
                raise ValueError("covariates='custom' requires custom_x")
            cx = np.atleast_2d(np.asarray(self.custom_x, dtype=float))
            if cx.shape != (self.n, self.d):
                raise ValueError("custom_x must be an n x d matrix")
            self.custom_x = cx
        self.weights = w
        self.coefficients = b


@dataclass(frozen=True)
class CounterexampleSpec:
    n: int
    delta: float
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not (math.isfinite(self.delta) and self.delta >= 0):
            raise ValueError("delta must be finite and nonnegative")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError("sigma must be finite and positive")


def _exact_counts(n: int, weights: np.ndarray) -> np.ndarray:
    """Largest-remainder apportionment of n samples to the weights."""
    raw = n * weights
    counts = np.floor(raw).astype(int)
    short = n - counts.sum()
    if short > 0:
        frac = raw - counts
        order = np.lexsort((np.arange(len(weights)), -frac))
        counts[order[:short]] += 1
    return counts


def _draw_noise(rng: Xoshiro256PP, kind: str, n: int) -> np.ndarray:
    if kind == "gaussian":
        return rng.gaussians(n)
    if kind == "uniform_pm1":
        return 2.0 * rng.uniforms(n) - 1.0
    if kind == "rademacher":
        return np.where(rng.uniforms(n) < 0.5, -1.0, 1.0)
    eta = rng.gaussians(n)
    eps = np.empty(n)
    prev = 0.0
    for i in range(n):
        eps[i] = eta[i] * (1.0 + min(abs(prev), 1.0) / 2.0)
        prev = eps[i]
    return eps


def generate(spec: GeneratorSpec) -> Dataset:
    """Draw a dataset from the spec; equal specs give identical datasets."""
    rng = Xoshiro256PP(spec.seed)
    counts = _exact_counts(spec.n, spec.weights)
    labels = np.repeat(np.arange(spec.k, dtype=np.int64), counts)
    rng.shuffle(labels)

    if spec.covariates == "uniform01_with_intercept":
        x = np.ones((spec.n, spec.d))
        if spec.d > 1:
            x[:, : spec.d - 1] = rng.uniforms(spec.n * (spec.d - 1)).reshape(
                spec.n, spec.d - 1
            )
    elif spec.covariates == "iid_gaussian":
        x = rng.gaussians(spec.n * spec.d).reshape(spec.n, spec.d)
    else:
        x = spec.custom_x.copy()

    eps = _draw_noise(rng, spec.noise, spec.n)
    y = np.einsum("ij,ij->i", x, spec.coefficients[labels]) + spec.noise_scale * eps
    truth = GroundTruth(
        labels=labels,
        coefficients=CoefficientSet(spec.coefficients.copy()),
        noise_scale=spec.noise_scale,
    )
    return Dataset(x=x, y=y, truth=truth)


def counterexample(spec: CounterexampleSpec) -> Dataset:
    """Two-cluster constant-covariate instance that defeats the objective.

    Cluster 0 carries beta = delta, cluster 1 carries beta = 0; the
    responses take the four values {sigma, -sigma, delta+sigma,
    delta-sigma}.  For delta < sigma the optimal mixture fit groups
    samples by response sign instead of by generating cluster.
    """
    if spec.delta == 0.0:
        warnings.warn("delta = 0 makes the two clusters identical (degenerate)")
    elif spec.delta >= spec.sigma:
        warnings.warn("delta >= sigma leaves the counterexample regime")
    rng = Xoshiro256PP(spec.seed)
    n = spec.n
    if n % 4 == 0:
        quarter = n // 4
        labels = np.repeat(np.array([0, 0, 1, 1], dtype=np.int64), quarter)
        eps = np.repeat(np.array([1.0, -1.0, 1.0, -1.0]), quarter)
        order = np.arange(n)
        rng.shuffle(order)
        labels = labels[order]
        eps = eps[order]
    else:
        labels = np.array([rng.below(2) for _ in range(n)], dtype=np.int64)
        eps = np.array([1.0 if rng.below(2) == 0 else -1.0 for _ in range(n)])
    x = np.ones((n, 1))
    betas = np.array([[spec.delta], [0.0]])
    y = betas[labels, 0] + spec.sigma * eps
    truth = GroundTruth(
        labels=labels,
        coefficients=CoefficientSet(betas),
        noise_scale=spec.sigma,
    )
    return Dataset(x=x, y=y, truth=truth)


def collapse_support(dataset: Dataset):
    """Deduplicate exact (x, y) rows; multiplicities divided by their gcd.

    Returns (collapsed, counts): counts[u] is the original multiplicity
    of unique row u (first-occurrence order), and the collapsed dataset
    repeats row u counts[u]/gcd times, so its per-sample mean objective
    equals the full instance's for any coefficients.  Truth labels are
    taken from the first occurrence of each row.
    """
    seen: dict = {}
    order = []
    for i in range(dataset.n):
        key = (dataset.x[i].tobytes(), float(dataset.y[i]).hex())
        if key not in seen:
            seen[key] = [i, 0]
            order.append(key)
        seen[key][1] += 1
    firsts = np.array([seen[k][0] for k in order])
    counts = np.array([seen[k][1] for k in order])
    g = np.gcd.reduce(counts)
    reps = counts // g
    idx = np.repeat(firsts, reps)
    truth = None
    if dataset.truth is not None:
        truth = GroundTruth(
            labels=dataset.truth.labels[idx],
            coefficients=dataset.truth.coefficients,
            noise_scale=dataset.truth.noise_scale,
        )
    return Dataset(x=dataset.x[idx], y=dataset.y[idx], truth=truth), counts


def write_csv(dataset: Dataset, path) -> None:
    """Write x_0..x_{d-1},y[,label]; 17 significant digits, LF endings."""
    cols = [f"x_{j}" for j in range(dataset.d)] + ["y"]
    with_labels = dataset.truth is not None
    if with_labels:
        cols.append("label")
    lines = [",".join(cols)]
    for i in range(dataset.n):
        vals = [f"{v:.17g}" for v in dataset.x[i]] + [f"{dataset.y[i]:.17g}"]
        if with_labels:
            vals.append(str(int(dataset.truth.labels[i])))
        lines.append(",".join(vals))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> Dataset:
    """Read a dataset written by write_csv; labels restore a truth record
    (coefficients and noise scale have no columns and stay None)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty dataset file")
    header = lines[0].split(",")
    with_labels = header[-1] == "label"
    xcols = header[:-2] if with_labels else header[:-1]
    ycol = header[-2] if with_labels else header[-1]
    if ycol != "y" or any(h != f"x_{j}" for j, h in enumerate(xcols)) or not xcols:
        raise ValueError(f"{path}: expected header x_0..x_{{d-1}},y[,label]")
    d = len(xcols)
    xs, ys, labs = [], [], []
    for ln_no, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise ValueError(f"{path}:{ln_no}: expected {len(header)} fields")
        try:
            xs.append([float(v) for v in parts[:d]])
            ys.append(float(parts[d]))
            if with_labels:
                labs.append(int(parts[d + 1]))
        except ValueError as exc:
            raise ValueError(f"{path}:{ln_no}: {exc}") from None
    truth = GroundTruth(labels=np.array(labs, dtype=np.int64)) if with_labels else None
    return Dataset(x=np.array(xs), y=np.array(ys), truth=truth)
