"""Domain types and assignment primitives for mixed linear regression.

A problem instance couples a Dataset (covariate rows x, responses y,
optional ground truth) with a CoefficientSet (one coefficient vector per
cluster) and an Assignment giving each sample a cluster label.  The
mixture objective, best-response assignment, and permutation matching of
estimated against true clusters live here; everything else in the
package builds on these.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

MAX_MATCH_CLUSTERS = 8
RECOVERY_TOL = 1e-6  # matched coefficient error below this counts as recovery
ASSIGNMENT_TOL = 1e-9  # tolerance for the min-residual inclusion checks

_REG_KINDS = ("none", "l2", "l1", "l0")


@dataclass(frozen=True)
class LossConfig:
    """Per-sample loss |residual|**p; only p in {1, 2} is meaningful here."""

    p: int = 2

    def __post_init__(self):
        if self.p not in (1, 2):
            raise ValueError(f"loss exponent p must be 1 or 2, got {self.p!r}")


def loss_exponent(p) -> int:
    """Accept a LossConfig or a bare 1/2 and return the integer exponent."""
    if isinstance(p, LossConfig):
        return p.p
    if p in (1, 2):
        return int(p)
    raise ValueError(f"loss exponent p must be 1 or 2, got {p!r}")


@dataclass(eq=False)
class RegConstraint:
    """Per-cluster norm constraint ||beta_k||_q <= bounds[k].

    kind "none" means unconstrained (bounds must be omitted).  For kind
    "l0" the bounds are support-size caps and must be integers; the
    upper limit (<= d) is checked where the dimension is known.
    """

    kind: str = "none"
    bounds: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in _REG_KINDS:
            raise ValueError(f"unknown regularization kind {self.kind!r}")
        if self.kind == "none":
            if self.bounds is not None:
                raise ValueError("bounds must be omitted for kind 'none'")
            return
        if self.bounds is None:
            raise ValueError(f"kind {self.kind!r} requires bounds")
        b = np.atleast_1d(np.asarray(self.bounds, dtype=float))
        if b.ndim != 1 or b.size == 0:
            raise ValueError("bounds must be a nonempty vector")
        if not np.all(np.isfinite(b)) or np.any(b < 0):
            raise ValueError("bounds must be finite and nonnegative")
        if self.kind == "l0" and np.any(b != np.round(b)):
            raise ValueError("l0 bounds must be integers")
        self.bounds = b

    @staticmethod
    def none() -> "RegConstraint":
        return RegConstraint("none", None)

    def cluster(self, k: int) -> "RegConstraint":
        """Single-cluster view (bounds of length 1) for per-cluster fits."""
        if self.kind == "none":
            return self
        return RegConstraint(self.kind, self.bounds[k : k + 1])

    def bound(self) -> float:
        """The scalar bound of a single-cluster constraint."""
        if self.kind == "none":
            raise ValueError("unconstrained fit has no bound")
        if self.bounds.size != 1:
            raise ValueError("bound() needs a single-cluster constraint")
        return float(self.bounds[0])

    def identical_bounds(self) -> bool:
        if self.kind == "none":
            return True
        return bool(np.all(self.bounds == self.bounds[0]))


@dataclass(eq=False)
class CoefficientSet:
    """K coefficient vectors stacked row-wise; betas has shape (K, d)."""

    betas: np.ndarray

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.betas, dtype=float))
        if b.ndim != 2 or b.size == 0:
            raise ValueError("betas must be a nonempty K x d matrix")
        if not np.all(np.isfinite(b)):
            raise ValueError("betas must be finite")
        self.betas = b

    @property
    def k(self) -> int:
        return self.betas.shape[0]

    @property
    def d(self) -> int:
        return self.betas.shape[1]


@dataclass(eq=False)
class Assignment:
    """Cluster label per sample, values in [0, K)."""

    labels: np.ndarray

    def __post_init__(self):
        lab = np.atleast_1d(np.asarray(self.labels))
        if lab.ndim != 1 or lab.size == 0:
            raise ValueError("labels must be a nonempty vector")
        if not np.issubdtype(lab.dtype, np.integer):
            as_int = lab.astype(np.int64)
            if np.any(as_int != lab):
                raise ValueError("labels must be integers")
            lab = as_int
        else:
            lab = lab.astype(np.int64)
        if np.any(lab < 0):
            raise ValueError("labels must be nonnegative")
        self.labels = lab

    @property
    def n(self) -> int:
        return self.labels.shape[0]


@dataclass(eq=False)
class GroundTruth:
    """Generating labels and (when known) coefficients / noise scale."""

    labels: np.ndarray
    coefficients: CoefficientSet | None = None
    noise_scale: float | None = None

    def __post_init__(self):
        self.labels = Assignment(self.labels).labels
        if self.coefficients is not None and np.any(
            self.labels >= self.coefficients.k
        ):
            raise ValueError("truth labels exceed the number of clusters")


@dataclass(eq=False)
class Dataset:
    """Covariate rows x (n x d), responses y (n,), optional ground truth."""

    x: np.ndarray
    y: np.ndarray
    truth: GroundTruth | None = None

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError("x must be a nonempty n x d matrix")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ValueError("y must be a vector with one entry per row of x")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
            raise ValueError("x and y must be finite")
        if self.truth is not None and self.truth.labels.shape[0] != x.shape[0]:
            raise ValueError("truth labels must have one entry per sample")
        self.x = x
        self.y = y

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass(eq=False)
class SolveResult:
    """Outcome of any solver: coefficients, assignment, and bookkeeping."""

    coefficients: CoefficientSet
    assignment: Assignment
    objective: float
    certified_optimal: bool
    nodes_explored: int
    wall_time: float


@dataclass(frozen=True)
class PermutationMatch:
    """Cluster matching: cluster k of the reference set corresponds to
    cluster perm[k] of the other set (see match_permutation)."""

    perm: tuple
    errors: tuple

    @property
    def total(self) -> float:
        return float(sum(self.errors))

    @property
    def max_error(self) -> float:
        return float(max(self.errors))


def residual_matrix(dataset: Dataset, coeffs: CoefficientSet) -> np.ndarray:
    """Absolute residuals |y_i - x_i' beta_k| as an (n, K) matrix."""
    if coeffs.d != dataset.d:
        raise ValueError("coefficient dimension does not match the dataset")
    return np.abs(dataset.y[:, None] - dataset.x @ coeffs.betas.T)


def objective(dataset: Dataset, coeffs: CoefficientSet, assign, p) -> float:
    """Mixture objective (1/n) sum_i |y_i - x_i' beta_{a(i)}|**p.

    assign may be an Assignment or a raw label array.
    """
    pexp = loss_exponent(p)
    if not isinstance(assign, Assignment):
        assign = Assignment(np.asarray(assign))
    if assign.n != dataset.n:
        raise ValueError("assignment length does not match the dataset")
    if np.any(assign.labels >= coeffs.k):
        raise ValueError("assignment labels exceed the number of clusters")
    r = dataset.y - np.einsum("ij,ij->i", dataset.x, coeffs.betas[assign.labels])
    return float(np.mean(np.abs(r) ** pexp))


def best_assignment(dataset: Dataset, coeffs: CoefficientSet, p=2) -> Assignment:
    """Assign every sample to a cluster of minimal absolute residual.

    Ties go to the lowest cluster index.  The loss exponent does not
    change the argmin (|r|**p is monotone in |r|) but is accepted for
    interface symmetry with objective().
    """
    loss_exponent(p)
    r = residual_matrix(dataset, coeffs)
    return Assignment(np.argmin(r, axis=1))


def match_permutation(ref: CoefficientSet, other: CoefficientSet) -> PermutationMatch:
    """Match the clusters of two coefficient sets, minimizing total l2 error.

    Scans all K! permutations (K <= 8 enforced) and returns the first
    minimizer in lexicographic order: perm[k] is the index in `other`
    matched to cluster k of `ref`, errors[k] = ||ref_k - other_{perm[k]}||_2.
    With ref = the generating truth, errors are indexed by true cluster
    and perm maps true labels onto the estimate's labels.
    """
    if ref.k != other.k:
        raise ValueError("cluster counts differ")
    if ref.d != other.d:
        raise ValueError("coefficient dimensions differ")
    if ref.k > MAX_MATCH_CLUSTERS:
        raise ValueError(
            f"permutation matching limit: K={ref.k} exceeds {MAX_MATCH_CLUSTERS}"
        )
    dist = np.linalg.norm(ref.betas[:, None, :] - other.betas[None, :, :], axis=2)
    best_perm = None
    best_total = np.inf
    for perm in itertools.permutations(range(ref.k)):
        total = dist[range(ref.k), perm].sum()
        if total < best_total:
            best_total = total
            best_perm = perm
    errors = tuple(float(dist[k, best_perm[k]]) for k in range(ref.k))
    return PermutationMatch(perm=tuple(best_perm), errors=errors)


def respects_min_residual(
    dataset: Dataset,
    coeffs: CoefficientSet,
    assign: Assignment,
    tol: float = ASSIGNMENT_TOL,
) -> bool:
    """Check the two min-residual inclusions of an optimal assignment.

    (1) every sample's assigned cluster achieves the minimal absolute
    residual up to tol; (2) every sample whose minimizer is strict by
    more than tol is assigned to that minimizer.
    """
    r = residual_matrix(dataset, coeffs)
    assigned = r[np.arange(dataset.n), assign.labels]
    rmin = r.min(axis=1)
    if np.any(assigned > rmin + tol):
        return False
    order = np.sort(r, axis=1)
    strict = order[:, 1] - order[:, 0] > tol if r.shape[1] > 1 else np.zeros(dataset.n, bool)
    argmin = np.argmin(r, axis=1)
    return not np.any(strict & (assign.labels != argmin))
