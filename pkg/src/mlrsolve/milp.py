"""Big-M mixed-integer model of the mixture objective, and exact solvers.

The model minimizes (1/n) sum_i t_i**p subject to, for every sample i
and cluster k,

    t_i - (y_i - x_i' beta_k) + M (1 - c_ki) >= 0
    t_i + (y_i - x_i' beta_k) + M (1 - c_ki) >= 0
    sum_k c_ki = 1,  c_ki binary,  t_i >= 0,  ||beta_k||_q <= bounds[k]

so t_i equals the assigned cluster's absolute residual whenever M is
large enough that unassigned clusters never bind.  build_model derives
M from the Hoelder bound max|y| + max_i ||x_i||_* max_k bounds[k] (dual
norm of q); kinds "none" and "l0" provide no amplitude bound, so they
require m_override.

The exact solvers below never relax this model numerically; they work
in assignment space.  brute_force enumerates all K**n label vectors
(guarded at 2**20) with per-cluster constrained fits; branch_and_bound
runs depth-first over samples, ordering them by the residual gap under
the incumbent's coefficients and pruning with per-cluster lower bounds
(a cluster's optimal loss never decreases when samples are added).
"""

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from . import heuristic, regress
from .core import (
    Assignment,
    CoefficientSet,
    Dataset,
    RegConstraint,
    SolveResult,
    loss_exponent,
    residual_matrix,
)
from .heuristic import AmOptions

BRUTE_FORCE_GUARD = 1 << 20
ZERO_OBJECTIVE_TOL = 1e-12


# ===================================================================== model


@dataclass(frozen=True)
class Var:
    name: str
    kind: str  # "continuous" | "binary"
    lb: float
    ub: float


@dataclass(frozen=True)
class Row:
    name: str
    terms: tuple  # ((coef, var name), ...)
    sense: str  # "<=" | ">=" | "="
    rhs: float
    quad: tuple = ()  # ((coef, var name), ...) for squared terms


@dataclass(frozen=True)
class MilpModel:
    n: int
    d: int
    k: int
    p: int
    reg_kind: str
    reg_bounds: tuple | None
    big_m: float
    variables: tuple
    objective_linear: tuple
    objective_quad: tuple
    constraints: tuple


def _beta_names(k: int, d: int, split: bool):
    names = []
    for kk in range(k):
        for j in range(d):
            if split:
                names.append(f"beta_{kk}_{j}_pos")
                names.append(f"beta_{kk}_{j}_neg")
            else:
                names.append(f"beta_{kk}_{j}")
    return names


def _canonical_variables(n: int, d: int, k: int, reg_kind: str):
    split = reg_kind == "l1"
    out = []
    for name in _beta_names(k, d, split):
        lb = 0.0 if split else -np.inf
        out.append(Var(name, "continuous", lb, np.inf))
    for i in range(n):
        out.append(Var(f"t_{i}", "continuous", 0.0, np.inf))
    for kk in range(k):
        for i in range(n):
            out.append(Var(f"c_{kk}_{i}", "binary", 0.0, 1.0))
    if reg_kind == "l0":
        for kk in range(k):
            for j in range(d):
                out.append(Var(f"z_{kk}_{j}", "binary", 0.0, 1.0))
    return tuple(out)


def _beta_terms(xrow, kk: int, sign: float, split: bool):
    """Terms for sign * x_i' beta_k, zero coefficients skipped."""
    terms = []
    for j, xv in enumerate(xrow):
        if xv == 0.0:
            continue
        if split:
            terms.append((sign * xv, f"beta_{kk}_{j}_pos"))
            terms.append((-sign * xv, f"beta_{kk}_{j}_neg"))
        else:
            terms.append((sign * xv, f"beta_{kk}_{j}"))
    return terms


def derive_big_m(dataset: Dataset, reg: RegConstraint) -> float:
    """Hoelder bound max|y| + max_i ||x_i||_* max_k d_k for kinds l2/l1."""
    if reg.kind == "l2":
        dual = float(np.linalg.norm(dataset.x, axis=1).max())
    elif reg.kind == "l1":
        dual = float(np.abs(dataset.x).max())
    else:
        raise ValueError(
            "big-M unbounded: kind %r gives no amplitude bound, pass m_override"
            % reg.kind
        )
    return float(np.abs(dataset.y).max()) + dual * float(reg.bounds.max())


def build_model(
    dataset: Dataset,
    k: int,
    p=2,
    reg: RegConstraint | None = None,
    m_override: float | None = None,
) -> MilpModel:
    """Assemble the explicit variable/constraint representation."""
    reg = reg or RegConstraint.none()
    pexp = loss_exponent(p)
    if k < 1:
        raise ValueError("k must be positive")
    if reg.kind != "none":
        if reg.bounds.size != k:
            raise ValueError("regularization bounds must have one entry per cluster")
        if reg.kind == "l0" and np.any(reg.bounds > dataset.d):
            raise ValueError("l0 bound exceeds the number of covariates")
    if m_override is not None:
        if not (np.isfinite(m_override) and m_override > 0):
            raise ValueError("m_override must be positive and finite")
        big_m = float(m_override)
    else:
        big_m = derive_big_m(dataset, reg)

    split = reg.kind == "l1"
    n, d = dataset.n, dataset.d
    rows = []
    for i in range(n):
        for kk in range(k):
            # t_i + (y_i - x_i' beta_k) + M (1 - c_ki) >= 0
            rows.append(
                Row(
                    name=f"res_pos_{i}_{kk}",
                    terms=tuple(
                        [(1.0, f"t_{i}")]
                        + _beta_terms(dataset.x[i], kk, -1.0, split)
                        + [(-big_m, f"c_{kk}_{i}")]
                    ),
                    sense=">=",
                    rhs=-dataset.y[i] - big_m,
                )
            )
            # t_i - (y_i - x_i' beta_k) + M (1 - c_ki) >= 0
            rows.append(
                Row(
                    name=f"res_neg_{i}_{kk}",
                    terms=tuple(
                        [(1.0, f"t_{i}")]
                        + _beta_terms(dataset.x[i], kk, 1.0, split)
                        + [(-big_m, f"c_{kk}_{i}")]
                    ),
                    sense=">=",
                    rhs=dataset.y[i] - big_m,
                )
            )
    for i in range(n):
        rows.append(
            Row(
                name=f"assign_{i}",
                terms=tuple((1.0, f"c_{kk}_{i}") for kk in range(k)),
                sense="=",
                rhs=1.0,
            )
        )
    if reg.kind == "l2":
        for kk in range(k):
            rows.append(
                Row(
                    name=f"reg_{kk}",
                    terms=(),
                    sense="<=",
                    rhs=float(reg.bounds[kk]) ** 2,
                    quad=tuple((1.0, f"beta_{kk}_{j}") for j in range(d)),
                )
            )
    elif reg.kind == "l1":
        for kk in range(k):
            terms = []
            for j in range(d):
                terms.append((1.0, f"beta_{kk}_{j}_pos"))
                terms.append((1.0, f"beta_{kk}_{j}_neg"))
            rows.append(
                Row(name=f"reg_{kk}", terms=tuple(terms), sense="<=", rhs=float(reg.bounds[kk]))
            )
    elif reg.kind == "l0":
        for kk in range(k):
            for j in range(d):
                rows.append(
                    Row(
                        name=f"reg_pos_{kk}_{j}",
                        terms=((-1.0, f"beta_{kk}_{j}"), (big_m, f"z_{kk}_{j}")),
                        sense=">=",
                        rhs=0.0,
                    )
                )
                rows.append(
                    Row(
                        name=f"reg_neg_{kk}_{j}",
                        terms=((1.0, f"beta_{kk}_{j}"), (big_m, f"z_{kk}_{j}")),
                        sense=">=",
                        rhs=0.0,
                    )
                )
            rows.append(
                Row(
                    name=f"reg_{kk}",
                    terms=tuple((1.0, f"z_{kk}_{j}") for j in range(d)),
                    sense="<=",
                    rhs=float(reg.bounds[kk]),
                )
            )

    if pexp == 1:
        obj_lin = tuple((1.0 / n, f"t_{i}") for i in range(n))
        obj_quad = ()
    else:
        obj_lin = ()
        obj_quad = tuple((1.0 / n, f"t_{i}") for i in range(n))

    return MilpModel(
        n=n,
        d=d,
        k=k,
        p=pexp,
        reg_kind=reg.kind,
        reg_bounds=None if reg.kind == "none" else tuple(float(b) for b in reg.bounds),
        big_m=big_m,
        variables=_canonical_variables(n, d, k, reg.kind),
        objective_linear=obj_lin,
        objective_quad=obj_quad,
        constraints=tuple(rows),
    )


# ================================================================ LP export


def _f17(v: float) -> str:
    return f"{v:.17g}"


def _linear_text(terms) -> str:
    parts = []
    for coef, name in terms:
        mag = abs(coef)
        mag_txt = "" if mag == 1.0 else _f17(mag) + " "
        if not parts:
            parts.append(("-" + mag_txt if coef < 0 else mag_txt) + name)
        else:
            parts.append(("- " if coef < 0 else "+ ") + mag_txt + name)
    return " ".join(parts)


def _quad_text(terms) -> str:
    parts = []
    for coef, name in terms:
        mag = abs(coef)
        mag_txt = "" if mag == 1.0 else _f17(mag) + " "
        if not parts:
            parts.append(("-" + mag_txt if coef < 0 else mag_txt) + name + " ^2")
        else:
            parts.append(("- " if coef < 0 else "+ ") + mag_txt + name + " ^2")
    return "[ " + " ".join(parts) + " ]"


def export_lp(model: MilpModel) -> str:
    """Deterministic LP-format text; equal models export byte-identically.

    Layout: a meta comment, Minimize (quadratic objectives use the
    doubled-coefficient "[ ... ] / 2" convention), Subject To with rows
    in model order, Bounds (free beta variables), Binaries, End.  All
    coefficients carry 17 significant digits, so floats survive the
    round-trip exactly.
    """
    lines = ["\\ mixed linear regression big-M model"]
    bounds_txt = (
        "none"
        if model.reg_bounds is None
        else ",".join(_f17(b) for b in model.reg_bounds)
    )
    lines.append(
        f"\\ meta n={model.n} d={model.d} k={model.k} p={model.p}"
        f" reg={model.reg_kind} bounds={bounds_txt} big_m={_f17(model.big_m)}"
    )
    lines.append("Minimize")
    if model.p == 1:
        lines.append(" obj: " + _linear_text(model.objective_linear))
    else:
        doubled = tuple((2.0 * c, nm) for c, nm in model.objective_quad)
        lines.append(" obj: " + _quad_text(doubled) + " / 2")
    lines.append("Subject To")
    for row in model.constraints:
        lhs = ""
        if row.terms:
            lhs = _linear_text(row.terms)
        if row.quad:
            lhs = (lhs + " + " if lhs else "") + _quad_text(row.quad)
        lines.append(f" {row.name}: {lhs} {row.sense} {_f17(row.rhs)}")
    lines.append("Bounds")
    for var in model.variables:
        if var.kind == "continuous" and var.lb == -np.inf:
            lines.append(f" {var.name} free")
    lines.append("Binaries")
    for var in model.variables:
        if var.kind == "binary":
            lines.append(f" {var.name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


class LpParseError(ValueError):
    pass


def _parse_terms(tokens, line_no):
    """Parse [sign] [coef] name sequences; returns ((coef, name), ...)."""
    terms = []
    sign = 1.0
    pending = None
    expect_sign = False
    for tok in tokens:
        if tok in ("+", "-"):
            if pending is not None:
                raise LpParseError(f"line {line_no}: dangling coefficient")
            sign = 1.0 if tok == "+" else -1.0
            expect_sign = False
            continue
        try:
            val = float(tok)
            if pending is not None:
                raise LpParseError(f"line {line_no}: two coefficients in a row")
            pending = val
            continue
        except ValueError:
            pass
        if expect_sign:
            raise LpParseError(f"line {line_no}: missing +/- between terms")
        neg = 1.0
        if tok.startswith("-") and len(tok) > 1:
            # leading term written compactly, e.g. "-beta_0_0"
            if pending is not None:
                raise LpParseError(f"line {line_no}: negated name after coefficient")
            neg = -1.0
            tok = tok[1:]
        coef = neg * sign * (pending if pending is not None else 1.0)
        terms.append((coef, tok))
        pending = None
        sign = 1.0
        expect_sign = True
    if pending is not None:
        raise LpParseError(f"line {line_no}: dangling coefficient")
    return tuple(terms)


def _parse_row_body(tokens, line_no):
    """Split a constraint body into (linear terms, quad terms, sense, rhs)."""
    if len(tokens) < 2 or tokens[-2] not in ("<=", ">=", "="):
        raise LpParseError(f"line {line_no}: missing sense/right-hand side")
    sense = tokens[-2]
    try:
        rhs = float(tokens[-1])
    except ValueError:
        raise LpParseError(f"line {line_no}: bad right-hand side {tokens[-1]!r}")
    body = tokens[:-2]
    linear, quad = _split_quad(body, line_no)
    return linear, quad, sense, rhs


def _split_quad(tokens, line_no):
    if "[" not in tokens:
        return _parse_terms(tokens, line_no), ()
    i = tokens.index("[")
    if "]" not in tokens:
        raise LpParseError(f"line {line_no}: unclosed quadratic bracket")
    j = tokens.index("]")
    inner = [t for t in tokens[i + 1 : j] if t != "^2"]
    before = tokens[:i]
    if before and before[-1] == "+":
        before = before[:-1]
    linear = _parse_terms(before, line_no)
    quad = _parse_terms(inner, line_no)
    return linear, quad


def parse_lp(text: str) -> MilpModel:
    """Parse a document produced by export_lp back into the same model.

    The meta comment supplies the shape fields; every row is parsed and
    cross-checked against the expected counts, so a mangled document
    fails with the offending line number rather than round-tripping.
    """
    lines = text.split("\n")
    meta = None
    for ln_no, raw in enumerate(lines, start=1):
        if raw.startswith("\\ meta "):
            meta = {}
            for part in raw[len("\\ meta ") :].split():
                if "=" not in part:
                    raise LpParseError(f"line {ln_no}: bad meta field {part!r}")
                key, val = part.split("=", 1)
                meta[key] = val
            break
    if meta is None:
        raise LpParseError("line 1: missing meta comment")
    try:
        n = int(meta["n"])
        d = int(meta["d"])
        k = int(meta["k"])
        p = int(meta["p"])
        reg_kind = meta["reg"]
        big_m = float(meta["big_m"])
        reg_bounds = (
            None
            if meta["bounds"] == "none"
            else tuple(float(b) for b in meta["bounds"].split(","))
        )
    except (KeyError, ValueError) as exc:
        raise LpParseError(f"malformed meta comment: {exc}") from None

    section = None
    obj_lin, obj_quad = (), ()
    rows = []
    saw_obj = False
    saw_end = False
    free_vars = []
    binaries = []
    for ln_no, raw in enumerate(lines, start=1):
        line = raw.rstrip()
        if not line or line.startswith("\\"):
            continue
        if line in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
            section = line
            if line == "End":
                saw_end = True
            continue
        body = line.strip()
        if section == "Minimize":
            if not body.startswith("obj:"):
                raise LpParseError(f"line {ln_no}: objective must be named obj")
            tokens = body[len("obj:") :].split()
            if tokens and tokens[-2:] == ["/", "2"]:
                lin, quad = _split_quad(tokens[:-2], ln_no)
                obj_quad = tuple((c / 2.0, nm) for c, nm in quad)
                obj_lin = lin
            else:
                obj_lin = _parse_terms(tokens, ln_no)
            saw_obj = True
        elif section == "Subject To":
            if ":" not in body:
                raise LpParseError(f"line {ln_no}: constraint missing a name")
            name, rest = body.split(":", 1)
            linear, quad, sense, rhs = _parse_row_body(rest.split(), ln_no)
            rows.append(Row(name=name.strip(), terms=linear, sense=sense, rhs=rhs, quad=quad))
        elif section == "Bounds":
            parts = body.split()
            if len(parts) != 2 or parts[1] != "free":
                raise LpParseError(f"line {ln_no}: unsupported bound line {body!r}")
            free_vars.append(parts[0])
        elif section == "Binaries":
            binaries.append(body)
        else:
            raise LpParseError(f"line {ln_no}: content outside any section")
    if not saw_obj:
        raise LpParseError("missing Minimize section")
    if not saw_end:
        raise LpParseError("missing End marker")

    variables = _canonical_variables(n, d, k, reg_kind)
    expect_free = [v.name for v in variables if v.kind == "continuous" and v.lb == -np.inf]
    expect_bin = [v.name for v in variables if v.kind == "binary"]
    if free_vars != expect_free:
        raise LpParseError("Bounds section does not match the variable layout")
    if binaries != expect_bin:
        raise LpParseError("Binaries section does not match the variable layout")
    expected_rows = 2 * n * k + n
    if reg_kind in ("l2", "l1"):
        expected_rows += k
    elif reg_kind == "l0":
        expected_rows += k * (2 * d + 1)
    if len(rows) != expected_rows:
        raise LpParseError(
            f"expected {expected_rows} constraint rows, found {len(rows)}"
        )
    return MilpModel(
        n=n,
        d=d,
        k=k,
        p=p,
        reg_kind=reg_kind,
        reg_bounds=reg_bounds,
        big_m=big_m,
        variables=variables,
        objective_linear=obj_lin,
        objective_quad=obj_quad,
        constraints=tuple(rows),
    )


# ================================================================== solvers


@dataclass(frozen=True)
class SolveOptions:
    time_limit: float | None = None
    node_limit: int | None = None
    incumbent: SolveResult | None = None
    prune_tol: float = 1e-9
    symmetry_breaking: bool = True

    def __post_init__(self):
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.node_limit is not None and self.node_limit <= 0:
            raise ValueError("node_limit must be positive")
        if self.prune_tol < 0:
            raise ValueError("prune_tol must be nonnegative")


class _FitCache:
    """Memoized per-cluster fits keyed by the sample index tuple."""

    def __init__(self, dataset, pexp, reg):
        self.dataset = dataset
        self.pexp = pexp
        self.reg = reg
        self.shared = reg.identical_bounds()
        self.store = {}

    def fit(self, kk, idx):
        key = (None if self.shared else kk, idx)
        hit = self.store.get(key)
        if hit is None:
            sel = list(idx)
            hit = regress.fit(
                self.dataset.x[sel], self.dataset.y[sel], self.pexp, self.reg.cluster(kk)
            )
            self.store[key] = hit
        return hit


def _single_cluster_result(dataset, pexp, reg, t0) -> SolveResult:
    rep = regress.fit(dataset.x, dataset.y, pexp, reg.cluster(0))
    return SolveResult(
        coefficients=CoefficientSet(rep.beta[None, :]),
        assignment=Assignment(np.zeros(dataset.n, dtype=np.int64)),
        objective=rep.loss / dataset.n,
        certified_optimal=True,
        nodes_explored=1,
        wall_time=time.perf_counter() - t0,
    )


def brute_force(
    dataset: Dataset, k: int, p=2, reg: RegConstraint | None = None
) -> SolveResult:
    """Exact optimum by enumerating every label vector in lexicographic
    order; ties keep the lexicographically smallest assignment."""
    reg = reg or RegConstraint.none()
    pexp = loss_exponent(p)
    regress.check_supported(pexp, reg.kind)
    if reg.kind != "none" and reg.bounds.size != k:
        raise ValueError("regularization bounds must have one entry per cluster")
    if k < 1:
        raise ValueError("k must be positive")
    t0 = time.perf_counter()
    if k == 1:
        return _single_cluster_result(dataset, pexp, reg, t0)
    n = dataset.n
    if k**n > BRUTE_FORCE_GUARD:
        raise ValueError(f"brute-force guard exceeded: {k}**{n} > 2**20")
    cache = _FitCache(dataset, pexp, reg)
    best_obj = np.inf
    best_labels = None
    best_reports = None
    for labels in itertools.product(range(k), repeat=n):
        groups = [[] for _ in range(k)]
        for i, lab in enumerate(labels):
            groups[lab].append(i)
        reports = [cache.fit(kk, tuple(groups[kk])) for kk in range(k)]
        obj = sum(rep.loss for rep in reports) / n
        if obj < best_obj:
            best_obj = obj
            best_labels = labels
            best_reports = reports
    return SolveResult(
        coefficients=CoefficientSet(np.vstack([rep.beta for rep in best_reports])),
        assignment=Assignment(np.array(best_labels, dtype=np.int64)),
        objective=best_obj,
        certified_optimal=True,
        nodes_explored=k**n,
        wall_time=time.perf_counter() - t0,
    )


def _polish(dataset, k, pexp, reg, result: SolveResult) -> SolveResult:
    """Run alternating minimization to a fixed point from a solution.

    The objective never increases, and the fixed point's assignment is
    exactly the best response to its coefficients (closing any near-tie
    gap between an optimal leaf and the min-residual inclusions).
    """
    am = heuristic.alternate_minimize(
        dataset,
        k,
        pexp,
        reg,
        init_coeffs=result.coefficients,
        opts=AmOptions(restarts=1, max_iters=200, seed=0, init="given"),
    )
    return am if am.objective <= result.objective else result


def branch_and_bound(
    dataset: Dataset,
    k: int,
    p=2,
    reg: RegConstraint | None = None,
    opts: SolveOptions | None = None,
    _node_hook=None,
    _incumbent_hook=None,
) -> SolveResult:
    """Exact assignment-space branch and bound.

    Starts from a multistart alternating-minimization incumbent (or
    opts.incumbent); a feasible objective at or below 1e-12 certifies
    immediately since the objective is nonnegative.  Nodes branch on
    the unassigned sample with the largest best-vs-second-best residual
    gap under the incumbent coefficients, children ordered by residual;
    a node is pruned when its per-cluster lower bound reaches the
    incumbent minus prune_tol.  nodes_explored counts expanded nodes,
    which for full enumeration is (K**n - 1)/(K - 1) <= K**n.  Runs are
    single-threaded and deterministic.
    """
    reg = reg or RegConstraint.none()
    pexp = loss_exponent(p)
    regress.check_supported(pexp, reg.kind)
    if reg.kind != "none" and reg.bounds.size != k:
        raise ValueError("regularization bounds must have one entry per cluster")
    if k < 1:
        raise ValueError("k must be positive")
    opts = opts or SolveOptions()
    t0 = time.perf_counter()
    if k == 1:
        return _single_cluster_result(dataset, pexp, reg, t0)

    n = dataset.n
    incumbent = opts.incumbent or heuristic.multistart(
        dataset, k, pexp, reg, AmOptions(seed=0)
    )
    inc_obj = incumbent.objective
    if _incumbent_hook is not None:
        _incumbent_hook(inc_obj)
    if inc_obj <= ZERO_OBJECTIVE_TOL:
        polished = _polish(dataset, k, pexp, reg, incumbent)
        return SolveResult(
            coefficients=polished.coefficients,
            assignment=polished.assignment,
            objective=polished.objective,
            certified_optimal=True,
            nodes_explored=0,
            wall_time=time.perf_counter() - t0,
        )

    cache = _FitCache(dataset, pexp, reg)
    state_groups = [() for _ in range(k)]
    state_reports = [cache.fit(kk, ()) for kk in range(k)]
    labels = np.full(n, -1, dtype=np.int64)

    # branching priorities under the current incumbent's coefficients
    def _priorities(coeffs):
        r = residual_matrix(dataset, coeffs)
        order = np.argsort(r, axis=1, kind="stable")
        if k > 1:
            srt = np.sort(r, axis=1)
            gap = srt[:, 1] - srt[:, 0]
        else:
            gap = np.zeros(n)
        return gap, order

    gap, cluster_order = _priorities(incumbent.coefficients)
    best = incumbent
    nodes = 0
    aborted = False

    start_idx = 0
    if opts.symmetry_breaking and reg.identical_bounds():
        labels[0] = 0
        state_groups[0] = (0,)
        state_reports[0] = cache.fit(0, (0,))
        start_idx = 1

    def recurse(assigned):
        nonlocal nodes, best, inc_obj, gap, cluster_order, aborted
        if aborted:
            return
        if opts.time_limit is not None and time.perf_counter() - t0 > opts.time_limit:
            aborted = True
            return
        if opts.node_limit is not None and nodes >= opts.node_limit:
            aborted = True
            return
        unassigned = np.flatnonzero(labels < 0)
        pick = unassigned[int(np.argmax(gap[unassigned]))]
        nodes += 1
        loss_other = sum(rep.loss for rep in state_reports)
        for kk in cluster_order[pick]:
            kk = int(kk)
            old_group = state_groups[kk]
            old_report = state_reports[kk]
            new_group = tuple(sorted(old_group + (int(pick),)))
            new_report = cache.fit(kk, new_group)
            bound = (loss_other - old_report.loss + new_report.loss) / n
            if _node_hook is not None:
                trial = labels.copy()
                trial[pick] = kk
                _node_hook(trial, bound)
            if bound >= inc_obj - opts.prune_tol:
                continue
            labels[pick] = kk
            state_groups[kk] = new_group
            state_reports[kk] = new_report
            if assigned + 1 == n:
                best = SolveResult(
                    coefficients=CoefficientSet(
                        np.vstack([rep.beta for rep in state_reports])
                    ),
                    assignment=Assignment(labels.copy()),
                    objective=bound,
                    certified_optimal=False,
                    nodes_explored=0,
                    wall_time=0.0,
                )
                inc_obj = bound
                if _incumbent_hook is not None:
                    _incumbent_hook(inc_obj)
                gap, cluster_order = _priorities(best.coefficients)
            else:
                recurse(assigned + 1)
            labels[pick] = -1
            state_groups[kk] = old_group
            state_reports[kk] = old_report
            if aborted:
                return

    if start_idx < n:
        recurse(start_idx)
    elif n == 1 and start_idx == 1:
        # symmetry lock assigned the only sample; evaluate it directly
        leaf_obj = state_reports[0].loss / n
        if leaf_obj < inc_obj - opts.prune_tol:
            best = SolveResult(
                coefficients=CoefficientSet(
                    np.vstack([rep.beta for rep in state_reports])
                ),
                assignment=Assignment(np.zeros(n, dtype=np.int64)),
                objective=leaf_obj,
                certified_optimal=False,
                nodes_explored=0,
                wall_time=0.0,
            )

    polished = _polish(dataset, k, pexp, reg, best)
    return SolveResult(
        coefficients=polished.coefficients,
        assignment=polished.assignment,
        objective=polished.objective,
        certified_optimal=not aborted,
        nodes_explored=nodes,
        wall_time=time.perf_counter() - t0,
    )
