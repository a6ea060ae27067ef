"""Command-line surface: generation, solving, LP export, experiments,
the planted-counterexample demonstration, and rate diagnostics.

Config files are INI-style: [section] headers, key = value lines, #
comments.  Dataset generation reads [generator]; experiments add an
[experiment] section; diagnostics add [diagnose].  Exit codes: 0 on
success, 1 on usage/config/data errors, 2 when solve ran out of budget
without a certificate and --require-certificate was passed.

Per-trial streams are derived, not shared: the dataset seed for grid
point n / trial t is mix_seed(generator seed, n, t) and the solver seed
is mix_seed(experiment seed, n, t), so adding trials or grid points
never shifts existing outputs.
"""

import argparse
import configparser
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import diagnostics, heuristic, milp, report, rng, synth
from .core import (
    RECOVERY_TOL,
    Dataset,
    RegConstraint,
    loss_exponent,
    match_permutation,
    objective,
)
from .heuristic import AmOptions
from .milp import SolveOptions
from .synth import CounterexampleSpec, GeneratorSpec

EXPERIMENT_HEADER = "n,trial,cluster,error,objective,recovered,clusters_match"
COLLAPSE_ORACLE_LIMIT = 16  # collapsed size above which brute force is off


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 by default; the contract here is 1
    def error(self, message):
        raise UsageError(message)


def _f17(v: float) -> str:
    return f"{v:.17g}"


# ==================================================================== config


def _read_config(path) -> configparser.ConfigParser:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise UsageError(f"malformed config {path}: {exc}") from None
    return cp


def _req(sec, key: str) -> str:
    if key not in sec:
        raise UsageError(f"config section [{sec.name}] is missing key {key!r}")
    return sec[key]


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"expected a list of numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"expected a list of integers, got {text!r}") from None


def _generator_kwargs(cp) -> dict:
    """[generator] minus n and seed, which sweeps override per trial."""
    if not cp.has_section("generator"):
        raise UsageError("config is missing the [generator] section")
    sec = cp["generator"]
    try:
        d = int(_req(sec, "d"))
        k = int(_req(sec, "k"))
    except ValueError as exc:
        raise UsageError(f"bad [generator] value: {exc}") from None
    betas = []
    for kk in range(k):
        betas.append(_floats(_req(sec, f"beta_{kk}")))
    coefficients = np.array(betas, dtype=float)
    if coefficients.shape != (k, d):
        raise UsageError(f"beta_0..beta_{k-1} must each have {d} entries")
    weights = (
        _floats(sec["weights"]) if "weights" in sec else [1.0 / k] * k
    )
    return dict(
        d=d,
        k=k,
        weights=np.array(weights, dtype=float),
        coefficients=coefficients,
        covariates=sec.get("covariates", "uniform01_with_intercept"),
        noise=sec.get("noise", "gaussian"),
        noise_scale=float(sec.get("noise_scale", "0")),
        )


def _generator_n_seed(cp) -> tuple[int, int]:
    sec = cp["generator"]
    try:
        n = int(_req(sec, "n"))
        seed = int(sec.get("seed", "0"))
    except ValueError as exc:
        raise UsageError(f"bad [generator] value: {exc}") from None
    return n, seed


def _reg_from(kind: str, bound_text: str | None, k: int) -> RegConstraint:
    if kind == "none":
        return RegConstraint.none()
    if bound_text is None:
        raise UsageError(f"regularization {kind!r} needs a bound")
    vals = _floats(bound_text)
    if len(vals) == 1:
        vals = vals * k
    if len(vals) != k:
        raise UsageError("bound must be a scalar or one value per cluster")
    return RegConstraint(kind, np.array(vals, dtype=float))


@dataclass(frozen=True)
class ExperimentConfig:
    n_grid: tuple
    trials: int
    solver: str
    p: int
    reg: RegConstraint
    restarts: int
    seed: int
    output_dir: str

    def __post_init__(self):
        if self.trials < 1:
            raise UsageError("trials must be at least 1")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise UsageError("n_grid must be sorted ascending")
        if self.solver not in ("bnb", "brute", "am"):
            raise UsageError(f"unknown solver {self.solver!r}")


def _experiment_config(cp, k: int) -> ExperimentConfig:
    if not cp.has_section("experiment"):
        raise UsageError("config is missing the [experiment] section")
    sec = cp["experiment"]
    try:
        return ExperimentConfig(
            n_grid=tuple(_ints(_req(sec, "n_grid"))),
            trials=int(sec.get("trials", "1")),
            solver=sec.get("solver", "am"),
            p=loss_exponent(int(sec.get("p", "2"))),
            reg=_reg_from(sec.get("q", "none"), sec.get("bound"), k),
            restarts=int(sec.get("restarts", "32")),
            seed=int(sec.get("seed", "0")),
            output_dir=sec.get("output_dir", "."),
        )
    except ValueError as exc:
        raise UsageError(f"bad [experiment] value: {exc}") from None


# ==================================================================== solve


def _load_dataset(path) -> Dataset:
    try:
        return synth.read_csv(path)
    except OSError as exc:
        raise UsageError(f"cannot read dataset {path}: {exc}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _run_solver(ds, k, pexp, reg, solver, seed, restarts, time_limit=None, node_limit=None):
    if solver == "am":
        return heuristic.multistart(
            ds, k, pexp, reg, AmOptions(seed=seed, restarts=restarts)
        )
    if solver == "brute":
        return milp.brute_force(ds, k, pexp, reg)
    incumbent = heuristic.multistart(
        ds, k, pexp, reg, AmOptions(seed=seed, restarts=restarts)
    )
    opts = SolveOptions(
        time_limit=time_limit, node_limit=node_limit, incumbent=incumbent
    )
    return milp.branch_and_bound(ds, k, pexp, reg, opts)


def cmd_solve(args) -> int:
    ds = _load_dataset(args.data)
    pexp = loss_exponent(args.p)
    reg = _reg_from(args.q, args.bound, args.k)
    try:
        result = _run_solver(
            ds,
            args.k,
            pexp,
            reg,
            args.solver,
            args.seed,
            args.restarts,
            args.time_limit,
            args.node_limit,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"solver = {args.solver}")
    print(f"objective = {_f17(result.objective)}")
    print(f"certified = {'true' if result.certified_optimal else 'false'}")
    print(f"nodes = {result.nodes_explored}")
    for kk in range(result.coefficients.k):
        beta = ", ".join(_f17(v) for v in result.coefficients.betas[kk])
        print(f"beta_{kk} = {beta}")
    print("labels = " + ",".join(str(int(v)) for v in result.assignment.labels))
    if args.require_certificate and not result.certified_optimal:
        return 2
    return 0


def cmd_generate(args) -> int:
    cp = _read_config(args.config)
    kwargs = _generator_kwargs(cp)
    n, seed = _generator_n_seed(cp)
    try:
        spec = GeneratorSpec(n=n, seed=seed, **kwargs)
        ds = synth.generate(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    synth.write_csv(ds, args.out)
    print(f"wrote {args.out} ({ds.n} samples, d={ds.d}, k={spec.k})")
    return 0


def cmd_export_lp(args) -> int:
    ds = _load_dataset(args.data)
    pexp = loss_exponent(args.p)
    reg = _reg_from(args.q, args.bound, args.k)
    try:
        model = milp.build_model(ds, args.k, pexp, reg, m_override=args.big_m)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = milp.export_lp(model)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    print(f"wrote {args.out} ({len(model.constraints)} rows, big_m={_f17(model.big_m)})")
    return 0


# ================================================================ experiment


def write_experiment_csv(rows, path) -> None:
    lines = [EXPERIMENT_HEADER]
    for n, trial, kk, err, obj, rec, cm in rows:
        lines.append(
            f"{n},{trial},{kk},{_f17(err)},{_f17(obj)},{int(rec)},{int(cm)}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_experiment_csv(path) -> list[tuple]:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if not lines or lines[0] != EXPERIMENT_HEADER:
        raise ValueError(f"{path}:1: expected header {EXPERIMENT_HEADER!r}")
    rows = []
    for ln_no, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 7:
            raise ValueError(f"{path}:{ln_no}: expected 7 fields, found {len(parts)}")
        try:
            rows.append(
                (
                    int(parts[0]),
                    int(parts[1]),
                    int(parts[2]),
                    float(parts[3]),
                    float(parts[4]),
                    int(parts[5]),
                    int(parts[6]),
                )
            )
        except ValueError:
            raise ValueError(f"{path}:{ln_no}: malformed numeric field") from None
    return rows


def run_experiment(gen_kwargs, gen_seed, config: ExperimentConfig):
    """One row per (n, trial, cluster): matched coefficient error, the
    solve objective, recovery at the library tolerance, and whether the
    permuted assignment reproduces the true clustering exactly."""
    k = gen_kwargs["k"]
    rows = []
    for n in config.n_grid:
        for trial in range(config.trials):
            dseed = rng.mix_seed(gen_seed, n, trial)
            sseed = rng.mix_seed(config.seed, n, trial)
            ds = synth.generate(GeneratorSpec(n=n, seed=dseed, **gen_kwargs))
            result = _run_solver(
                ds, k, config.p, config.reg, config.solver, sseed, config.restarts
            )
            match = match_permutation(ds.truth.coefficients, result.coefficients)
            perm = np.array(match.perm, dtype=np.int64)
            cm = bool(
                np.array_equal(perm[ds.truth.labels], result.assignment.labels)
            )
            for kk in range(k):
                rows.append(
                    (
                        n,
                        trial,
                        kk,
                        match.errors[kk],
                        result.objective,
                        match.errors[kk] <= RECOVERY_TOL,
                        cm,
                    )
                )
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return rows


def cmd_experiment(args) -> int:
    cp = _read_config(args.config)
    gen_kwargs = _generator_kwargs(cp)
    gen_seed = int(cp["generator"].get("seed", "0"))
    config = _experiment_config(cp, gen_kwargs["k"])
    out_dir = args.out or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    rows = run_experiment(gen_kwargs, gen_seed, config)
    csv_path = os.path.join(out_dir, "results.csv")
    write_experiment_csv(rows, csv_path)
    errors_by_cluster = {}
    for kk in range(gen_kwargs["k"]):
        means = []
        for n in config.n_grid:
            errs = [r[3] for r in rows if r[0] == n and r[2] == kk]
            means.append(sum(errs) / len(errs))
        errors_by_cluster[kk] = means
    svg_path = os.path.join(out_dir, "errors.svg")
    report.save_error_figure(svg_path, config.n_grid, errors_by_cluster)
    print(f"wrote {csv_path} ({len(rows)} rows)")
    print(f"wrote {svg_path}")
    return 0


# ============================================================ counterexample


def cmd_counterexample(args) -> int:
    try:
        spec = CounterexampleSpec(
            n=args.n, delta=args.delta, sigma=args.sigma, seed=args.seed
        )
        ds = synth.counterexample(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pexp = loss_exponent(args.p)
    truth_obj = objective(ds, ds.truth.coefficients, ds.truth.labels, pexp)
    collapsed, _counts = synth.collapse_support(ds)
    if collapsed.n <= COLLAPSE_ORACLE_LIMIT:
        result = milp.brute_force(collapsed, 2, pexp)
        method = "certified (support-collapsed brute force)"
    else:
        result = heuristic.multistart(
            ds, 2, pexp, RegConstraint.none(), AmOptions(seed=args.seed, restarts=args.restarts)
        )
        method = "heuristic (alternating minimization)"
    match = match_permutation(ds.truth.coefficients, result.coefficients)
    verdict = (
        "ground truth NOT recovered"
        if match.max_error > RECOVERY_TOL
        else "ground truth recovered"
    )
    print(
        f"counterexample: n={args.n} delta={_f17(args.delta)}"
        f" sigma={_f17(args.sigma)} p={pexp} seed={args.seed}"
    )
    print(f"truth objective = {_f17(truth_obj)}")
    print(f"optimal objective = {_f17(result.objective)}")
    print(f"optimality = {method}")
    for kk, err in enumerate(match.errors):
        print(f"matched error cluster {kk} = {_f17(err)}")
    print(f"verdict: {verdict}")
    return 0


# ================================================================= diagnose


def cmd_diagnose(args) -> int:
    cp = _read_config(args.config)
    gen_kwargs = _generator_kwargs(cp)
    if gen_kwargs["k"] != 1:
        raise UsageError("diagnose requires a single-cluster generator (k = 1)")
    n, seed = _generator_n_seed(cp)
    if not cp.has_section("diagnose"):
        raise UsageError("config is missing the [diagnose] section")
    sec = cp["diagnose"]
    try:
        checkpoints = _ints(_req(sec, "checkpoints"))
        pexp = loss_exponent(int(sec.get("p", "2")))
        delta_slack = float(sec.get("delta_slack", "0.1"))
    except ValueError as exc:
        raise UsageError(f"bad [diagnose] value: {exc}") from None
    reg = _reg_from(sec.get("q", "none"), sec.get("bound"), 1)
    try:
        ds = synth.generate(GeneratorSpec(n=n, seed=seed, **gen_kwargs))
        rows = diagnostics.rate_trace(ds, checkpoints, pexp, reg, delta_slack)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out_dir = args.out or sec.get("output_dir", ".")
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "rate.csv")
    diagnostics.write_rate_csv(rows, csv_path)
    svg_path = os.path.join(out_dir, "rate.svg")
    report.save_rate_figure(svg_path, rows)
    slope = diagnostics.rate_slope(rows) if len(rows) >= 4 else None
    print(f"wrote {csv_path} ({len(rows)} rows)")
    print(f"wrote {svg_path}")
    if slope is not None:
        print(f"log-log error slope = {_f17(slope)}")
    return 0


# ==================================================================== main


def _build_parser() -> _Parser:
    parser = _Parser(prog="mlrsolve", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic dataset CSV")
    gen.add_argument("config")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    solve = sub.add_parser("solve", help="fit a mixture to a dataset CSV")
    solve.add_argument("--data", required=True)
    solve.add_argument("--k", type=int, required=True)
    solve.add_argument("--p", type=int, default=2, choices=(1, 2))
    solve.add_argument("--q", default="none", choices=("none", "l2", "l1", "l0"))
    solve.add_argument("--bound")
    solve.add_argument("--solver", default="bnb", choices=("bnb", "brute", "am"))
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--restarts", type=int, default=32)
    solve.add_argument("--time-limit", type=float, default=None)
    solve.add_argument("--node-limit", type=int, default=None)
    solve.add_argument("--require-certificate", action="store_true")
    solve.set_defaults(func=cmd_solve)

    exp_lp = sub.add_parser("export-lp", help="write the big-M model in LP format")
    exp_lp.add_argument("--data", required=True)
    exp_lp.add_argument("--k", type=int, required=True)
    exp_lp.add_argument("--p", type=int, default=2, choices=(1, 2))
    exp_lp.add_argument("--q", default="none", choices=("none", "l2", "l1", "l0"))
    exp_lp.add_argument("--bound")
    exp_lp.add_argument("--big-m", type=float, default=None)
    exp_lp.add_argument("--out", required=True)
    exp_lp.set_defaults(func=cmd_export_lp)

    exp = sub.add_parser("experiment", help="run an (n, trial) recovery sweep")
    exp.add_argument("config")
    exp.add_argument("--out", default=None, help="override output_dir")
    exp.set_defaults(func=cmd_experiment)

    ce = sub.add_parser(
        "counterexample", help="planted instance whose optimum is not the truth"
    )
    ce.add_argument("--delta", type=float, required=True)
    ce.add_argument("--sigma", type=float, required=True)
    ce.add_argument("--n", type=int, required=True)
    ce.add_argument("--p", type=int, default=2, choices=(1, 2))
    ce.add_argument("--seed", type=int, default=0)
    ce.add_argument("--restarts", type=int, default=64)
    ce.set_defaults(func=cmd_counterexample)

    diag = sub.add_parser("diagnose", help="rate diagnostics on a growing prefix")
    diag.add_argument("config")
    diag.add_argument("--out", default=None, help="override output_dir")
    diag.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
