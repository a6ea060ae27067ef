"""Generator stream discipline, counterexample structure, support
collapsing, and CSV round-trips."""

from pathlib import Path

import numpy as np
import pytest

from mlrsolve.core import CoefficientSet, best_assignment, objective
from mlrsolve.rng import Xoshiro256PP
from mlrsolve.synth import (
    CounterexampleSpec,
    GeneratorSpec,
    _draw_noise,
    _exact_counts,
    collapse_support,
    counterexample,
    generate,
    read_csv,
    write_csv,
)


def _spec(**kw):
    base = dict(
        n=40,
        d=2,
        k=2,
        weights=np.array([0.5, 0.5]),
        coefficients=np.array([[1.0, 0.0], [-1.0, 2.0]]),
        noise="gaussian",
        noise_scale=0.1,
        seed=7,
    )
    base.update(kw)
    return GeneratorSpec(**base)


# ----------------------------------------------------------- apportionment


def test_exact_counts_largest_remainder():
    assert list(_exact_counts(10, np.array([0.5, 0.3, 0.2]))) == [5, 3, 2]
    assert list(_exact_counts(7, np.array([0.5, 0.3, 0.2]))) == [4, 2, 1]
    assert list(_exact_counts(5, np.array([1 / 3, 1 / 3, 1 / 3]))) == [2, 2, 1]
    assert _exact_counts(9, np.array([0.5, 0.5])).sum() == 9


def test_label_counts_match_apportionment():
    ds = generate(_spec(n=37, weights=np.array([0.7, 0.3])))
    counts = np.bincount(ds.truth.labels, minlength=2)
    assert list(counts) == list(_exact_counts(37, np.array([0.7, 0.3])))


# ------------------------------------------------------------ determinism


def test_equal_specs_give_identical_datasets():
    a = generate(_spec())
    b = generate(_spec())
    assert np.array_equal(a.x, b.x)
    assert np.array_equal(a.y, b.y)
    assert np.array_equal(a.truth.labels, b.truth.labels)


def test_seed_changes_data():
    a = generate(_spec(seed=7))
    b = generate(_spec(seed=8))
    assert not np.array_equal(a.y, b.y)


def test_noise_kind_drawn_after_covariates_and_labels():
    # stream order is shuffle, covariates, noise: swapping the noise
    # kind must leave labels and covariates untouched
    a = generate(_spec(noise="gaussian"))
    b = generate(_spec(noise="rademacher"))
    assert np.array_equal(a.truth.labels, b.truth.labels)
    assert np.array_equal(a.x, b.x)
    assert not np.array_equal(a.y, b.y)


def test_noise_scale_rescales_the_same_draws():
    a = generate(_spec(noise_scale=0.0))
    b = generate(_spec(noise_scale=0.5))
    eps = (b.y - a.y) / 0.5
    c = generate(_spec(noise_scale=1.0))
    assert c.y - a.y == pytest.approx(eps, rel=1e-12)


# -------------------------------------------------------------- covariates


def test_uniform01_with_intercept_layout():
    ds = generate(
        _spec(
            covariates="uniform01_with_intercept",
            d=3,
            coefficients=np.array([[1.0, 0.0, 2.0], [-1.0, 2.0, 0.5]]),
        )
    )
    assert np.all(ds.x[:, 2] == 1.0)
    assert np.all((ds.x[:, :2] >= 0.0) & (ds.x[:, :2] < 1.0))


def test_noiseless_responses_are_exact():
    ds = generate(_spec(noise_scale=0.0, covariates="iid_gaussian"))
    truth = ds.truth.coefficients.betas
    for i in range(ds.n):
        want = float(np.dot(ds.x[i], truth[ds.truth.labels[i]]))
        assert ds.y[i] == pytest.approx(want, rel=1e-15)


def test_custom_covariates_are_used_verbatim():
    x = np.arange(8.0).reshape(4, 2)
    ds = generate(
        _spec(n=4, covariates="custom", custom_x=x, noise_scale=0.0)
    )
    assert np.array_equal(ds.x, x)


# ------------------------------------------------------------- noise kinds


def test_noise_means_and_ranges():
    n = 100_000
    for kind, spread in [
        ("gaussian", 1.0),
        ("uniform_pm1", 0.6),
        ("rademacher", 1.0),
        ("mds_scaled", 1.5),
    ]:
        eps = _draw_noise(Xoshiro256PP(11), kind, n)
        assert abs(eps.mean()) < 4.0 * spread / np.sqrt(n)
    uni = _draw_noise(Xoshiro256PP(12), "uniform_pm1", n)
    assert uni.min() >= -1.0 and uni.max() < 1.0
    rad = _draw_noise(Xoshiro256PP(13), "rademacher", n)
    assert set(np.unique(rad)) == {-1.0, 1.0}


def test_mds_noise_is_martingale_difference_like():
    # conditional mean given the sign of the previous draw stays near 0
    n = 100_000
    eps = _draw_noise(Xoshiro256PP(19), "mds_scaled", n)
    prev = eps[:-1]
    nxt = eps[1:]
    for mask in (prev > 0, prev < 0):
        group = nxt[mask]
        assert abs(group.mean()) < 4.0 * 1.5 / np.sqrt(group.size)


def test_mds_noise_recursion():
    n = 500
    eta = Xoshiro256PP(21).gaussians(n)
    eps = _draw_noise(Xoshiro256PP(21), "mds_scaled", n)
    prev = 0.0
    for i in range(n):
        scale = 1.0 + min(abs(prev), 1.0) / 2.0
        assert eps[i] == pytest.approx(eta[i] * scale, rel=1e-15)
        assert 1.0 <= scale <= 1.5
        prev = eps[i]


# ---------------------------------------------------------- counterexample


def test_counterexample_support_multiset():
    ds = counterexample(CounterexampleSpec(n=8, delta=0.25, sigma=1.0, seed=3))
    assert np.all(ds.x == 1.0)
    vals, counts = np.unique(ds.y, return_counts=True)
    assert list(vals) == [-1.0, -0.75, 1.0, 1.25]
    assert list(counts) == [2, 2, 2, 2]
    # labels follow the responses: delta-shifted values belong to cluster 0
    for yi, lab in zip(ds.y, ds.truth.labels):
        assert lab == (0 if yi in (1.25, -0.75) else 1)


def test_counterexample_odd_n_draws_per_sample():
    ds = counterexample(CounterexampleSpec(n=11, delta=0.25, sigma=1.0, seed=5))
    assert ds.n == 11
    assert set(np.unique(ds.truth.labels)) <= {0, 1}
    assert set(np.unique(ds.y)) <= {1.25, -0.75, 1.0, -1.0}


def test_counterexample_warnings():
    with pytest.warns(UserWarning, match="degenerate"):
        counterexample(CounterexampleSpec(n=4, delta=0.0, sigma=1.0))
    with pytest.warns(UserWarning, match="regime"):
        counterexample(CounterexampleSpec(n=4, delta=2.0, sigma=1.0))


def test_collapse_support_counterexample():
    ds = counterexample(CounterexampleSpec(n=4000, delta=0.25, sigma=1.0, seed=1))
    small, counts = collapse_support(ds)
    assert small.n == 4
    assert sorted(counts) == [1000, 1000, 1000, 1000]
    assert sorted(small.y) == [-1.0, -0.75, 1.0, 1.25]
    # per-sample mean objective is preserved for any coefficients
    for seed in (0, 1, 2):
        g = Xoshiro256PP(seed)
        coeffs = CoefficientSet(g.gaussians(2).reshape(2, 1))
        for p in (1, 2):
            full = objective(ds, coeffs, best_assignment(ds, coeffs, p), p)
            tiny = objective(small, coeffs, best_assignment(small, coeffs, p), p)
            assert full == pytest.approx(tiny, rel=1e-12)


def test_collapse_support_keeps_distinct_rows():
    g = Xoshiro256PP(9)
    x = g.gaussians(12).reshape(6, 2)
    from mlrsolve.core import Dataset

    ds = Dataset(x=x, y=g.gaussians(6))
    small, counts = collapse_support(ds)
    assert small.n == 6
    assert np.all(counts == 1)


# ------------------------------------------------------------------- CSV


def test_csv_round_trip_with_labels(tmp_path):
    ds = generate(_spec(covariates="iid_gaussian"))
    path = tmp_path / "data.csv"
    write_csv(ds, path)
    back = read_csv(path)
    assert np.array_equal(back.x, ds.x)
    assert np.array_equal(back.y, ds.y)
    assert np.array_equal(back.truth.labels, ds.truth.labels)
    assert back.truth.coefficients is None


def test_csv_without_truth_omits_label_column(tmp_path):
    from mlrsolve.core import Dataset

    ds = Dataset(x=np.array([[1.0], [2.0]]), y=np.array([3.0, 4.0]))
    path = tmp_path / "plain.csv"
    write_csv(ds, path)
    text = path.read_text()
    assert text == "x_0,y\n1,3\n2,4\n"
    back = read_csv(path)
    assert back.truth is None


def test_csv_golden_bytes(tmp_path):
    ds = generate(
        GeneratorSpec(
            n=2,
            d=1,
            k=1,
            weights=np.array([1.0]),
            coefficients=np.array([[2.0]]),
            covariates="custom",
            custom_x=np.array([[1.0], [2.5]]),
            noise_scale=0.0,
            seed=0,
        )
    )
    path = tmp_path / "golden.csv"
    write_csv(ds, path)
    assert path.read_text() == "x_0,y,label\n1,2,0\n2.5,5,0\n"


def test_csv_golden_generator_file(tmp_path):
    # frozen output of the uniform-covariate generator at seed 7;
    # audited: intercept column, exact label halves, and residual/scale
    # reproducing the documented noise stream order
    spec = GeneratorSpec(
        n=8,
        d=2,
        k=2,
        weights=np.array([0.5, 0.5]),
        coefficients=np.array([[-0.93, 0.1], [0.0, 0.0]]),
        covariates="uniform01_with_intercept",
        noise="gaussian",
        noise_scale=0.01,
        seed=7,
    )
    path = tmp_path / "seed7.csv"
    write_csv(generate(spec), path)
    golden = Path(__file__).parent / "golden" / "uniform_intercept_seed7.csv"
    assert path.read_bytes() == golden.read_bytes()


def test_read_csv_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("")
    with pytest.raises(ValueError, match="empty dataset"):
        read_csv(p)
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="expected header"):
        read_csv(p)
    p.write_text("x_0,y\n1,2,3\n")
    with pytest.raises(ValueError, match=rf"{p}:2: expected 2 fields"):
        read_csv(p)
    p.write_text("x_0,y\n1,2\nfoo,3\n")
    with pytest.raises(ValueError, match=rf"{p}:3"):
        read_csv(p)


# -------------------------------------------------------------- validation


def test_generator_spec_validation():
    with pytest.raises(ValueError, match="sum to 1"):
        _spec(weights=np.array([0.5, 0.6]))
    with pytest.raises(ValueError, match="one entry per cluster"):
        _spec(weights=np.array([1.0]))
    with pytest.raises(ValueError, match="expected count"):
        _spec(n=2, weights=np.array([0.9, 0.1]))
    with pytest.raises(ValueError, match="k x d"):
        _spec(coefficients=np.array([[1.0], [2.0]]))
    with pytest.raises(ValueError, match="covariate kind"):
        _spec(covariates="lognormal")
    with pytest.raises(ValueError, match="noise kind"):
        _spec(noise="cauchy")
    with pytest.raises(ValueError, match="requires custom_x"):
        _spec(covariates="custom")
    with pytest.raises(ValueError, match="n x d"):
        _spec(covariates="custom", custom_x=np.ones((3, 2)))
    with pytest.raises(ValueError, match="positive"):
        CounterexampleSpec(n=0, delta=0.1, sigma=1.0)
    with pytest.raises(ValueError, match="sigma"):
        CounterexampleSpec(n=4, delta=0.1, sigma=0.0)
