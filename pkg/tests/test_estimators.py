import numpy as np
import pytest

from rssinfer import _backend
from rssinfer.beta_rank import family
from rssinfer.errors import ArgumentError, DomainError, EstimatorUndefinedError
from rssinfer.estimators import (
    ESTIMATORS,
    StepCdf,
    ecdf,
    estimate,
    loglik,
    loglik_deriv,
    moment,
    moment_plateaus,
    moment_value,
    npmle,
    npmle_value,
    stratified,
    stratum_ecdf,
    transform_check,
)
from rssinfer.sampling import RankedDataset, StratumCounts, simulate_jps, simulate_rss

from conftest import random_dataset


def test_moment_root_oracle(backend):
    # 3 B_1(p) + B_2(p) = 2 with k = 2 reduces to p^2 - 3p + 1 = 0
    got = moment_value(StratumCounts((3, 1)), family(2), 2.0)
    assert got == pytest.approx((3 - 5 ** 0.5) / 2, abs=1e-15)
    assert got == pytest.approx(0.38196601125010515, abs=1e-15)


def test_npmle_root_oracle(backend):
    assert npmle_value(StratumCounts((1, 1)), family(2), [1.0, 0.0]) == pytest.approx(0.5, abs=1e-14)


def test_npmle_maximises_loglik_on_grid(backend):
    ds = RankedDataset.from_arrays([0.1, 0.4, 0.35, 0.8, 0.2], [1, 2, 3, 3, 1], 3)
    fit = npmle(ds)
    grid = np.linspace(1e-4, 1 - 1e-4, 9999)
    for y in range(1, ds.n):
        vals = np.array([loglik(ds, y, p) for p in grid])
        best = grid[np.argmax(vals)]
        assert fit.plateaus[y] == pytest.approx(best, abs=2e-4)
        assert loglik(ds, y, fit.plateaus[y]) >= vals.max() - 1e-9


def test_small_dataset_by_hand():
    ds = RankedDataset.from_arrays([0.3, 0.1, 0.7, 0.5], [2, 1, 2, 1], 2)
    S = stratified(ds)
    np.testing.assert_allclose(S.plateaus, [0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_array_equal(S.jump_points, [0.1, 0.3, 0.5, 0.7])
    # balanced design: moment estimator is the ECDF
    np.testing.assert_array_equal(moment(ds).plateaus, ecdf(ds).plateaus)
    assert S(0.0) == 0.0 and S(0.3) == 0.5 and S(0.69) == 0.75 and S(2.0) == 1.0


def test_balanced_identity_via_generic_kernel(backend):
    for k in (2, 3, 5):
        counts = StratumCounts((7,) * k)
        generic = _backend.kernels.moment_plateaus(family(k).coef, counts.as_array())
        np.testing.assert_allclose(generic, np.arange(7 * k + 1) / (7 * k), atol=1e-12)
        np.testing.assert_array_equal(moment_plateaus(counts, family(k)), np.arange(7 * k + 1) / (7 * k))


@pytest.mark.parametrize("seed", range(5))
def test_k1_reductions(backend, seed):
    rng = np.random.default_rng(seed)
    ds = simulate_rss(1, [int(rng.integers(1, 40))], "normal", seed=seed)
    ref = ecdf(ds).plateaus
    for Z in ("S", "M", "L"):
        np.testing.assert_allclose(estimate(ds, Z).plateaus, ref, atol=1e-12)


@pytest.mark.parametrize("seed", range(40))
def test_invariants_random(backend, seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 6))
    ds = random_dataset(rng, k, int(rng.integers(1, 80)))
    for Z in ESTIMATORS:
        try:
            fit = estimate(ds, Z)
        except EstimatorUndefinedError:
            assert Z == "S" and 0 in ds.stratum_counts().counts
            continue
        assert fit.is_valid(slack=1e-12), Z
        assert fit.plateaus[0] == 0.0 and fit.plateaus[-1] == 1.0
        np.testing.assert_array_equal(fit.jump_points, np.sort(ds.x))


def _score_changes_sign(ds, y, phi, d=1e-6):
    if phi <= d:
        return loglik_deriv(ds, y, d) <= 0
    if phi >= 1 - d:
        return loglik_deriv(ds, y, 1 - d) >= 0
    return loglik_deriv(ds, y, phi - d) >= 0 >= loglik_deriv(ds, y, phi + d)


@pytest.mark.parametrize("seed", range(20))
def test_npmle_is_score_root(backend, seed):
    rng = np.random.default_rng(100 + seed)
    ds = random_dataset(rng, int(rng.integers(2, 6)), int(rng.integers(2, 60)))
    fit = npmle(ds)
    for y in range(1, ds.n):
        assert _score_changes_sign(ds, y, fit.plateaus[y])


@pytest.mark.parametrize("seed", range(10))
def test_derivative_matches_finite_difference(seed):
    rng = np.random.default_rng(200 + seed)
    ds = random_dataset(rng, int(rng.integers(1, 6)), int(rng.integers(2, 60)))
    h = 1e-6
    for _ in range(10):
        y = int(rng.integers(0, ds.n + 1))
        p = float(rng.uniform(0.05, 0.95))
        fd = (loglik(ds, y, p + h) - loglik(ds, y, p - h)) / (2 * h)
        d = loglik_deriv(ds, y, p)
        assert abs(fd - d) <= 1e-5 * max(1.0, abs(d))


def test_loglik_domain():
    ds = RankedDataset.from_arrays([0.1, 0.2], [1, 2], 2)
    with pytest.raises(DomainError):
        loglik(ds, 1, 0.0)
    with pytest.raises(DomainError):
        loglik_deriv(ds, 1, 1.0)


def test_stratum_ecdf():
    ds = RankedDataset.from_arrays([0.3, 0.1, 0.7, 0.5, 0.2], [2, 1, 2, 1, 1], 2)
    np.testing.assert_allclose(stratum_ecdf(ds, 0), [0, 0])
    np.testing.assert_allclose(stratum_ecdf(ds, 3), [2 / 3, 0.5])
    np.testing.assert_allclose(stratum_ecdf(ds, 5), [1, 1])
    with pytest.raises(ArgumentError):
        stratum_ecdf(ds, 6)


def test_stratified_undefined_with_empty_stratum():
    ds = RankedDataset.from_arrays([0.3, 0.1], [1, 1], 3)
    with pytest.raises(EstimatorUndefinedError):
        stratified(ds)
    # the other two estimators stay defined
    assert moment(ds).is_valid() and npmle(ds).is_valid()


def test_single_stratum_extremes(backend):
    # only the top rank observed: estimators still span 0..1
    ds = RankedDataset.from_arrays([0.5, 0.6, 0.9], [3, 3, 3], 3)
    for Z in ("M", "L"):
        fit = estimate(ds, Z)
        assert fit.is_valid()
        # B_3(p) = p^3 = y / 3 on each plateau for both estimators
        np.testing.assert_allclose(fit.plateaus[1:-1], (np.arange(1, 3) / 3) ** (1 / 3), atol=1e-12)


def test_ties_are_handled():
    ds = RankedDataset.from_arrays([0.5, 0.5, 0.5, 0.2], [1, 2, 1, 2], 2)
    for Z in ESTIMATORS:
        fit = estimate(ds, Z)
        assert fit.is_valid(slack=1e-12)
        assert fit(0.5) == 1.0 and fit(0.49) == fit.plateaus[1]


def test_heterogeneous_rejected():
    ds = RankedDataset.from_arrays([0.1, 0.2], [1, 2], [2, 3])
    with pytest.raises(ArgumentError):
        moment(ds)


def test_unknown_estimator():
    ds = RankedDataset.from_arrays([0.1, 0.2], [1, 2], 2)
    with pytest.raises(ArgumentError):
        estimate(ds, "Q")


@pytest.mark.parametrize("seed", range(6))
def test_distribution_free(backend, seed):
    rng = np.random.default_rng(300 + seed)
    ds = random_dataset(rng, 3, 30, empty_ok=False)
    assert transform_check(ds, lambda v: np.log(v / (1 - v)))
    assert transform_check(ds, lambda v: 5 * v ** 3 - 2)


def test_transform_check_rejects_decreasing():
    ds = RankedDataset.from_arrays([0.1, 0.2, 0.3], [1, 2, 1], 2)
    with pytest.raises(ArgumentError):
        transform_check(ds, lambda v: -v)


def test_jps_data(backend):
    ds = simulate_jps(3, 40, "exponential", seed=4)
    for Z in ESTIMATORS:
        try:
            assert estimate(ds, Z).is_valid(slack=1e-12)
        except EstimatorUndefinedError:
            pass


def test_stepcdf_validation_and_export():
    with pytest.raises(ArgumentError):
        StepCdf([0.2, 0.1], [0, 0.5, 1])
    with pytest.raises(ArgumentError):
        StepCdf([0.1], [0, 1, 1])
    f = StepCdf([0.1, 0.2], [0, 0.5, 1])
    assert f.to_csv() == "x,value\n0.1,0.5\n0.2,1.0\n"
    assert f.to_dict() == {"jump_points": [0.1, 0.2], "plateaus": [0.0, 0.5, 1.0]}
    np.testing.assert_array_equal(f(np.array([0.0, 0.1, 0.15, 0.3])), [0, 0.5, 0.5, 1])
