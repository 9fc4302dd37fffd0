import numpy as np
import pytest

from rssinfer.bands import (
    KappaSweep,
    band,
    conservative_quantile,
    estimate_kappa,
    jps_average_halfwidth,
    kappa_sweep_k2,
    simulate_sup_statistics,
    sup_statistic,
    sup_statistic_M,
)
from rssinfer.beta_rank import family
from rssinfer.errors import ArgumentError, EstimatorUndefinedError
from rssinfer.estimators import StepCdf, moment_plateaus
from rssinfer.sampling import StratumCounts, simulate_rss


def test_sup_statistic_against_fine_grid(rng):
    grid = np.arange(0, 100001) / 100000
    for _ in range(100):
        n = int(rng.integers(1, 30))
        xs = np.sort(rng.random(n))
        phi = np.concatenate([[0.0], np.sort(rng.random(n - 1)), [1.0]])
        step = StepCdf(xs, phi)
        on_grid = np.max(np.abs(step(grid) - grid))
        exact = sup_statistic(phi, xs)
        # the supremum is approached just left of a jump, so a grid undershoots by at most its spacing
        assert on_grid <= exact + 1e-15
        assert exact <= on_grid + 1e-5 + 1e-15


def test_sup_statistic_simple():
    assert sup_statistic([0.0, 1.0], [0.3]) == pytest.approx(0.7)
    assert sup_statistic([0.0, 0.5, 1.0], [0.25, 0.75]) == pytest.approx(0.25)
    with pytest.raises(ArgumentError):
        sup_statistic([0.0, 1.0], [0.3, 0.4])
    with pytest.raises(ArgumentError):
        sup_statistic([0.0, 0.5, 1.0], [0.4, 0.3])
    phi = moment_plateaus(StratumCounts((1, 2)), family(2))
    assert sup_statistic_M((1, 2), family(2), phi, [0.1, 0.2, 0.3]) == sup_statistic(phi, [0.1, 0.2, 0.3])


def test_conservative_quantile():
    vals = np.arange(1, 100, dtype=float)
    rng = np.random.default_rng(0)
    rng.shuffle(vals)
    assert conservative_quantile(vals, 0.05) == 95.0
    assert conservative_quantile(vals, 0.5) == 50.0
    assert conservative_quantile(vals, 0.001) == 99.0


def test_simulation_deterministic_and_worker_invariant(backend):
    fam = family(3)
    for Z in ("naive", "S", "M", "L"):
        a = simulate_sup_statistics((4, 5, 6), fam, Z, 1500, seed=3, threads=1)
        b = simulate_sup_statistics((4, 5, 6), fam, Z, 1500, seed=3, threads=3)
        np.testing.assert_array_equal(a, b)
        assert a.shape == (1500,)
        assert np.all((a > 0) & (a <= 1))
    c = simulate_sup_statistics((4, 5, 6), fam, "L", 1500, seed=4)
    assert not np.array_equal(a, c)


def test_balanced_M_matches_naive_exactly():
    fam = family(2)
    a = simulate_sup_statistics((10, 10), fam, "M", 3000, seed=1)
    b = simulate_sup_statistics((10, 10), fam, "naive", 3000, seed=1)
    np.testing.assert_array_equal(a, b)


def test_kappa_decreases_in_alpha_and_n():
    fam = family(1)
    k10 = estimate_kappa((30,), fam, "naive", 0.10, 20000, seed=0)
    k05 = estimate_kappa((30,), fam, "naive", 0.05, 20000, seed=0)
    k01 = estimate_kappa((30,), fam, "naive", 0.01, 20000, seed=0)
    assert k10 < k05 < k01
    k_big = estimate_kappa((120,), fam, "naive", 0.05, 20000, seed=0)
    assert k_big < k05
    # Kolmogorov asymptotics: sqrt(n) kappa -> 1.358
    assert np.sqrt(120) * k_big == pytest.approx(1.358, abs=0.05)


def test_band_result(backend):
    ds = simulate_rss(2, [15, 15], "uniform", seed=8)
    res = band(ds, "L", 0.05, 1000, seed=1)
    assert res.estimator == "L" and res.replications == 1000
    lo, hi = res.lower(), res.upper()
    assert np.all(lo <= res.estimate.plateaus) and np.all(res.estimate.plateaus <= hi)
    assert np.all((lo >= 0) & (hi <= 1))
    assert res.contains(lambda v: np.clip(v, 0, 1))
    assert not res.contains(lambda v: np.clip(v, 0, 1) ** 8)
    assert len(res.to_csv().splitlines()) == ds.n + 1
    assert res.to_dict()["kappa"] == res.kappa


def test_sweep_small():
    sweep = kappa_sweep_k2(6, 0.05, 1000, seed=0)
    assert isinstance(sweep, KappaSweep)
    assert sweep.m.tolist() == list(range(7))
    assert sweep.weights.sum() == pytest.approx(1.0)
    assert sweep.kappa_M[3] == sweep.kappa_naive[3]
    assert sweep.to_csv().splitlines()[0] == "m,kappa_M,kappa_naive,jps_weight"
    avg = jps_average_halfwidth(family(2), 6, 0.05, 1000, seed=0)
    assert avg == pytest.approx(sweep.jps_average())


def test_argument_checks():
    fam = family(2)
    with pytest.raises(ArgumentError):
        estimate_kappa((5, 5), fam, "M", 0.05, 500)
    with pytest.raises(ArgumentError):
        estimate_kappa((5, 5), fam, "M", 1.0, 2000)
    with pytest.raises(ArgumentError):
        simulate_sup_statistics((5, 5, 5), fam, "M", 1000)
    with pytest.raises(ArgumentError):
        simulate_sup_statistics((5, 5), fam, "Q", 1000)
    with pytest.raises(EstimatorUndefinedError):
        simulate_sup_statistics((5, 0), fam, "S", 1000)
    with pytest.raises(ArgumentError):
        jps_average_halfwidth(family(3), 5, 0.05, 1000)
