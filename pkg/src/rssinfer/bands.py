"""Monte Carlo Kolmogorov-Smirnov type confidence bands.

Conditionally on the stratum sizes, the estimators are distribution-free, so
the band half-width ``kappa`` is the (1 - alpha)-quantile of
``sup_t |B_n^Z(t) - t|`` for uniform data where ``N_r`` values have CDF
``B_r``.  For any step function with plateaus ``phi`` and sorted sample
``X_(1..n)`` the supremum equals ``max_i max(phi_i - X_(i), X_(i) - phi_{i-1})``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _backend
from .beta_rank import RankBetaFamily, family
from .errors import ArgumentError
from .estimators import StepCdf, estimate, moment_plateaus, npmle_plateaus, stratified_plateaus
from .rng import BLOCK, blocks, run_blocks, substream
from .sampling import RankedDataset, StratumCounts, as_counts

STREAM_BANDS = 3
DEFAULT_REPLICATIONS = 100_000
MIN_REPLICATIONS = 1000


@dataclass(frozen=True)
class BandResult:
    estimate: StepCdf
    kappa: float
    alpha: float
    replications: int
    seed: int
    estimator: str

    def lower(self) -> np.ndarray:
        """Lower band on each plateau ``0..n``."""
        return np.maximum(0.0, self.estimate.plateaus - self.kappa)

    def upper(self) -> np.ndarray:
        return np.minimum(1.0, self.estimate.plateaus + self.kappa)

    def contains(self, F) -> bool:
        """Whether the band covers the continuous CDF ``F`` everywhere.

        On the plateau ``[X_(y), X_(y+1))`` a nondecreasing ``F`` ranges over
        ``[F(X_(y)), F(X_(y+1)-)]``, so checking the endpoints suffices.
        """
        xs = self.estimate.jump_points
        Fx = np.asarray(F(xs), dtype=float)
        lo, hi = self.lower(), self.upper()
        left = np.concatenate([[0.0], Fx])
        right = np.concatenate([Fx, [1.0]])
        return bool(np.all(left >= lo) and np.all(right <= hi))

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "alpha": self.alpha,
            "kappa": self.kappa,
            "replications": self.replications,
            "seed": self.seed,
            "estimate": self.estimate.to_dict(),
            "lower": self.lower().tolist(),
            "upper": self.upper().tolist(),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("x", "lower", "estimate", "upper"))
        lo, hi, ph = self.lower(), self.upper(), self.estimate.plateaus
        for i, x in enumerate(self.estimate.jump_points, start=1):
            w.writerow((repr(float(x)), repr(float(lo[i])), repr(float(ph[i])), repr(float(hi[i]))))
        return buf.getvalue()


def sup_statistic(phi: np.ndarray, sorted_sample: np.ndarray) -> float:
    """``sup_t |G(t) - t|`` for the step function with plateaus ``phi`` at ``sorted_sample``."""
    phi = np.ascontiguousarray(phi, dtype=float)
    xs = np.ascontiguousarray(sorted_sample, dtype=float)
    if phi.shape != (xs.shape[0] + 1,):
        raise ArgumentError("need n sample points and n + 1 plateau values")
    if np.any(np.diff(xs) < 0):
        raise ArgumentError("sample must be sorted ascending")
    return float(_backend.kernels.sup_stat(phi, xs))


def sup_statistic_M(counts, fam: RankBetaFamily, phi: np.ndarray, sorted_sample: np.ndarray) -> float:
    counts = as_counts(counts)
    if len(phi) != counts.n + 1:
        raise ArgumentError(f"expected {counts.n + 1} plateau values, got {len(phi)}")
    return sup_statistic(phi, sorted_sample)


def conservative_quantile(values: np.ndarray, alpha: float) -> float:
    """Order statistic ``ceil((1 - alpha)(M + 1))`` of ``M`` values (capped at ``M``)."""
    values = np.asarray(values, dtype=float)
    m = values.shape[0]
    j = min(m, math.ceil((1.0 - alpha) * (m + 1) - 1e-9))
    return float(np.partition(values, j - 1)[j - 1])


def _draw_design(rng: np.random.Generator, labels: np.ndarray, k: int, size: int) -> np.ndarray:
    # (size, n) uniforms; column i has CDF B_{labels[i]+1}
    if k == 1:
        return rng.random((size, labels.shape[0]))
    u = rng.random((size, labels.shape[0], k))
    u.sort(axis=-1)
    idx = np.broadcast_to(labels[None, :, None], (size, labels.shape[0], 1))
    return np.take_along_axis(u, idx, axis=-1)[..., 0]


def simulate_sup_statistics(counts, fam: RankBetaFamily, Z: str, replications: int,
                            seed: int = 0, threads: int | None = None) -> np.ndarray:
    """``||B_n^Z - B||_inf`` for ``replications`` simulated designs.

    Replication ``i`` always uses the same random numbers for a given
    ``(counts, seed)``, whatever ``Z`` and the worker count.
    """
    counts = as_counts(counts)
    if counts.k != fam.k:
        raise ArgumentError(f"counts have {counts.k} strata but the family has k = {fam.k}")
    if counts.n < 1:
        raise ArgumentError("need at least one observation")
    if Z not in ("naive", "S", "M", "L"):
        raise ArgumentError(f"unknown estimator {Z!r}")
    if Z == "S":
        stratified_plateaus(counts, counts.labels())  # raises on empty strata
    labels = counts.labels()
    n, k = counts.n, fam.k
    N = counts.as_array()
    if Z == "naive":
        phi = np.arange(n + 1) / n
    elif Z == "M":
        phi = moment_plateaus(counts, fam)

    def block(j, start, stop):
        vals = _draw_design(substream(seed, STREAM_BANDS, j), labels, k, stop - start)
        if Z in ("naive", "M"):
            vals.sort(axis=1)
            return _backend.kernels.plateau_sup_batch(phi, vals)
        order = np.argsort(vals, axis=1)
        xs = np.ascontiguousarray(np.take_along_axis(vals, order, axis=1))
        lab = np.ascontiguousarray(labels[order])
        if Z == "S":
            return _backend.kernels.stratified_sup_batch(N, lab, xs)
        return _backend.kernels.npmle_sup_batch(fam.coef, N, lab, xs)

    return np.concatenate(run_blocks(block, blocks(int(replications), BLOCK), threads))


def estimate_kappa(counts, fam: RankBetaFamily, Z: str, alpha: float,
                   replications: int = DEFAULT_REPLICATIONS, seed: int = 0,
                   threads: int | None = None) -> float:
    """Monte Carlo estimate of the band half-width ``kappa^Z(N, alpha)``."""
    if not 0.0 < alpha < 1.0:
        raise ArgumentError(f"alpha = {alpha} outside (0, 1)")
    if replications < MIN_REPLICATIONS:
        raise ArgumentError(f"need at least {MIN_REPLICATIONS} replications, got {replications}")
    sims = simulate_sup_statistics(counts, fam, Z, replications, seed, threads)
    return conservative_quantile(sims, alpha)


@dataclass(frozen=True)
class KappaSweep:
    """``kappa^M(m)`` and ``kappa(m)`` for the k = 2 designs ``(m, n - m)``."""

    n: int
    alpha: float
    m: np.ndarray
    kappa_M: np.ndarray
    kappa_naive: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return stats.binom.pmf(self.m, self.n, 0.5)

    def jps_average(self) -> float:
        return float(np.dot(self.weights, self.kappa_M))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("m", "kappa_M", "kappa_naive", "jps_weight"))
        for row in zip(self.m, self.kappa_M, self.kappa_naive, self.weights):
            w.writerow((int(row[0]),) + tuple(repr(float(v)) for v in row[1:]))
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "n": self.n, "alpha": self.alpha, "m": self.m.tolist(),
            "kappa_M": self.kappa_M.tolist(), "kappa_naive": self.kappa_naive.tolist(),
            "jps_average": self.jps_average(),
        }


def kappa_sweep_k2(n: int, alpha: float, replications: int = DEFAULT_REPLICATIONS,
                   seed: int = 0, threads: int | None = None, naive: bool = True) -> KappaSweep:
    fam = family(2)
    ms = np.arange(n + 1)
    kM, kN = [], []
    for m in ms:
        counts = StratumCounts((int(m), int(n - m)))
        sims_M = simulate_sup_statistics(counts, fam, "M", replications, seed, threads)
        kM.append(conservative_quantile(sims_M, alpha))
        if naive:
            sims_N = simulate_sup_statistics(counts, fam, "naive", replications, seed, threads)
            kN.append(conservative_quantile(sims_N, alpha))
        else:
            kN.append(np.nan)
    return KappaSweep(n, alpha, ms, np.array(kM), np.array(kN))


def jps_average_halfwidth(fam: RankBetaFamily, n: int, alpha: float,
                          replications: int = DEFAULT_REPLICATIONS, seed: int = 0,
                          threads: int | None = None) -> float:
    """``sum_m C(n, m) 2^-n kappa^M((m, n - m))``: mean half-width under JPS with k = 2."""
    if fam.k != 2:
        raise ArgumentError("the JPS average half-width is defined for k = 2")
    return kappa_sweep_k2(n, alpha, replications, seed, threads, naive=False).jps_average()


def band(ds: RankedDataset, Z: str, alpha: float, replications: int = DEFAULT_REPLICATIONS,
         seed: int = 0, threads: int | None = None) -> BandResult:
    """Estimator on the data plus a simultaneous half-width simulated under its counts."""
    est = estimate(ds, Z)
    k = ds.require_homogeneous()
    kappa = estimate_kappa(ds.stratum_counts(), family(k), Z, alpha, replications, seed, threads)
    return BandResult(est, kappa, float(alpha), int(replications), int(seed), Z)
