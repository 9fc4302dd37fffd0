"""Exact conservative pointwise inference for F(x) given the ranks.

Conditionally on the ranks, ``n F_n(x)`` is distributed as a sum of
independent binomials ``Bin(N_r, B_r(p))`` with ``p = F(x)``.  Its CDF
``G_{N,p}(y)`` is strictly decreasing in ``p``, so p-values and one-sided
bounds follow from bisection on ``p``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .beta_rank import RankBetaFamily, family
from .errors import ArgumentError
from .sampling import ImpreciseRanking, RankedDataset, StratumCounts, as_counts

MAXITER = 100


@dataclass(frozen=True)
class SumBinomialDistribution:
    """Law of ``sum_r Y_r`` with independent ``Y_r ~ Bin(N_r, B_r(p))``."""

    counts: StratumCounts
    p: float
    pmf: np.ndarray

    @property
    def n(self) -> int:
        return self.pmf.shape[0] - 1

    def cdf(self, y: int) -> float:
        return cdf_G(self, y)

    def mean(self) -> float:
        return float(np.dot(np.arange(self.n + 1), self.pmf))


@dataclass(frozen=True)
class PoissonBinomialDistribution:
    """Law of a sum of independent Bernoulli variables with success probabilities ``probs``."""

    probs: np.ndarray
    pmf: np.ndarray

    @property
    def n(self) -> int:
        return self.pmf.shape[0] - 1

    def cdf(self, y: int) -> float:
        return cdf_G(self, y)

    def mean(self) -> float:
        return float(np.dot(np.arange(self.n + 1), self.pmf))


@dataclass(frozen=True)
class PointwiseInterval:
    y: int
    lower: float
    upper: float
    alpha: float


def _prob(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ArgumentError(f"p = {p} outside [0, 1]")
    return p


def _alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ArgumentError(f"alpha = {alpha} outside (0, 1)")
    return alpha


def _check_y(y: int, n: int, low: int = 0) -> int:
    if isinstance(y, bool) or int(y) != y or not low <= y <= n:
        raise ArgumentError(f"y = {y} outside {low}..{n}")
    return int(y)


# -- distributions ------------------------------------------------------------


def binomial_pmf(n: int, q: float) -> np.ndarray:
    if q <= 0.0:
        out = np.zeros(n + 1)
        out[0] = 1.0
        return out
    if q >= 1.0:
        out = np.zeros(n + 1)
        out[n] = 1.0
        return out
    return stats.binom.pmf(np.arange(n + 1), n, q)


def sum_binomial_pmf(counts: Sequence[int], probs: Sequence[float]) -> np.ndarray:
    """pmf of ``sum_r Bin(counts[r], probs[r])`` by sequential convolution."""
    pmf = np.ones(1)
    for N, q in zip(counts, probs):
        if N:
            pmf = np.convolve(pmf, binomial_pmf(int(N), float(q)))
    return pmf


def sum_binomial(counts: StratumCounts | Sequence[int], fam: RankBetaFamily, p: float) -> SumBinomialDistribution:
    counts = as_counts(counts)
    if counts.k != fam.k:
        raise ArgumentError(f"counts have {counts.k} strata but the family has k = {fam.k}")
    p = _prob(p)
    return SumBinomialDistribution(counts, p, sum_binomial_pmf(counts.counts, fam.cdfs(p)))


def poisson_binomial_pmf(probs: np.ndarray) -> np.ndarray:
    """O(n^2) dynamic programme over the Bernoulli summands."""
    pmf = np.zeros(probs.shape[0] + 1)
    pmf[0] = 1.0
    for i, q in enumerate(probs, start=1):
        pmf[1:i + 1] = pmf[1:i + 1] * (1.0 - q) + pmf[:i] * q
        pmf[0] *= 1.0 - q
    return pmf


def poisson_binomial(rankings: ImpreciseRanking, fam: RankBetaFamily, p: float) -> PoissonBinomialDistribution:
    """Count distribution under imprecise ranking: ``P(Z_i = 1) = sum_r R_i(r) B_r(p)``."""
    if rankings.k != fam.k:
        raise ArgumentError(f"rankings cover {rankings.k} ranks but the family has k = {fam.k}")
    p = _prob(p)
    probs = np.clip(rankings.masses @ fam.cdfs(p), 0.0, 1.0)
    return PoissonBinomialDistribution(probs, poisson_binomial_pmf(probs))


def generalized_beta_cdf(r: int, s: int, p: float) -> float:
    """CDF of Beta(r, s) with integer parameters, i.e. ``B_r`` for set size ``r + s - 1``."""
    if int(r) != r or int(s) != s or r < 1 or s < 1:
        raise ArgumentError(f"beta parameters must be positive integers, got ({r}, {s})")
    return family(int(r + s - 1)).beta_cdf(int(r), p)


def cdf_G(dist, y: int) -> float:
    """``P(S <= y)`` for ``-1 <= y <= n``."""
    y = _check_y(y, dist.n, low=-1)
    if y < 0:
        return 0.0
    if y >= dist.n:
        return 1.0
    return float(min(1.0, dist.pmf[: y + 1].sum()))


def upper_tail(dist, y: int) -> float:
    """``P(S >= y) = 1 - G(y - 1)``, summed directly."""
    y = _check_y(y, dist.n + 1)
    if y <= 0:
        return 1.0
    return float(min(1.0, dist.pmf[y:].sum()))


# -- count models -------------------------------------------------------------


@dataclass(frozen=True)
class CountModel:
    """Conditional law of ``n F_n(x)`` as a function of ``p = F(x)``.

    ``success(p)`` returns per-unit success probabilities grouped as
    ``(sizes, probs)``: ``sizes[j]`` units share probability ``probs[j]``.
    """

    n: int
    success: Callable[[float], tuple[np.ndarray, np.ndarray]]

    def pmf(self, p: float) -> np.ndarray:
        sizes, probs = self.success(p)
        if np.all(sizes == 1):
            return poisson_binomial_pmf(probs)
        return sum_binomial_pmf(sizes, probs)

    def mean(self, p: float) -> float:
        sizes, probs = self.success(p)
        return float(np.dot(sizes, probs))

    def G(self, p: float, y: int) -> float:
        if y < 0:
            return 0.0
        if y >= self.n:
            return 1.0
        return float(min(1.0, self.pmf(p)[: y + 1].sum()))

    def tail(self, p: float, y: int) -> float:
        if y <= 0:
            return 1.0
        if y > self.n:
            return 0.0
        return float(min(1.0, self.pmf(p)[y:].sum()))


def counts_model(counts: StratumCounts | Sequence[int], fam: RankBetaFamily) -> CountModel:
    counts = as_counts(counts)
    if counts.k != fam.k:
        raise ArgumentError(f"counts have {counts.k} strata but the family has k = {fam.k}")
    sizes = np.asarray(counts.counts, dtype=np.int64)
    return CountModel(counts.n, lambda p: (sizes, fam.cdfs(p)))


def ranking_model(rankings: ImpreciseRanking, fam: RankBetaFamily) -> CountModel:
    if rankings.k != fam.k:
        raise ArgumentError(f"rankings cover {rankings.k} ranks but the family has k = {fam.k}")
    ones = np.ones(rankings.n, dtype=np.int64)
    return CountModel(rankings.n, lambda p: (ones, np.clip(rankings.masses @ fam.cdfs(p), 0.0, 1.0)))


def dataset_model(ds: RankedDataset) -> CountModel:
    """Model for any dataset; heterogeneous set sizes use ``B_{r, k_i + 1 - r}``."""
    if ds.k is not None:
        return counts_model(ds.stratum_counts(), family(ds.k))
    pairs, sizes = np.unique(np.stack([ds.ranks, ds.set_sizes], axis=1), axis=0, return_counts=True)

    def success(p):
        return sizes, np.array([family(int(k)).beta_cdf(int(r), p) for r, k in pairs])

    return CountModel(ds.n, success)


# -- bisection ----------------------------------------------------------------


def _bisect(f: Callable[[float], float], lo: float = 0.0, hi: float = 1.0) -> float:
    """Root of increasing ``f`` on [lo, hi] with f(lo) < 0 < f(hi)."""
    for _ in range(MAXITER):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def model_bound_upper(model: CountModel, alpha: float, y: int) -> float:
    alpha = _alpha(alpha)
    y = _check_y(y, model.n)
    if y == model.n:
        return 1.0
    return _bisect(lambda p: alpha - model.G(p, y))


def model_bound_lower(model: CountModel, alpha: float, y: int) -> float:
    alpha = _alpha(alpha)
    y = _check_y(y, model.n)
    if y == 0:
        return 0.0
    # G(y-1) = 1 - alpha  <=>  P(S >= y) = alpha, increasing in p
    return _bisect(lambda p: model.tail(p, y) - alpha)


def model_interval(model: CountModel, alpha: float, y: int) -> PointwiseInterval:
    alpha = _alpha(alpha)
    return PointwiseInterval(
        int(y), model_bound_lower(model, alpha / 2, y), model_bound_upper(model, alpha / 2, y), alpha
    )


def generalized_moment(model: CountModel, y: float) -> float:
    """``p`` with expected count ``model.mean(p) = y`` (moment estimator, general design)."""
    if y <= 0:
        return 0.0
    if y >= model.n:
        return 1.0
    return _bisect(lambda p: model.mean(p) - y)


# -- public API on stratum counts -------------------------------------------------


def pvalue_ge(counts, fam: RankBetaFamily, p0: float, y: int) -> float:
    """p-value for ``H0: F(x) >= p0`` given ``n F_n(x) = y``."""
    dist = sum_binomial(counts, fam, p0)
    return cdf_G(dist, _check_y(y, dist.n))


def pvalue_le(counts, fam: RankBetaFamily, p0: float, y: int) -> float:
    """p-value for ``H0: F(x) <= p0`` given ``n F_n(x) = y``."""
    dist = sum_binomial(counts, fam, p0)
    return upper_tail(dist, _check_y(y, dist.n))


def bound_upper(counts, fam: RankBetaFamily, alpha: float, y: int) -> float:
    """One-sided upper bound ``b_alpha(N, y)``."""
    return model_bound_upper(counts_model(counts, fam), alpha, y)


def bound_lower(counts, fam: RankBetaFamily, alpha: float, y: int) -> float:
    """One-sided lower bound ``a_alpha(N, y)``."""
    return model_bound_lower(counts_model(counts, fam), alpha, y)


def interval(counts, fam: RankBetaFamily, alpha: float, y: int) -> PointwiseInterval:
    """Two-sided ``[a_{alpha/2}, b_{alpha/2}]``."""
    return model_interval(counts_model(counts, fam), alpha, y)


def clopper_pearson(n: int, alpha: float, y: int) -> tuple[float, float]:
    """Standard one-sided-at-``alpha`` bounds ``(a^st, b^st)`` from beta quantiles."""
    alpha = _alpha(alpha)
    y = _check_y(y, n)
    lo = 0.0 if y == 0 else float(stats.beta.ppf(alpha, y, n - y + 1))
    hi = 1.0 if y == n else float(stats.beta.ppf(1 - alpha, y + 1, n - y))
    return lo, hi


@dataclass(frozen=True)
class IntervalTable:
    """Two-sided bounds for every ``y = 0..n``, next to the rank-ignoring ones."""

    alpha: float
    lower: np.ndarray
    upper: np.ndarray
    lower_st: np.ndarray
    upper_st: np.ndarray

    COLUMNS = ("y", "lower", "upper", "lower_st", "upper_st")

    def rows(self):
        for y in range(self.lower.shape[0]):
            yield y, self.lower[y], self.upper[y], self.lower_st[y], self.upper_st[y]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for y, *vals in self.rows():
            w.writerow([y] + [repr(float(v)) for v in vals])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "rows": [dict(zip(self.COLUMNS, (r[0],) + tuple(map(float, r[1:]))))
                                              for r in self.rows()]}


def interval_table(model: CountModel, alpha: float) -> IntervalTable:
    alpha = _alpha(alpha)
    n = model.n
    ivs = [model_interval(model, alpha, y) for y in range(n + 1)]
    st = [clopper_pearson(n, alpha / 2, y) for y in range(n + 1)]
    return IntervalTable(
        alpha,
        np.array([iv.lower for iv in ivs]),
        np.array([iv.upper for iv in ivs]),
        np.array([s[0] for s in st]),
        np.array([s[1] for s in st]),
    )
