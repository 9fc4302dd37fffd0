"""Step-function CDF estimators from ranked samples.

Every estimator here is a right-continuous step function with jumps at the
order statistics ``X_(1) <= ... <= X_(n)``; it is fully described by its
``n + 1`` plateau values ``phi_0 = 0 <= phi_1 <= ... <= phi_n = 1`` where
``phi_y`` is the value on ``[X_(y), X_(y+1))``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _backend
from .beta_rank import RankBetaFamily, family
from .errors import ArgumentError, DomainError, EstimatorUndefinedError
from .sampling import RankedDataset, StratumCounts, as_counts

ESTIMATORS = ("naive", "S", "M", "L")

MONOTONE_SLACK = 1e-9


@dataclass(frozen=True)
class StepCdf:
    """Right-continuous step function given by jump points and plateau values."""

    jump_points: np.ndarray
    plateaus: np.ndarray

    def __post_init__(self):
        jp = np.array(self.jump_points, dtype=float)
        ph = np.array(self.plateaus, dtype=float)
        if jp.ndim != 1 or ph.shape != (jp.shape[0] + 1,):
            raise ArgumentError("need n jump points and n + 1 plateau values")
        if np.any(np.diff(jp) < 0):
            raise ArgumentError("jump points must be sorted")
        jp.flags.writeable = False
        ph.flags.writeable = False
        object.__setattr__(self, "jump_points", jp)
        object.__setattr__(self, "plateaus", ph)

    @property
    def n(self) -> int:
        return self.jump_points.shape[0]

    def index(self, x) -> np.ndarray:
        """Plateau index ``#{i : X_(i) <= x}``."""
        return np.searchsorted(self.jump_points, x, side="right")

    def __call__(self, x):
        out = self.plateaus[self.index(x)]
        return float(out) if np.ndim(out) == 0 else out

    def is_valid(self, slack: float = 0.0) -> bool:
        ph = self.plateaus
        return bool(ph[0] == 0.0 and ph[-1] == 1.0 and np.all(np.diff(ph) >= -slack))

    def to_dict(self) -> dict:
        return {"jump_points": self.jump_points.tolist(), "plateaus": self.plateaus.tolist()}

    def to_csv(self) -> str:
        """Two columns ``x, value``: the value taken from each jump point on."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("x", "value"))
        for x, v in zip(self.jump_points, self.plateaus[1:]):
            w.writerow((repr(float(x)), repr(float(v))))
        return buf.getvalue()


# -- plateau builders (data-free, usable from simulations) --------------------


def moment_plateaus(counts: StratumCounts, fam: RankBetaFamily) -> np.ndarray:
    """Plateaus ``phi_y`` solving ``sum_r N_r B_r(phi_y) = y``.

    With equal stratum sizes ``sum_r B_r(p) = k p`` gives ``phi_y = y / n``
    exactly, and that value is returned without iteration.
    """
    counts = as_counts(counts)
    _check_family(counts, fam)
    n = counts.n
    if len(set(counts.counts)) == 1:
        return np.arange(n + 1) / n
    return _backend.kernels.moment_plateaus(fam.coef, counts.as_array())


def npmle_plateaus(counts: StratumCounts, fam: RankBetaFamily, labels: np.ndarray) -> np.ndarray:
    """NPMLE plateaus for observations whose 0-based ranks, in x order, are ``labels``."""
    counts = as_counts(counts)
    _check_family(counts, fam)
    phi = _backend.kernels.npmle_plateaus(fam.coef, counts.as_array(), np.asarray(labels, dtype=np.int64))
    if np.any(np.diff(phi) < -MONOTONE_SLACK):
        raise RuntimeError("NPMLE plateau sequence is not monotone; bisection failed")
    return phi


def stratified_plateaus(counts: StratumCounts, labels: np.ndarray) -> np.ndarray:
    counts = as_counts(counts)
    empty = [r + 1 for r, c in enumerate(counts.counts) if c == 0]
    if empty:
        raise EstimatorUndefinedError(f"stratified estimator undefined: empty strata for ranks {empty}")
    return _backend.kernels.stratified_plateaus(counts.as_array(), np.asarray(labels, dtype=np.int64))


def npmle_value(counts: StratumCounts, fam: RankBetaFamily, stratum_ecdf) -> float:
    """NPMLE value for frozen within-stratum ECDF values ``F_nr(x)``."""
    counts = as_counts(counts)
    _check_family(counts, fam)
    return float(_backend.kernels.npmle_root(fam.coef, counts.as_array(), np.asarray(stratum_ecdf, dtype=float)))


def moment_value(counts: StratumCounts, fam: RankBetaFamily, y: float) -> float:
    """Moment value ``p`` with ``sum_r N_r B_r(p) = y`` for a single count ``y``."""
    counts = as_counts(counts)
    _check_family(counts, fam)
    return float(_backend.kernels.moment_root(fam.coef, counts.as_array(), float(y)))


def _check_family(counts: StratumCounts, fam: RankBetaFamily) -> None:
    if counts.k != fam.k:
        raise ArgumentError(f"counts have {counts.k} strata but the family has k = {fam.k}")
    if counts.n < 1:
        raise ArgumentError("need at least one observation")


# -- estimators on datasets ---------------------------------------------------


def _prepare(ds: RankedDataset):
    k = ds.require_homogeneous()
    order = ds.sorted_order()
    return family(k), ds.stratum_counts(), ds.x[order], ds.ranks[order] - 1


def ecdf(ds: RankedDataset) -> StepCdf:
    """Empirical CDF ignoring ranks."""
    order = ds.sorted_order()
    return StepCdf(ds.x[order], np.arange(ds.n + 1) / ds.n)


def stratified(ds: RankedDataset) -> StepCdf:
    """Average of the k within-stratum empirical CDFs.

    Raises
    ------
    EstimatorUndefinedError
        If some rank has no observations.
    """
    _, counts, xs, labels = _prepare(ds)
    return StepCdf(xs, stratified_plateaus(counts, labels))


def moment(ds: RankedDataset) -> StepCdf:
    fam, counts, xs, _ = _prepare(ds)
    return StepCdf(xs, moment_plateaus(counts, fam))


def npmle(ds: RankedDataset) -> StepCdf:
    """Maximiser of the conditional log-likelihood given the ranks, plateau by plateau."""
    fam, counts, xs, labels = _prepare(ds)
    return StepCdf(xs, npmle_plateaus(counts, fam, labels))


_DISPATCH: dict[str, Callable[[RankedDataset], StepCdf]] = {
    "naive": ecdf,
    "S": stratified,
    "M": moment,
    "L": npmle,
}


def estimate(ds: RankedDataset, which: str) -> StepCdf:
    try:
        fn = _DISPATCH[which]
    except KeyError:
        raise ArgumentError(f"unknown estimator {which!r}; choose from {ESTIMATORS}") from None
    return fn(ds)


# -- log-likelihood -------------------------------------------------------------


def stratum_ecdf(ds: RankedDataset, y: int) -> np.ndarray:
    """Within-stratum ECDF values ``F_nr`` on the y-th plateau (0 for empty strata)."""
    _, counts, _, labels = _prepare(ds)
    if not 0 <= y <= ds.n:
        raise ArgumentError(f"plateau index {y} outside 0..{ds.n}")
    hits = np.bincount(labels[:y], minlength=counts.k).astype(float)
    N = counts.as_array()
    return np.divide(hits, N, out=np.zeros_like(hits), where=N > 0)


def _open_prob(p: float) -> float:
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"log-likelihood needs 0 < p < 1, got {p}")
    return p


def loglik(ds: RankedDataset, y: int, p: float) -> float:
    """Conditional log-likelihood ``L_n(x, p)`` for x on the y-th plateau."""
    p = _open_prob(p)
    fr = stratum_ecdf(ds, y)
    fam = family(ds.k)
    N = ds.stratum_counts().as_array()
    B, S = fam.cdfs(p), fam.survivals(p)
    return float(np.sum(N * (fr * np.log(B) + (1.0 - fr) * np.log(S))))


def loglik_deriv(ds: RankedDataset, y: int, p: float) -> float:
    """``d/dp L_n(x, p) = sum_r N_r w_r(p) (F_nr(x) - B_r(p))``."""
    p = _open_prob(p)
    fr = stratum_ecdf(ds, y)
    fam = family(ds.k)
    N = ds.stratum_counts().as_array()
    return float(np.sum(N * fam.weights(p) * (fr - fam.cdfs(p))))


# -- distribution-freeness ----------------------------------------------------


def transform_check(ds: RankedDataset, F: Callable[[np.ndarray], np.ndarray],
                    which: tuple[str, ...] = ESTIMATORS, atol: float = 1e-12) -> bool:
    """Check that estimating from ``F(x_i)`` and evaluating at ``F(x)`` reproduces the original.

    ``F`` must be strictly increasing on the data.  Estimators that are
    undefined for ``ds`` (stratified with an empty stratum) are skipped.
    """
    order = ds.sorted_order()
    xs = ds.x[order]
    fx = np.asarray(F(xs), dtype=float)
    if fx.shape != xs.shape or not np.all(np.isfinite(fx)):
        raise ArgumentError("F must map the data to finite values")
    dx, df = np.diff(xs), np.diff(fx)
    if np.any(df < 0) or np.any((dx > 0) & (df <= 0)):
        raise ArgumentError("F is not strictly increasing on the data")
    moved = ds.map_x(F)
    pts = np.concatenate([xs, 0.5 * (xs[1:] + xs[:-1])])
    fpts = np.asarray(F(pts), dtype=float)
    for name in which:
        try:
            before = estimate(ds, name)
        except EstimatorUndefinedError:
            continue
        after = estimate(moved, name)
        if not np.allclose(after.plateaus, before.plateaus, rtol=0.0, atol=atol):
            return False
        if not np.allclose(after(fpts), before(pts), rtol=0.0, atol=atol):
            return False
    return True
