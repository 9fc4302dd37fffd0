"""The rank-order beta family for a fixed set size ``k``.

``B_r`` is the CDF of the r-th order statistic of ``k`` independent uniforms,
i.e. of Beta(r, k + 1 - r).  All tails are evaluated as sums of positive
binomial terms, so neither ``B_r(p)`` nor ``1 - B_r(p)`` is ever formed by
subtraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from . import _backend
from .errors import ArgumentError, DomainError

MAX_SET_SIZE = 60


@dataclass(frozen=True)
class RankBetaFamily:
    """Functions ``B_r``, ``beta_r``, ``w_r`` for ranks ``r = 1..k``.

    Parameters
    ----------
    k : int
        Set size, ``1 <= k <= 60``.
    """

    k: int
    binom: tuple[int, ...] = field(init=False, repr=False)
    C: tuple[int, ...] = field(init=False, repr=False)
    coef: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        k = self.k
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
            raise ArgumentError(f"set size must be a positive integer, got {k!r}")
        if k > MAX_SET_SIZE:
            raise ArgumentError(f"set size {k} exceeds the supported maximum {MAX_SET_SIZE}")
        object.__setattr__(self, "k", int(k))
        binom = tuple(comb(k, i) for i in range(k + 1))
        object.__setattr__(self, "binom", binom)
        object.__setattr__(self, "C", tuple(k * comb(k - 1, r - 1) for r in range(1, k + 1)))
        coef = np.array(binom, dtype=float)
        coef.flags.writeable = False
        object.__setattr__(self, "coef", coef)

    # -- validation -------------------------------------------------------

    def _rank(self, r: int) -> int:
        if not 1 <= r <= self.k:
            raise ArgumentError(f"rank {r} outside 1..{self.k}")
        return int(r)

    @staticmethod
    def _prob(p: float) -> float:
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise ArgumentError(f"p = {p} outside [0, 1]")
        return p

    # -- all ranks at once --------------------------------------------------

    def cdfs(self, p: float) -> np.ndarray:
        """``(B_1(p), ..., B_k(p))``."""
        return _backend.kernels.tails(self.coef, self._prob(p))[0]

    def survivals(self, p: float) -> np.ndarray:
        """``(1 - B_1(p), ..., 1 - B_k(p))`` without cancellation."""
        return _backend.kernels.tails(self.coef, self._prob(p))[1]

    def pdfs(self, p: float) -> np.ndarray:
        """``(beta_1(p), ..., beta_k(p))``; continuous extension at 0 and 1."""
        p = self._prob(p)
        r = np.arange(1, self.k + 1)
        return np.asarray(self.C, dtype=float) * p ** (r - 1) * (1.0 - p) ** (self.k - r)

    def weight_tildes(self, t: float) -> np.ndarray:
        """``(wtilde_1(t), ..., wtilde_k(t))`` on the closed interval."""
        t = self._prob(t)
        if t == 0.0:
            return np.arange(1, self.k + 1, dtype=float)
        if t == 1.0:
            return np.arange(self.k, 0, -1, dtype=float)
        return _backend.kernels.wtilde(self.coef, t)

    def weights(self, p: float) -> np.ndarray:
        """``(w_1(p), ..., w_k(p))`` for ``0 < p < 1``."""
        p = self._prob(p)
        if p in (0.0, 1.0):
            raise DomainError("w_r diverges at p = 0 and p = 1; use weight_tilde")
        upper, lower = _backend.kernels.tails(self.coef, p)
        return self.pdfs(p) / (upper * lower)

    # -- single rank ------------------------------------------------------

    def beta_cdf(self, r: int, p: float) -> float:
        """``B_r(p) = sum_{i=r}^k C(k,i) p^i (1-p)^(k-i)``."""
        return float(self.cdfs(p)[self._rank(r) - 1])

    def beta_pdf(self, r: int, p: float) -> float:
        """Density ``beta_r(p) = C_r p^(r-1) (1-p)^(k-r)``."""
        return float(self.pdfs(p)[self._rank(r) - 1])

    def weight(self, r: int, p: float) -> float:
        """``w_r(p) = beta_r(p) / (B_r(p) B_{k+1-r}(1-p))``.

        Raises
        ------
        DomainError
            If ``p`` is 0 or 1.
        """
        r = self._rank(r)
        return float(self.weights(p)[r - 1])

    def weight_tilde(self, r: int, t: float) -> float:
        """``t(1-t) w_r(t)``, continuous on [0, 1] with values r and k+1-r at the ends."""
        r = self._rank(r)
        return float(self.weight_tildes(t)[r - 1])

    def weight_ratio_rho(self, t: float) -> float:
        """``max_r w_r(t) / min_r w_r(t)`` for ``0 < t < 1``."""
        t = self._prob(t)
        if t in (0.0, 1.0):
            raise DomainError("rho(t) is defined for 0 < t < 1 only")
        w = self.weight_tildes(t)
        return float(w.max() / w.min())


@lru_cache(maxsize=128)
def family(k: int) -> RankBetaFamily:
    """Shared, cached family for set size ``k``."""
    return RankBetaFamily(k)


def beta_cdf(fam: RankBetaFamily, r: int, p: float) -> float:
    return fam.beta_cdf(r, p)


def beta_pdf(fam: RankBetaFamily, r: int, p: float) -> float:
    return fam.beta_pdf(r, p)


def weight(fam: RankBetaFamily, r: int, p: float) -> float:
    return fam.weight(r, p)


def weight_tilde(fam: RankBetaFamily, r: int, t: float) -> float:
    return fam.weight_tilde(r, t)


def weight_ratio_rho(fam: RankBetaFamily, t: float) -> float:
    return fam.weight_ratio_rho(t)
