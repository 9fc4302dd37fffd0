"""Limiting covariance functions of the three estimators and their efficiencies.

With stratum proportions ``N_r / n -> pi_r`` the process ``sqrt(n)(B_n^Z - B)``
converges to ``sum_r gamma_r^Z(t) V_r(B_r(t))`` for independent Brownian
bridges ``V_r``; everything here is a closed-form function of ``pi`` and ``t``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .beta_rank import RankBetaFamily, family
from .errors import ArgumentError, DomainError

TAGS = ("S", "M", "L")
DEFAULT_GRID = np.arange(1, 100) / 100


@dataclass(frozen=True)
class WeightProfile:
    """Limiting stratum proportions ``pi_1..pi_k``."""

    pi: tuple[float, ...]

    def __post_init__(self):
        pi = tuple(float(v) for v in self.pi)
        if not pi:
            raise ArgumentError("profile needs at least one proportion")
        if any(not np.isfinite(v) or v < 0 for v in pi):
            raise ArgumentError(f"proportions must be nonnegative: {pi}")
        if abs(sum(pi) - 1.0) > 1e-12:
            raise ArgumentError(f"proportions sum to {sum(pi)!r}, not 1")
        object.__setattr__(self, "pi", pi)

    @classmethod
    def balanced(cls, k: int) -> WeightProfile:
        return cls((1.0 / k,) * k)

    @classmethod
    def k2(cls, delta: float) -> WeightProfile:
        """Two strata with ``pi_2 - pi_1 = delta``."""
        return cls(((1.0 - delta) / 2, (1.0 + delta) / 2))

    @property
    def k(self) -> int:
        return len(self.pi)

    @property
    def family(self) -> RankBetaFamily:
        return family(self.k)

    def array(self) -> np.ndarray:
        return np.asarray(self.pi)

    def supports(self, Z: str) -> bool:
        if Z == "S":
            return min(self.pi) > 0
        if Z in ("M", "L"):
            return self.pi[0] > 0 and self.pi[-1] > 0
        raise ArgumentError(f"unknown estimator tag {Z!r}; choose from {TAGS}")

    def require(self, Z: str) -> None:
        if not self.supports(Z):
            need = "all pi_r > 0" if Z == "S" else "pi_1 > 0 and pi_k > 0"
            raise ArgumentError(f"estimator {Z} needs {need}; got {self.pi}")


@dataclass(frozen=True)
class EfficiencyProfile:
    grid: np.ndarray
    K_S: np.ndarray
    K_M: np.ndarray
    K_L: np.ndarray
    E_S: np.ndarray
    E_M: np.ndarray
    E: np.ndarray

    COLUMNS = ("t", "K_S", "K_M", "K_L", "E_S", "E_M", "E")

    def rows(self):
        return zip(self.grid, self.K_S, self.K_M, self.K_L, self.E_S, self.E_M, self.E)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for row in self.rows():
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {c: [float(v) for v in col] for c, col in zip(self.COLUMNS, zip(*self.rows()))}


def _t(t: float) -> float:
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ArgumentError(f"t = {t} outside [0, 1]")
    return t


def gammas(profile: WeightProfile, Z: str, t: float) -> np.ndarray:
    """``(gamma_1^Z(t), ..., gamma_k^Z(t))``; zero for ranks with ``pi_r = 0``."""
    profile.require(Z)
    t = _t(t)
    pi = profile.array()
    root = np.sqrt(pi)
    if Z == "S":
        return 1.0 / (profile.k * root)
    fam = profile.family
    beta = fam.pdfs(t)
    if Z == "M":
        return root / np.dot(pi, beta)
    # multiplying numerator and denominator by t(1-t) keeps the L coefficients
    # finite at t = 0 and t = 1
    wt = fam.weight_tildes(t)
    return root * wt / np.dot(pi * wt, beta)


def gamma(profile: WeightProfile, Z: str, r: int, t: float) -> float:
    if not 1 <= r <= profile.k:
        raise ArgumentError(f"rank {r} outside 1..{profile.k}")
    return float(gammas(profile, Z, t)[r - 1])


def brownian_bridge_cov(a, b):
    return np.minimum(a, b) - a * b


def covariance(profile: WeightProfile, Z: str, s: float, t: float) -> float:
    """``K^Z(s, t) = sum_r gamma_r(s) gamma_r(t) K(B_r(s), B_r(t))``."""
    s, t = _t(s), _t(t)
    fam = profile.family
    g = gammas(profile, Z, s) * gammas(profile, Z, t)
    return float(np.sum(g * brownian_bridge_cov(fam.cdfs(s), fam.cdfs(t))))


def variance(profile: WeightProfile, Z: str, t: float) -> float:
    """``K^Z(t, t)``; ``Z = "naive"`` gives ``t(1 - t)``."""
    if Z == "naive":
        t = _t(t)
        return t * (1.0 - t)
    return covariance(profile, Z, t, t)


def variance_L_direct(profile: WeightProfile, t: float) -> float:
    """``K^L(t, t)`` as ``1 / sum_s pi_s beta_s(t) w_s(t)``."""
    profile.require("L")
    t = _t(t)
    if t in (0.0, 1.0):
        return 0.0
    fam = profile.family
    return float(1.0 / np.dot(profile.array() * fam.pdfs(t), fam.weights(t)))


def variance_closed_form_k2(delta: float, Z: str, t: float) -> float:
    """Closed-form ``K^Z(t, t)`` for ``k = 2`` with ``delta = pi_2 - pi_1``."""
    delta = float(delta)
    if not -1.0 < delta < 1.0:
        raise ArgumentError(f"delta = {delta} must lie in (-1, 1)")
    t = _t(t)
    u = 2.0 * t - 1.0
    kt = t * (1.0 - t)
    if Z == "S":
        return kt * (3 + u * u - 4 * u * delta) / (4 * (1 - delta * delta))
    if Z == "M":
        return kt * (3 + u * u + 4 * u * delta) / (4 * (1 + u * delta) ** 2)
    if Z == "L":
        return kt * (9 - u * u) / (4 * (3 - u * u + 2 * u * delta))
    raise ArgumentError(f"unknown estimator tag {Z!r}")


def efficiency_profile(profile: WeightProfile, grid=None) -> EfficiencyProfile:
    """Variances and efficiency ratios ``E^Z = K^Z / K^L`` on a grid inside (0, 1).

    Columns for the stratified estimator are NaN when some ``pi_r`` is zero.
    """
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any((grid <= 0) | (grid >= 1)):
        raise ArgumentError("grid must be a nonempty list of points strictly inside (0, 1)")
    profile.require("L")
    have_s = profile.supports("S")
    K_L = np.array([variance(profile, "L", t) for t in grid])
    K_M = np.array([variance(profile, "M", t) for t in grid])
    K_S = np.array([variance(profile, "S", t) for t in grid]) if have_s else np.full(grid.size, np.nan)
    K = grid * (1.0 - grid)
    return EfficiencyProfile(grid, K_S, K_M, K_L, K_S / K_L, K_M / K_L, K / K_L)


def efficiency_bound_M(fam: RankBetaFamily, t: float) -> float:
    """``sup_pi K^M / K^L = (rho + 1/rho + 2) / 4``."""
    t = float(t)
    if not 0.0 < t < 1.0:
        raise DomainError("bound is defined for 0 < t < 1")
    rho = fam.weight_ratio_rho(t)
    return (rho + 1.0 / rho + 2.0) / 4.0
