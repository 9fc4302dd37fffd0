"""Pure numpy implementations of the numerical kernels.

Every function here has a twin with the same name and signature in the
compiled module ``_ckernels``; :mod:`rssinfer._backend` picks one at import.
Arrays are float64 unless noted; ``coef`` holds the binomial coefficients
``C(k, i)`` for ``i = 0..k`` and ``counts`` the (possibly fractional) stratum
sizes ``N_1..N_k``.
"""

from __future__ import annotations

import numpy as np

MAXITER = 200
EPS_BRACKET = 1e-15


def _terms(coef: np.ndarray, p: np.ndarray) -> np.ndarray:
    # t[..., i] = C(k, i) p^i (1-p)^(k-i)
    k = coef.shape[0] - 1
    i = np.arange(k + 1)
    p = p[..., None]
    with np.errstate(invalid="ignore"):
        return coef * np.power(p, i) * np.power(1.0 - p, k - i)


def _tails_matrix(coef: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t = _terms(coef, p)
    upper = np.cumsum(t[..., ::-1], axis=-1)[..., ::-1][..., 1:]
    lower = np.cumsum(t, axis=-1)[..., :-1]
    return t, upper, lower


def tails(coef: np.ndarray, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(B_r(p), 1 - B_r(p))`` for r = 1..k as two positive-term sums."""
    _, upper, lower = _tails_matrix(coef, np.asarray(float(p)))
    return upper.copy(), lower.copy()


def _tails_and_wtilde(coef: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tails plus ``wtilde_r(p) = p(1-p) beta_r / (B_r (1 - B_r))`` for p in (0, 1).

    Uses ``p(1-p) beta_r = r q t_r = (k+1-r) p t_{r-1}`` and picks the form whose
    denominator cannot underflow; a tail that underflows is dominated by its
    first term, so the ratio tends to one.
    """
    k = coef.shape[0] - 1
    p = np.asarray(p, dtype=float)
    t, upper, lower = _tails_matrix(coef, p)
    r = np.arange(1, k + 1)
    pp = p[..., None]
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio_hi = np.where(upper > 0.0, t[..., 1:] / upper, 1.0)
        ratio_lo = np.where(lower > 0.0, t[..., :-1] / lower, 1.0)
        wt = np.where(
            pp <= 0.5,
            r * (1.0 - pp) * ratio_hi / lower,
            (k + 1 - r) * pp * ratio_lo / upper,
        )
    return t, upper, wt


def wtilde(coef: np.ndarray, p: float) -> np.ndarray:
    return _tails_and_wtilde(coef, np.asarray(float(p)))[2].copy()


def _bisect_increasing(f, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorised bisection for the sign change of increasing ``f`` in each slot.

    Runs until the bracket can no longer be split in float64 or MAXITER.
    """
    lo = lo.copy()
    hi = hi.copy()
    active = np.ones(lo.shape, dtype=bool)
    for _ in range(MAXITER):
        mid = 0.5 * (lo + hi)
        active &= (mid > lo) & (mid < hi)
        if not active.any():
            break
        idx = np.flatnonzero(active)
        val = f(mid[idx], idx)
        neg = val < 0.0
        lo[idx[neg]] = mid[idx[neg]]
        hi[idx[~neg]] = mid[idx[~neg]]
    return 0.5 * (lo + hi)


def moment_root(coef: np.ndarray, counts: np.ndarray, y: float) -> float:
    total = counts.sum()
    if y <= 0.0:
        return 0.0
    if y >= total:
        return 1.0

    def f(p, _idx):
        return _tails_sum(coef, counts, p) - y

    return float(_bisect_increasing(f, np.zeros(1), np.ones(1))[0])


def _tails_sum(coef: np.ndarray, counts: np.ndarray, p: np.ndarray) -> np.ndarray:
    _, upper, _ = _tails_matrix(coef, np.asarray(p, dtype=float))
    return upper @ counts


def moment_plateaus(coef: np.ndarray, counts: np.ndarray) -> np.ndarray:
    n = int(round(counts.sum()))
    phi = np.empty(n + 1)
    phi[0] = 0.0
    phi[n] = 1.0
    if n > 1:
        ys = np.arange(1, n, dtype=float)

        def f(p, idx):
            return _tails_sum(coef, counts, p) - ys[idx]

        phi[1:n] = _bisect_increasing(f, np.zeros(n - 1), np.ones(n - 1))
    return phi


def _npmle_neg_score(coef: np.ndarray, counts: np.ndarray, fr: np.ndarray, p: np.ndarray) -> np.ndarray:
    # -p(1-p) L'(p) = -sum_r N_r wtilde_r(p) (F_r - B_r(p)); increasing in p
    _, upper, wt = _tails_and_wtilde(coef, p)
    return -(counts * wt * (fr - upper)).sum(axis=1)


def _npmle_solve(coef: np.ndarray, counts: np.ndarray, fr: np.ndarray) -> np.ndarray:
    """Roots for a stack of frozen stratum-ECDF vectors ``fr`` (m, k)."""
    m = fr.shape[0]
    out = np.empty(m)
    used = counts > 0
    lowest = np.where(used, fr, np.inf).min(axis=1)
    highest = np.where(used, fr, -np.inf).max(axis=1)
    zero = highest <= 0.0
    one = lowest >= 1.0
    out[zero] = 0.0
    out[one & ~zero] = 1.0
    todo = np.flatnonzero(~zero & ~one)
    if todo.size:
        frs = fr[todo]
        lo = np.full(todo.size, EPS_BRACKET)
        hi = np.full(todo.size, 1.0 - EPS_BRACKET)
        g_lo = _npmle_neg_score(coef, counts, frs, lo)
        g_hi = _npmle_neg_score(coef, counts, frs, hi)

        def f(p, idx):
            return _npmle_neg_score(coef, counts, frs[idx], p)

        root = _bisect_increasing(f, lo, hi)
        root[g_lo >= 0.0] = lo[g_lo >= 0.0]
        root[g_hi <= 0.0] = hi[g_hi <= 0.0]
        out[todo] = root
    return out


def npmle_root(coef: np.ndarray, counts: np.ndarray, fr: np.ndarray) -> float:
    return float(_npmle_solve(coef, counts, np.asarray(fr, dtype=float)[None, :])[0])


def _cumulative_fr(counts: np.ndarray, labels: np.ndarray) -> np.ndarray:
    k = counts.shape[0]
    onehot = np.zeros((labels.shape[0], k))
    onehot[np.arange(labels.shape[0]), labels] = 1.0
    cum = np.cumsum(onehot, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, cum / counts, 0.0)


def npmle_plateaus(coef: np.ndarray, counts: np.ndarray, labels: np.ndarray) -> np.ndarray:
    n = labels.shape[0]
    phi = np.empty(n + 1)
    phi[0] = 0.0
    phi[n] = 1.0
    if n > 1:
        fr = _cumulative_fr(counts, labels)[:-1]
        phi[1:n] = _npmle_solve(coef, counts, fr)
    return phi


def stratified_plateaus(counts: np.ndarray, labels: np.ndarray) -> np.ndarray:
    n = labels.shape[0]
    phi = np.empty(n + 1)
    phi[0] = 0.0
    phi[1:] = _cumulative_fr(counts, labels).sum(axis=1) / counts.shape[0]
    phi[n] = 1.0
    return phi


def sup_stat(phi: np.ndarray, xs: np.ndarray) -> float:
    return float(np.maximum(phi[1:] - xs, xs - phi[:-1]).max())


def plateau_sup_batch(phi: np.ndarray, xs: np.ndarray) -> np.ndarray:
    return np.maximum(phi[1:] - xs, xs - phi[:-1]).max(axis=1)


def npmle_sup_batch(coef: np.ndarray, counts: np.ndarray, labels: np.ndarray, xs: np.ndarray) -> np.ndarray:
    out = np.empty(xs.shape[0])
    for b in range(xs.shape[0]):
        out[b] = sup_stat(npmle_plateaus(coef, counts, labels[b]), xs[b])
    return out


def stratified_sup_batch(counts: np.ndarray, labels: np.ndarray, xs: np.ndarray) -> np.ndarray:
    out = np.empty(xs.shape[0])
    for b in range(xs.shape[0]):
        out[b] = sup_stat(stratified_plateaus(counts, labels[b]), xs[b])
    return out
