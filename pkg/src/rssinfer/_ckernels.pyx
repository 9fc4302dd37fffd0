# cython: language_level=3
"""Compiled numerical kernels; same names and signatures as ``_pykernels``."""

import numpy as np

DEF MAXT = 64  # room for k <= 60 (k + 1 binomial terms)

cdef int MAXITER = 200
cdef double EPS_BRACKET = 1e-15


cdef inline void _tails(const double[::1] coef, double p, double* t,
                        double* upper, double* lower) noexcept nogil:
    cdef Py_ssize_t k = coef.shape[0] - 1
    cdef Py_ssize_t i
    cdef double q = 1.0 - p
    cdef double acc
    # t doubles as storage for q^(k-i) before the p^i sweep
    acc = 1.0
    for i in range(k, -1, -1):
        t[i] = acc
        acc = acc * q
    acc = 1.0
    for i in range(k + 1):
        t[i] = coef[i] * acc * t[i]
        acc = acc * p
    # upper[r-1] = sum_{i >= r} t_i, lower[r-1] = sum_{i < r} t_i
    acc = 0.0
    for i in range(k, 0, -1):
        acc = acc + t[i]
        upper[i - 1] = acc
    acc = 0.0
    for i in range(k):
        acc = acc + t[i]
        lower[i] = acc


def tails(const double[::1] coef, double p):
    cdef Py_ssize_t k = coef.shape[0] - 1
    cdef double t[MAXT]
    cdef double up[MAXT]
    cdef double lo[MAXT]
    if k + 1 > MAXT:
        raise ValueError("set size too large for compiled kernel")
    _tails(coef, p, t, up, lo)
    upper = np.empty(k)
    lower = np.empty(k)
    cdef double[::1] u = upper
    cdef double[::1] l = lower
    cdef Py_ssize_t r
    for r in range(k):
        u[r] = up[r]
        l[r] = lo[r]
    return upper, lower


cdef inline double _moment_fn(const double[::1] coef, const double[::1] counts,
                              double p, double y) noexcept nogil:
    cdef double t[MAXT]
    cdef double up[MAXT]
    cdef double lo[MAXT]
    cdef Py_ssize_t r
    cdef double s = 0.0
    _tails(coef, p, t, up, lo)
    for r in range(counts.shape[0]):
        s = s + counts[r] * up[r]
    return s - y


cdef double _moment_root(const double[::1] coef, const double[::1] counts,
                         double total, double y) noexcept nogil:
    cdef double a = 0.0
    cdef double b = 1.0
    cdef double mid
    cdef int it
    if y <= 0.0:
        return 0.0
    if y >= total:
        return 1.0
    for it in range(MAXITER):
        mid = 0.5 * (a + b)
        if not (mid > a and mid < b):
            break
        if _moment_fn(coef, counts, mid, y) < 0.0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def moment_root(const double[::1] coef, const double[::1] counts, double y):
    cdef Py_ssize_t r
    cdef double total = 0.0
    for r in range(counts.shape[0]):
        total += counts[r]
    with nogil:
        y = _moment_root(coef, counts, total, y)
    return y


def moment_plateaus(const double[::1] coef, const double[::1] counts):
    cdef Py_ssize_t r, y
    cdef double total = 0.0
    for r in range(counts.shape[0]):
        total += counts[r]
    cdef Py_ssize_t n = <Py_ssize_t>(total + 0.5)
    phi = np.empty(n + 1)
    cdef double[::1] ph = phi
    ph[0] = 0.0
    ph[n] = 1.0
    with nogil:
        for y in range(1, n):
            ph[y] = _moment_root(coef, counts, total, <double>y)
    return phi


cdef inline double _wtilde(Py_ssize_t k, Py_ssize_t r, double p, const double* t,
                           const double* up, const double* lo) noexcept nogil:
    # p(1-p) beta_r = r q t_r = (k+1-r) p t_{r-1}; use the form whose
    # denominator cannot underflow (r is 0-based here)
    cdef double ratio
    if p <= 0.5:
        ratio = t[r + 1] / up[r] if up[r] > 0.0 else 1.0
        return (r + 1) * (1.0 - p) * ratio / lo[r]
    ratio = t[r] / lo[r] if lo[r] > 0.0 else 1.0
    return (k - r) * p * ratio / up[r]


def wtilde(const double[::1] coef, double p):
    cdef Py_ssize_t k = coef.shape[0] - 1
    cdef double t[MAXT]
    cdef double up[MAXT]
    cdef double lo[MAXT]
    cdef Py_ssize_t r
    if k + 1 > MAXT:
        raise ValueError("set size too large for compiled kernel")
    _tails(coef, p, t, up, lo)
    out = np.empty(k)
    cdef double[::1] o = out
    for r in range(k):
        o[r] = _wtilde(k, r, p, t, up, lo)
    return out


cdef inline double _npmle_neg_score(const double[::1] coef, const double[::1] counts,
                                    const double* fr, double p) noexcept nogil:
    cdef Py_ssize_t k = coef.shape[0] - 1
    cdef double t[MAXT]
    cdef double up[MAXT]
    cdef double lo[MAXT]
    cdef Py_ssize_t r
    cdef double s = 0.0
    _tails(coef, p, t, up, lo)
    for r in range(k):
        if counts[r] > 0.0:
            s = s + counts[r] * _wtilde(k, r, p, t, up, lo) * (fr[r] - up[r])
    return -s


cdef double _npmle_root(const double[::1] coef, const double[::1] counts,
                        const double* fr) noexcept nogil:
    cdef Py_ssize_t k = coef.shape[0] - 1
    cdef Py_ssize_t r
    cdef double lowest = 2.0
    cdef double highest = -1.0
    cdef double a, b, mid
    cdef int it
    for r in range(k):
        if counts[r] > 0.0:
            if fr[r] < lowest:
                lowest = fr[r]
            if fr[r] > highest:
                highest = fr[r]
    if highest <= 0.0:
        return 0.0
    if lowest >= 1.0:
        return 1.0
    a = EPS_BRACKET
    b = 1.0 - EPS_BRACKET
    if _npmle_neg_score(coef, counts, fr, a) >= 0.0:
        return a
    if _npmle_neg_score(coef, counts, fr, b) <= 0.0:
        return b
    for it in range(MAXITER):
        mid = 0.5 * (a + b)
        if not (mid > a and mid < b):
            break
        if _npmle_neg_score(coef, counts, fr, mid) < 0.0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def npmle_root(const double[::1] coef, const double[::1] counts, fr):
    cdef double[::1] f = np.ascontiguousarray(fr, dtype=np.float64)
    cdef double p
    with nogil:
        p = _npmle_root(coef, counts, &f[0])
    return p


cdef void _npmle_plateaus(const double[::1] coef, const double[::1] counts,
                          const long long[::1] labels, double* phi) noexcept nogil:
    cdef Py_ssize_t k = coef.shape[0] - 1
    cdef Py_ssize_t n = labels.shape[0]
    cdef double cnt[MAXT]
    cdef double fr[MAXT]
    cdef Py_ssize_t r, y, lab
    for r in range(k):
        cnt[r] = 0.0
        fr[r] = 0.0
    phi[0] = 0.0
    phi[n] = 1.0
    for y in range(1, n):
        lab = labels[y - 1]
        cnt[lab] += 1.0
        fr[lab] = cnt[lab] / counts[lab]
        phi[y] = _npmle_root(coef, counts, fr)


def npmle_plateaus(const double[::1] coef, const double[::1] counts, labels):
    cdef const long long[::1] lab = np.ascontiguousarray(labels, dtype=np.int64)
    cdef Py_ssize_t n = lab.shape[0]
    phi = np.empty(n + 1)
    cdef double[::1] ph = phi
    with nogil:
        _npmle_plateaus(coef, counts, lab, &ph[0])
    return phi


cdef void _stratified_plateaus(const double[::1] counts, const long long[::1] labels,
                               double* phi) noexcept nogil:
    cdef Py_ssize_t k = counts.shape[0]
    cdef Py_ssize_t n = labels.shape[0]
    cdef double cnt[MAXT]
    cdef Py_ssize_t r, y, lab
    cdef double s
    for r in range(k):
        cnt[r] = 0.0
    phi[0] = 0.0
    for y in range(1, n + 1):
        lab = labels[y - 1]
        cnt[lab] += 1.0
        s = 0.0
        for r in range(k):
            s = s + cnt[r] / counts[r]
        phi[y] = s / k
    phi[n] = 1.0


def stratified_plateaus(const double[::1] counts, labels):
    cdef const long long[::1] lab = np.ascontiguousarray(labels, dtype=np.int64)
    cdef Py_ssize_t n = lab.shape[0]
    phi = np.empty(n + 1)
    cdef double[::1] ph = phi
    with nogil:
        _stratified_plateaus(counts, lab, &ph[0])
    return phi


cdef inline double _sup_stat(const double* phi, const double* xs, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double best = 0.0
    cdef double d
    for i in range(n):
        d = phi[i + 1] - xs[i]
        if d > best:
            best = d
        d = xs[i] - phi[i]
        if d > best:
            best = d
    return best


def sup_stat(const double[::1] phi, const double[::1] xs):
    return _sup_stat(&phi[0], &xs[0], xs.shape[0])


def plateau_sup_batch(const double[::1] phi, const double[:, ::1] xs):
    cdef Py_ssize_t m = xs.shape[0]
    cdef Py_ssize_t n = xs.shape[1]
    cdef Py_ssize_t b
    out = np.empty(m)
    cdef double[::1] o = out
    with nogil:
        for b in range(m):
            o[b] = _sup_stat(&phi[0], &xs[b, 0], n)
    return out


def npmle_sup_batch(const double[::1] coef, const double[::1] counts,
                    labels, const double[:, ::1] xs):
    cdef const long long[:, ::1] lab = np.ascontiguousarray(labels, dtype=np.int64)
    cdef Py_ssize_t m = xs.shape[0]
    cdef Py_ssize_t n = xs.shape[1]
    cdef Py_ssize_t b
    out = np.empty(m)
    work = np.empty(n + 1)
    cdef double[::1] o = out
    cdef double[::1] ph = work
    with nogil:
        for b in range(m):
            _npmle_plateaus(coef, counts, lab[b], &ph[0])
            o[b] = _sup_stat(&ph[0], &xs[b, 0], n)
    return out


def stratified_sup_batch(const double[::1] counts, labels, const double[:, ::1] xs):
    cdef const long long[:, ::1] lab = np.ascontiguousarray(labels, dtype=np.int64)
    cdef Py_ssize_t m = xs.shape[0]
    cdef Py_ssize_t n = xs.shape[1]
    cdef Py_ssize_t b
    out = np.empty(m)
    work = np.empty(n + 1)
    cdef double[::1] o = out
    cdef double[::1] ph = work
    with nogil:
        for b in range(m):
            _stratified_plateaus(counts, lab[b], &ph[0])
            o[b] = _sup_stat(&ph[0], &xs[b, 0], n)
    return out
