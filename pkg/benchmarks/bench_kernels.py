"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--reps N] [--repeat R]

Each row times one kernel call on identical inputs under both backends and
reports the best of ``repeat`` runs, the speed-up, and the largest absolute
difference between the two outputs.
"""

from __future__ import annotations

import argparse
import importlib
import timeit

import numpy as np

from rssinfer import _pykernels
from rssinfer.beta_rank import family


def _cases(reps: int):
    rng = np.random.default_rng(0)
    k, per = 3, 10
    coef = family(k).coef
    counts = np.full(k, float(per))
    n = k * per
    base = np.repeat(np.arange(k), per)
    xs = np.sort(rng.random((reps, n)), axis=1)
    labels = np.ascontiguousarray(np.stack([rng.permutation(base) for _ in range(reps)]).astype(np.int64))
    phi = np.arange(n + 1) / n
    uneven = np.array([4.0, 17.0, 9.0])
    grid = np.linspace(0.0, 1.0, 2001)
    fr = rng.random((200, k))
    return [
        ("tails x2001", lambda K: [K.tails(coef, p) for p in grid]),
        ("wtilde x2001", lambda K: [K.wtilde(coef, p) for p in grid]),
        ("moment_plateaus n=30", lambda K: K.moment_plateaus(coef, uneven)),
        ("npmle_root x200", lambda K: [K.npmle_root(coef, counts, f) for f in fr]),
        ("npmle_plateaus n=30", lambda K: K.npmle_plateaus(coef, counts, labels[0])),
        (f"plateau_sup_batch {reps}x{n}", lambda K: K.plateau_sup_batch(phi, xs)),
        (f"stratified_sup_batch {reps}x{n}", lambda K: K.stratified_sup_batch(counts, labels, xs)),
        (f"npmle_sup_batch {reps}x{n}", lambda K: K.npmle_sup_batch(coef, counts, labels, xs)),
    ]


def _max_diff(a, b) -> float:
    if isinstance(a, list):
        return max(_max_diff(x, y) for x, y in zip(a, b))
    if isinstance(a, tuple):
        return max(_max_diff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=2000, help="rows in the batched sup-statistic kernels")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    try:
        ck = importlib.import_module("rssinfer._ckernels")
    except ImportError:
        print("compiled kernels not built; only the fallback is available")
        return 1
    print(f"{'kernel':34s} {'python [s]':>11s} {'cython [s]':>11s} {'speed-up':>9s} {'max |diff|':>11s}")
    for name, fn in _cases(args.reps):
        t_py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: fn(ck), number=1, repeat=args.repeat))
        diff = _max_diff(fn(_pykernels), fn(ck))
        print(f"{name:34s} {t_py:11.4f} {t_cy:11.4f} {t_py / t_cy:8.1f}x {diff:11.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
