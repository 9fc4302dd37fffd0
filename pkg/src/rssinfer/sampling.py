"""Ranked-sample data model, RSS/JPS simulation and dataset files."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import special

from .errors import ArgumentError, ParseError
from .rng import BLOCK, blocks, run_blocks, substream

Sampler = Callable[[np.ndarray], np.ndarray]

STREAM_RSS = 1
STREAM_JPS = 2


def _uniform(u):
    return np.asarray(u, dtype=float)


def _normal(u):
    return special.ndtri(u)


def _exponential(u):
    return -np.log1p(-np.asarray(u, dtype=float))


SAMPLERS: dict[str, Sampler] = {
    "uniform": _uniform,
    "normal": _normal,
    "exponential": _exponential,
}


def _cdf_uniform(x):
    return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)


def _cdf_exponential(x):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, -np.expm1(-np.maximum(x, 0.0)), 0.0)


CDFS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "uniform": _cdf_uniform,
    "normal": special.ndtr,
    "exponential": _cdf_exponential,
}


@dataclass(frozen=True)
class RankedObservation:
    x: float
    rank: int
    set_size: int

    def __post_init__(self):
        if self.set_size < 1:
            raise ArgumentError(f"set size must be positive, got {self.set_size}")
        if not 1 <= self.rank <= self.set_size:
            raise ArgumentError(f"rank {self.rank} outside 1..{self.set_size}")


@dataclass(frozen=True)
class StratumCounts:
    """Stratum sizes ``N_1..N_k``."""

    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if not counts:
            raise ArgumentError("stratum counts need at least one rank")
        if any(c < 0 for c in counts):
            raise ArgumentError(f"stratum counts must be nonnegative: {counts}")
        object.__setattr__(self, "counts", counts)

    @property
    def k(self) -> int:
        return len(self.counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float)

    def labels(self) -> np.ndarray:
        """0-based rank of each observation when observations are grouped by rank."""
        return np.repeat(np.arange(self.k), self.counts)

    def __iter__(self):
        return iter(self.counts)

    def __len__(self):
        return len(self.counts)

    def __getitem__(self, r):
        return self.counts[r]


def as_counts(counts: StratumCounts | Sequence[int]) -> StratumCounts:
    return counts if isinstance(counts, StratumCounts) else StratumCounts(tuple(counts))


@dataclass(frozen=True)
class RankedDataset:
    """An ordered collection of ranked observations.

    ``k`` is the common set size, or ``None`` when set sizes differ; the three
    estimators require a homogeneous dataset.
    """

    observations: tuple[RankedObservation, ...]
    _counts: StratumCounts | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        obs = tuple(self.observations)
        if not obs:
            raise ArgumentError("no observations")
        object.__setattr__(self, "observations", obs)
        if self.k is not None:
            tally = np.bincount(self.ranks - 1, minlength=self.k)
            object.__setattr__(self, "_counts", StratumCounts(tuple(int(c) for c in tally)))

    @classmethod
    def from_arrays(cls, x: Iterable[float], ranks: Iterable[int], set_size: int | Iterable[int]) -> RankedDataset:
        x = list(x)
        ranks = list(ranks)
        if isinstance(set_size, (int, np.integer)):
            sizes = [int(set_size)] * len(x)
        else:
            sizes = list(set_size)
        if not len(x) == len(ranks) == len(sizes):
            raise ArgumentError("x, ranks and set sizes differ in length")
        return cls(tuple(RankedObservation(float(a), int(r), int(s)) for a, r, s in zip(x, ranks, sizes)))

    @property
    def n(self) -> int:
        return len(self.observations)

    @cached_property
    def x(self) -> np.ndarray:
        return np.array([o.x for o in self.observations], dtype=float)

    @cached_property
    def ranks(self) -> np.ndarray:
        return np.array([o.rank for o in self.observations], dtype=np.int64)

    @cached_property
    def set_sizes(self) -> np.ndarray:
        return np.array([o.set_size for o in self.observations], dtype=np.int64)

    @cached_property
    def k(self) -> int | None:
        sizes = {o.set_size for o in self.observations}
        return sizes.pop() if len(sizes) == 1 else None

    @property
    def heterogeneous(self) -> bool:
        return self.k is None

    def require_homogeneous(self) -> int:
        if self.k is None:
            raise ArgumentError("operation needs a common set size; dataset is heterogeneous")
        return self.k

    def stratum_counts(self) -> StratumCounts:
        self.require_homogeneous()
        return self._counts

    def sorted_order(self) -> np.ndarray:
        """Stable ordering of observations by x."""
        return np.argsort(self.x, kind="stable")

    def map_x(self, fn: Callable[[np.ndarray], np.ndarray]) -> RankedDataset:
        return RankedDataset.from_arrays(fn(self.x), self.ranks, self.set_sizes)

    def to_dict(self) -> dict:
        return {"observations": [
            {"x": o.x, "rank": o.rank, "set_size": o.set_size} for o in self.observations
        ]}


@dataclass(frozen=True)
class ImpreciseRanking:
    """Per-observation probability masses over ranks ``1..k`` (shape ``(n, k)``)."""

    masses: np.ndarray

    def __post_init__(self):
        m = np.array(self.masses, dtype=float)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise ArgumentError("masses must be a nonempty (n, k) array")
        if (m < 0).any() or not np.isfinite(m).all():
            raise ArgumentError("rank masses must be finite and nonnegative")
        bad = np.flatnonzero(np.abs(m.sum(axis=1) - 1.0) > 1e-12)
        if bad.size:
            raise ArgumentError(f"rank masses of observation {int(bad[0])} do not sum to one")
        m.flags.writeable = False
        object.__setattr__(self, "masses", m)

    @property
    def n(self) -> int:
        return self.masses.shape[0]

    @property
    def k(self) -> int:
        return self.masses.shape[1]

    @classmethod
    def degenerate(cls, ranks: Sequence[int], k: int) -> ImpreciseRanking:
        m = np.zeros((len(ranks), k))
        m[np.arange(len(ranks)), np.asarray(ranks) - 1] = 1.0
        return cls(m)


# -- simulation ---------------------------------------------------------------


def _order_statistics(rng: np.random.Generator, ranks0: np.ndarray, k: int) -> np.ndarray:
    # r-th smallest of k uniforms for every entry of ranks0 (0-based)
    u = rng.random(ranks0.shape + (k,))
    u.sort(axis=-1)
    return np.take_along_axis(u, ranks0[..., None], axis=-1)[..., 0]


def _resolve_sampler(sampler: Sampler | str | None) -> Sampler:
    if sampler is None:
        return _uniform
    if isinstance(sampler, str):
        try:
            return SAMPLERS[sampler]
        except KeyError:
            raise ArgumentError(f"unknown distribution {sampler!r}; choose from {sorted(SAMPLERS)}") from None
    return sampler


def simulate_rss(k: int, design: Sequence[int], sampler: Sampler | str | None = None,
                 seed: int = 0, threads: int | None = None) -> RankedDataset:
    """Ranked set sample with ``design[r-1]`` measured units of rank ``r``.

    Each value is the r-th smallest of ``k`` uniforms pushed through the
    inverse CDF ``sampler``.  Observations are listed rank by rank.
    """
    if k < 1:
        raise ArgumentError("set size must be positive")
    counts = StratumCounts(tuple(design))
    if counts.k != k:
        raise ArgumentError(f"design has {counts.k} entries, expected k = {k}")
    if counts.n < 1:
        raise ArgumentError("empty design")
    inv = _resolve_sampler(sampler)
    labels = counts.labels()

    def block(j, start, stop):
        return _order_statistics(substream(seed, STREAM_RSS, j), labels[start:stop], k)

    u = np.concatenate(run_blocks(block, blocks(counts.n, BLOCK), threads))
    return RankedDataset.from_arrays(inv(u), labels + 1, k)


def simulate_jps(k: int, n: int, sampler: Sampler | str | None = None,
                 seed: int = 0, threads: int | None = None) -> RankedDataset:
    """Judgement post-stratified sample: first unit of each size-k set and its rank."""
    if k < 1:
        raise ArgumentError("set size must be positive")
    if n < 1:
        raise ArgumentError("sample size must be positive")
    inv = _resolve_sampler(sampler)

    def block(j, start, stop):
        u = substream(seed, STREAM_JPS, j).random((stop - start, k))
        first = u[:, 0]
        return first, (u <= first[:, None]).sum(axis=1)

    parts = run_blocks(block, blocks(n, BLOCK), threads)
    u = np.concatenate([p[0] for p in parts])
    ranks = np.concatenate([p[1] for p in parts])
    return RankedDataset.from_arrays(inv(u), ranks, k)


# -- files --------------------------------------------------------------------

CSV_HEADER = ("x", "rank", "set_size")


def _parse_rows(rows: Iterable[tuple[int, list[str]]]) -> RankedDataset:
    obs = []
    for line, row in rows:
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields (x, rank, set_size), got {len(row)}", line)
        try:
            x = float(row[0])
        except ValueError:
            raise ParseError(f"non-numeric x {row[0]!r}", line) from None
        if not np.isfinite(x):
            raise ParseError(f"x must be finite, got {row[0]!r}", line)
        try:
            rank, size = int(row[1]), int(row[2])
        except ValueError:
            raise ParseError(f"rank and set_size must be integers: {row[1]!r}, {row[2]!r}", line) from None
        if size < 1:
            raise ParseError(f"set_size must be positive, got {size}", line)
        if not 1 <= rank <= size:
            raise ParseError(f"rank {rank} outside 1..{size}", line)
        obs.append(RankedObservation(x, rank, size))
    if not obs:
        raise ParseError("no observations")
    return RankedDataset(tuple(obs))


def parse_csv(text: str) -> RankedDataset:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("no observations") from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise ParseError(f"header must be {','.join(CSV_HEADER)}", 1)
    return _parse_rows((i, row) for i, row in enumerate(reader, start=2))


def parse_json(text: str) -> RankedDataset:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    items = doc.get("observations") if isinstance(doc, dict) else None
    if not isinstance(items, list):
        raise ParseError("expected an object with an 'observations' list")
    # for JSON input the reported "line" is the 1-based observation number
    rows = []
    for i, item in enumerate(items, start=1):
        if not isinstance(item, dict):
            raise ParseError("observation is not an object", i)
        rows.append((i, [str(item.get(key, "")) for key in CSV_HEADER]))
    return _parse_rows(rows)


def load_dataset(path: str | Path) -> RankedDataset:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        return parse_json(text)
    return parse_csv(text)


def dump_csv(ds: RankedDataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for o in ds.observations:
        writer.writerow((repr(o.x), o.rank, o.set_size))
    return buf.getvalue()


def save_dataset(ds: RankedDataset, path: str | Path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        text = json.dumps(ds.to_dict(), indent=1) + "\n"
    else:
        text = dump_csv(ds)
    path.write_text(text, encoding="utf-8")
