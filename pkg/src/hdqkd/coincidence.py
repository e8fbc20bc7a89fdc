"""Finite-statistics coincidence counting.

Signal pairs are Poisson in number and multinomial over detector pairs
according to a joint distribution. Accidental coincidences from per-channel
background light are Poisson in number and uniform over all d^2 detector
pairs, which is exactly white noise in any product basis. Signal/background
cross coincidences are folded into the accidental term.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from hdqkd.bases import SubspacePartition
from hdqkd.errors import DegenerateInputError, DimensionError
from hdqkd.stats import JointDistribution, error_vector, shannon_entropy

DEFAULT_WINDOW = 5e-9
DEFAULT_PAIR_PROBABILITY = 9e-5


@dataclass(frozen=True)
class SourceModel:
    """Signal pairs per second reaching the detectors.

    ``pair_gen_probability`` is carried for reference only; multi-pair
    emission is not simulated.
    """

    pair_rate: float
    pair_gen_probability: float = DEFAULT_PAIR_PROBABILITY
    window: float = DEFAULT_WINDOW

    def __post_init__(self):
        if self.pair_rate < 0 or self.pair_gen_probability < 0:
            raise ValueError("rates must be nonnegative")
        if self.window <= 0:
            raise ValueError("coincidence window must be positive")


@dataclass(frozen=True)
class NoiseInjection:
    """Uniform background counts per second on each of the d channels per side."""

    singles_rate: float = 0.0

    def __post_init__(self):
        if self.singles_rate < 0:
            raise ValueError("singles rate must be nonnegative")


@dataclass
class CoincidenceTable:
    d: int
    counts: np.ndarray
    duration: float
    basis_label: str = ""

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (self.d, self.d):
            raise DimensionError(f"counts must be {self.d}x{self.d}, got {self.counts.shape}")
        if (self.counts < 0).any():
            raise ValueError("counts must be nonnegative")
        if self.duration <= 0:
            raise ValueError("duration must be positive")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "CoincidenceTable") -> "CoincidenceTable":
        if other.d != self.d or other.basis_label != self.basis_label:
            raise ValueError("can only merge tables of the same dimension and basis")
        return CoincidenceTable(self.d, self.counts + other.counts,
                                self.duration + other.duration, self.basis_label)

    def __eq__(self, other):
        return (isinstance(other, CoincidenceTable) and self.d == other.d
                and self.duration == other.duration and self.basis_label == other.basis_label
                and np.array_equal(self.counts, other.counts))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["d", "duration", "basis_label"])
        w.writerow([self.d, repr(float(self.duration)), self.basis_label])
        w.writerows(self.counts.tolist())
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CoincidenceTable":
        rows = list(csv.reader(io.StringIO(text)))
        if len(rows) < 2 or rows[0][:3] != ["d", "duration", "basis_label"]:
            raise ValueError("coincidence CSV must start with a 'd,duration,basis_label' header")
        d, duration, label = int(rows[1][0]), float(rows[1][1]), rows[1][2]
        counts = [[int(c) for c in r] for r in rows[2:2 + d]]
        return cls(d, np.array(counts), duration, label)

    def to_json(self) -> str:
        return json.dumps({"d": self.d, "duration": self.duration,
                           "basis_label": self.basis_label, "counts": self.counts.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "CoincidenceTable":
        data = json.loads(text)
        return cls(data["d"], np.array(data["counts"]), data["duration"], data["basis_label"])


@dataclass
class CountEstimate:
    """Per-block statistics recovered from a coincidence table."""

    error_vectors: list
    weights: list
    block_counts: list
    shift_counts: list = field(default_factory=list)
    tscs: float = 0.0
    tcs: float = 0.0


def accidental_coincidence_rate(d: int, singles_rate: float, window: float = DEFAULT_WINDOW) -> float:
    """Accidental coincidences per second summed over all d^2 detector pairs.

    Each side sees d * S background singles per second; C = 2 (dS)^2 tau.
    The rate for one detector pair is C / d^2 = 2 S^2 tau.
    """
    if d < 1 or singles_rate < 0 or window < 0:
        raise ValueError("inputs must be nonnegative")
    return 2.0 * (d * singles_rate) ** 2 * window


def singles_rate_for_accidentals(d: int, rate: float, window: float = DEFAULT_WINDOW) -> float:
    """Per-channel singles rate that produces ``rate`` accidental coincidences per second."""
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    return math.sqrt(rate / (2.0 * window)) / d


def added_coincidences(p: float, clean_tcs: float) -> float:
    """Extra coincidences per second so that they form a fraction p of the total."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"noise fraction must lie in [0, 1), got {p}")
    if clean_tcs <= 0:
        raise ValueError("clean coincidence rate must be positive")
    return p * clean_tcs / (1.0 - p)


def noise_fraction_to_added_coincidences(p: float, clean_tcs: float, d: int) -> float:
    """NOISE metric: added coincidences per second divided by the local dimension."""
    return added_coincidences(p, clean_tcs) / d


def _shard_counts(rng, expected_signal, expected_noise, probs, d):
    n_sig = rng.poisson(expected_signal)
    n_acc = rng.poisson(expected_noise)
    counts = rng.multinomial(n_sig, probs.ravel()).reshape(d, d)
    counts += rng.multinomial(n_acc, np.full(d * d, 1.0 / (d * d))).reshape(d, d)
    return counts


def simulate_run(
    dist: JointDistribution,
    source: SourceModel,
    noise: NoiseInjection,
    duration: float,
    seed: int,
    basis_label: str = "",
    shards: int = 1,
    workers: int = 1,
) -> CoincidenceTable:
    """Draw one coincidence table.

    The event budget is split into ``shards`` independent streams seeded from
    ``seed``; the result depends on ``shards`` but not on ``workers``.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    if shards < 1:
        raise ValueError("shards must be >= 1")
    d = dist.d
    probs = dist.probs / dist.probs.sum()
    sig = source.pair_rate * duration / shards
    acc = accidental_coincidence_rate(d, noise.singles_rate, source.window) * duration / shards
    streams = np.random.SeedSequence(seed).spawn(shards)
    job = lambda ss: _shard_counts(np.random.default_rng(ss), sig, acc, probs, d)
    if workers > 1 and shards > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, streams))
    else:
        parts = [job(ss) for ss in streams]
    return CoincidenceTable(d, np.sum(parts, axis=0), duration, basis_label)


def estimate_from_counts(table: CoincidenceTable, part: SubspacePartition) -> CountEstimate:
    """Empirical error vectors, block weights and rates from raw counts."""
    if part.d != table.d:
        raise DimensionError(f"partition is for d={part.d}, table is d={table.d}")
    blocks = [table.counts[np.ix_(b, b)] for b in part.blocks]
    sizes = np.array([b.sum() for b in blocks])
    same = int(sizes.sum())
    if same == 0:
        raise DegenerateInputError("no coincidences fall inside a common subspace")
    shift_counts = [error_vector(b.astype(float)) for b in blocks]
    vectors = [(s / n).tolist() if n else [float("nan")] * part.k for s, n in zip(shift_counts, sizes)]
    return CountEstimate(
        error_vectors=vectors,
        weights=(sizes / same).tolist(),
        block_counts=sizes.tolist(),
        shift_counts=[s.astype(int).tolist() for s in shift_counts],
        tscs=same / table.duration,
        tcs=table.total / table.duration,
    )


def entropy_variance(e, n: int) -> float:
    """First-order (delta method) variance of the plug-in entropy from n multinomial draws."""
    e = np.asarray(e, dtype=float)
    if n <= 0:
        return float("inf")
    nz = e[e > 0]
    h = shannon_entropy(nz)
    return float(max((nz * np.log2(nz) ** 2).sum() - h * h, 0.0) / n)
