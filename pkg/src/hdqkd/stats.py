"""Joint outcome statistics, subspace post-selection, error vectors and entropies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hdqkd.bases import ProjectiveBasis, SubspacePartition
from hdqkd.errors import DegenerateInputError, DimensionError
from hdqkd.states import BipartiteState

CLAMP_TOL = 1e-10
NORM_TOL = 1e-10


def _clamp(probs: np.ndarray) -> np.ndarray:
    low = probs.min()
    if low < -CLAMP_TOL:
        raise ValueError(f"negative probability {low:.3g} beyond rounding noise")
    return np.where(probs < 0, 0.0, probs)


@dataclass(frozen=True)
class JointDistribution:
    """``probs[i, j]`` = Pr(Alice gets i, Bob gets j)."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise DimensionError(f"joint distribution must be square, got shape {p.shape}")
        p = _clamp(p)
        if abs(p.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"joint distribution sums to {p.sum()}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def d(self) -> int:
        return self.probs.shape[0]


@dataclass(frozen=True)
class SubspaceConditional:
    """Distribution of a block's outcomes given both parties landed in that block."""

    block: int
    conditional: JointDistribution
    weight: float


def joint_probabilities(
    state: BipartiteState, basis_a: ProjectiveBasis, basis_b: ProjectiveBasis
) -> JointDistribution:
    """Born-rule probabilities of every (Alice, Bob) outcome pair."""
    d = state.dim
    if basis_a.dim != d or basis_b.dim != d:
        raise DimensionError(
            f"state is d={d} but bases are d={basis_a.dim} and d={basis_b.dim}"
        )
    # column i*d + j of ``w`` is |a_i> (x) |b_j>
    w = np.einsum("ia,jb->abij", basis_a.vectors, basis_b.vectors).reshape(d * d, d * d)
    probs = np.einsum("ni,nm,mi->i", w.conj(), state.matrix, w).real
    return JointDistribution(probs.reshape(d, d))


def subspace_postselect(
    dist: JointDistribution, part: SubspacePartition
) -> tuple[list[SubspaceConditional], float]:
    """Keep only rounds where both outcomes share a block.

    Returns the per-block conditionals (block-local indices, weights summing
    to one) and the probability that a round survives post-selection.
    """
    if part.d != dist.d:
        raise DimensionError(f"partition is for d={part.d}, distribution is d={dist.d}")
    masses = [dist.probs[np.ix_(b, b)] for b in part.blocks]
    totals = np.array([m.sum() for m in masses])
    same = float(totals.sum())
    if same <= 0.0:
        raise DegenerateInputError("no probability mass survives subspace post-selection")
    out = []
    for m, (block, total) in enumerate(zip(masses, totals)):
        if total <= 0.0:
            raise DegenerateInputError(f"block {m} carries zero probability")
        out.append(SubspaceConditional(m, JointDistribution(block / total), float(total / same)))
    return out, same


def error_vector(dist: JointDistribution | np.ndarray) -> np.ndarray:
    """e[j] = sum_i P(i, i + j mod k)."""
    p = dist.probs if isinstance(dist, JointDistribution) else np.asarray(dist, dtype=float)
    k = p.shape[0]
    i = np.arange(k)
    return np.array([p[i, (i + j) % k].sum() for j in range(k)])


def shannon_entropy(e) -> float:
    """Entropy in bits, with 0 log 0 = 0."""
    e = np.asarray(e, dtype=float)
    nz = e[e > 0]
    h = -(nz * np.log2(nz)).sum()
    return float(h) if h > 0 else 0.0


def binary_entropy(x: float) -> float:
    return shannon_entropy([x, 1.0 - x])
