"""Key and test measurement bases, and the grouping of outcomes into subspaces."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from hdqkd.errors import DimensionError

ORTHO_ATOL = 1e-12


class Flavor(str, enum.Enum):
    """Phase convention used inside each subspace of a test basis."""

    FOURIER = "fourier"
    HADAMARD = "hadamard"

    @classmethod
    def parse(cls, value: "Flavor | str") -> "Flavor":
        if isinstance(value, Flavor):
            return value
        aliases = {"complex-fourier": cls.FOURIER, "real-hadamard": cls.HADAMARD}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            raise ValueError(
                f"unknown basis flavor {value!r}; expected 'fourier' or 'hadamard'"
            ) from None


def default_flavor(k: int) -> Flavor:
    """Real +/- amplitudes where available (k = 2, 4), complex Fourier otherwise."""
    return Flavor.HADAMARD if k in (2, 4) else Flavor.FOURIER


def omega(k: int) -> complex:
    """Primitive k-th root of unity exp(2 pi i / k)."""
    return np.exp(2j * np.pi / k)


@dataclass(frozen=True)
class ProjectiveBasis:
    """Orthonormal basis of C^d; ``vectors[m]`` is outcome m."""

    dim: int
    vectors: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.shape != (self.dim, self.dim):
            raise DimensionError(f"expected {self.dim} vectors of length {self.dim}, got {v.shape}")
        if not np.allclose(v.conj() @ v.T, np.eye(self.dim), rtol=0, atol=ORTHO_ATOL):
            raise ValueError(f"basis {self.label!r} is not orthonormal")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    def __len__(self):
        return self.dim

    def __getitem__(self, m):
        return self.vectors[m]

    def projector_sum(self) -> np.ndarray:
        return self.vectors.T @ self.vectors.conj()


@dataclass(frozen=True)
class SubspacePartition:
    """Disjoint blocks of outcome indices, each of size ``k``."""

    d: int
    k: int
    blocks: tuple = field(default=())

    def __post_init__(self):
        if self.k < 1 or self.d % self.k:
            raise DimensionError(f"subspace size k={self.k} must divide d={self.d}")
        blocks = self.blocks or tuple(
            tuple(range(m * self.k, (m + 1) * self.k)) for m in range(self.d // self.k)
        )
        blocks = tuple(tuple(int(i) for i in b) for b in blocks)
        if any(len(b) != self.k for b in blocks):
            raise DimensionError("every block must contain exactly k outcomes")
        flat = sorted(i for b in blocks for i in b)
        if flat != list(range(self.d)):
            raise ValueError("blocks must be disjoint and cover 0..d-1")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def contiguous(cls, d: int, k: int) -> "SubspacePartition":
        return cls(d, k)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def block_of(self) -> np.ndarray:
        """Array mapping each outcome index to its block number."""
        out = np.empty(self.d, dtype=int)
        for m, b in enumerate(self.blocks):
            out[list(b)] = m
        return out


_HADAMARD_SIGNS = {
    2: np.array([[1, 1], [1, -1]]) / np.sqrt(2),
    # row order follows the detector order of the four-outcome analyser
    4: np.array([[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]]) / 2,
}


def _block_unitary(k: int, flavor: Flavor) -> np.ndarray:
    if flavor is Flavor.HADAMARD:
        if k not in _HADAMARD_SIGNS:
            raise ValueError(f"real Hadamard test basis exists only for k in (2, 4), got k={k}")
        return _HADAMARD_SIGNS[k].astype(complex)
    m, j = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
    return omega(k) ** (m * j) / np.sqrt(k)


def computational_basis(d: int) -> ProjectiveBasis:
    if d < 2:
        raise DimensionError(f"d must be >= 2, got {d}")
    return ProjectiveBasis(d, np.eye(d, dtype=complex), "computational")


def subspace_test_basis(
    d: int, part: SubspacePartition, flavor: "Flavor | str | None" = None
) -> ProjectiveBasis:
    """Block-diagonal test basis: a k-dim Fourier/Hadamard basis inside each block.

    Outcome ``part.blocks[b][m]`` is the m-th superposition over block b's paths.
    """
    if part.d != d:
        raise DimensionError(f"partition is for d={part.d}, basis requested for d={d}")
    flavor = default_flavor(part.k) if flavor is None else Flavor.parse(flavor)
    u = _block_unitary(part.k, flavor)
    vecs = np.zeros((d, d), dtype=complex)
    for idx in part.blocks:
        for m in range(part.k):
            vecs[idx[m], list(idx)] = u[m]
    return ProjectiveBasis(d, vecs, f"subspace-{flavor.value} k={part.k}")


def conjugate_basis(b: ProjectiveBasis) -> ProjectiveBasis:
    label = b.label[:-1] if b.label.endswith("*") else b.label + "*"
    return ProjectiveBasis(b.dim, b.vectors.conj(), label)


def mub_overlap_check(a: ProjectiveBasis, b: ProjectiveBasis, part: SubspacePartition) -> bool:
    """True iff a and b are unbiased within every block of ``part``.

    Only pairs of vectors indexed inside the same block are compared.
    """
    if a.dim != b.dim or part.d != a.dim:
        raise DimensionError("bases and partition must share one dimension")
    overlaps = np.abs(a.vectors.conj() @ b.vectors.T) ** 2
    for idx in part.blocks:
        sub = overlaps[np.ix_(idx, idx)]
        if np.any(np.abs(sub - 1.0 / part.k) > 1e-12):
            return False
    return True
