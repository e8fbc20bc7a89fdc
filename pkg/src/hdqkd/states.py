"""Bipartite density operators for the entanglement source.

Index convention: row/column ``i * d + j`` is the product state ``|i>_A |j>_B``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hdqkd.errors import DimensionError

HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-12
PSD_ATOL = 1e-10


def _check_dim(d: int) -> int:
    if int(d) != d or d < 2:
        raise DimensionError(f"local dimension must be an integer >= 2, got {d!r}")
    return int(d)


@dataclass(frozen=True)
class BipartiteState:
    """Density operator on C^d (x) C^d.

    Construction validates hermiticity, unit trace and positivity.
    """

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        _check_dim(self.dim)
        m = np.asarray(self.matrix, dtype=complex)
        n = self.dim * self.dim
        if m.shape != (n, n):
            raise DimensionError(f"expected {n}x{n} matrix for d={self.dim}, got {m.shape}")
        if not np.allclose(m, m.conj().T, rtol=0, atol=HERMITIAN_ATOL):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > TRACE_ATOL:
            raise ValueError(f"density matrix trace {np.trace(m).real} != 1")
        if np.linalg.eigvalsh(m)[0] < -PSD_ATOL:
            raise ValueError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def max_entangled_vector(d: int) -> np.ndarray:
    """Amplitudes of (1/sqrt d) sum_i |ii>."""
    d = _check_dim(d)
    v = np.zeros(d * d, dtype=complex)
    v[np.arange(d) * (d + 1)] = 1.0 / np.sqrt(d)
    return v


def max_entangled_state(d: int) -> BipartiteState:
    v = max_entangled_vector(d)
    return BipartiteState(d, np.outer(v, v.conj()))


def maximally_mixed_state(d: int) -> BipartiteState:
    d = _check_dim(d)
    return BipartiteState(d, np.eye(d * d, dtype=complex) / (d * d))


def apply_isotropic_noise(state: BipartiteState, p: float) -> BipartiteState:
    """Mix ``state`` with white noise: (1 - p) rho + p I/d^2."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise fraction must lie in [0, 1], got {p}")
    n = state.matrix.shape[0]
    if n != state.dim * state.dim:
        raise DimensionError("state matrix does not match its local dimension")
    mixed = (1.0 - p) * state.matrix + p * np.eye(n) / n
    return BipartiteState(state.dim, mixed)


def isotropic_state(d: int, p: float) -> BipartiteState:
    """Maximally entangled state of dimension ``d`` with noise fraction ``p``."""
    return apply_isotropic_noise(max_entangled_state(d), p)


def fidelity_to_max_entangled(state: BipartiteState, d: int) -> float:
    """Overlap <phi+_d| rho |phi+_d>."""
    if state.dim != d:
        raise DimensionError(f"state has local dimension {state.dim}, expected {d}")
    v = max_entangled_vector(d)
    f = np.vdot(v, state.matrix @ v).real
    return float(min(max(f, 0.0), 1.0))
