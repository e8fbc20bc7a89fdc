"""Independent reference computations used as test oracles.

Nothing here imports the package's computational code; states and bases are
built from explicit kets with plain loops.
"""
import math

import numpy as np


def ket(d, i):
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return v


def phi_plus(d):
    return sum(np.kron(ket(d, i), ket(d, i)) for i in range(d)) / math.sqrt(d)


def isotropic_rho(d, p):
    v = phi_plus(d)
    return (1 - p) * np.outer(v, v.conj()) + p * np.eye(d * d) / d**2


def partial_trace_b(rho, d):
    out = np.zeros((d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            out[i, j] = sum(rho[i * d + b, j * d + b] for b in range(d))
    return out


def fourier_block(k):
    w = complex(math.cos(2 * math.pi / k), math.sin(2 * math.pi / k))
    return [[w ** (m * j) / math.sqrt(k) for j in range(k)] for m in range(k)]


def block_basis_vectors(d, k, kind):
    """Outcome list for contiguous blocks; kind 'fourier' or 'hadamard'."""
    if kind == "hadamard":
        rows = {2: [[1, 1], [1, -1]], 4: [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]]}[k]
        rows = [[x / math.sqrt(k) for x in r] for r in rows]
    else:
        rows = fourier_block(k)
    vecs = []
    for b in range(d // k):
        for m in range(k):
            v = np.zeros(d, dtype=complex)
            for j in range(k):
                v[b * k + j] = rows[m][j]
            vecs.append(v)
    return vecs


def brute_joint(rho, basis_a, basis_b):
    d = len(basis_a)
    p = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            v = np.kron(basis_a[i], basis_b[j])
            p[i, j] = np.real(v.conj() @ rho @ v)
    return p


def brute_block_error_vectors(p, d, k):
    """Per-block conditional error vectors and block masses by direct summation."""
    vecs, masses = [], []
    for b in range(d // k):
        idx = range(b * k, (b + 1) * k)
        mass = sum(p[i, j] for i in idx for j in idx)
        e = [0.0] * k
        for a in range(k):
            for s in range(k):
                e[s] += p[b * k + a, b * k + (a + s) % k]
        vecs.append([x / mass for x in e])
        masses.append(mass)
    return vecs, masses


def closed_form_isotropic_error(d, k, p):
    """Zero-shift entry of the post-selected error vector under white noise."""
    e0 = ((1 - p) + p / d) / ((1 - p) + p * k / d)
    return [e0] + [(1 - e0) / (k - 1)] * (k - 1)


def entropy_bits(v):
    return -sum(x * math.log2(x) for x in v if x > 0)


def grid_max_entropy(d, first_min, n):
    """Max entropy over grid points of the simplex (multiples of 1/n) with e0 >= first_min."""
    best = 0.0
    lo = math.ceil(first_min * n - 1e-9)
    for a in range(lo, n + 1):
        rest = n - a
        # the remaining d-1 coordinates: enumerate compositions of ``rest``
        for comp in _compositions(rest, d - 1):
            h = entropy_bits([a / n] + [c / n for c in comp])
            best = max(best, h)
    return best


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for tail in _compositions(total - first, parts - 1):
            yield (first,) + tail
