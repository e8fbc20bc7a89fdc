import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdqkd.errors import DimensionError
from hdqkd.states import (
    BipartiteState,
    apply_isotropic_noise,
    fidelity_to_max_entangled,
    isotropic_state,
    max_entangled_state,
    maximally_mixed_state,
)

from oracles import partial_trace_b, phi_plus


def test_bell_state_corners():
    rho = max_entangled_state(2).matrix
    expected = np.zeros((4, 4))
    expected[np.ix_([0, 3], [0, 3])] = 0.5
    assert np.allclose(rho, expected, atol=1e-15)


def test_self_fidelity_d8():
    assert fidelity_to_max_entangled(max_entangled_state(8), 8) == pytest.approx(1.0, abs=1e-12)


def test_reduced_state_is_maximally_mixed():
    reduced = partial_trace_b(max_entangled_state(4).matrix, 4)
    assert np.allclose(reduced, np.eye(4) / 4, atol=1e-12)


@pytest.mark.parametrize("d", [2, 4, 8])
def test_rank_one_and_unit_trace(d):
    rho = max_entangled_state(d)
    assert np.linalg.matrix_rank(rho.matrix, tol=1e-10) == 1
    assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-12)


def test_rejects_small_dimension():
    with pytest.raises(DimensionError):
        max_entangled_state(1)


def test_noise_identity_and_full_mixing():
    rho = max_entangled_state(4)
    assert np.array_equal(apply_isotropic_noise(rho, 0.0).matrix, rho.matrix)
    assert np.allclose(apply_isotropic_noise(rho, 1.0).matrix, np.eye(16) / 16, atol=1e-15)


def test_noisy_fidelity_d8():
    rho = apply_isotropic_noise(max_entangled_state(8), 0.3)
    v = phi_plus(8)
    direct = np.real(v.conj() @ rho.matrix @ v)
    assert direct == pytest.approx(0.7046875, abs=1e-12)
    assert fidelity_to_max_entangled(rho, 8) == pytest.approx(0.7046875, abs=1e-12)


def test_mixed_state_fidelity():
    assert fidelity_to_max_entangled(maximally_mixed_state(8), 8) == pytest.approx(1 / 64, abs=1e-12)


def test_noisy_fidelity_d4():
    assert fidelity_to_max_entangled(isotropic_state(4, 0.15), 4) == pytest.approx(0.859375, abs=1e-12)


def test_fidelity_dimension_mismatch():
    with pytest.raises(DimensionError):
        fidelity_to_max_entangled(max_entangled_state(4), 8)


def test_invalid_matrices_rejected():
    with pytest.raises(ValueError):
        BipartiteState(2, np.eye(4))  # trace 4
    bad = np.diag([1.5, -0.5, 0, 0])
    with pytest.raises(ValueError):
        BipartiteState(2, bad)
    with pytest.raises(DimensionError):
        BipartiteState(2, np.eye(9) / 9)
    with pytest.raises(ValueError):
        apply_isotropic_noise(max_entangled_state(2), 1.2)


dims = st.sampled_from([2, 3, 4, 8])
fractions = st.floats(0.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(d=dims, p=fractions)
def test_noise_is_affine(d, p):
    rho = max_entangled_state(d)
    lhs = apply_isotropic_noise(rho, p).matrix
    rhs = (1 - p) * apply_isotropic_noise(rho, 0).matrix + p * apply_isotropic_noise(rho, 1).matrix
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(d=dims, p=fractions)
def test_noisy_spectrum(d, p):
    evals = np.sort(isotropic_state(d, p).eigenvalues())
    expected = np.sort([(1 - p) + p / d**2] + [p / d**2] * (d * d - 1))
    assert np.allclose(evals, expected, rtol=0, atol=1e-10)


@st.composite
def random_states(draw):
    d = draw(st.sampled_from([2, 3, 4]))
    seed = draw(st.integers(0, 2**32 - 1))
    g = np.random.default_rng(seed)
    a = g.normal(size=(d * d, d * d)) + 1j * g.normal(size=(d * d, d * d))
    rho = a @ a.conj().T
    rho = (rho + rho.conj().T) / 2
    return BipartiteState(d, rho / np.trace(rho).real)


@settings(max_examples=40, deadline=None)
@given(rho=random_states(), p=fractions)
def test_fidelity_is_linear_in_noise(rho, p):
    d = rho.dim
    lhs = fidelity_to_max_entangled(apply_isotropic_noise(rho, p), d)
    rhs = (1 - p) * fidelity_to_max_entangled(rho, d) + p / d**2
    assert lhs == pytest.approx(rhs, abs=1e-12)
