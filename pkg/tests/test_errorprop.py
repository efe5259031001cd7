import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlin_metrology.errorprop import (
    RESIDUAL_TOL,
    emergent_error_is_phi_rot_free,
    interleaved_error,
    pull_through,
    sandwich_diagonal,
)
from nonlin_metrology.generators import Linear, emergent_error, encoding_unitary, kerr
from nonlin_metrology.hilbert import (
    ShiftError,
    SpectrumSet,
    apply_diagonal,
    apply_shift,
    haar_sample,
)
from strategies import cases, phases, shifts


def _dense_shift(space, k, rot):
    """Explicit matrix of the shift error, built label by label."""
    mat = np.zeros((space.dim, space.dim), complex)
    for j, n in enumerate(space.labels):
        m = n + k
        if space.contains(m):
            phase = np.exp(-1j * rot * n) if k >= 0 else np.exp(1j * rot * m)
            mat[space.index(m), j] = phase
    return mat


@given(cases(), shifts, phases, phases)
def test_commutation_identity(case, k, rot, phi):
    g, space, psi = case
    res = pull_through(g, ShiftError(k, rot), phi, psi)
    assert res.residual <= RESIDUAL_TOL


@given(cases(), shifts, phases, phases)
def test_commutation_matches_dense_operators(case, k, rot, phi):
    g, space, psi = case
    e = _dense_shift(space, k, rot)
    u = np.diag(encoding_unitary(g, phi, space).diagonal)
    v = np.diag(emergent_error(g, k, phi, space).diagonal)
    np.testing.assert_allclose(u @ e, v @ e @ u, atol=1e-12)
    np.testing.assert_allclose(apply_shift(ShiftError(k, rot), psi).amplitudes, e @ psi.amplitudes, atol=1e-14)


def test_sandwich_k_zero_is_identity():
    sand = sandwich_diagonal(kerr(), 0, 0.7, SpectrumSet.bosonic(5))
    assert sand.support.all()
    np.testing.assert_allclose(sand.diagonal, 1)


@given(cases(), shifts, phases)
def test_sandwich_support_is_surviving_subspace(case, k, phi):
    g, space, _ = case
    sand = sandwich_diagonal(g, k, phi, space)
    survivors = [n for n in space.labels if space.contains(n + k)]
    assert sand.support_labels.tolist() == survivors
    e = _dense_shift(space, k, 0.0)
    v = np.diag(emergent_error(g, k, phi, space).diagonal)
    np.testing.assert_allclose(e.conj().T @ v @ e, np.diag(sand.diagonal), atol=1e-12)


def test_interleaved_endpoints():
    space = SpectrumSet.bosonic(8)
    psi = haar_sample(space, 3)
    g, k, phi = kerr(), 1, 0.4
    after = interleaved_error(g, k, phi, 0.0, psi)
    ref = apply_shift(ShiftError(k), apply_diagonal(encoding_unitary(g, phi, space), psi))
    np.testing.assert_allclose(after.amplitudes, ref.amplitudes, atol=1e-14)
    before = interleaved_error(g, k, phi, phi, psi)
    ref = apply_diagonal(emergent_error(g, k, phi, space), ref)
    np.testing.assert_allclose(before.amplitudes, ref.amplitudes, atol=1e-12)


@pytest.mark.parametrize("theta", [0.5, -0.1])
def test_interleaved_rejects_theta_outside_range(theta):
    with pytest.raises(ValueError):
        interleaved_error(kerr(), 1, 0.3, theta, haar_sample(SpectrumSet.bosonic(4), 0))


@given(cases(), shifts, phases, st.floats(0, 1))
def test_interleaved_factorises(case, k, phi, frac):
    g, space, psi = case
    interleaved_error(g, k, phi, phi * frac, psi)  # raises if the residual is too large


@given(cases(), shifts, phases)
def test_emergent_error_independent_of_rotation(case, k, phi):
    g, space, psi = case
    assert emergent_error_is_phi_rot_free(g, k, phi, psi, [-2.0, 0.3, 1.7]) <= RESIDUAL_TOL


def test_linear_generator_commutes_up_to_global_phase():
    space = SpectrumSet.rotor(4)
    psi = haar_sample(space, 5)
    res = pull_through(Linear(1.0), ShiftError(2), 0.9, psi)
    lhs, direct = res.lhs.amplitudes, apply_shift(ShiftError(2), apply_diagonal(encoding_unitary(Linear(1.0), 0.9, space), psi)).amplitudes
    np.testing.assert_allclose(lhs, np.exp(-1.8j) * direct, atol=1e-12)
