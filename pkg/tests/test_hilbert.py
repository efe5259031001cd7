import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlin_metrology.hilbert import (
    DensityMatrix,
    DiagonalPhaseProfile,
    PureState,
    ShiftError,
    SpectrumSet,
    apply_diagonal,
    apply_shift,
    basis_state,
    haar_sample,
    haar_samples,
    inner,
    superposition,
)
from strategies import shifts, spaces, states

SQ2 = 1 / np.sqrt(2)


def test_space_labels_and_dims():
    assert SpectrumSet.bosonic(4).labels.tolist() == [0, 1, 2, 3, 4]
    assert SpectrumSet.rotor(2).labels.tolist() == [-2, -1, 0, 1, 2]
    assert SpectrumSet.spin(3).dim == 4
    assert SpectrumSet.parse("rotor:5") == SpectrumSet.rotor(5)
    assert str(SpectrumSet.spin(7)) == "spin:7"


@pytest.mark.parametrize("bad", ["qubit:3", "bosonic", "bosonic:-1"])
def test_space_parse_rejects(bad):
    with pytest.raises(ValueError):
        SpectrumSet.parse(bad)


def test_state_rejects_wrong_shape_and_overnorm():
    space = SpectrumSet.bosonic(2)
    with pytest.raises(ValueError):
        PureState(space, np.ones(2))
    with pytest.raises(ValueError):
        PureState(space, np.ones(3))
    sub = PureState(space, [0.5, 0, 0])
    assert sub.norm2 == pytest.approx(0.25)
    assert not sub.is_normalized()


def test_state_amplitudes_are_read_only():
    psi = basis_state(SpectrumSet.bosonic(2), 1)
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 1


def test_shift_below_ground_is_zero():
    psi = basis_state(SpectrumSet.bosonic(4), 0)
    assert apply_shift(ShiftError(-1), psi).norm2 == 0


def test_shift_drops_the_part_that_falls_off():
    psi = superposition(SpectrumSet.bosonic(4), [1, 3])
    out = apply_shift(ShiftError(-2), psi)
    assert out.amplitude(1) == pytest.approx(SQ2)
    assert out.norm2 == pytest.approx(0.5)


def test_spin_cannot_be_pushed_past_the_top():
    psi = basis_state(SpectrumSet.spin(3), 3)
    assert apply_shift(ShiftError(1), psi).norm2 == 0


def test_shift_number_dependent_rotation():
    space = SpectrumSet.bosonic(3)
    out = apply_shift(ShiftError(1, 0.3), basis_state(space, 2))
    assert out.amplitude(3) == pytest.approx(np.exp(-0.6j))
    back = apply_shift(ShiftError(-1, 0.3), basis_state(space, 2))
    assert back.amplitude(1) == pytest.approx(np.exp(0.3j))


def test_shift_rejects_fractional_k():
    with pytest.raises(ValueError):
        ShiftError(1.5)


def test_diagonal_identity_and_phase_flip():
    space = SpectrumSet.bosonic(1)
    psi = superposition(space, [0, 1])
    ident = apply_diagonal(DiagonalPhaseProfile(space, [0.0, 0.0]), psi)
    np.testing.assert_allclose(ident.amplitudes, psi.amplitudes)
    flipped = apply_diagonal(DiagonalPhaseProfile(space, [0.0, -np.pi]), psi)
    np.testing.assert_allclose(flipped.amplitudes, [SQ2, -SQ2], atol=1e-15)


def test_diagonal_space_mismatch():
    with pytest.raises(ValueError):
        apply_diagonal(DiagonalPhaseProfile(SpectrumSet.bosonic(1), [0, 0]), basis_state(SpectrumSet.spin(1), 0))


def test_inner_is_antilinear_in_first_slot():
    space = SpectrumSet.bosonic(1)
    a = PureState(space, [1j, 0])
    assert inner(a, basis_state(space, 0)) == pytest.approx(-1j)


def test_haar_determinism_and_trivial_dim():
    space = SpectrumSet.bosonic(5)
    np.testing.assert_array_equal(haar_sample(space, 7).amplitudes, haar_sample(space, 7).amplitudes)
    one = haar_sample(SpectrumSet.bosonic(0), 3)
    assert abs(one.amplitudes[0]) == pytest.approx(1)


def test_haar_marginal_mean():
    rows = haar_samples(4, 100_000, 11)
    p0 = np.abs(rows[:, 0]) ** 2
    sigma = p0.std() / np.sqrt(len(p0))
    assert abs(p0.mean() - 0.25) < 3 * sigma


def test_state_json_roundtrip():
    psi = haar_sample(SpectrumSet.rotor(3), 1)
    back = PureState.from_json(psi.to_json())
    assert back.space == psi.space
    np.testing.assert_array_equal(back.amplitudes, psi.amplitudes)
    assert json.loads(psi.to_json())["kind"] == "rotor"


def test_density_matrix_validation():
    space = SpectrumSet.bosonic(1)
    with pytest.raises(ValueError):
        DensityMatrix(space, [[1, 1], [0, 0]])
    with pytest.raises(ValueError):
        DensityMatrix(space, [[1.5, 0], [0, -0.5]])
    rho = DensityMatrix.from_pure(superposition(space, [0, 1]))
    assert rho.trace == pytest.approx(1)
    assert rho.expectation(superposition(space, [0, 1])) == pytest.approx(1)


@given(st.data())
def test_shift_never_increases_norm(data):
    space = data.draw(spaces)
    psi = data.draw(states(space))
    e = ShiftError(data.draw(shifts), data.draw(st.floats(-3, 3)))
    assert apply_shift(e, psi).norm2 <= psi.norm2 + 1e-12


@given(st.data())
def test_shift_round_trip_on_surviving_labels(data):
    space = data.draw(spaces)
    psi = data.draw(states(space))
    k = data.draw(shifts)
    there_and_back = apply_shift(ShiftError(-k), apply_shift(ShiftError(k), psi))
    keep = (space.labels + k >= space.bottom) & (space.labels + k <= space.top)
    np.testing.assert_allclose(there_and_back.amplitudes, np.where(keep, psi.amplitudes, 0), atol=1e-15)


@given(st.data())
def test_haar_states_are_normalised(data):
    space = data.draw(spaces)
    assert haar_sample(space, data.draw(st.integers(0, 10**6))).is_normalized(1e-12)
