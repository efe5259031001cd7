import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlin_metrology.exceptions import SupportError
from nonlin_metrology.generators import Linear, PowerLaw, encoding_unitary, kerr
from nonlin_metrology.hilbert import SpectrumSet, apply_diagonal, basis_state, haar_sample, superposition
from nonlin_metrology.qfi import (
    qcrb,
    qfi_difference_scaling,
    qfi_heralded,
    qfi_nuisance,
    qfi_numerical,
    qfi_pure,
    two_point_closed_form,
    loglog_slope,
)


def test_qfi_pure_examples():
    space = SpectrumSet.bosonic(6)
    assert qfi_pure(kerr(), basis_state(space, 3)) == 0
    assert qfi_pure(kerr(), superposition(space, [0, 4])) == pytest.approx(256)
    assert qfi_pure(PowerLaw(2.5), superposition(space, [1, 6])) == pytest.approx((6**2.5 - 1) ** 2)


def test_qcrb_examples():
    assert qcrb(1.0) == 1
    assert qcrb(256.0) == pytest.approx(1 / 16)
    assert qcrb(256.0, 100) == pytest.approx(1 / 160)
    assert qcrb(0.0) == math.inf
    with pytest.raises(ValueError):
        qcrb(1.0, 0)


def test_heralded_examples():
    space = SpectrumSet.bosonic(6)
    psi = superposition(space, [0, 4])
    assert qfi_heralded(kerr(), 1, psi) == pytest.approx(576)
    assert qfi_heralded(kerr(), 0, psi) == pytest.approx(qfi_pure(kerr(), psi))
    assert qfi_heralded(Linear(0.7), 2, psi) == pytest.approx(qfi_pure(Linear(0.7), psi))
    with pytest.raises(SupportError):
        qfi_heralded(kerr(), 3, psi)


def test_qfi_matches_numerical_derivative():
    space = SpectrumSet.bosonic(8)
    psi = haar_sample(space, 2)
    g = PowerLaw(1.5)

    def family(phi):
        return apply_diagonal(encoding_unitary(g, phi, space), psi).amplitudes

    assert qfi_numerical(family, 0.3) == pytest.approx(qfi_pure(g, psi), rel=1e-6)


def test_nuisance_branches():
    space = SpectrumSet.bosonic(12)
    psi = haar_sample(space, 1)
    # restrict to labels that survive k=2
    psi = superposition(space, list(range(0, 11)), psi.amplitudes[:11])
    lin = qfi_nuisance(Linear(1.0), 2, psi)
    assert lin.matrix.i_thetatheta == pytest.approx(0, abs=1e-12)
    assert lin.effective == lin.matrix.i_phiphi
    zero = qfi_nuisance(kerr(), 0, psi)
    assert zero.effective == zero.matrix.i_phiphi
    two = qfi_nuisance(kerr(), 1, superposition(space, [2, 9]))
    assert two.effective == pytest.approx(0, abs=1e-9 * two.matrix.i_phiphi)
    assert two.printed_closed_form == pytest.approx(two_point_closed_form(kerr(), 1, 2, 9))


def test_printed_two_point_form_is_negative_for_linear_g():
    assert two_point_closed_form(Linear(1.0), 1, 10, 50) == pytest.approx(-1600)
    assert math.isnan(two_point_closed_form(kerr(), 0, 3, 3))


@given(st.sampled_from([1.0, 1.5, 2.0, 3.0]), st.integers(-2, 2), st.integers(0, 10**6), st.integers(3, 14))
def test_nuisance_matrix_psd_and_bounded(z, k, seed, cutoff):
    space = SpectrumSet.bosonic(cutoff)
    rng = np.random.default_rng(seed)
    labels = list(range(max(0, -k), cutoff + 1 - max(0, k)))
    weights = rng.normal(size=len(labels)) + 1j * rng.normal(size=len(labels))
    res = qfi_nuisance(PowerLaw(z), k, superposition(space, labels, weights))
    assert res.matrix.is_psd()
    assert 0 <= res.effective <= res.matrix.i_phiphi


def test_difference_scaling_linear_is_zero():
    psi = superposition(SpectrumSet.bosonic(11), [2, 10])
    for _, delta in qfi_difference_scaling(Linear(1.0), 1, psi, [1e-2, 1e-4]):
        assert delta < 1e-6


def test_difference_scaling_vanishes_with_epsilon():
    psi = superposition(SpectrumSet.bosonic(11), [2, 10])
    pairs = qfi_difference_scaling(kerr(), 1, psi, [1e-2, 1e-4, 1e-6])
    deltas = [d for _, d in pairs]
    assert deltas[0] > deltas[1] > deltas[2]
    assert 0.4 <= loglog_slope(pairs) <= 1.1


def test_single_label_state_has_no_information():
    psi = basis_state(SpectrumSet.bosonic(20), 17)
    for g in (Linear(0.73), kerr()):
        res = qfi_nuisance(g, -3, psi)
        assert res.matrix.i_phiphi == 0
        assert res.effective == res.matrix.i_phiphi
