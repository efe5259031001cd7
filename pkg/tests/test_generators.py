import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonlin_metrology.exceptions import DomainError
from nonlin_metrology.generators import (
    Linear,
    Plateau,
    PowerLaw,
    Table,
    delta_k,
    emergent_error,
    encoding_unitary,
    eval_g,
    kerr,
    parse_generator,
    wrap_phases,
)
from nonlin_metrology.hilbert import SpectrumSet
from strategies import cases, shifts


def test_eval_examples():
    assert eval_g(PowerLaw(2), 3) == 9
    assert eval_g(Plateau(4, 2), 5) == 16
    assert eval_g(Linear(1.0), 7) == 7


def test_delta_examples():
    assert delta_k(kerr(), 1, 4) == 9
    assert delta_k(PowerLaw(2.5), 0, 3.3) == 0
    assert delta_k(Linear(0.7), 3, 11) == pytest.approx(2.1)


def test_fractional_power_domain():
    with pytest.raises(DomainError):
        PowerLaw(1.5)(-1)
    assert PowerLaw(3)(-2) == -8
    with pytest.raises(ValueError):
        PowerLaw(0.5)


def test_table_domain():
    g = Table((0, 1, 4))
    assert g(2) == 4
    with pytest.raises(DomainError):
        g(3)
    with pytest.raises(DomainError):
        g(0.5)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("linear:2.0", Linear(2.0)),
        ("power:2.5", PowerLaw(2.5)),
        ("kerr", PowerLaw(2.0)),
        ("plateau:4:2", Plateau(4, 2)),
        ("table:0,1,4", Table((0, 1, 4))),
    ],
)
def test_parse_generator(text, expected):
    assert parse_generator(text) == expected
    assert parse_generator(expected.spec_string()) == expected


@pytest.mark.parametrize("bad", ["cubic", "power:x", "plateau:0:2", "kerr:3"])
def test_parse_generator_rejects(bad):
    with pytest.raises(ValueError):
        parse_generator(bad)


def test_encoding_examples():
    space = SpectrumSet.bosonic(2)
    np.testing.assert_allclose(encoding_unitary(kerr(), 0.0, space).phases, 0)
    np.testing.assert_allclose(encoding_unitary(kerr(), math.pi / 4, space).phases, [0, -math.pi / 4, -math.pi])
    ladder = encoding_unitary(Linear(1.0), 0.3, SpectrumSet.bosonic(5)).phases
    np.testing.assert_allclose(np.diff(ladder), -0.3)


def test_emergent_error_examples():
    space = SpectrumSet.bosonic(6)
    lin = emergent_error(Linear(1.0), 2, 0.4, space).phases
    np.testing.assert_allclose(lin, -0.8)
    n = space.labels
    kerr_phases = emergent_error(kerr(), 1, 0.01, space).phases
    np.testing.assert_allclose(kerr_phases, -0.01 * (2 * n - 1), atol=1e-15)
    np.testing.assert_allclose(emergent_error(kerr(), 0, 0.3, space).phases, 0)


def test_emergent_error_sentinel_outside_domain():
    phases = emergent_error(PowerLaw(1.5), 2, 0.1, SpectrumSet.bosonic(4)).phases
    assert phases[0] == 0 and phases[1] == 0
    assert phases[2] == pytest.approx(-0.1 * 2**1.5)


def test_wrap_is_accurate_for_huge_phases():
    # phi * n**3 with n = 1000: the wrapped value must keep ~1e-12 accuracy
    phi, n = 0.123456789, 1000
    x = np.longdouble(phi) * np.longdouble(n) ** 3
    wrapped = wrap_phases(-x)
    reference = math.remainder(-(phi * 1e9), 2 * math.pi)
    assert -math.pi <= wrapped < math.pi
    # the float64 reference itself is only good to ~1e-7 here
    assert abs(np.exp(1j * wrapped) - np.exp(1j * reference)) < 1e-6


@given(cases(), st.floats(-3, 3))
def test_encoding_composes_additively(case, phi):
    g, space, _ = case
    a = encoding_unitary(g, phi, space).compose(encoding_unitary(g, 0.5, space)).diagonal
    b = encoding_unitary(g, phi + 0.5, space).diagonal
    np.testing.assert_allclose(a, b, atol=1e-12)


@given(cases(), shifts, st.floats(-3, 3))
def test_linear_emergent_error_is_global(case, k, phi):
    _, space, _ = case
    g = Linear(1.3)
    diag = emergent_error(g, k, phi, space).diagonal
    np.testing.assert_allclose(diag, np.exp(-1j * phi * 1.3 * k), atol=1e-12)


@given(st.floats(-10, 10), st.floats(0, 50))
def test_delta_linear(k, n):
    assert delta_k(Linear(1.7), k, n) == pytest.approx(1.7 * k, abs=1e-9)
