from fractions import Fraction

import pytest

from nomad_flag_dt_plugin.errors import BackendMismatchError
from nomad_flag_dt_plugin.geometry import scalars
from nomad_flag_dt_plugin.geometry.scalars import Backend


def test_backend_of():
    assert scalars.backend_of(1, Fraction(3, 5)) is Backend.EXACT
    assert scalars.backend_of(1, 0.5) is Backend.FLOAT
    assert scalars.backend_of(True) is Backend.FLOAT


def test_float_never_enters_exact_backend():
    with pytest.raises(BackendMismatchError):
        scalars.coerce(0.5, Backend.EXACT)


def test_exact_round_trip_through_gaussian():
    z = scalars.coerce(Fraction(3, 4), Backend.EXACT)
    assert scalars.to_real(z, 1e-10) == Fraction(3, 4)
    assert scalars.to_complex(scalars.gaussian(1, 2)) == complex(1, 2)


def test_conjugate_and_parts():
    z = scalars.gaussian(1, 2)
    assert scalars.conjugate(z) == scalars.gaussian(1, -2)
    assert scalars.to_fraction(scalars.real_part(z)) == 1
    assert scalars.to_fraction(scalars.imag_part(z)) == 2
    assert scalars.conjugate(1 + 2j) == 1 - 2j


def test_to_real_rejects_complex_values():
    with pytest.raises(BackendMismatchError):
        scalars.to_real(1 + 1j, 1e-10)
    with pytest.raises(BackendMismatchError):
        scalars.to_fraction(scalars.gaussian(0, 1))
    assert scalars.to_real(2 + 1e-14j, 1e-10) == 2.0


def test_is_zero():
    assert scalars.is_zero(scalars.zero(Backend.EXACT), 1e-10)
    assert scalars.is_zero(1e-12 + 0j, 1e-10)
    assert not scalars.is_zero(1e-8 + 0j, 1e-10)
