import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from nomad_flag_dt_plugin.errors import InvalidParamsError, PreconditionError
from nomad_flag_dt_plugin.geometry import extalg, flaggeom, scalars
from nomad_flag_dt_plugin.geometry.flaggeom import StructureParams
from nomad_flag_dt_plugin.geometry.scalars import Backend

ATOL = 1e-12
SIGN_PATTERNS = list(itertools.product((1.0, -1.0), repeat=3))


def test_parse_literal():
    assert flaggeom.parse_literal('3/5') == Fraction(3, 5)
    assert isinstance(flaggeom.parse_literal('-2'), Fraction)
    assert flaggeom.parse_literal('1.5') == 1.5
    for bad in ('abc', 'inf', 'nan', '1/0'):
        with pytest.raises(InvalidParamsError):
            flaggeom.parse_literal(bad)


def test_params_validation():
    with pytest.raises(InvalidParamsError):
        StructureParams((1, 0, 1))
    with pytest.raises(InvalidParamsError):
        StructureParams((1, 1, 1), (1, 0, 1))
    with pytest.raises(InvalidParamsError):
        StructureParams.from_literals(['1', '1', '1'])
    params = StructureParams.from_literals(['1', '2', '3/2', '1', '-1', '1'])
    assert params.backend is Backend.EXACT
    assert params.eps_product == -1
    assert params.to_float().backend is Backend.FLOAT


def test_weyl_orbit_has_six_images():
    params = StructureParams((1, 2, 3), (1, 1, 1))
    images = list(params.weyl_orbit())
    assert len(images) == 6
    assert sum(1 for p in images if p.eps == (-1, -1, -1)) == 3


@pytest.mark.parametrize('pattern', SIGN_PATTERNS)
def test_nijenhuis_closed_form_matches_sign_pattern_form(random_params, pattern):
    for _ in range(10):
        params = random_params(pattern)
        closed = flaggeom.nijenhuis_closed_form(params)
        customary = flaggeom.nijenhuis_sign_pattern_form(params)
        assert np.allclose(closed, customary, atol=ATOL)
        n = flaggeom.nijenhuis(params)
        integrable = sum(pattern) + math.prod(pattern) == 0
        assert n.is_zero() == integrable


def test_nijenhuis_real_eps(random_params, random_signs):
    for _ in range(5):
        params = random_params(random_signs())
        n = flaggeom.nijenhuis(params)
        assert np.allclose(n, flaggeom.nijenhuis_closed_form(params), atol=ATOL)
    with pytest.raises(PreconditionError):
        flaggeom.nijenhuis_sign_pattern_form(
            StructureParams((1, 1, 1), (0.5, 1, 1))
        )


def test_nijenhuis_exact():
    params = StructureParams((1, 2, Fraction(1, 2)), (1, 1, 1))
    n = flaggeom.nijenhuis(params)
    assert tuple(n) == tuple(flaggeom.nijenhuis_closed_form(params))
    assert n.n11 == Fraction(1)


def test_d_omega_squared_vanishes(random_params, random_signs):
    for _ in range(10):
        structure = flaggeom.build_structure(random_params(random_signs()))
        assert extalg.exterior_derivative(structure.omega_squared).is_zero(ATOL)
        assert extalg.wedge(structure.omega, structure.Omega1).is_zero(ATOL)


def test_volume_normalization():
    structure = flaggeom.build_structure(StructureParams((1, 2, 3), (1, -1, 2)))
    omega_cubed = extalg.wedge(structure.omega_squared, structure.omega)
    omega1_omega2 = extalg.wedge(structure.Omega1, structure.Omega2)
    assert omega_cubed == omega1_omega2 * Fraction(3, 2)


def test_nearly_kahler_point():
    params = StructureParams((1, 1, 1))
    structure = flaggeom.build_structure(params)
    d_omega = extalg.exterior_derivative(structure.omega)
    d_Omega2 = extalg.exterior_derivative(structure.Omega2)  # noqa: N806
    assert d_omega == structure.Omega1 * 3
    assert d_Omega2 == structure.omega_squared * -2

    flags = flaggeom.classify(params)
    assert flags.nearly_kahler_up_to_scale
    assert flags.nearly_kahler_scale == 1.0
    assert flags.half_flat
    assert not flags.integrable
    assert not flags.symplectic
    assert not flags.calabi_yau


def test_d_omega_on_the_half_flat_family(random_params):
    for _ in range(20):
        params = random_params()
        structure = flaggeom.build_structure(params)
        A1, A2, A3 = params.A  # noqa: N806
        coefficient = (A1**2 + A2**2 + A3**2) / (A1 * A2 * A3)
        d_omega = extalg.exterior_derivative(structure.omega)
        assert d_omega.allclose(structure.Omega1 * coefficient, ATOL)


def test_gamma_calibration_is_one():
    assert scalars.to_fraction(flaggeom.gamma_calibration(Backend.EXACT)) == 1


def test_d_omega_decomposition_for_real_eps(random_params, random_signs):
    for _ in range(5):
        params = random_params(random_signs())
        decomposition = flaggeom.d_omega_decompose(flaggeom.build_structure(params))
        assert decomposition.d_omega.allclose(decomposition.gamma.real(), ATOL)


def test_kahler_einstein_metric():
    flags = flaggeom.classify(StructureParams((1.0, 1.0, 2.0**0.5), (1, 1, -1)))
    assert flags.integrable
    assert flags.symplectic
    assert flags.kahler
    assert flags.kahler_einstein
    assert not flags.nearly_kahler_up_to_scale


def test_kahler_but_not_einstein():
    flags = flaggeom.classify(StructureParams((3, 4, 5), (1, 1, -1)))
    assert flags.kahler
    assert not flags.kahler_einstein
    assert flaggeom.symplectic_defect(StructureParams((3, 4, 5), (1, 1, -1))) == 0


@pytest.mark.parametrize('pattern', SIGN_PATTERNS)
def test_never_calabi_yau(random_params, pattern):
    assert not flaggeom.classify(random_params(pattern)).calabi_yau


def test_half_flat_certificate():
    cert = flaggeom.half_flat_certificate(StructureParams((1, 2, 3)))
    assert not cert.d_Omega1
    assert cert.d_Omega2 == cert.expected_d_Omega2
    with pytest.raises(PreconditionError):
        flaggeom.half_flat_certificate(StructureParams((1, 2, 3), (1, 1, -1)))
