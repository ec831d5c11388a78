import itertools
from fractions import Fraction

import numpy as np
import pytest

from nomad_flag_dt_plugin.errors import BackendMismatchError, NotSemibasicError
from nomad_flag_dt_plugin.geometry import extalg, scalars
from nomad_flag_dt_plugin.geometry.extalg import Coframe, Form, eta, theta
from nomad_flag_dt_plugin.geometry.flaggeom import StructureParams
from nomad_flag_dt_plugin.geometry.scalars import Backend

ATOL = 1e-12
EX = Backend.EXACT


def _random_form(rng, degree, backend=Backend.FLOAT):
    keys = list(itertools.combinations(range(8), degree))
    picks = rng.choice(len(keys), size=4, replace=False)
    if backend is EX:
        return Form(
            {keys[p]: Fraction(int(rng.integers(-5, 6)), 3) for p in picks}, backend
        )
    return Form({keys[p]: float(rng.normal()) for p in picks}, backend)


def test_d_squared_vanishes_exactly():
    table = extalg.structure_table()
    table.validate()
    for index in Coframe:
        d = extalg.exterior_derivative(Form.basis(index, EX))
        assert d.degrees() == {2}
        assert not extalg.exterior_derivative(d)


def test_structure_table_is_derived_not_typed():
    assert extalg.derive_structure_table().entry(Coframe.ETA1) == (
        extalg.structure_table().entry(Coframe.ETA1)
    )


def test_vertical_differentials_are_semibasic():
    for index in (Coframe.BETA1, Coframe.BETA2):
        assert extalg.structure_table().entry(index, EX).is_semibasic()


def test_wedge_is_graded_commutative():
    e1 = Form.basis(eta(1), EX)
    t1 = Form.basis(theta(1), EX)
    assert extalg.wedge(e1, t1) == -extalg.wedge(t1, e1)
    assert not extalg.wedge(e1, e1)
    assert Form({(2, 2): 1}, EX) == Form.zero(EX)
    assert Form({(3, 2): 1}, EX) == -Form({(2, 3): 1}, EX)


def test_leibniz_rule(rng):
    for p, q in ((1, 1), (1, 2), (2, 2)):
        f = _random_form(rng, p, EX)
        g = _random_form(rng, q, EX)
        lhs = extalg.exterior_derivative(extalg.wedge(f, g))
        rhs = extalg.wedge(extalg.exterior_derivative(f), g) + extalg.wedge(
            f, extalg.exterior_derivative(g)
        ) * (-1) ** p
        assert lhs == rhs


def test_backends_do_not_mix():
    with pytest.raises(BackendMismatchError):
        _ = Form.basis(2, EX) + Form.basis(2, Backend.FLOAT)


def test_hodge_star_squares_to_sign(rng, random_params, random_signs):
    params = random_params(random_signs())
    for degree in (1, 2, 3):
        keys = list(itertools.combinations(extalg.SEMIBASIC, degree))
        f = Form({k: float(rng.normal()) for k in keys[:5]})
        twice = extalg.hodge_star(extalg.hodge_star(f, params), params)
        assert twice.allclose(f * (-1) ** (degree * (6 - degree)), ATOL)


def test_hodge_star_of_one_is_the_volume_form():
    params = StructureParams((1, 2, Fraction(1, 2)), (1, -1, 1))
    vol = extalg.hodge_star(Form.scalar(1, EX), params)
    expected = extalg.wedge_all(extalg.orthonormal_coframe(params, EX), EX)
    assert vol == expected


def test_hodge_star_needs_semibasic_forms():
    with pytest.raises(NotSemibasicError):
        extalg.hodge_star(Form.basis(Coframe.BETA1), StructureParams((1, 1, 1)))


def test_alpha_has_type_one_zero(random_params, random_signs):
    params = random_params(random_signs())
    for j in (1, 2, 3):
        a = extalg.alpha(j, params)
        assert extalg.type_project(a, 1, 0, params).allclose(a, ATOL)
        assert extalg.type_project(a, 0, 1, params).is_zero(ATOL)
        assert np.isclose(extalg.form_norm(a.real(), params), 1.0, atol=ATOL)


def test_type_projections_add_up(rng, random_params, random_signs):
    params = random_params(random_signs())
    f = _random_form(rng, 2).semibasic_part() + Form(
        {(eta(1), theta(2)): 1.5, (eta(3), theta(3)): -0.5}
    )
    total = Form.zero()
    for p in range(3):
        total = total + extalg.type_project(f, p, 2 - p, params)
    assert total.allclose(f, ATOL)


def test_hodge_star_is_an_isometry(rng, random_params, random_signs):
    params = random_params(random_signs())
    for degree in range(7):
        keys = list(itertools.combinations(extalg.SEMIBASIC, degree))
        f = Form({k: complex(*rng.normal(size=2)) for k in keys[:6]})
        star = extalg.hodge_star(f, params)
        assert np.isclose(
            extalg.form_norm(star, params), extalg.form_norm(f, params), atol=ATOL
        )


def test_hodge_star_of_a_coframe_form():
    params = StructureParams((1, 2, Fraction(1, 2)), (1, -1, Fraction(2, 3)))
    coframe = extalg.orthonormal_coframe(params, EX)
    assert extalg.hodge_star(coframe[0], params) == extalg.wedge_all(coframe[1:], EX)


def test_conjugation_swaps_types(rng):
    params = StructureParams((1, 2, Fraction(1, 2)), (1, -1, Fraction(2, 3)))
    i = scalars.imaginary_unit(EX)
    f = (
        _random_form(rng, 2, EX).semibasic_part()
        + _random_form(rng, 2, EX).semibasic_part() * i
        + Form({(eta(1), theta(2)): 1, (eta(3), theta(3)): Fraction(-1, 2)}, EX)
    )
    for p in range(3):
        part = extalg.type_project(f, p, 2 - p, params)
        assert part.conj() == extalg.type_project(f.conj(), 2 - p, p, params)


def test_type_projection_is_idempotent(rng):
    params = StructureParams((1, 2, Fraction(1, 2)), (1, -1, Fraction(2, 3)))
    f = _random_form(rng, 2, EX).semibasic_part() + Form(
        {(eta(2), theta(1)): 2, (theta(1), theta(3)): Fraction(1, 3)}, EX
    )
    for p in range(3):
        part = extalg.type_project(f, p, 2 - p, params)
        assert extalg.type_project(part, p, 2 - p, params) == part
        for other in range(3):
            if other != p:
                assert not extalg.type_project(part, other, 2 - other, params)
