import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from nomad_flag_dt_plugin.errors import PreconditionError
from nomad_flag_dt_plugin.geometry import extalg, gauge, solver
from nomad_flag_dt_plugin.geometry.bundles import Root, Weight
from nomad_flag_dt_plugin.geometry.extalg import Form, eta, theta
from nomad_flag_dt_plugin.geometry.flaggeom import StructureParams
from nomad_flag_dt_plugin.geometry.gauge import (
    HiggsPair,
    InvariantConnection,
    LieValuedForm,
    ResidualReport,
)
from nomad_flag_dt_plugin.geometry.scalars import Backend

ATOL = 1e-12
RTOL = 1e-10
EX = Backend.EXACT
KE = StructureParams((1.0, 1.0, 2.0**0.5), (1, 1, -1))


def test_curvature_matches_closed_form(rng, random_params):
    for root in Root:
        for _ in range(7):
            params = random_params(rng.choice((1.0, -1.0), 3))
            a = float(rng.uniform(-1.5, 1.5))
            computed = gauge.curvature(InvariantConnection.on_root(root, a), params)
            expected = gauge.curvature_closed_form(root, a, params)
            assert (computed - expected).max_abs() < ATOL


def test_curvature_exact():
    params = StructureParams((1, 2, Fraction(1, 2)), (1, -1, 1))
    conn = InvariantConnection.on_root(Root.R2, Fraction(2, 3))
    computed = gauge.curvature(conn, params)
    expected = gauge.curvature_closed_form(Root.R2, Fraction(2, 3), params)
    assert (computed - expected).is_zero()
    assert computed.is_semibasic()


def test_non_root_weight_keeps_the_canonical_connection():
    conn = InvariantConnection(Weight(1, 0), 0.7)
    assert conn.a == 0
    assert not conn.irreducible


def test_phase_folds_onto_the_real_slice():
    assert InvariantConnection.on_root('r1', 0.5, math.pi).a == -0.5
    assert InvariantConnection.on_root('r1', 0.5, 2 * math.pi).phase == 0.0


def test_higgs_fields_must_be_finite():
    with pytest.raises(PreconditionError):
        HiggsPair(0, math.inf)


def test_residual_report_norms():
    report = ResidualReport(omega1_norm=1e-3, f02_norm=0.0, bianchi=5.0)
    assert report.norms() == {'omega1_norm': 1e-3, 'f02_norm': 0.0}
    assert report.max_norm() == 1e-3
    assert not report.vanishes(1e-10)


def test_dt_residual_needs_a_basic_omega():
    params = StructureParams((1, 1, 1), (1, 1, -1))
    conn = InvariantConnection.on_root('r1', 0.5)
    with pytest.raises(PreconditionError):
        gauge.dt_residual(conn, HiggsPair(), params)
    report = gauge.dt_residual(conn, HiggsPair(), params, pulled_back=True)
    assert report.max_norm() > RTOL


def test_u_formulation_needs_unit_eps():
    with pytest.raises(PreconditionError):
        gauge.u_residual(
            InvariantConnection.on_root('r1'),
            HiggsPair(),
            StructureParams((1, 1, 1), (1, 1, -1)),
        )


def test_exact_dt_solution_has_zero_residual():
    params = StructureParams((1, 1, Fraction(3, 5)))
    conn = InvariantConnection.on_root(Root.R3, Fraction(4, 5))
    report = gauge.dt_residual(conn, HiggsPair(0, Fraction(3, 5)), params)
    assert report.max_norm() == 0.0
    wrong = gauge.dt_residual(conn, HiggsPair(0, Fraction(3, 10)), params)
    assert wrong.max_norm() > RTOL


def test_phym_residual_at_the_kahler_einstein_point():
    conn = InvariantConnection.on_root(Root.R1, math.sqrt(0.75))
    assert gauge.phym_residual(conn, KE).vanishes(RTOL)
    off = InvariantConnection.on_root(Root.R1, 0.5)
    assert not gauge.phym_residual(off, KE).vanishes(RTOL)


def test_higgs_pair_and_u_formulations_agree(rng, random_params):
    samples = {True: 0, False: 0}
    while min(samples.values()) < 100:
        params = random_params()
        for root in Root:
            for sol in solver.solve_dt(root, params):
                a = float(sol.a)
                moved = a + math.copysign(float(rng.uniform(0.05, 0.5)), a)
                for conn, expected in (
                    (sol.connection, True),
                    (InvariantConnection.on_root(root, moved), False),
                ):
                    dt = gauge.dt_residual(conn, sol.higgs, params)
                    raw = gauge.u_residual(conn, sol.higgs, params)
                    assert dt.vanishes(RTOL) is expected
                    assert raw.vanishes(RTOL) is expected
                    samples[expected] += 1


def test_gauge_rotation_leaves_residuals_invariant(rng, random_params):
    params = random_params()
    solution = next(s for r in Root for s in solver.solve_dt(r, params))
    base = gauge.dt_residual(solution.connection, solution.higgs, params).norms()
    for t in rng.uniform(0, 2 * math.pi, 20):
        conn, higgs = gauge.gauge_rotate(solution.connection, solution.higgs, t)
        rotated = gauge.dt_residual(conn, higgs, params).norms()
        for key, value in base.items():
            assert np.isclose(rotated[key], value, atol=RTOL)


def test_quarter_rotation_flips_a():
    conn = InvariantConnection.on_root(Root.R2, 0.3)
    rotated, _ = gauge.gauge_rotate(conn, HiggsPair(), math.pi / 2)
    assert rotated.a == -0.3
    assert rotated.phase == 0.0


def _random_lie_form(rng, degree):
    keys = list(itertools.combinations(extalg.SEMIBASIC, degree))
    parts = []
    for _ in range(3):
        picks = rng.choice(len(keys), size=3, replace=False)
        parts.append(
            Form({keys[p]: Fraction(int(rng.integers(-4, 5)), 2) for p in picks}, EX)
        )
    return LieValuedForm(tuple(parts))


def test_bracket_of_a_root_connection_with_itself():
    e1, t1 = Form.basis(eta(1), EX), Form.basis(theta(1), EX)
    a = LieValuedForm.along(2, e1) - LieValuedForm.along(3, t1)
    expected = LieValuedForm.along(1, extalg.wedge(e1, t1) * -4)
    assert gauge.bracket_wedge(a, a) == expected


def test_bracket_is_graded_symmetric(rng):
    for p, q in ((1, 1), (1, 2), (2, 2)):
        a, b = _random_lie_form(rng, p), _random_lie_form(rng, q)
        swapped = gauge.bracket_wedge(b, a) * (-1) ** (p * q + 1)
        assert gauge.bracket_wedge(a, b) == swapped


def test_covariant_derivative_of_the_higgs_field_exact():
    params = StructureParams((1, 1, 1))
    a, phi = Fraction(1, 2), Fraction(3, 5)
    conn = InvariantConnection.on_root(Root.R1, a)
    d_phi = gauge.covariant_derivative_higgs(conn, phi, params)
    c = 2 * a * phi
    expected = LieValuedForm.along(2, Form.basis(theta(1), EX) * c) + (
        LieValuedForm.along(3, Form.basis(eta(1), EX) * c)
    )
    assert d_phi == expected


def test_u_residual_without_higgs_fields_is_the_phym_residual(rng, random_params):
    for root in Root:
        params = random_params()
        conn = InvariantConnection.on_root(root, float(rng.uniform(-1, 1)))
        raw = gauge.u_residual(conn, HiggsPair(), params)
        phym = gauge.phym_residual(conn, params)
        assert np.isclose(raw.dbar_u_norm, phym.f02_norm, atol=ATOL)
        assert np.isclose(raw.lambda_u_norm, phym.lambdaF_norm, atol=ATOL)
