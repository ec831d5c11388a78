import math
from fractions import Fraction

import numpy as np
import pytest

from nomad_flag_dt_plugin.errors import InvalidParamsError, UnknownPathError
from nomad_flag_dt_plugin.geometry import bundles, solver
from nomad_flag_dt_plugin.geometry.bundles import Root
from nomad_flag_dt_plugin.geometry.flaggeom import CYCLIC, StructureParams
from nomad_flag_dt_plugin.geometry.solver import P1, P2, P3, SIGMA, Mode

ATOL = 1e-10
KE = StructureParams((1.0, 1.0, 2.0**0.5), (1, 1, -1))


def test_exact_r3_solution():
    params = StructureParams((1, 1, Fraction(3, 5)))
    solutions = solver.solve_dt(Root.R3, params)
    assert sorted(s.a for s in solutions) == [Fraction(-4, 5), Fraction(4, 5)]
    for s in solutions:
        assert s.phi1 == 0
        assert s.phi2 == Fraction(3, 5)
        assert not s.reducible
        assert s.slope == Fraction(-64, 27)
        assert s.residual.max_norm() == 0.0


def test_dt_solutions_on_the_half_flat_family(random_params):
    for _ in range(100):
        params = random_params()
        for root in Root:
            i = root.slot
            j, k = CYCLIC[i]
            A = params.A  # noqa: N806
            mu = bundles.slope_closed_form(root.weight, params)
            solutions = solver.solve_dt(root, params)
            if mu > 0:
                assert solutions == []
                continue
            a = math.sqrt(-3 * A[i - 1] ** 2 * mu / 4)
            assert sorted(float(s.a) for s in solutions) == pytest.approx(
                [-a, a], abs=ATOL
            )
            for s in solutions:
                assert s.phi1 == 0
                assert np.isclose(s.phi2, A[i - 1] / (A[j - 1] * A[k - 1]), atol=ATOL)
                assert s.residual.vanishes(ATOL)


def test_reducible_solution_at_the_nearly_kahler_point():
    for root in Root:
        (solution,) = solver.solve_dt(root, StructureParams((1, 1, 1)))
        assert solution.reducible
        assert solution.a == 0
        assert solution.phi1_free
        assert solution.residual.vanishes(ATOL)


def test_eps_identity_gates_the_irreducible_branch():
    params = StructureParams((1, 2, 3), (-1, -1, 1))
    assert solver.eps_identity(Root.R1, params) == 1
    assert solver.eps_identity(Root.R3, params) == -3
    assert solver.solve_dt(Root.R3, params) == []


def test_phym_at_the_kahler_einstein_point():
    found = {r: solver.solve_phym(r, KE) for r in Root}
    assert found[Root.R3] == []
    for root in (Root.R1, Root.R2):
        assert sorted(float(s.a) for s in found[root]) == pytest.approx(
            [-math.sqrt(0.75), math.sqrt(0.75)], abs=ATOL
        )
        assert all(s.mode is Mode.PHYM and s.phi2 == 0 for s in found[root])


def test_no_phym_on_the_half_flat_family(random_params):
    for _ in range(50):
        params = random_params()
        assert all(solver.solve_phym(r, params) == [] for r in Root)


def test_hermitian_structures_carry_phym_connections(random_params):
    for _ in range(100):
        params = random_params((1, 1, -1))
        mu1 = bundles.slope_closed_form(Root.R1.weight, params)
        mu2 = bundles.slope_closed_form(Root.R2.weight, params)
        assert mu1 + mu2 < 0
        summary = solver.existence_summary(params)
        assert any(r.phym_solutions for r in summary.roots)


def test_existence_dichotomy(random_params):
    for _ in range(100):
        summary = solver.existence_summary(random_params())
        assert summary.irreducible_dt_roots
        assert not summary.all_reducible
    assert solver.existence_summary(StructureParams((1, 1, 1))).all_reducible
    for delta in np.linspace(-0.05, 0.05, 10):
        if delta == 0:
            continue
        params = StructureParams((1.0, 1.0, 1.0 + float(delta)))
        assert not solver.existence_summary(params).all_reducible


def test_weyl_group_relations():
    assert (SIGMA**3).acts_trivially()
    for p in (P1, P2, P3):
        assert (p @ p).acts_trivially()
    composed = P1 @ P2
    assert composed.order == SIGMA.order
    assert not composed.flip
    assert all(composed.root(r) is SIGMA.root(r) for r in Root)


def test_weyl_act():
    assert solver.weyl_act('sigma', 'r1') is Root.R2
    params = StructureParams((1, 2, 3), (1, 1, 1))
    assert solver.weyl_act(SIGMA, params).A == (3, 1, 2)
    assert solver.weyl_act(P1, params).eps == (-1, -1, -1)
    with pytest.raises(InvalidParamsError):
        solver.weyl_act('rho', 'r1')
    with pytest.raises(TypeError):
        solver.weyl_act(SIGMA, 42)


@pytest.mark.parametrize('element', [SIGMA, P1, P2, P3])
def test_solutions_are_weyl_equivariant(random_params, element):
    for _ in range(10):
        params = random_params()
        image = element.params(params)
        for root in Root:
            before = sorted(abs(float(s.a)) for s in solver.solve_dt(root, params))
            after = sorted(
                abs(float(s.a)) for s in solver.solve_dt(element.root(root), image)
            )
            assert after == pytest.approx(before, abs=ATOL)


def test_phym_is_weyl_equivariant():
    for element in (SIGMA, P1, P2, P3):
        image = element.params(KE)
        for root in Root:
            before = len(solver.solve_phym(root, KE))
            after = len(solver.solve_phym(element.root(root), image))
            assert before == after


def test_path_validation():
    with pytest.raises(UnknownPathError, match='example4'):
        solver.builtin_path('nope')
    with pytest.raises(InvalidParamsError):
        solver.builtin_path('example4', n=1)
    with pytest.raises(InvalidParamsError):
        solver.builtin_path('example4', 1.5, 0.5)
    path = solver.builtin_path('example4', 0.8, 1.2, 5)
    assert np.allclose(path.grid(), [0.8, 0.9, 1.0, 1.1, 1.2])


def test_linear_path():
    start = StructureParams((1, 1, 1))
    end = StructureParams((2, 1, 3), (1, 1, 2))
    path = solver.linear_path(start, end, n=5)
    assert path.at(0.0).as_floats() == start.as_floats()
    assert path.at(1.0).as_floats() == end.as_floats()
    assert path.at(0.5).A == (1.5, 1.0, 2.0)


def test_example4_scan():
    table = solver.scan(solver.builtin_path('example4'))
    assert len(table.rows) == 3 * 101
    assert not table.flagged
    for row in table.rows:
        x = row.s
        if row.root is Root.R3:
            expected = math.sqrt(max(0.0, 1 - x * x)) if x <= 1 else None
        else:
            expected = math.sqrt(max(0.0, 0.5 - 0.5 / x**2)) if x >= 1 else None
        if expected is None:
            assert row.a_plus is None
            continue
        assert np.isclose(row.a_plus, expected, atol=ATOL)
        assert row.a_minus == -row.a_plus
    at_one = [r for r in table.rows if r.s == 1.0]
    assert len(at_one) == 3
    assert all(r.reducible and r.a_plus == 0 for r in at_one)


def test_example5_always_has_an_irreducible_root():
    path = solver.builtin_path('example5', n=21)
    table = solver.scan(path)
    for s in path.grid():
        rows = [r for r in table.rows if r.s == float(s)]
        assert any(r.a_plus is not None and not r.reducible for r in rows)


def test_scan_flags_invalid_samples():
    path = solver.PathSpec(
        'shrinking', lambda s: StructureParams((s, 1.0, 1.0)), 0.0, 1.0, 3
    )
    table = solver.scan(path, roots=['r1'])
    assert len(table.flagged) == 1
    assert table.flagged[0].s == 0.0
    assert table.flagged[0].mu is None


def test_corollary4_wall():
    path = solver.builtin_path('corollary4')
    (event,) = solver.wall_cross(path, Root.R1)
    assert abs(event.s - 1.0) < 1e-8
    assert event.solutions_side == 'below'
    assert len(solver.solve_dt(Root.R1, path.at(0.95))) == 2
    assert solver.solve_dt(Root.R1, path.at(1.05)) == []
    (wall,) = solver.solve_dt(Root.R1, path.at(1.0))
    assert wall.reducible


def test_corollary4_wall_in_phym_mode():
    path = solver.builtin_path('corollary4')
    (event,) = solver.wall_cross(path, Root.R1, Mode.PHYM)
    assert abs(event.s - 1.0) < 1e-8
    assert event.solutions_side == 'below'
    below = solver.solve_phym(Root.R1, path.at(0.95))
    assert len(below) == 2
    assert all(s.mode is Mode.PHYM and not s.reducible for s in below)
    assert all(s.residual.vanishes(ATOL) for s in below)
    assert solver.solve_phym(Root.R1, path.at(1.05)) == []
    (wall,) = solver.solve_phym(Root.R1, path.at(1.0))
    assert wall.reducible


def test_example4_wall_for_r3():
    (event,) = solver.wall_cross(solver.builtin_path('example4'), 'r3')
    assert abs(event.s - 1.0) < 1e-8
    assert event.solutions_side == 'below'
    assert event.bracket[0] <= event.s <= event.bracket[1]
