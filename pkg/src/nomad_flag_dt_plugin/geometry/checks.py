"""
Internal-consistency checks run by ``flag-dt verify``.

Each check raises a ``FlagDTError`` on failure and otherwise returns a short
detail string. Checks on the exact route compare rationals for equality and do
not depend on the tolerance.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import structlog

from nomad_flag_dt_plugin.config import resolve_tolerance
from nomad_flag_dt_plugin.errors import (
    ConsistencyError,
    FlagDTError,
    InvalidParamsError,
)
from nomad_flag_dt_plugin.geometry import (
    bundles,
    extalg,
    flaggeom,
    gauge,
    scalars,
    solver,
)
from nomad_flag_dt_plugin.geometry.bundles import Root, Weight
from nomad_flag_dt_plugin.geometry.flaggeom import StructureParams
from nomad_flag_dt_plugin.geometry.gauge import InvariantConnection
from nomad_flag_dt_plugin.geometry.scalars import Backend

logger = structlog.get_logger(__name__)

SEED = 20240611
EQUIVALENCE_SAMPLES = 100

EXACT = 'exact'
FLOAT = 'float'


@dataclass(frozen=True)
class Check:
    name: str
    route: str
    run: Callable[[float], str]


@dataclass(frozen=True)
class CheckResult:
    name: str
    route: str
    passed: bool
    detail: str


CHECKS: dict[str, Check] = {}


def check(name: str, route: str):
    def decorator(fn: Callable[[float], str]) -> Callable[[float], str]:
        CHECKS[name] = Check(name, route, fn)
        return fn

    return decorator


def _random_params(
    rng: np.random.Generator, eps: Iterable[float] = (1.0, 1.0, 1.0)
) -> StructureParams:
    return StructureParams(tuple(rng.uniform(0.5, 2.0, 3)), tuple(eps))


def _random_signs(rng: np.random.Generator) -> tuple[float, ...]:
    return tuple(rng.uniform(0.3, 2.0, 3) * rng.choice((1.0, -1.0), 3))


@check('structure', EXACT)
def check_structure(tol: float) -> str:
    table = extalg.structure_table()
    table.validate()
    for j in (0, 1):
        if not table.entry(j, Backend.EXACT).is_semibasic():
            raise ConsistencyError(f'd beta{j + 1} has vertical terms')
    return 'd^2 = 0 on all eight coframe forms'


@check('nijenhuis', FLOAT)
def check_nijenhuis(tol: float) -> str:
    rng = np.random.default_rng(SEED)
    count = 0
    for pattern in itertools.product((1.0, -1.0), repeat=3):
        params = _random_params(rng, pattern)
        n = flaggeom.nijenhuis(params, tol=tol)
        integrable = sum(pattern) + np.prod(pattern) == 0
        if n.is_zero(tol) != integrable:
            raise ConsistencyError(f'integrability mismatch for eps = {pattern}')
        count += 1
    for _ in range(5):
        params = _random_params(rng, _random_signs(rng))
        flaggeom.nijenhuis(params, tol=tol)
        count += 1
    return f'closed form matches the projection route on {count} structures'


@check('calibration', EXACT)
def check_calibration(tol: float) -> str:
    c = scalars.to_fraction(flaggeom.gamma_calibration(Backend.EXACT))
    if c != 1:
        raise ConsistencyError(f'd omega = {c} Re(gamma) at the nearly Kahler point')
    params = StructureParams((1, 2, Fraction(3, 2)), (1, -1, Fraction(1, 2)))
    flaggeom.d_omega_decompose(flaggeom.build_structure(params))
    nk = flaggeom.build_structure(StructureParams((1, 1, 1)))
    if flaggeom.nearly_kahler_scale(nk) != 1:
        raise ConsistencyError('the nearly Kahler point has scale != 1')
    return 'd omega = Re(gamma), nearly Kahler scale 1'


@check('half_flat', EXACT)
def check_half_flat(tol: float) -> str:
    params = StructureParams((1, 2, 3))
    flaggeom.half_flat_certificate(params)
    structure = flaggeom.build_structure(
        StructureParams((1, 2, 3), (1, -1, Fraction(1, 3)))
    )
    if extalg.exterior_derivative(structure.omega_squared):
        raise ConsistencyError('d omega^2 != 0')
    return 'd Omega1 = 0, d Omega2 and d omega^2 as expected'


@check('slope', FLOAT)
def check_slope(tol: float) -> str:
    rng = np.random.default_rng(SEED)
    exact = StructureParams((1, 2, Fraction(1, 2)), (1, 1, -1))
    for root in Root:
        bundles.slope(root.weight, exact)
    for _ in range(10):
        w = Weight(*(int(v) for v in rng.integers(-3, 4, 2)))
        params = _random_params(rng, _random_signs(rng))
        bundles.slope(w, params, tol=tol)
    return 'closed-form slope equals the top-form ratio'


@check('line_curvature', FLOAT)
def check_line_curvature(tol: float) -> str:
    rng = np.random.default_rng(SEED)
    exact = StructureParams((1, 2, Fraction(1, 2)), (1, -1, Fraction(2, 3)))
    for root in Root:
        expected = root.weight.curvature(Backend.EXACT)
        if bundles.curvature_closed_form(root.weight, exact) != expected:
            raise ConsistencyError(f'd beta of L{root.weight} in the unitary coframe')
    worst = 0.0
    for _ in range(20):
        w = Weight(*(int(v) for v in rng.integers(-3, 4, 2)))
        params = _random_params(rng, _random_signs(rng))
        closed = bundles.curvature_closed_form(w, params)
        worst = max(worst, (closed - w.curvature()).max_abs())
    if worst > tol:
        raise ConsistencyError(f'd beta differs from the closed form by {worst:.3e}')
    return f'max deviation {worst:.1e}'


@check('curvature', FLOAT)
def check_curvature(tol: float) -> str:
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for root in Root:
        for _ in range(3):
            params = _random_params(rng, rng.choice((1.0, -1.0), 3))
            a = float(rng.uniform(-1.5, 1.5))
            computed = gauge.curvature(InvariantConnection.on_root(root, a), params)
            expected = gauge.curvature_closed_form(root, a, params)
            worst = max(worst, (computed - expected).max_abs())
    if worst > tol:
        raise ConsistencyError(f'curvature differs from the closed form by {worst:.3e}')
    return f'max deviation {worst:.1e}'


@check('higgs_equivalence', FLOAT)
def check_higgs_equivalence(tol: float) -> str:
    rng = np.random.default_rng(SEED)
    samples = 0
    while samples < EQUIVALENCE_SAMPLES:
        params = _random_params(rng)
        for root in Root:
            for sol in solver.solve_dt(root, params, tol):
                a = float(sol.a)
                moved = a + float(np.copysign(rng.uniform(0.05, 0.5), a))
                for conn, expected in (
                    (sol.connection, True),
                    (InvariantConnection.on_root(root, moved), False),
                ):
                    dt = gauge.dt_residual(conn, sol.higgs, params, tol=tol)
                    raw = gauge.u_residual(conn, sol.higgs, params, tol=tol)
                    agree = dt.vanishes(tol) == raw.vanishes(tol) == expected
                    if not agree:
                        raise ConsistencyError(
                            f'Higgs-pair and u residuals disagree on {root.value} '
                            f'at {params}, a = {float(conn.a):.6g}'
                        )
                    samples += 1
    return f'{samples} samples agree'


@check('solutions', EXACT)
def check_solutions(tol: float) -> str:
    params = StructureParams((1, 1, Fraction(3, 5)))
    solutions = solver.solve_dt(Root.R3, params)
    found = sorted(s.a for s in solutions)
    if found != [Fraction(-4, 5), Fraction(4, 5)]:
        raise ConsistencyError(f'r3 at {params}: a = {found}, expected +-4/5')
    if any(s.phi2 != Fraction(3, 5) for s in solutions):
        raise ConsistencyError(f'r3 at {params}: phi2 != 3/5')
    return 'r3 solution a = +-4/5, phi2 = 3/5 with vanishing exact residuals'


@check('phym', FLOAT)
def check_phym(tol: float) -> str:
    ke = StructureParams((1.0, 1.0, 2.0**0.5), (1.0, 1.0, -1.0))
    found = [r for r in Root if solver.solve_phym(r, ke, tol)]
    if found != [Root.R1, Root.R2]:
        raise ConsistencyError(
            f'pHYM connections at the Kahler-Einstein point on {found}'
        )
    return 'Kahler-Einstein point: irreducible pHYM on r1 and r2 only'


@check('charclass', EXACT)
def check_charclass(tol: float) -> str:
    expected = {
        Root.R1: ((1, 0), (-3, 0)),
        Root.R2: ((0, 1), (0, -3)),
        Root.R3: ((1, 1), (3, 3)),
    }
    seen = set()
    for root, (w2, p1) in expected.items():
        report = bundles.char_classes(root.weight)
        if report.w2 != w2 or report.p1.coordinates != p1:
            raise ConsistencyError(
                f'{root.value}: w2 = {report.w2}, p1 = {report.p1.coordinates}'
            )
        seen.add((report.w2, report.p1.coordinates))
    if len(seen) != len(expected):
        raise ConsistencyError('root bundles are not pairwise distinct')
    bundles.verify_h4_relation()
    return 'w2 and p1 distinguish the three root bundles; H4 relation certified'


def run_checks(
    only: Iterable[str] | None = None, tol: float | None = None
) -> list[CheckResult]:
    tol = resolve_tolerance(tol)
    names = list(CHECKS) if only is None else list(only)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise InvalidParamsError(
            f'unknown check {", ".join(unknown)}; available: {", ".join(CHECKS)}'
        )
    results = []
    for name in names:
        entry = CHECKS[name]
        try:
            detail = entry.run(tol)
        except FlagDTError as e:
            results.append(CheckResult(name, entry.route, False, str(e)))
            logger.warning('check failed', check=name, error=str(e))
            continue
        results.append(CheckResult(name, entry.route, True, detail))
        logger.info('check passed', check=name, route=entry.route)
    return results
