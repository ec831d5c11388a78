"""
Closed-form invariant DT-instantons and pHYM connections on the root bundles,
existence summaries, the Weyl symmetry, and scans along parameter paths.

Every solution handed out is re-verified through the residuals of ``gauge``.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction

import numpy as np
import structlog

from nomad_flag_dt_plugin.config import get_settings, resolve_tolerance
from nomad_flag_dt_plugin.errors import (
    ConsistencyError,
    InvalidParamsError,
    UnknownPathError,
)
from nomad_flag_dt_plugin.geometry import bundles, gauge
from nomad_flag_dt_plugin.geometry.bundles import Root
from nomad_flag_dt_plugin.geometry.flaggeom import (
    CYCLIC,
    Number,
    StructureParams,
    nijenhuis_closed_form,
)
from nomad_flag_dt_plugin.geometry.gauge import (
    HiggsPair,
    InvariantConnection,
    ResidualReport,
)

logger = structlog.get_logger(__name__)

ROOTS = tuple(Root)


class Mode(str, Enum):
    DT = 'dt'
    PHYM = 'phym'


@dataclass(frozen=True)
class DTSolution:
    root: Root
    params: StructureParams
    a: Number
    phi1: Number
    phi2: Number
    reducible: bool
    slope: Number
    mode: Mode = Mode.DT
    # at a = 0 the DT equations leave phi1 free; phi1 = 0 is reported
    phi1_free: bool = False
    residual: ResidualReport | None = field(default=None, compare=False)

    @property
    def connection(self) -> InvariantConnection:
        return InvariantConnection.on_root(self.root, self.a)

    @property
    def higgs(self) -> HiggsPair:
        return HiggsPair(self.phi1, self.phi2)


def _slots(root: Root) -> tuple[int, int, int]:
    i = root.slot
    return (i, *CYCLIC[i])


def phi2_closed_form(root: Root | str, params: StructureParams) -> Number:
    """phi2 = A_i (1 + eps_j eps_k) / (2 A_j A_k eps_j eps_k), (i, j, k) cyclic."""
    i, j, k = _slots(Root.parse(root))
    A, e = params.A, params.eps  # noqa: N806
    ej, ek = e[j - 1], e[k - 1]
    return A[i - 1] * (1 + ej * ek) / (2 * A[j - 1] * A[k - 1] * ej * ek)


def eps_identity(root: Root | str, params: StructureParams) -> Number:
    """eps_i eps_j - eps_j eps_k + eps_i eps_k; the irreducible DT branch needs 1."""
    i, j, k = _slots(Root.parse(root))
    e = params.eps
    return e[i - 1] * e[j - 1] - e[j - 1] * e[k - 1] + e[i - 1] * e[k - 1]


def signed_slope(root: Root | str, params: StructureParams) -> Number:
    """eps_i mu(L_(r_i)) from the closed form; its sign governs existence."""
    root = Root.parse(root)
    return params.eps[root.slot - 1] * bundles.slope_closed_form(root.weight, params)


def a_squared(root: Root | str, params: StructureParams) -> Number:
    """a^2 = -(3/4) eps_i A_i^2 mu(L_(r_i))"""
    root = Root.parse(root)
    A_i = params.A[root.slot - 1]  # noqa: N806
    return -Fraction(3, 4) * A_i * A_i * signed_slope(root, params)


def _sqrt(value: Number) -> Number:
    if isinstance(value, Fraction) and value >= 0:
        num, den = math.isqrt(value.numerator), math.isqrt(value.denominator)
        if num * num == value.numerator and den * den == value.denominator:
            return Fraction(num, den)
    return math.sqrt(float(value))


def _sign(value: Number, tol: float) -> int:
    if abs(float(value)) <= tol:
        return 0
    return 1 if value > 0 else -1


def _verified(solution: DTSolution, tol: float) -> DTSolution:
    params = solution.params
    if solution.mode is Mode.DT:
        report = gauge.dt_residual(
            solution.connection,
            solution.higgs,
            params,
            pulled_back=params.eps_product != 1,
            tol=tol,
        )
    else:
        report = gauge.phym_residual(solution.connection, params, tol=tol)
    if not report.vanishes(tol):
        raise ConsistencyError(
            f'{solution.mode.value} solution on {solution.root.value} at {params} '
            f'has residual {report.max_norm():.3e}'
        )
    return replace(solution, residual=report)


def _branches(
    root: Root,
    params: StructureParams,
    mode: Mode,
    phi2: Number,
    tol: float,
) -> list[DTSolution]:
    mu = bundles.slope(root.weight, params, tol=tol)
    side = _sign(signed_slope(root, params), tol)
    if side > 0:
        return []
    if side == 0:
        candidates = [
            DTSolution(
                root,
                params,
                0,
                0,
                phi2,
                True,
                mu,
                mode,
                phi1_free=mode is Mode.DT,
            )
        ]
    else:
        a = _sqrt(a_squared(root, params))
        candidates = [
            DTSolution(root, params, s * a, 0, phi2, False, mu, mode) for s in (1, -1)
        ]
    return [_verified(c, tol) for c in candidates]


def solve_dt(
    root: Root | str, params: StructureParams, tol: float | None = None
) -> list[DTSolution]:
    """
    Invariant DT-instantons (A, Phi1 = 0, Phi2 = -phi2 T1) on P_(r_i).

    Empty when eps_i mu(L_(r_i)) > 0 or when the eps identity fails; a single
    reducible solution at equality; a +-a pair otherwise.
    """
    tol = resolve_tolerance(tol)
    root = Root.parse(root)
    if abs(float(eps_identity(root, params)) - 1) > tol:
        logger.debug('eps identity fails', root=root.value, params=str(params))
        return []
    solutions = _branches(root, params, Mode.DT, phi2_closed_form(root, params), tol)
    logger.debug(
        'solved root',
        mode='dt',
        root=root.value,
        a=[float(s.a) for s in solutions],
        phi2=float(phi2_closed_form(root, params)),
    )
    return solutions


def phym_sign_pattern(root: Root | str, params: StructureParams) -> bool:
    """eps_j = +-1 and eps_k = -eps_j on the complementary slots."""
    _, j, k = _slots(Root.parse(root))
    ej, ek = params.eps[j - 1], params.eps[k - 1]
    return ej in (1, -1) and ek == -ej


def solve_phym(
    root: Root | str, params: StructureParams, tol: float | None = None
) -> list[DTSolution]:
    tol = resolve_tolerance(tol)
    root = Root.parse(root)
    side = _sign(signed_slope(root, params), tol)
    if side < 0 and not phym_sign_pattern(root, params):
        return []
    solutions = _branches(root, params, Mode.PHYM, 0, tol)
    if any(not s.reducible for s in solutions):
        n = nijenhuis_closed_form(params)
        if not n.is_zero(tol):
            raise ConsistencyError(
                f'irreducible pHYM connection on {root.value} with nonzero '
                f'Nijenhuis tensor {tuple(float(v) for v in n)}'
            )
    logger.debug(
        'solved root', mode='phym', root=root.value, a=[float(s.a) for s in solutions]
    )
    return solutions


def solve(
    root: Root | str, params: StructureParams, mode: Mode | str, tol=None
) -> list[DTSolution]:
    mode = Mode(mode)
    if mode is Mode.DT:
        return solve_dt(root, params, tol)
    return solve_phym(root, params, tol)


@dataclass(frozen=True)
class RootExistence:
    root: Root
    slope: Number
    side: int
    dt_solutions: int
    dt_reducible: bool
    phym_solutions: int
    phym_reducible: bool


@dataclass(frozen=True)
class ExistenceSummary:
    params: StructureParams
    roots: tuple[RootExistence, ...]

    @property
    def irreducible_dt_roots(self) -> tuple[Root, ...]:
        return tuple(
            r.root for r in self.roots if r.dt_solutions and not r.dt_reducible
        )

    @property
    def irreducible_phym_roots(self) -> tuple[Root, ...]:
        return tuple(
            r.root for r in self.roots if r.phym_solutions and not r.phym_reducible
        )

    @property
    def all_reducible(self) -> bool:
        return all(r.dt_solutions and r.dt_reducible for r in self.roots)


def existence_summary(
    params: StructureParams, tol: float | None = None
) -> ExistenceSummary:
    tol = resolve_tolerance(tol)
    entries = []
    for root in ROOTS:
        dt = solve_dt(root, params, tol)
        phym = solve_phym(root, params, tol)
        entries.append(
            RootExistence(
                root=root,
                slope=bundles.slope(root.weight, params, tol=tol),
                side=_sign(signed_slope(root, params), tol),
                dt_solutions=len(dt),
                dt_reducible=bool(dt) and dt[0].reducible,
                phym_solutions=len(phym),
                phym_reducible=bool(phym) and phym[0].reducible,
            )
        )
    summary = ExistenceSummary(params, tuple(entries))
    _check_dichotomies(summary, tol)
    return summary


def _check_dichotomies(summary: ExistenceSummary, tol: float) -> None:
    params = summary.params
    if tuple(params.eps) == (1, 1, 1):
        if all(r.side > 0 for r in summary.roots):
            raise ConsistencyError(f'no root bundle carries a DT-instanton at {params}')
        equal = max(params.A) - min(params.A) <= tol
        if summary.all_reducible != equal:
            raise ConsistencyError(
                f'all roots reducible = {summary.all_reducible} but A1 = A2 = A3 '
                f'is {equal} at {params}'
            )
    if params.is_normalized and nijenhuis_closed_form(params).is_zero(tol):
        if not any(r.phym_solutions for r in summary.roots):
            raise ConsistencyError(
                f'no pHYM connection on a Hermitian structure {params}'
            )


@dataclass(frozen=True)
class WeylElement:
    """
    Acts on parameters by ``params.permuted(order, flip)`` and on roots by
    ``root_map``. ``g @ h`` applies ``h`` first.
    """

    name: str
    order: tuple[int, int, int]
    flip: bool
    root_map: tuple[tuple[Root, Root], ...]

    def root(self, root: Root) -> Root:
        return dict(self.root_map)[root]

    def params(self, params: StructureParams) -> StructureParams:
        return params.permuted(self.order, self.flip)

    def __matmul__(self, other: WeylElement) -> WeylElement:
        order = tuple(other.order[n - 1] for n in self.order)
        mapping = tuple((r, self.root(other.root(r))) for r in ROOTS)
        return WeylElement(
            f'{self.name}*{other.name}', order, self.flip != other.flip, mapping
        )

    def __pow__(self, n: int) -> WeylElement:
        out = IDENTITY
        for _ in range(n):
            out = self @ out
        return out

    def acts_trivially(self) -> bool:
        return self.order == (1, 2, 3) and not self.flip


def _weyl(name, order, flip, images) -> WeylElement:
    return WeylElement(name, order, flip, tuple(zip(ROOTS, images)))


IDENTITY = _weyl('e', (1, 2, 3), False, (Root.R1, Root.R2, Root.R3))
SIGMA = _weyl('sigma', (3, 1, 2), False, (Root.R2, Root.R3, Root.R1))
P1 = _weyl('p1', (1, 3, 2), True, (Root.R1, Root.R3, Root.R2))
P2 = _weyl('p2', (3, 2, 1), True, (Root.R3, Root.R2, Root.R1))
P3 = _weyl('p3', (2, 1, 3), True, (Root.R2, Root.R1, Root.R3))
WEYL_ELEMENTS = {w.name: w for w in (IDENTITY, SIGMA, P1, P2, P3)}


def weyl_act(element: WeylElement | str, target):
    """Apply a Weyl element to a root, to parameters, or to a solution."""
    if isinstance(element, str):
        try:
            element = WEYL_ELEMENTS[element]
        except KeyError:
            raise InvalidParamsError(
                f'unknown Weyl element {element!r}, expected one of '
                f'{", ".join(WEYL_ELEMENTS)}'
            ) from None
    if isinstance(target, str):
        return element.root(Root.parse(target))
    if isinstance(target, StructureParams):
        return element.params(target)
    if isinstance(target, DTSolution):
        return replace(
            target,
            root=element.root(target.root),
            params=element.params(target.params),
            residual=None,
        )
    raise TypeError(f'cannot apply a Weyl element to {type(target).__name__}')


@dataclass(frozen=True)
class PathSpec:
    name: str
    curve: Callable[[float], StructureParams] = field(compare=False)
    s_min: float
    s_max: float
    n: int

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 2:  # noqa: PLR2004
            raise InvalidParamsError(f'a path needs n >= 2 samples, got {self.n}')
        if not (math.isfinite(self.s_min) and math.isfinite(self.s_max)):
            raise InvalidParamsError('path range must be finite')
        if self.s_min > self.s_max:
            raise InvalidParamsError('path range must satisfy s_min <= s_max')

    def grid(self) -> np.ndarray:
        return np.linspace(self.s_min, self.s_max, int(self.n))

    def at(self, s: float) -> StructureParams:
        return self.curve(float(s))

    def with_grid(
        self, s_min: float | None = None, s_max: float | None = None, n=None
    ) -> PathSpec:
        return replace(
            self,
            s_min=self.s_min if s_min is None else float(s_min),
            s_max=self.s_max if s_max is None else float(s_max),
            n=self.n if n is None else int(n),
        )


_COR4_C = 2 - math.sqrt(3)


def _example4(x: float) -> StructureParams:
    return StructureParams((1.0, 1.0, x), (1.0, 1.0, 1.0))


def _example5(x: float) -> StructureParams:
    return StructureParams((x, 10 * x**3, 1.0), (1.0, 1.0, 1.0))


def _corollary4(s: float) -> StructureParams:
    return StructureParams(
        (1.0, 1 / math.sqrt(2 + math.sqrt(3)), s), (s * s - _COR4_C, 1.0, -1.0)
    )


def _nearly_kahler(_: float) -> StructureParams:
    return StructureParams((1.0, 1.0, 1.0), (1.0, 1.0, 1.0))


Curve = Callable[[float], StructureParams]

BUILTIN_PATHS: dict[str, tuple[Curve, float, float, int]] = {
    'example4': (_example4, 0.5, 1.5, 101),
    'example5': (_example5, 0.2, 1.2, 101),
    'corollary4': (_corollary4, 0.9, 1.1, 21),
    'nearly_kahler': (_nearly_kahler, 0.0, 1.0, 11),
}


def builtin_path(
    name: str,
    s_min: float | None = None,
    s_max: float | None = None,
    n: int | None = None,
) -> PathSpec:
    try:
        curve, lo, hi, count = BUILTIN_PATHS[name]
    except KeyError:
        raise UnknownPathError(
            f'unknown path {name!r}; available paths: '
            f'{", ".join(sorted(BUILTIN_PATHS))}, linear'
        ) from None
    return PathSpec(name, curve, lo, hi, count).with_grid(s_min, s_max, n)


def linear_path(
    start: StructureParams, end: StructureParams, n: int = 11
) -> PathSpec:
    """Straight segment from ``start`` (s = 0) to ``end`` (s = 1)."""
    p, q = start.as_floats(), end.as_floats()

    def curve(s: float) -> StructureParams:
        values = [(1 - s) * x + s * y for x, y in zip(p, q)]
        return StructureParams(tuple(values[:3]), tuple(values[3:]))

    return PathSpec('linear', curve, 0.0, 1.0, n)


@dataclass(frozen=True)
class ScanRow:
    s: float
    root: Root
    mu: float | None
    a_plus: float | None
    a_minus: float | None
    phi2: float | None
    reducible: bool | None
    flagged: str | None = None


@dataclass(frozen=True)
class ScanTable:
    path: str
    mode: Mode
    rows: tuple[ScanRow, ...]

    def for_root(self, root: Root | str) -> tuple[ScanRow, ...]:
        root = Root.parse(root)
        return tuple(r for r in self.rows if r.root is root)

    @property
    def flagged(self) -> tuple[ScanRow, ...]:
        return tuple(r for r in self.rows if r.flagged)


def _row(s: float, root: Root, solutions: Sequence[DTSolution], mu: Number) -> ScanRow:
    if not solutions:
        return ScanRow(s, root, float(mu), None, None, None, None)
    first = solutions[0]
    a = abs(float(first.a))
    return ScanRow(
        s,
        root,
        float(mu),
        a,
        -a if a else 0.0,
        float(first.phi2),
        first.reducible,
    )


def scan(
    path: PathSpec,
    roots: Iterable[Root | str] = ROOTS,
    mode: Mode | str = Mode.DT,
    tol: float | None = None,
) -> ScanTable:
    mode = Mode(mode)
    roots = tuple(Root.parse(r) for r in roots)
    rows: list[ScanRow] = []
    for s in path.grid():
        s = float(s)
        try:
            params = path.at(s)
        except InvalidParamsError as e:
            logger.warning(
                'invalid parameters on path', path=path.name, s=s, error=str(e)
            )
            rows.extend(
                ScanRow(s, r, None, None, None, None, None, str(e)) for r in roots
            )
            continue
        for root in roots:
            solutions = solve(root, params, mode, tol)
            mu = bundles.slope_closed_form(root.weight, params)
            rows.append(_row(s, root, solutions, mu))
    table = ScanTable(path.name, mode, tuple(rows))
    logger.info(
        'scan finished',
        path=path.name,
        mode=mode.value,
        rows=len(rows),
        flagged=len(table.flagged),
    )
    return table


@dataclass(frozen=True)
class WallEvent:
    root: Root
    s: float
    # side of the wall on which solutions exist: 'below' (s < wall) or 'above'
    solutions_side: str
    bracket: tuple[float, float]


def _signed_slope_at(path: PathSpec, root: Root, s: float) -> float | None:
    try:
        return float(signed_slope(root, path.at(s)))
    except InvalidParamsError:
        return None


def wall_cross(
    path: PathSpec,
    root: Root | str,
    mode: Mode | str = Mode.DT,
    tol: float | None = None,
) -> list[WallEvent]:
    """
    Sign changes of eps_i mu(L_(r_i)) along the path, located by bisection to
    ``tol`` (the configured wall tolerance by default).
    """
    root = Root.parse(root)
    mode = Mode(mode)
    tol = get_settings().wall_tolerance if tol is None else tol
    zero_tol = resolve_tolerance()
    events: list[WallEvent] = []
    last: tuple[float, int] | None = None
    for s in path.grid():
        s = float(s)
        value = _signed_slope_at(path, root, s)
        if value is None:
            last = None
            continue
        sign = _sign(value, zero_tol)
        if sign == 0:
            continue
        if last is not None and last[1] != sign:
            lo, hi = last[0], s
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                mid_value = _signed_slope_at(path, root, mid)
                if mid_value is None:
                    break
                if _sign(mid_value, zero_tol) == last[1]:
                    lo = mid
                else:
                    hi = mid
            events.append(
                WallEvent(
                    root,
                    0.5 * (lo + hi),
                    'below' if last[1] < 0 else 'above',
                    (lo, hi),
                )
            )
        last = (s, sign)
    logger.info('wall search', path=path.name, root=root.value, walls=len(events))
    return events
