"""
Machine-readable reports written by the ``flag-dt`` commands.

JSON reports are pydantic models dumped with sorted keys; every report carries
``schema_version``. Scan tables go to CSV with a fixed header and, optionally,
to an SVG figure of ``a`` against the path parameter.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict
from fractions import Fraction
from typing import Literal

import matplotlib
from matplotlib.figure import Figure
from pydantic import BaseModel, ConfigDict, Field

from nomad_flag_dt_plugin.geometry.bundles import CharClassReport, Root
from nomad_flag_dt_plugin.geometry.checks import CheckResult
from nomad_flag_dt_plugin.geometry.flaggeom import (
    ClassificationFlags,
    NijenhuisDiagonal,
    StructureParams,
)
from nomad_flag_dt_plugin.geometry.solver import DTSolution, ScanTable, WallEvent

SCHEMA_VERSION = '1.0'
CSV_HEADER = ('s', 'root', 'mu', 'a_plus', 'a_minus', 'phi2', 'reducible')
ROOT_COLORS = {Root.R1: '#1f77b4', Root.R2: '#d62728', Root.R3: '#2ca02c'}

Scalar = int | float | str


def scalar(value) -> Scalar:
    """Exact rationals become ints or ``'p/q'`` strings, everything else a float."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return value.numerator
        return f'{value.numerator}/{value.denominator}'
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    return float(value)


class Report(BaseModel):
    model_config = ConfigDict(frozen=True)

    schema_version: str = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode='json'), sort_keys=True, indent=2)


class ParamsModel(BaseModel):
    A: list[Scalar]
    eps: list[Scalar]
    backend: Literal['exact', 'float']

    @classmethod
    def of(cls, params: StructureParams) -> ParamsModel:
        return cls(
            A=[scalar(a) for a in params.A],
            eps=[scalar(e) for e in params.eps],
            backend=params.backend.value,
        )


class FlagsModel(BaseModel):
    integrable: bool
    symplectic: bool
    kahler: bool
    half_flat: bool
    nearly_kahler_up_to_scale: bool
    kahler_einstein: bool
    calabi_yau: bool
    nearly_kahler_scale: float | None = None


class ClassificationReport(Report):
    kind: Literal['classification'] = 'classification'
    params: ParamsModel
    flags: FlagsModel
    nijenhuis: list[Scalar] = Field(description='Diagonal n11, n22, n33.')

    @classmethod
    def build(
        cls,
        params: StructureParams,
        flags: ClassificationFlags,
        nijenhuis: NijenhuisDiagonal,
    ) -> ClassificationReport:
        return cls(
            params=ParamsModel.of(params),
            flags=FlagsModel(**asdict(flags)),
            nijenhuis=[scalar(n) for n in nijenhuis],
        )


class SolutionModel(BaseModel):
    root: str
    mode: str
    a: Scalar
    phi1: Scalar
    phi2: Scalar
    reducible: bool
    phi1_free: bool
    residual: dict[str, float]

    @classmethod
    def of(cls, solution: DTSolution) -> SolutionModel:
        return cls(
            root=solution.root.value,
            mode=solution.mode.value,
            a=scalar(solution.a),
            phi1=scalar(solution.phi1),
            phi2=scalar(solution.phi2),
            reducible=solution.reducible,
            phi1_free=solution.phi1_free,
            residual=solution.residual.norms() if solution.residual else {},
        )


class RootModel(BaseModel):
    root: str
    slope: Scalar
    solutions: list[SolutionModel]


class SolveReport(Report):
    kind: Literal['solve'] = 'solve'
    params: ParamsModel
    mode: str
    roots: list[RootModel]

    @property
    def irreducible_roots(self) -> list[str]:
        return [
            r.root for r in self.roots if any(not s.reducible for s in r.solutions)
        ]


class CharClassModel(Report):
    kind: Literal['charclass'] = 'charclass'
    weight: tuple[int, int]
    c1: tuple[Scalar, Scalar]
    c2: tuple[Scalar, Scalar]
    w2: tuple[int, int]
    p1: tuple[Scalar, Scalar]
    units: dict[str, str]

    @classmethod
    def of(cls, report: CharClassReport) -> CharClassModel:
        def pair(values):
            return tuple(scalar(v) for v in values)

        return cls(
            weight=(report.weight.k, report.weight.l),
            c1=pair(report.c1.coordinates),
            c2=pair(report.c2.coordinates),
            w2=report.w2,
            p1=pair(report.p1.coordinates),
            units=report.units,
        )


class CheckModel(BaseModel):
    name: str
    route: str
    passed: bool
    detail: str


class VerifyReport(Report):
    kind: Literal['verify'] = 'verify'
    checks: list[CheckModel]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @classmethod
    def of(cls, results: list[CheckResult]) -> VerifyReport:
        return cls(checks=[CheckModel(**asdict(r)) for r in results])


class WallModel(BaseModel):
    root: str
    s: float
    solutions_side: str
    bracket: tuple[float, float]

    @classmethod
    def of(cls, event: WallEvent) -> WallModel:
        return cls(
            root=event.root.value,
            s=event.s,
            solutions_side=event.solutions_side,
            bracket=event.bracket,
        )


class WallReport(Report):
    kind: Literal['walls'] = 'walls'
    path: str
    mode: str
    walls: list[WallModel]


REPORT_MODELS: dict[str, type[Report]] = {
    'classification': ClassificationReport,
    'solve': SolveReport,
    'charclass': CharClassModel,
    'verify': VerifyReport,
    'walls': WallReport,
}


def report_schemas() -> dict[str, dict]:
    return {name: model.model_json_schema() for name, model in REPORT_MODELS.items()}


def _cell(value, float_format: str) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return format(value, float_format)
    return str(value)


def scan_csv(table: ScanTable, float_format: str = '.12g') -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(CSV_HEADER)
    for row in table.rows:
        writer.writerow(
            _cell(v, float_format)
            for v in (
                row.s,
                row.root.value,
                row.mu,
                row.a_plus,
                row.a_minus,
                row.phi2,
                row.reducible,
            )
        )
    return buffer.getvalue()


def scan_svg(table: ScanTable) -> str:
    """a against s per root, +a solid and -a dashed."""
    fig = Figure(figsize=(6.4, 4.0))
    ax = fig.subplots()
    for root, color in ROOT_COLORS.items():
        rows = table.for_root(root)
        if not rows:
            continue
        s = [r.s for r in rows]
        a = [math.nan if r.a_plus is None else r.a_plus for r in rows]
        ax.plot(s, a, color=color, label=root.value)
        ax.plot(s, [-v for v in a], color=color, linestyle='--')
    ax.axhline(0.0, color='0.6', linewidth=0.8)
    ax.set_xlabel('s')
    ax.set_ylabel('a')
    ax.set_title(f'{table.path} ({table.mode.value})')
    ax.legend(loc='best')
    buffer = io.StringIO()
    with matplotlib.rc_context({'svg.hashsalt': 'flag-dt', 'svg.fonttype': 'none'}):
        fig.savefig(buffer, format='svg', metadata={'Date': None})
    return buffer.getvalue()
