"""
``flag-dt``: classification, solving, scanning and verification from the shell.

Exit codes: 0 on success, 1 when a consistency check fails, 2 on invalid input.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click
import structlog

from nomad_flag_dt_plugin.config import EngineSettings, settings_override
from nomad_flag_dt_plugin.errors import (
    BackendMismatchError,
    ConsistencyError,
    InvalidParamsError,
    PreconditionError,
    UnknownPathError,
    UnknownRootError,
)
from nomad_flag_dt_plugin.geometry import bundles, checks, flaggeom, solver
from nomad_flag_dt_plugin.geometry.bundles import Root, Weight
from nomad_flag_dt_plugin.geometry.flaggeom import StructureParams
from nomad_flag_dt_plugin.reports import (
    CharClassModel,
    ClassificationReport,
    ParamsModel,
    RootModel,
    SolutionModel,
    SolveReport,
    VerifyReport,
    WallModel,
    WallReport,
    report_schemas,
    scalar,
    scan_csv,
    scan_svg,
)

logger = structlog.get_logger(__name__)

INPUT_ERRORS = (
    InvalidParamsError,
    UnknownRootError,
    UnknownPathError,
    PreconditionError,
    BackendMismatchError,
)


def _configure_logging(verbose: int) -> None:
    level = logging.WARNING - 10 * min(verbose, 2)
    structlog.configure(
        wrapper_class=structlog.make_filtering_bound_logger(level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
    )


class FlagDTGroup(click.Group):
    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except INPUT_ERRORS as e:
            raise click.UsageError(str(e), ctx) from e
        except ConsistencyError as e:
            logger.error('consistency check failed', error=str(e))
            raise click.ClickException(str(e)) from e


params_option = click.option(
    '--params',
    nargs=6,
    type=str,
    required=True,
    metavar='A1 A2 A3 EPS1 EPS2 EPS3',
    help='Structure parameters as decimals or exact rationals such as 3/2.',
)
tolerance_option = click.option(
    '--tolerance',
    type=float,
    default=None,
    help=(
        'Absolute tolerance for float zero tests (default 1e-10). Decimals '
        'truncated to n places need about 10^-(n - 1), e.g. 1e-7 for 1.41421356.'
    ),
)
mode_option = click.option(
    '--mode',
    type=click.Choice([m.value for m in solver.Mode]),
    default=solver.Mode.DT.value,
    show_default=True,
)
root_option = click.option(
    '--root',
    'roots',
    multiple=True,
    help='Restrict to these roots (r1, r2, r3); repeatable.',
)


def _settings(tolerance: float | None) -> EngineSettings:
    return settings_override(tolerance=tolerance)


def _roots(labels: tuple[str, ...]) -> tuple[Root, ...]:
    return tuple(Root.parse(label) for label in labels) or tuple(Root)


def _write(text: str, path: Path | None) -> None:
    if path is None:
        click.echo(text, nl=not text.endswith('\n'))
    else:
        path.write_text(text, encoding='utf-8')


@click.group(cls=FlagDTGroup)
@click.option('-v', '--verbose', count=True, help='Log to stderr (-vv for debug).')
def cli(verbose: int) -> None:
    """Invariant gauge theory on the flag manifold SU(3)/T^2."""
    _configure_logging(verbose)


@cli.command()
@params_option
@tolerance_option
def classify(params: tuple[str, ...], tolerance: float | None) -> None:
    """Structure flags and the Nijenhuis diagonal of one invariant structure."""
    tol = _settings(tolerance).tolerance
    structure = StructureParams.from_literals(params)
    flags = flaggeom.classify(structure, tol=tol)
    nijenhuis = flaggeom.nijenhuis(structure, tol=tol)
    click.echo(ClassificationReport.build(structure, flags, nijenhuis).to_json())


@cli.command()
@params_option
@mode_option
@root_option
@tolerance_option
def solve(
    params: tuple[str, ...], mode: str, roots: tuple[str, ...], tolerance: float | None
) -> None:
    """Invariant DT-instantons or pHYM connections on the root bundles."""
    tol = _settings(tolerance).tolerance
    structure = StructureParams.from_literals(params)
    mode = solver.Mode(mode)
    if mode is solver.Mode.DT and structure.eps_product != 1:
        raise PreconditionError(
            'dt mode needs a basic Omega (eps1 eps2 eps3 = 1), got '
            f'eps1 eps2 eps3 = {structure.eps_product}'
        )
    summary = solver.existence_summary(structure, tol)
    slopes = {entry.root: entry.slope for entry in summary.roots}
    entries = []
    for root in _roots(roots):
        solutions = solver.solve(root, structure, mode, tol)
        entries.append(
            RootModel(
                root=root.value,
                slope=scalar(slopes[root]),
                solutions=[SolutionModel.of(s) for s in solutions],
            )
        )
    report = SolveReport(
        params=ParamsModel.of(structure), mode=mode.value, roots=entries
    )
    logger.info('solve', mode=mode.value, irreducible=report.irreducible_roots)
    click.echo(report.to_json())


def _path(
    name: str,
    s_range: tuple[float, float] | None,
    n: int | None,
    start: tuple[str, ...] | None,
    end: tuple[str, ...] | None,
) -> solver.PathSpec:
    if name == 'linear':
        if not start or not end:
            raise InvalidParamsError('the linear path needs --from and --to')
        path = solver.linear_path(
            StructureParams.from_literals(start), StructureParams.from_literals(end)
        )
    else:
        path = solver.builtin_path(name)
    lo, hi = s_range if s_range else (None, None)
    return path.with_grid(lo, hi, n)


@cli.command()
@click.option('--path', 'path_name', required=True, help='Built-in path or linear.')
@click.option('--range', 's_range', nargs=2, type=float, default=None)
@click.option('--n', type=int, default=None, help='Number of samples.')
@click.option('--from', 'start', nargs=6, type=str, default=None)
@click.option('--to', 'end', nargs=6, type=str, default=None)
@mode_option
@root_option
@click.option(
    '-o',
    '--output',
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help='CSV file (default: stdout).',
)
@click.option('--svg', type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option(
    '--walls',
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help='Write the located walls as JSON.',
)
@tolerance_option
def scan(  # noqa: PLR0913
    path_name: str,
    s_range: tuple[float, float] | None,
    n: int | None,
    start: tuple[str, ...] | None,
    end: tuple[str, ...] | None,
    mode: str,
    roots: tuple[str, ...],
    output: Path | None,
    svg: Path | None,
    walls: Path | None,
    tolerance: float | None,
) -> None:
    """Solve along a parameter path and locate the walls."""
    settings = _settings(tolerance)
    path = _path(path_name, s_range, n, start, end)
    selected = _roots(roots)
    table = solver.scan(path, selected, mode, settings.tolerance)
    _write(scan_csv(table, settings.scan_float_format), output)
    if svg is not None:
        svg.write_text(scan_svg(table), encoding='utf-8')
    events = [
        event
        for root in selected
        for event in solver.wall_cross(path, root, mode, settings.wall_tolerance)
    ]
    for event in events:
        click.echo(
            f'wall {event.root.value} at s = {event.s:.10f} '
            f'(solutions {event.solutions_side})',
            err=True,
        )
    if walls is not None:
        report = WallReport(
            path=path.name,
            mode=solver.Mode(mode).value,
            walls=[WallModel.of(e) for e in events],
        )
        walls.write_text(report.to_json(), encoding='utf-8')


@cli.command()
@click.option('--only', multiple=True, help='Run only these checks; repeatable.')
@click.option('--json', 'as_json', is_flag=True, help='Print the report as JSON.')
@tolerance_option
def verify(only: tuple[str, ...], as_json: bool, tolerance: float | None) -> None:
    """Run the internal-consistency suite."""
    tol = _settings(tolerance).tolerance
    results = checks.run_checks(only or None, tol)
    report = VerifyReport.of(results)
    if as_json:
        click.echo(report.to_json())
    else:
        for r in results:
            status = 'PASS' if r.passed else 'FAIL'
            click.echo(f'{status} {r.name} [{r.route}] {r.detail}')
    failed = [r for r in results if not r.passed]
    if failed:
        raise click.ClickException(f'check {failed[0].name} failed')


@cli.command()
@click.option('--weight', nargs=2, type=int, required=True, metavar='K L')
def charclass(weight: tuple[int, int]) -> None:
    """Characteristic classes of the SO(3)-bundle of a weight."""
    report = bundles.char_classes(Weight(*weight))
    click.echo(CharClassModel.of(report).to_json())


@cli.command()
def schema() -> None:
    """JSON schemas of the reports."""
    click.echo(json.dumps(report_schemas(), sort_keys=True, indent=2))
