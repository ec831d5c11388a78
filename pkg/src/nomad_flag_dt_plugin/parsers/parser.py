"""
Parser for flag manifold run files (``*.flagdt``, ``*.flagdt.txt``).

A run file is a tab-separated ``key<TAB>value`` header, a ``----`` delimiter
line and an optional block of free-text notes::

    A1      1
    A2      1
    A3      3/5
    eps1    1
    eps2    1
    eps3    1
    mode    dt
    roots   r1 r2 r3
    path    example4
    range   0.5 1.5
    n       21
    weight  1 -1
    ----
    notes ...
"""

from __future__ import annotations

import math
import re
import unicodedata
from typing import TYPE_CHECKING

import numpy as np
from nomad.config import config
from nomad.parsing.parser import MatchingParser

if TYPE_CHECKING:
    from nomad.datamodel.datamodel import EntryArchive
    from structlog.stdlib import BoundLogger

from nomad_flag_dt_plugin.config import entry_point_tolerance
from nomad_flag_dt_plugin.errors import FlagDTError, InvalidParamsError
from nomad_flag_dt_plugin.geometry import bundles, flaggeom, solver
from nomad_flag_dt_plugin.geometry.bundles import Root, Weight
from nomad_flag_dt_plugin.geometry.flaggeom import StructureParams
from nomad_flag_dt_plugin.schema_packages.schema_package import (
    FlagCharacteristicClasses,
    FlagClassification,
    FlagDTAnalysis,
    FlagDTResult,
    FlagRootSolution,
    FlagScanCurve,
    FlagStructureParameters,
)

configuration = config.get_plugin_entry_point(
    'nomad_flag_dt_plugin.parsers:parser_entry_point'
)

FILE_RE = r'.*\.flagdt(?:\.txt)?$'
PARAM_KEYS = ('A1', 'A2', 'A3', 'eps1', 'eps2', 'eps3')


def _canon_key(s: str) -> str:
    """
    Canonicalize a header key: NFKC, no whitespace or underscores, lower case,
    Greek epsilon spelled out.
    """
    s = unicodedata.normalize('NFKC', s).replace('\u00a0', ' ').strip().lower()
    s = s.replace('\u03b5', 'eps').replace('epsilon', 'eps')
    return re.sub(r'[\s_]+', '', s)


_HEADER_MAP: dict[str, str] = {
    'a1': 'A1',
    'a2': 'A2',
    'a3': 'A3',
    'eps1': 'eps1',
    'eps2': 'eps2',
    'eps3': 'eps3',
    'mode': 'mode',
    'root': 'roots',
    'roots': 'roots',
    'path': 'path',
    'range': 'range',
    'srange': 'range',
    'n': 'n',
    'samples': 'n',
    'weight': 'weight',
}


def _split_run_file(
    lines: list[str], logger: BoundLogger
) -> tuple[dict[str, str], str]:
    """Header rows before the ``----`` delimiter and the notes after it."""
    end = len(lines)
    for idx, line in enumerate(lines):
        if re.match(r'^-{4,}\s*$', line.strip()):
            end = idx
            break
    header: dict[str, str] = {}
    for line in lines[:end]:
        if not line.strip() or line.lstrip().startswith('#'):
            continue
        parts = line.rstrip('\n').split('\t', 1)
        if len(parts) < 2:  # noqa: PLR2004
            parts = line.split(None, 1)
        if len(parts) < 2:  # noqa: PLR2004
            logger.debug('Header row without value', row=line)
            continue
        key = _canon_key(parts[0])
        if key not in _HEADER_MAP:
            logger.debug('Unknown header key', key=parts[0].strip())
            continue
        header[_HEADER_MAP[key]] = parts[1].strip()
    notes = '\n'.join(lines[end + 1 :]).strip()
    return header, notes


def _parameters_section(
    params: StructureParams, literals: list[str]
) -> FlagStructureParameters:
    section = FlagStructureParameters(literals=literals, backend=params.backend.value)
    for key, value in zip(PARAM_KEYS, (*params.A, *params.eps)):
        setattr(section, key, float(value))
    return section


def _classification_section(params: StructureParams, tol: float) -> FlagClassification:
    flags = flaggeom.classify(params, tol=tol)
    nijenhuis = flaggeom.nijenhuis(params, tol=tol)
    section = FlagClassification(
        integrable=flags.integrable,
        symplectic=flags.symplectic,
        kahler=flags.kahler,
        half_flat=flags.half_flat,
        nearly_kahler=flags.nearly_kahler_up_to_scale,
        kahler_einstein=flags.kahler_einstein,
        calabi_yau=flags.calabi_yau,
        nijenhuis=[float(n) for n in nijenhuis],
    )
    if flags.nearly_kahler_scale is not None:
        section.nearly_kahler_scale = flags.nearly_kahler_scale
    return section


def _solution_section(solution: solver.DTSolution) -> FlagRootSolution:
    section = FlagRootSolution(
        root=solution.root.value,
        mode=solution.mode.value,
        slope=float(solution.slope),
        a=float(solution.a),
        phi1=float(solution.phi1),
        phi2=float(solution.phi2),
        reducible=solution.reducible,
        phi1_free=solution.phi1_free,
    )
    if solution.residual is not None:
        section.residual = float(solution.residual.max_norm())
        section.verified = True
    return section


def _nan(value: float | None) -> float:
    return math.nan if value is None else value


def _scan_sections(
    header: dict[str, str],
    roots: tuple[Root, ...],
    mode: solver.Mode,
    tol: float,
) -> list[FlagScanCurve]:
    s_range = header.get('range', '').split()
    if s_range and len(s_range) != 2:  # noqa: PLR2004
        raise InvalidParamsError(f'range needs two values, got {header["range"]!r}')
    try:
        lo, hi = (float(v) for v in s_range) if s_range else (None, None)
        n = int(header['n']) if 'n' in header else None
    except ValueError as e:
        raise InvalidParamsError(f'malformed scan header: {e}') from e
    path = solver.builtin_path(header['path'], lo, hi, n)
    table = solver.scan(path, roots, mode, tol)
    curves = []
    for root in roots:
        rows = table.for_root(root)
        walls = solver.wall_cross(path, root, mode)
        curve = FlagScanCurve(
            path=path.name,
            root=root.value,
            s=np.array([r.s for r in rows]),
            mu=np.array([_nan(r.mu) for r in rows]),
            phi2=np.array([_nan(r.phi2) for r in rows]),
            walls=np.array([w.s for w in walls]),
        )
        # Keyword arguments starting with ``a_`` are read as annotations by the
        # metainfo constructor, so these quantities are assigned afterwards.
        curve.a_plus = np.array([_nan(r.a_plus) for r in rows])
        curve.a_minus = np.array([_nan(r.a_minus) for r in rows])
        curves.append(curve)
    return curves


def _charclass_section(text: str) -> FlagCharacteristicClasses:
    try:
        k, l = (int(v) for v in text.split())  # noqa: E741
    except ValueError as e:
        raise InvalidParamsError(f'weight needs two integers, got {text!r}') from e
    report = bundles.char_classes(Weight(k, l))
    return FlagCharacteristicClasses(
        weight=[k, l],
        c1=[float(v) for v in report.c1.coordinates],
        c2=[float(v) for v in report.c2.coordinates],
        w2=list(report.w2),
        p1=[float(v) for v in report.p1.coordinates],
    )


def build_analysis(
    header: dict[str, str], notes: str, tol: float, logger: BoundLogger
) -> FlagDTAnalysis:
    """Evaluate a parsed run-file header into an archive section."""
    missing = [k for k in PARAM_KEYS if k not in header]
    if missing:
        raise InvalidParamsError(f'missing parameters: {", ".join(missing)}')
    literals = [header[k] for k in PARAM_KEYS]
    params = StructureParams.from_literals(literals)
    try:
        mode = solver.Mode(header.get('mode', 'dt').lower())
    except ValueError as e:
        raise InvalidParamsError(f'unknown mode {header["mode"]!r}') from e
    roots = tuple(Root.parse(r) for r in header.get('roots', '').split()) or tuple(
        Root
    )

    result = FlagDTResult()
    result.classification = _classification_section(params, tol)
    solutions: list[FlagRootSolution] = []
    if mode is solver.Mode.DT and params.eps_product != 1:
        logger.warning(
            'dt mode needs eps1 eps2 eps3 = 1, no solutions computed',
            params=str(params),
        )
    else:
        for root in roots:
            solutions.extend(
                _solution_section(s) for s in solver.solve(root, params, mode, tol)
            )
    result.solutions = solutions
    result.irreducible_roots = len(
        {s.root for s in solutions if not s.reducible}
    )
    if 'path' in header:
        result.scan_curves = _scan_sections(header, roots, mode, tol)
    if 'weight' in header:
        result.characteristic_classes = [_charclass_section(header['weight'])]

    analysis = FlagDTAnalysis(mode=mode.value, notes=notes or None)
    analysis.parameters = _parameters_section(params, literals)
    analysis.results = [result]
    return analysis


class FlagDTParser(MatchingParser):
    """
    Parser for flag manifold run files.
    Classifies the structure, solves on the requested roots and, when the header
    names a path or a weight, adds a scan and characteristic classes.
    """

    def __init__(self) -> None:
        super().__init__(name='flag_dt_parser')
        self._mainfile_name_re = re.compile(FILE_RE)

    def parse(
        self,
        mainfile: str,
        archive: EntryArchive,
        logger: BoundLogger,
        child_archives: dict[str, EntryArchive] | None = None,
    ) -> None:
        logger.debug('Parsing flag DT run file', file=mainfile)

        try:
            with archive.m_context.raw_file(mainfile, mode='rb') as f:
                raw_bytes = f.read()
        except Exception as e_ctx:
            logger.debug(
                'raw_file failed, falling back to open()',
                file=mainfile,
                error=str(e_ctx),
            )
            try:
                with open(mainfile, mode='rb') as f:
                    raw_bytes = f.read()
            except OSError as e:
                logger.error('Failed to open file', file=mainfile, error=str(e))
                return

        try:
            text = raw_bytes.decode('utf-8', errors='strict')
        except UnicodeDecodeError:
            text = raw_bytes.decode('cp1252', errors='replace')

        lines = text.splitlines()
        if not lines:
            logger.warning('Empty run file', file=mainfile)
            return

        header, notes = _split_run_file(lines, logger)
        tol = entry_point_tolerance(getattr(configuration, 'tolerance', None))
        try:
            archive.data = build_analysis(header, notes, tol, logger)
        except FlagDTError as e:
            logger.error('Could not evaluate run file', file=mainfile, error=str(e))
