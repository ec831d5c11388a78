from typing import (
    TYPE_CHECKING,
)

if TYPE_CHECKING:
    from nomad.datamodel.datamodel import (
        EntryArchive,
    )
    from structlog.stdlib import (
        BoundLogger,
    )

from nomad.config import config
from nomad.normalizing import Normalizer

from nomad_flag_dt_plugin.config import entry_point_tolerance
from nomad_flag_dt_plugin.errors import FlagDTError
from nomad_flag_dt_plugin.geometry import gauge
from nomad_flag_dt_plugin.geometry.flaggeom import StructureParams
from nomad_flag_dt_plugin.geometry.gauge import HiggsPair, InvariantConnection
from nomad_flag_dt_plugin.schema_packages.schema_package import (
    FlagDTAnalysis,
    FlagRootSolution,
    FlagStructureParameters,
)

configuration = config.get_plugin_entry_point(
    'nomad_flag_dt_plugin.normalizers:normalizer_entry_point'
)


def _params(section: FlagStructureParameters) -> StructureParams:
    if section.literals is not None and len(section.literals) == 6:  # noqa: PLR2004
        return StructureParams.from_literals(list(section.literals)).to_float()
    return StructureParams(
        (float(section.A1), float(section.A2), float(section.A3)),
        (float(section.eps1), float(section.eps2), float(section.eps3)),
    )


def residual(
    solution: FlagRootSolution, params: StructureParams, tol: float
) -> float:
    """Largest residual norm of a stored solution, recomputed from scratch."""
    conn = InvariantConnection.on_root(solution.root, float(solution.a or 0.0))
    if solution.mode == 'phym':
        report = gauge.phym_residual(conn, params, tol=tol)
    else:
        higgs = HiggsPair(float(solution.phi1 or 0.0), float(solution.phi2 or 0.0))
        report = gauge.dt_residual(
            conn, higgs, params, pulled_back=params.eps_product != 1, tol=tol
        )
    return report.max_norm()


class FlagDTNormalizer(Normalizer):
    def normalize(self, archive: 'EntryArchive', logger: 'BoundLogger') -> None:
        super().normalize(archive, logger)
        data = archive.data
        if not isinstance(data, FlagDTAnalysis) or data.parameters is None:
            return
        tol = entry_point_tolerance(getattr(configuration, 'tolerance', None))
        logger.info('FlagDTNormalizer.normalize', tolerance=tol)
        try:
            params = _params(data.parameters)
        except (FlagDTError, TypeError) as e:
            logger.warning('Cannot read structure parameters', error=str(e))
            return

        for result in data.results or []:
            if not result.solutions:
                continue
            worst = 0.0
            ok = True
            for solution in result.solutions:
                try:
                    norm = residual(solution, params, tol)
                except FlagDTError as e:
                    logger.warning(
                        'Re-verification failed', root=solution.root, error=str(e)
                    )
                    solution.verified = False
                    ok = False
                    continue
                solution.residual = float(norm)
                solution.verified = norm <= tol
                ok = ok and solution.verified
                worst = max(worst, norm)
            result.verified = ok
            result.max_residual = worst
