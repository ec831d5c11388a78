"""
Schema definitions for flag manifold gauge theory runs.

A run fixes one invariant structure on SU(3)/T^2 (``parameters``) and stores
what was computed for it in a single ``FlagDTResult``: the structure
classification, the root-bundle solutions, optional parameter scans and
characteristic classes. The top-level class derives from ``Measurement`` and
``EntryData`` so it can be the root object of an archive entry.
"""

import numpy as np
from nomad.datamodel.data import ArchiveSection, EntryData
from nomad.datamodel.metainfo.annotations import ELNAnnotation, ELNComponentEnum
from nomad.datamodel.metainfo.basesections import Measurement, MeasurementResult
from nomad.metainfo import Quantity, SchemaPackage, Section, SubSection

m_package = SchemaPackage(name='flag_dt_schema')


def _number(label: str, description: str) -> Quantity:
    return Quantity(
        type=np.float64,
        description=description,
        a_eln=ELNAnnotation(
            component=ELNComponentEnum.NumberEditQuantity,
            label=label,
        ),
    )


def _flag(label: str, description: str) -> Quantity:
    return Quantity(
        type=bool,
        description=description,
        a_eln=ELNAnnotation(component=ELNComponentEnum.BoolEditQuantity, label=label),
    )


class FlagStructureParameters(ArchiveSection):
    """
    The six numbers fixing an invariant almost Hermitian structure: the metric
    scales ``A1, A2, A3`` (positive) and the complex-structure signs
    ``eps1, eps2, eps3`` (nonzero reals, usually +-1).
    """

    m_def = Section(label='FlagStructureParameters')

    A1 = _number('A1', 'Metric scale on the first root space.')
    A2 = _number('A2', 'Metric scale on the second root space.')
    A3 = _number('A3', 'Metric scale on the third root space.')
    eps1 = _number('eps1', 'Complex structure sign on the first root space.')
    eps2 = _number('eps2', 'Complex structure sign on the second root space.')
    eps3 = _number('eps3', 'Complex structure sign on the third root space.')
    literals = Quantity(
        type=str,
        shape=[6],
        description='The parameters as given, exact rationals kept as p/q.',
    )
    backend = Quantity(
        type=str,
        description='exact when every literal is rational, float otherwise.',
    )


class FlagClassification(ArchiveSection):
    m_def = Section(label='FlagClassification')

    integrable = _flag('Integrable', 'The Nijenhuis tensor vanishes.')
    symplectic = _flag('Symplectic', 'd omega = 0.')
    kahler = _flag('Kahler', 'Integrable and symplectic.')
    half_flat = _flag('Half-flat', 'd omega^2 = 0 and d Re(Omega) = 0.')
    nearly_kahler = _flag('Nearly Kahler', 'Nearly Kahler after rescaling.')
    kahler_einstein = _flag('Kahler-Einstein', 'Weyl image of the KE metric.')
    calabi_yau = _flag('Calabi-Yau', 'd omega = 0 and d Omega = 0.')
    nearly_kahler_scale = Quantity(
        type=np.float64,
        description='lambda with d omega = 3 lambda Re(Omega), when nearly Kahler.',
    )
    nijenhuis = Quantity(
        type=np.float64,
        shape=[3],
        description='Diagonal n11, n22, n33 of the normalized Nijenhuis tensor.',
    )


class FlagRootSolution(ArchiveSection):
    """
    One invariant connection on a root bundle with its Higgs fields.
    """

    m_def = Section(label='FlagRootSolution')

    root = Quantity(type=str, description='r1, r2 or r3.')
    mode = Quantity(type=str, description='dt or phym.')
    slope = Quantity(type=np.float64, description='Slope of the line bundle.')
    a = Quantity(type=np.float64, description='Connection coefficient a.')
    phi1 = Quantity(type=np.float64, description='Higgs field Phi1 = -phi1 T1.')
    phi2 = Quantity(type=np.float64, description='Higgs field Phi2 = -phi2 T1.')
    reducible = Quantity(type=bool, description='a = 0.')
    phi1_free = Quantity(
        type=bool,
        description='phi1 is not fixed by the equations (reducible DT wall).',
    )
    residual = Quantity(
        type=np.float64,
        description='Largest residual norm found when re-verifying the solution.',
    )
    verified = Quantity(
        type=bool,
        description='The residuals vanish within the configured tolerance.',
    )


class FlagScanCurve(ArchiveSection):
    m_def = Section(label='FlagScanCurve')

    path = Quantity(type=str, description='Name of the parameter path.')
    root = Quantity(type=str)
    s = Quantity(type=np.float64, shape=['*'], description='Path parameter.')
    mu = Quantity(type=np.float64, shape=['*'], description='Slope along the path.')
    a_plus = Quantity(
        type=np.float64,
        shape=['*'],
        description='Nonnegative branch of a; NaN where there is no solution.',
    )
    a_minus = Quantity(type=np.float64, shape=['*'])
    phi2 = Quantity(type=np.float64, shape=['*'])
    walls = Quantity(
        type=np.float64,
        shape=['*'],
        description='Path parameters where the slope changes sign.',
    )


class FlagCharacteristicClasses(ArchiveSection):
    """
    Classes of the SO(3)-bundle of a weight, in integral coordinates of
    H^2 (basis [d beta1], [d beta2]) and H^4 (basis [d beta1]^2, [d beta2]^2).
    """

    m_def = Section(label='FlagCharacteristicClasses')

    weight = Quantity(type=np.int64, shape=[2])
    c1 = Quantity(type=np.float64, shape=[2])
    c2 = Quantity(type=np.float64, shape=[2])
    w2 = Quantity(type=np.int64, shape=[2])
    p1 = Quantity(type=np.float64, shape=[2])


class FlagDTResult(MeasurementResult):
    m_def = Section(label='FlagDTResult')

    classification = SubSection(section_def=FlagClassification)
    solutions = SubSection(section_def=FlagRootSolution, repeats=True)
    scan_curves = SubSection(section_def=FlagScanCurve, repeats=True)
    characteristic_classes = SubSection(
        section_def=FlagCharacteristicClasses, repeats=True
    )
    irreducible_roots = Quantity(
        type=np.int64,
        description='Number of root bundles with an irreducible solution.',
        a_eln=ELNAnnotation(
            component=ELNComponentEnum.NumberEditQuantity,
            label='Irreducible roots',
        ),
    )
    verified = Quantity(
        type=bool,
        description='Every stored solution passed re-verification.',
    )
    max_residual = Quantity(type=np.float64)


class FlagDTAnalysis(Measurement, EntryData):
    """
    Top level class of a flag manifold run entry.
    By inheriting from ``EntryData``, an instance can be assigned as ``archive.data``.
    """

    method = Quantity(
        type=str,
        default='Invariant DT-instantons on the flag manifold',
        description='Descriptive name of the computation.',
    )
    mode = Quantity(
        type=str,
        description='dt for DT-instantons, phym for pseudo Hermitian-Yang-Mills.',
    )
    notes = Quantity(
        type=str,
        a_eln=ELNAnnotation(component=ELNComponentEnum.RichTextEditQuantity),
    )
    parameters: FlagStructureParameters = SubSection(
        section_def=FlagStructureParameters,
        description='The invariant structure of this run.',
    )

    results = Measurement.results.m_copy()
    results.section_def = FlagDTResult

    m_def = Section(
        label='Flag DT analysis',
        a_eln=ELNAnnotation(
            lane_width='800px',
        ),
    )


m_package.__init_metainfo__()
