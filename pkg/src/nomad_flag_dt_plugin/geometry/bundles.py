"""
Homogeneous line and SO(3)-bundles over the flag manifold.

A weight ``(k, l)`` stands for the left-invariant 1-form ``k beta1 + l beta2``;
its differential is the curvature of the canonical connection on the line
bundle ``L_(k,l)``. Cohomology classes are stored by integral coordinates in the
bases ``{[d beta1], [d beta2]}`` and ``{[d beta1]^2, [d beta2]^2}``, with the
relation ``[d beta1][d beta2] = -[d beta1]^2 - [d beta2]^2`` in degree four.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import NamedTuple

import structlog
import sympy

from nomad_flag_dt_plugin.config import resolve_tolerance
from nomad_flag_dt_plugin.errors import (
    ConsistencyError,
    InexactTargetError,
    UnknownRootError,
)
from nomad_flag_dt_plugin.geometry import extalg, flaggeom, scalars
from nomad_flag_dt_plugin.geometry.extalg import Coframe, Form
from nomad_flag_dt_plugin.geometry.flaggeom import Number, StructureParams
from nomad_flag_dt_plugin.geometry.scalars import Backend

logger = structlog.get_logger(__name__)

H2_UNIT = '1/(2*pi)'
H4_UNIT = '1/(4*pi^2)'


@dataclass(frozen=True)
class Weight:
    k: int
    l: int  # noqa: E741

    def form(self, backend: Backend = Backend.FLOAT) -> Form:
        return Form({(Coframe.BETA1,): self.k, (Coframe.BETA2,): self.l}, backend)

    def curvature(self, backend: Backend = Backend.FLOAT) -> Form:
        return extalg.exterior_derivative(self.form(backend))

    @property
    def root(self) -> Root | None:
        return _ROOTS_BY_WEIGHT.get((self.k, self.l))

    @property
    def is_root(self) -> bool:
        return self.root is not None

    def __str__(self) -> str:
        return f'({self.k}, {self.l})'


class Root(str, Enum):
    R1 = 'r1'
    R2 = 'r2'
    R3 = 'r3'

    @classmethod
    def parse(cls, label: object) -> Root:
        if isinstance(label, Root):
            return label
        try:
            return cls(str(label).strip().lower())
        except ValueError:
            raise UnknownRootError(
                f'unknown root {label!r}, expected one of r1, r2, r3'
            ) from None

    @property
    def slot(self) -> int:
        """Index i of the root space spanned by eta_i, theta_i."""
        return int(self.value[1])

    @property
    def weight(self) -> Weight:
        return _ROOT_WEIGHTS[self]


_ROOT_WEIGHTS = {
    Root.R1: Weight(1, 2),
    Root.R2: Weight(-2, -1),
    Root.R3: Weight(1, -1),
}
_ROOTS_BY_WEIGHT = {(w.k, w.l): r for r, w in _ROOT_WEIGHTS.items()}


def slope_closed_form(w: Weight, params: StructureParams) -> Number:
    """(2/3)(-l/(eps1 A1^2) + k/(eps2 A2^2) - (k - l)/(eps3 A3^2))"""
    x1, x2, x3 = (e * a * a for a, e in zip(params.A, params.eps))
    return Fraction(2, 3) * (-w.l / x1 + w.k / x2 - (w.k - w.l) / x3)


def curvature_closed_form(
    w: Weight, params: StructureParams, backend: Backend | None = None
) -> Form:
    """
    d beta in the unitary coframe:
    i l/x1 a1^a1bar - i k/x2 a2^a2bar + i (k - l)/x3 a3^a3bar, x_j = eps_j A_j^2.

    Agrees with ``w.curvature()`` for every admissible structure.
    """
    structure = flaggeom.build_structure(params, backend)
    backend = structure.backend
    i = scalars.imaginary_unit(backend)
    out = Form.zero(backend)
    for j, c in enumerate((w.l, -w.k, w.k - w.l), start=1):
        a, e = params.A[j - 1], params.eps[j - 1]
        x = scalars.coerce(e * a * a, backend)
        coefficient = i * scalars.coerce(c, backend) / x
        area = extalg.wedge(structure.alpha[j - 1], structure.alpha_bar(j))
        out = out + area * coefficient
    return out


def slope_from_forms(
    w: Weight, params: StructureParams, backend: Backend | None = None
) -> scalars.Scalar:
    """-(d beta ^ omega^2) / omega^3 as a ratio of top-form coefficients."""
    structure = flaggeom.build_structure(params, backend)
    d_beta = w.curvature(structure.backend)
    numerator = extalg.top_coefficient(extalg.wedge(d_beta, structure.omega_squared))
    volume = extalg.top_coefficient(
        extalg.wedge(structure.omega_squared, structure.omega)
    )
    return -numerator / volume


def slope(
    w: Weight,
    params: StructureParams,
    backend: Backend | None = None,
    tol: float | None = None,
) -> Number:
    tol = resolve_tolerance(tol)
    closed = slope_closed_form(w, params)
    ratio = slope_from_forms(w, params, backend)
    if isinstance(ratio, scalars.GaussianRational):
        if scalars.to_fraction(ratio) != closed:
            raise ConsistencyError(f'slope of {w}: {closed} != {ratio}')
        return closed
    ratio = scalars.to_real(ratio, tol)
    if abs(ratio - float(closed)) > tol * max(1.0, abs(ratio)):
        raise ConsistencyError(f'slope of {w}: closed form {closed} != ratio {ratio}')
    return float(closed)


class LineConnectionReport(NamedTuple):
    weight: Weight
    is_pseudo_holomorphic: bool
    is_degree0_phym: bool


def degree0_condition(w: Weight, params: StructureParams, tol: float) -> bool:
    x1, x2, x3 = (e * a * a for a, e in zip(params.A, params.eps))
    lhs = w.k * x1 * (x2 - x3)
    rhs = w.l * x2 * (x1 - x3)
    return abs(float(lhs - rhs)) <= tol


def phym_line_connection(
    w: Weight,
    params: StructureParams,
    backend: Backend | None = None,
    tol: float | None = None,
) -> LineConnectionReport:
    tol = resolve_tolerance(tol)
    structure = flaggeom.build_structure(params, backend)
    d_beta = w.curvature(structure.backend)
    f02 = extalg.type_project(d_beta, 0, 2, params)
    trace = extalg.wedge(d_beta, structure.omega_squared)
    degree0 = degree0_condition(w, params, tol)
    if degree0 != trace.is_zero(tol):
        raise ConsistencyError(
            f'degree-zero condition for {w} disagrees with d beta ^ omega^2'
        )
    return LineConnectionReport(w, f02.is_zero(tol), degree0)


SPANNING_WEIGHTS = (Weight(1, 0), Weight(0, 1))


def degree0_for_all_weights(
    params: StructureParams, tol: float | None = None
) -> bool:
    """Whether every line bundle carries a degree-zero pHYM connection."""
    tol = resolve_tolerance(tol)
    scanned = all(
        phym_line_connection(w, params, tol=tol).is_degree0_phym
        for w in SPANNING_WEIGHTS
    )
    x = [float(e * a * a) for a, e in zip(params.A, params.eps)]
    equal = all(abs(x[0] - xi) <= tol for xi in x[1:])
    if scanned != equal:
        raise ConsistencyError('spanning-weight scan disagrees with eps_i A_i^2 equal')
    return scanned


@dataclass(frozen=True)
class CohomologyClass2:
    x: Fraction
    y: Fraction
    unit: str = H2_UNIT

    @property
    def coordinates(self) -> tuple[Fraction, Fraction]:
        return self.x, self.y

    def squared(self) -> CohomologyClass4:
        return h4_reduce(self.x * self.x, self.y * self.y, 2 * self.x * self.y)


@dataclass(frozen=True)
class CohomologyClass4:
    p: Fraction
    q: Fraction
    unit: str = H4_UNIT

    @property
    def coordinates(self) -> tuple[Fraction, Fraction]:
        return self.p, self.q

    def __add__(self, other: CohomologyClass4) -> CohomologyClass4:
        return CohomologyClass4(self.p + other.p, self.q + other.q, self.unit)

    def __mul__(self, c: Number) -> CohomologyClass4:
        return CohomologyClass4(self.p * c, self.q * c, self.unit)

    __rmul__ = __mul__

    def __sub__(self, other: CohomologyClass4) -> CohomologyClass4:
        return self + other * -1


def h4_reduce(p: Number, q: Number, m: Number) -> CohomologyClass4:
    """Coordinates of p[db1]^2 + q[db2]^2 + m[db1][db2] in the reduced basis."""
    return CohomologyClass4(Fraction(p) - Fraction(m), Fraction(q) - Fraction(m))


def h4_target(p: Number, q: Number, m: Number) -> Form:
    ex = Backend.EXACT
    db1 = Weight(1, 0).curvature(ex)
    db2 = Weight(0, 1).curvature(ex)
    return (
        extalg.wedge(db1, db1) * p
        + extalg.wedge(db2, db2) * q
        + extalg.wedge(db1, db2) * m
    )


def _as_sympy(z: scalars.Scalar) -> sympy.Rational:
    f = scalars.to_fraction(z)
    return sympy.Rational(f.numerator, f.denominator)


def invariant_three_forms() -> list[Form]:
    """
    Basis of T^2-invariant semibasic 3-forms: those whose differential has no
    beta component.
    """
    monomials = list(itertools.combinations(extalg.SEMIBASIC, 3))
    derivatives = [
        extalg.exterior_derivative(Form.monomial(m, 1, Backend.EXACT))
        for m in monomials
    ]
    vertical_keys = sorted(
        {k for d in derivatives for k in d.terms if extalg.VERTICAL.intersection(k)}
    )
    matrix = sympy.Matrix(
        [[_as_sympy(d.coefficient(k)) for d in derivatives] for k in vertical_keys]
    )
    basis = []
    for vector in matrix.nullspace():
        terms = {
            m: Fraction(int(c.p), int(c.q)) for m, c in zip(monomials, vector) if c
        }
        basis.append(Form(terms, Backend.EXACT))
    return basis


class H4Certificate(NamedTuple):
    target: Form
    psi: Form
    coefficients: dict[tuple[int, ...], Fraction]


def verify_h4_relation(p: Number = 1, q: Number = 1, m: Number = 1) -> H4Certificate:
    """
    Exhibit an invariant 3-form psi with d psi = p db1^2 + q db2^2 + m db1 db2.

    Raises ``InexactTargetError`` when the target is not exact in the invariant
    complex.
    """
    target = h4_target(p, q, m)
    basis = invariant_three_forms()
    images = [extalg.exterior_derivative(b) for b in basis]
    keys = sorted(set(target.terms).union(*(d.terms for d in images)))
    lhs = sympy.Matrix([[_as_sympy(d.coefficient(k)) for d in images] for k in keys])
    rhs = sympy.Matrix([_as_sympy(target.coefficient(k)) for k in keys])
    try:
        solution, params = lhs.gauss_jordan_solve(rhs)
    except ValueError as e:
        raise InexactTargetError(
            f'p={p}, q={q}, m={m} is not exact among invariant forms'
        ) from e
    solution = solution.subs({t: 0 for t in params})
    psi = Form.zero(Backend.EXACT)
    for b, c in zip(basis, solution):
        psi = psi + b * Fraction(int(c.p), int(c.q))
    if extalg.exterior_derivative(psi) != target:
        raise ConsistencyError('H4 certificate does not reproduce its target')
    coefficients = {
        k: scalars.to_fraction(v) for k, v in psi.terms.items()
    }
    logger.debug('h4 certificate', target=(p, q, m), terms=len(coefficients))
    return H4Certificate(target, psi, coefficients)


@dataclass(frozen=True)
class CharClassReport:
    weight: Weight
    c1: CohomologyClass2
    c2: CohomologyClass4
    w2: tuple[int, int]
    p1: CohomologyClass4
    units: dict[str, str] = field(
        default_factory=lambda: {'H2': H2_UNIT, 'H4': H4_UNIT}
    )


def chern_polynomial(w: Weight) -> sympy.Poly:
    """
    det(1 + t (i / 2 pi) F) for the split connection beta (x) diag(i, 0), with
    [d beta1], [d beta2] as commuting symbols and 2 pi absorbed into the units.
    """
    t, b1, b2 = sympy.symbols('t b1 b2')
    curvature = sympy.diag(sympy.I * (w.k * b1 + w.l * b2), 0)
    total = (sympy.eye(2) + t * sympy.I * curvature).det()
    return sympy.Poly(sympy.expand(total), t, b1, b2)


def char_classes(w: Weight) -> CharClassReport:
    t, b1, b2 = sympy.symbols('t b1 b2')
    poly = chern_polynomial(w).as_expr()
    c1_expr = sympy.expand(poly.coeff(t, 1))
    c2_expr = sympy.expand(poly.coeff(t, 2))

    def coeff(expr: sympy.Expr, monomial: sympy.Expr) -> Fraction:
        c = sympy.Poly(expr, b1, b2).coeff_monomial(monomial)
        return Fraction(int(c.p), int(c.q))

    c1 = CohomologyClass2(coeff(c1_expr, b1), coeff(c1_expr, b2))
    c2 = h4_reduce(
        coeff(c2_expr, b1**2), coeff(c2_expr, b2**2), coeff(c2_expr, b1 * b2)
    )
    p1 = c1.squared() - c2 * 4
    w2 = (int(c1.x) % 2, int(c1.y) % 2)
    expected = (w.k * (w.k - 2 * w.l), w.l * (w.l - 2 * w.k))
    if p1.coordinates != expected:
        raise ConsistencyError(f'p1 of {w} is {p1.coordinates}, expected {expected}')
    return CharClassReport(weight=w, c1=c1, c2=c2, w2=w2, p1=p1)
