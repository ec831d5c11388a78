"""
Invariant almost Hermitian and SU(3)-structures on the flag manifold SU(3)/T^2.

A structure is fixed by frame scales ``A = (A1, A2, A3)`` and shape parameters
``eps = (eps1, eps2, eps3)``; its (1,0)-forms are
``a_j = A_j (eta_j + i eps_j theta_j)``. The sign patterns ``eps in {+1, -1}^3``
are the invariant almost complex structures up to conjugation, real ``eps``
are allowed everywhere.
"""

from __future__ import annotations

import itertools
import math
import re
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from numbers import Rational, Real
from typing import NamedTuple

import structlog

from nomad_flag_dt_plugin.config import resolve_tolerance
from nomad_flag_dt_plugin.errors import (
    BackendMismatchError,
    ConsistencyError,
    InvalidParamsError,
    PreconditionError,
)
from nomad_flag_dt_plugin.geometry import extalg, scalars
from nomad_flag_dt_plugin.geometry.extalg import Form, eta, theta
from nomad_flag_dt_plugin.geometry.scalars import Backend

logger = structlog.get_logger(__name__)

Number = int | float | Fraction

_RATIONAL_LITERAL = re.compile(r'^[+-]?\d+(/\d+)?$')

# cyclic complements (j, k) of each slot i
CYCLIC = {1: (2, 3), 2: (3, 1), 3: (1, 2)}


def parse_literal(text: str) -> Number:
    """
    Parse a parameter literal. Integers and ``p/q`` fractions stay exact,
    decimals become floats.
    """
    raw = text.strip()
    try:
        if _RATIONAL_LITERAL.match(raw):
            return Fraction(raw)
        value = float(raw)
    except (ValueError, ZeroDivisionError) as e:
        raise InvalidParamsError(f'malformed parameter literal {text!r}') from e
    if not math.isfinite(value):
        raise InvalidParamsError(f'parameter literal {text!r} is not finite')
    return value


def _check_number(name: str, value: object) -> Number:
    if isinstance(value, bool) or not isinstance(value, Real):
        raise InvalidParamsError(f'{name} must be a real number, got {value!r}')
    if isinstance(value, Rational):
        return Fraction(value)
    value = float(value)
    if not math.isfinite(value):
        raise InvalidParamsError(f'{name} must be finite')
    return value


@dataclass(frozen=True)
class StructureParams:
    A: tuple[Number, Number, Number]
    eps: tuple[Number, Number, Number] = (1, 1, 1)

    def __post_init__(self) -> None:
        if len(self.A) != 3 or len(self.eps) != 3:  # noqa: PLR2004
            raise InvalidParamsError('A and eps must both have three entries')
        A = tuple(_check_number(f'A{j}', a) for j, a in enumerate(self.A, start=1))
        eps = tuple(
            _check_number(f'eps{j}', e) for j, e in enumerate(self.eps, start=1)
        )
        for j, a in enumerate(A, start=1):
            if not a > 0:
                raise InvalidParamsError(f'A{j} must be positive')
        for j, e in enumerate(eps, start=1):
            if e == 0:
                raise InvalidParamsError(f'eps{j} must be nonzero')
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'eps', eps)

    @classmethod
    def from_literals(cls, values: Sequence[str]) -> StructureParams:
        if len(values) != 6:  # noqa: PLR2004
            raise InvalidParamsError(
                f'expected six parameters A1 A2 A3 eps1 eps2 eps3, got {len(values)}'
            )
        parsed = [parse_literal(v) for v in values]
        return cls(tuple(parsed[:3]), tuple(parsed[3:]))

    @property
    def backend(self) -> Backend:
        return scalars.backend_of(*self.A, *self.eps)

    @property
    def is_normalized(self) -> bool:
        return all(e in (1, -1) for e in self.eps)

    @property
    def eps_product(self) -> Number:
        return self.eps[0] * self.eps[1] * self.eps[2]

    def to_float(self) -> StructureParams:
        return StructureParams(
            tuple(float(a) for a in self.A), tuple(float(e) for e in self.eps)
        )

    def as_floats(self) -> tuple[float, ...]:
        return tuple(float(v) for v in (*self.A, *self.eps))

    def permuted(self, order: Sequence[int], flip: bool = False) -> StructureParams:
        """Slot ``n`` of the result takes slot ``order[n]`` (1-based) of ``self``."""
        sign = -1 if flip else 1
        return StructureParams(
            tuple(self.A[i - 1] for i in order),
            tuple(sign * self.eps[i - 1] for i in order),
        )

    def weyl_orbit(self) -> Iterator[StructureParams]:
        """Images under slot permutations, with eps negated for odd permutations."""
        for order in itertools.permutations((1, 2, 3)):
            odd = extalg.permutation_sign(order) < 0
            yield self.permuted(order, flip=odd)

    def __str__(self) -> str:
        A = ', '.join(str(a) for a in self.A)  # noqa: N806
        eps = ', '.join(str(e) for e in self.eps)
        return f'A=({A}) eps=({eps})'


def resolve_backend(params: StructureParams, backend: Backend | None) -> Backend:
    if backend is None:
        return params.backend
    if backend is Backend.EXACT and params.backend is not Backend.EXACT:
        raise BackendMismatchError('float parameters in the exact backend')
    return Backend(backend)


@dataclass(frozen=True)
class InvariantStructure:
    params: StructureParams
    backend: Backend
    alpha: tuple[Form, Form, Form]
    omega: Form
    Omega1: Form
    Omega2: Form
    dvol: Form

    @property
    def Omega(self) -> Form:  # noqa: N802
        return self.Omega1 + self.Omega2 * scalars.imaginary_unit(self.backend)

    @cached_property
    def omega_squared(self) -> Form:
        return extalg.wedge(self.omega, self.omega)

    def alpha_bar(self, j: int) -> Form:
        return self.alpha[j - 1].conj()


def build_structure(
    params: StructureParams, backend: Backend | None = None
) -> InvariantStructure:
    backend = resolve_backend(params, backend)
    alpha = tuple(extalg.alpha(j, params, backend) for j in (1, 2, 3))
    half_i = scalars.imaginary_unit(backend) / 2
    omega = Form.zero(backend)
    for a in alpha:
        omega = omega + extalg.wedge(a, a.conj()) * half_i
    Omega = extalg.wedge_all(alpha, backend)  # noqa: N806
    dvol = extalg.wedge_all((omega, omega, omega), backend) / 6
    return InvariantStructure(
        params=params,
        backend=backend,
        alpha=alpha,
        omega=omega,
        Omega1=Omega.real(),
        Omega2=Omega.imag(),
        dvol=dvol,
    )


def area_form(j: int, backend: Backend = Backend.FLOAT) -> Form:
    """eta_j ^ theta_j"""
    return Form.monomial((eta(j), theta(j)), 1, backend)


class NijenhuisDiagonal(NamedTuple):
    n11: Number
    n22: Number
    n33: Number

    def is_zero(self, tol: float | None = None) -> bool:
        tol = resolve_tolerance(tol)
        return all(abs(float(n)) <= tol for n in self)


def _sign_sum(eps: Sequence[Number]) -> Number:
    e1, e2, e3 = eps
    return e1 + e2 + e3 + e1 * e2 * e3


def nijenhuis_closed_form(params: StructureParams) -> NijenhuisDiagonal:
    """n_ii = A_i eps_i (eps1 + eps2 + eps3 + eps1 eps2 eps3) / (4 A_j A_k)."""
    s = _sign_sum(params.eps)
    values = []
    for i, (j, k) in CYCLIC.items():
        A = params.A  # noqa: N806
        values.append(A[i - 1] * params.eps[i - 1] * s / (4 * A[j - 1] * A[k - 1]))
    return NijenhuisDiagonal(*values)


def nijenhuis_sign_pattern_form(params: StructureParams) -> NijenhuisDiagonal:
    """
    The customary sign-pattern expression
    A_i (1 + e1 e2 + e1 e3 + e2 e3) / (4 A_j A_k e_j e_k).
    Only meaningful for normalized parameters.
    """
    if not params.is_normalized:
        raise PreconditionError('sign-pattern Nijenhuis formula needs eps in {+1, -1}')
    e1, e2, e3 = params.eps
    poly = 1 + e1 * e2 + e1 * e3 + e2 * e3
    A, eps = params.A, params.eps  # noqa: N806
    return NijenhuisDiagonal(
        *(
            A[i - 1] * poly / (4 * A[j - 1] * A[k - 1] * eps[j - 1] * eps[k - 1])
            for i, (j, k) in CYCLIC.items()
        )
    )


def nijenhuis_projection_coefficients(
    structure: InvariantStructure, tol: float | None = None
) -> tuple[scalars.Scalar, ...]:
    """
    Coefficient c_i with (d a_i)^{0,2} = c_i conj(a_j) ^ conj(a_k), (i, j, k) cyclic.
    """
    tol = resolve_tolerance(tol)
    out = []
    for i, (j, k) in CYCLIC.items():
        d_alpha = extalg.exterior_derivative(structure.alpha[i - 1]).semibasic_part()
        proj = extalg.type_project(d_alpha, 0, 2, structure.params)
        ref = extalg.wedge(structure.alpha_bar(j), structure.alpha_bar(k))
        key = tuple(sorted((eta(j), eta(k))))
        c = proj.coefficient(key) / ref.coefficient(key)
        if not (proj - ref * c).is_zero(tol):
            raise ConsistencyError(
                f'(d a{i})^(0,2) is not a multiple of conj(a{j}) ^ conj(a{k})'
            )
        out.append(c)
    return tuple(out)


def nijenhuis(
    params: StructureParams,
    backend: Backend | None = None,
    tol: float | None = None,
) -> NijenhuisDiagonal:
    """
    Diagonal of the Nijenhuis tensor, computed from the closed form and from the
    (0,2)-projection of d a_i. The two must agree.
    """
    tol = resolve_tolerance(tol)
    structure = build_structure(params, backend)
    eps_prod = scalars.coerce(params.eps_product, structure.backend)
    i = scalars.imaginary_unit(structure.backend)
    projected = [
        scalars.to_real(i * eps_prod * c, tol)
        for c in nijenhuis_projection_coefficients(structure, tol)
    ]
    closed = nijenhuis_closed_form(params)
    exact = structure.backend is Backend.EXACT
    for n, (a, b) in enumerate(zip(closed, projected), start=1):
        if (a != b) if exact else abs(float(a) - float(b)) > tol * max(1.0, abs(a)):
            raise ConsistencyError(
                f'Nijenhuis n{n}{n}: closed form {a} != projection route {b}'
            )
    logger.debug('nijenhuis', params=str(params), diagonal=[float(v) for v in closed])
    if structure.backend is Backend.EXACT:
        return NijenhuisDiagonal(*projected)
    return NijenhuisDiagonal(*(float(v) for v in closed))


def gamma_form(structure: InvariantStructure) -> Form:
    """
    The complex 3-form whose real part is d omega:
    (sum eps_j A_j^2) / (4 A1 A2 A3 eps1 eps2 eps3) times the combination of
    a123 and the three forms with one conjugated factor.
    """
    backend = structure.backend
    A = [scalars.coerce(a, backend) for a in structure.params.A]  # noqa: N806
    e1, e2, e3 = (scalars.coerce(e, backend) for e in structure.params.eps)
    p = e1 * e2 * e3
    prefactor = (e1 * A[0] ** 2 + e2 * A[1] ** 2 + e3 * A[2] ** 2) / (
        4 * A[0] * A[1] * A[2] * p
    )
    a1, a2, a3 = structure.alpha
    b1, b2, b3 = (a.conj() for a in structure.alpha)
    combination = (
        extalg.wedge_all((a1, a2, a3), backend) * (p + e1 + e2 + e3)
        + extalg.wedge_all((b1, a2, a3), backend) * (p + e1 - e2 - e3)
        + extalg.wedge_all((a1, b2, a3), backend) * (p - e1 + e2 - e3)
        + extalg.wedge_all((a1, a2, b3), backend) * (p - e1 - e2 + e3)
    )
    return combination * prefactor


def _proportionality(
    f: Form, g: Form, tol: float
) -> scalars.Scalar | None:
    """The scalar c with f = c g, or ``None`` when there is none."""
    if not g:
        return scalars.zero(f.backend) if f.is_zero(tol) else None
    key, ref = max(g, key=lambda kv: scalars.magnitude(kv[1]))
    c = f.coefficient(key) / ref
    return c if (f - g * c).is_zero(tol) else None


@lru_cache(maxsize=2)
def gamma_calibration(backend: Backend = Backend.EXACT) -> scalars.Scalar:
    """Constant c with d omega = c Re(gamma), fixed at the nearly Kahler point."""
    anchor = build_structure(StructureParams((1, 1, 1), (1, 1, 1)), backend)
    d_omega = extalg.exterior_derivative(anchor.omega)
    if not d_omega.allclose(anchor.Omega1 * 3):
        raise ConsistencyError('d omega != 3 Omega1 at the nearly Kahler point')
    c = _proportionality(d_omega, gamma_form(anchor).real(), resolve_tolerance())
    if c is None:
        raise ConsistencyError('d omega is not a multiple of Re(gamma)')
    return c


class OmegaDecomposition(NamedTuple):
    d_omega: Form
    gamma: Form
    calibration: scalars.Scalar


def d_omega_decompose(
    structure: InvariantStructure, tol: float | None = None
) -> OmegaDecomposition:
    tol = resolve_tolerance(tol)
    d_omega = extalg.exterior_derivative(structure.omega)
    gamma = gamma_form(structure)
    c = scalars.coerce(gamma_calibration(Backend.EXACT), structure.backend)
    if not d_omega.allclose(gamma.real() * c, tol):
        raise ConsistencyError(
            f'd omega != {c} Re(gamma) for {structure.params}'
        )
    return OmegaDecomposition(d_omega, gamma, c)


def symplectic_defect(params: StructureParams) -> Number:
    """eps1 A1^2 + eps2 A2^2 + eps3 A3^2, the coefficient of d omega on psi."""
    return sum(e * a * a for a, e in zip(params.A, params.eps))


@dataclass(frozen=True)
class ClassificationFlags:
    integrable: bool
    symplectic: bool
    kahler: bool
    half_flat: bool
    nearly_kahler_up_to_scale: bool
    kahler_einstein: bool
    calabi_yau: bool = False
    nearly_kahler_scale: float | None = None


def nearly_kahler_scale(
    structure: InvariantStructure, tol: float | None = None
) -> float | None:
    """lambda with d omega = 3 lambda Omega1 and d Omega2 = -2 lambda omega^2."""
    tol = resolve_tolerance(tol)
    d_omega = extalg.exterior_derivative(structure.omega)
    c = _proportionality(d_omega, structure.Omega1, tol)
    if c is None or scalars.is_zero(c, tol):
        return None
    lam = c / 3
    d_Omega2 = extalg.exterior_derivative(structure.Omega2)  # noqa: N806
    if not (d_Omega2 + structure.omega_squared * (2 * lam)).is_zero(tol):
        return None
    return float(scalars.to_real(lam, tol))


def _is_kahler_einstein(params: StructureParams, tol: float) -> bool:
    for image in params.weyl_orbit():
        if image.eps != (1, 1, -1):
            continue
        a1, a2, a3 = (float(a) ** 2 for a in image.A)
        if math.isclose(a3, 2 * a1, abs_tol=tol) and math.isclose(
            a3, 2 * a2, abs_tol=tol
        ):
            return True
    return False


def classify(
    params: StructureParams,
    backend: Backend | None = None,
    tol: float | None = None,
) -> ClassificationFlags:
    tol = resolve_tolerance(tol)
    structure = build_structure(params, backend)
    integrable = nijenhuis(params, structure.backend, tol).is_zero(tol)

    d_omega = d_omega_decompose(structure, tol).d_omega
    symplectic = d_omega.is_zero(tol)
    if symplectic != (abs(float(symplectic_defect(params))) <= tol):
        raise ConsistencyError('d omega = 0 disagrees with the symplectic condition')

    d_omega_sq = extalg.exterior_derivative(structure.omega_squared)
    d_Omega1 = extalg.exterior_derivative(structure.Omega1)  # noqa: N806
    d_Omega2 = extalg.exterior_derivative(structure.Omega2)  # noqa: N806
    half_flat = d_omega_sq.is_zero(tol) and d_Omega1.is_zero(tol)
    scale = nearly_kahler_scale(structure, tol)
    flags = ClassificationFlags(
        integrable=integrable,
        symplectic=symplectic,
        kahler=integrable and symplectic,
        half_flat=half_flat,
        nearly_kahler_up_to_scale=scale is not None,
        kahler_einstein=integrable
        and symplectic
        and _is_kahler_einstein(params, tol),
        calabi_yau=symplectic and d_Omega1.is_zero(tol) and d_Omega2.is_zero(tol),
        nearly_kahler_scale=scale,
    )
    if flags.nearly_kahler_up_to_scale and not flags.half_flat:
        raise ConsistencyError('nearly Kahler structure that is not half-flat')
    logger.debug('classified structure', params=str(params), flags=flags)
    return flags


class HalfFlatCertificate(NamedTuple):
    d_Omega1: Form
    d_Omega2: Form
    expected_d_Omega2: Form


def half_flat_certificate(
    params: StructureParams, backend: Backend | None = None
) -> HalfFlatCertificate:
    """
    For eps = (1, 1, 1): d Omega1 = 0 and
    d Omega2 = -4 A1 A2 A3 (w1 w2 + w1 w3 + w2 w3) with w_j = eta_j ^ theta_j.
    """
    if tuple(params.eps) != (1, 1, 1):
        raise PreconditionError('the half-flat certificate needs eps = (1, 1, 1)')
    structure = build_structure(params, backend)
    b = structure.backend
    w = [area_form(j, b) for j in (1, 2, 3)]
    pairs = extalg.wedge(w[0], w[1]) + extalg.wedge(w[0], w[2]) + extalg.wedge(
        w[1], w[2]
    )
    A1, A2, A3 = (scalars.coerce(a, b) for a in params.A)  # noqa: N806
    expected = pairs * (-4 * A1 * A2 * A3)
    cert = HalfFlatCertificate(
        extalg.exterior_derivative(structure.Omega1),
        extalg.exterior_derivative(structure.Omega2),
        expected,
    )
    if not cert.d_Omega1.is_zero() or not cert.d_Omega2.allclose(expected):
        raise ConsistencyError(f'half-flat identities fail for {params}')
    return cert
