"""
Invariant SO(3)-connections and Higgs fields on the homogeneous bundles P_beta.

The gauge Lie algebra has basis T1, T2, T3 with [T1, T2] = 2 T3,
[T2, T3] = 2 T1 and [T3, T1] = 2 T2. T1 generates the image of the isotropy
torus, so Higgs fields ``Phi = -phi T1`` are the only invariant ones.

On P_beta the canonical connection is ``beta (x) T1 / 2``. When beta is the root
r_i it is deformed by

    a ((cos psi eta_i + sin psi theta_i) T2 + (sin psi eta_i - cos psi theta_i) T3)

where ``psi`` is the phase of the constant gauge transformation exp(t T1),
``psi = 2t``. The real slice ``psi = 0`` is what the solver works with.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass, fields, replace
from typing import Any

import structlog

from nomad_flag_dt_plugin.config import resolve_tolerance
from nomad_flag_dt_plugin.errors import (
    BackendMismatchError,
    ConsistencyError,
    NotSemibasicError,
    PreconditionError,
)
from nomad_flag_dt_plugin.geometry import extalg, flaggeom, scalars
from nomad_flag_dt_plugin.geometry.bundles import Root, Weight
from nomad_flag_dt_plugin.geometry.extalg import Form, eta, theta
from nomad_flag_dt_plugin.geometry.flaggeom import (
    CYCLIC,
    InvariantStructure,
    Number,
    StructureParams,
)
from nomad_flag_dt_plugin.geometry.scalars import Backend

logger = structlog.get_logger(__name__)

# [T_a, T_b] = sum_c STRUCTURE_CONSTANTS[(a, b)][c] T_c, a and b 0-based
STRUCTURE_CONSTANTS: dict[tuple[int, int], tuple[int, int, int]] = {
    (0, 1): (0, 0, 2),
    (1, 0): (0, 0, -2),
    (1, 2): (2, 0, 0),
    (2, 1): (-2, 0, 0),
    (2, 0): (0, 2, 0),
    (0, 2): (0, -2, 0),
}


@dataclass(frozen=True)
class LieValuedForm:
    """F1 (x) T1 + F2 (x) T2 + F3 (x) T3"""

    components: tuple[Form, Form, Form]

    @classmethod
    def zero(cls, backend: Backend = Backend.FLOAT) -> LieValuedForm:
        return cls((Form.zero(backend),) * 3)

    @classmethod
    def along(cls, axis: int, form: Form) -> LieValuedForm:
        """``form (x) T_axis`` for axis in 1..3."""
        parts = [Form.zero(form.backend)] * 3
        parts[axis - 1] = form
        return cls(tuple(parts))

    @classmethod
    def constant(
        cls, coords: Iterable[object], backend: Backend = Backend.FLOAT
    ) -> LieValuedForm:
        return cls(tuple(Form.scalar(c, backend) for c in coords))

    @property
    def backend(self) -> Backend:
        return self.components[0].backend

    def __getitem__(self, axis: int) -> Form:
        return self.components[axis - 1]

    def map(self, fn: Callable[[Form], Form]) -> LieValuedForm:
        return LieValuedForm(tuple(fn(f) for f in self.components))

    def __add__(self, other: LieValuedForm) -> LieValuedForm:
        return LieValuedForm(
            tuple(f + g for f, g in zip(self.components, other.components))
        )

    def __sub__(self, other: LieValuedForm) -> LieValuedForm:
        return self + other * -1

    def __mul__(self, value: object) -> LieValuedForm:
        return self.map(lambda f: f * value)

    __rmul__ = __mul__

    def __truediv__(self, value: object) -> LieValuedForm:
        return self.map(lambda f: f / value)

    def wedge(self, form: Form) -> LieValuedForm:
        return self.map(lambda f: extalg.wedge(f, form))

    def conj(self) -> LieValuedForm:
        return self.map(Form.conj)

    def is_semibasic(self) -> bool:
        return all(f.is_semibasic() for f in self.components)

    def is_zero(self, tol: float | None = None) -> bool:
        return all(f.is_zero(tol) for f in self.components)

    def max_abs(self) -> float:
        return max(f.max_abs() for f in self.components)

    def norm(self, frame: extalg.FrameScales) -> float:
        return math.sqrt(sum(extalg.form_norm(f, frame) ** 2 for f in self.components))


def bracket_wedge(a: LieValuedForm, b: LieValuedForm) -> LieValuedForm:
    """[A ^ B]: wedge on the form parts, bracket on the Lie parts."""
    out = [Form.zero(a.backend)] * 3
    for (i, j), coords in STRUCTURE_CONSTANTS.items():
        product = extalg.wedge(a.components[i], b.components[j])
        if not product:
            continue
        for c, k in enumerate(coords):
            if k:
                out[c] = out[c] + product * k
    return LieValuedForm(tuple(out))


def exterior_derivative(f: LieValuedForm) -> LieValuedForm:
    return f.map(extalg.exterior_derivative)


def hodge_star(f: LieValuedForm, frame: extalg.FrameScales) -> LieValuedForm:
    return f.map(lambda g: extalg.hodge_star(g, frame))


def type_project(
    f: LieValuedForm, p: int, q: int, frame: extalg.FrameScales
) -> LieValuedForm:
    return f.map(lambda g: extalg.type_project(g, p, q, frame))


def _fold_phase(a: Number, phase: float) -> tuple[Number, float]:
    phase = math.remainder(phase, 2 * math.pi)
    if math.isclose(phase, 0.0, abs_tol=1e-12):
        return a, 0.0
    if math.isclose(abs(phase), math.pi, abs_tol=1e-12):
        return -a, 0.0
    return a, phase


@dataclass(frozen=True)
class InvariantConnection:
    weight: Weight
    a: Number = 0
    phase: float = 0.0

    def __post_init__(self) -> None:
        a, phase = _fold_phase(self.a, float(self.phase))
        if not self.weight.is_root and (a != 0 or phase != 0.0):
            logger.warning(
                'forcing a = 0 on a non-root weight', weight=str(self.weight), a=a
            )
            a, phase = 0, 0.0
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'phase', phase)

    @classmethod
    def on_root(
        cls, root: Root | str, a: Number = 0, phase: float = 0.0
    ) -> InvariantConnection:
        return cls(Root.parse(root).weight, a, phase)

    @property
    def root(self) -> Root | None:
        return self.weight.root

    @property
    def irreducible(self) -> bool:
        return self.a != 0

    def form(self, backend: Backend = Backend.FLOAT) -> LieValuedForm:
        t1 = self.weight.form(backend) / 2
        if self.root is None or self.a == 0:
            return LieValuedForm.along(1, t1)
        i = self.root.slot
        c, s = (1, 0) if self.phase == 0.0 else (
            math.cos(self.phase),
            math.sin(self.phase),
        )
        a = scalars.coerce(self.a, backend)
        t2 = Form({(eta(i),): c, (theta(i),): s}, backend) * a
        t3 = Form({(eta(i),): s, (theta(i),): -c}, backend) * a
        return LieValuedForm((t1, t2, t3))


@dataclass(frozen=True)
class HiggsPair:
    """Phi_1 = -phi1 T1, Phi_2 = -phi2 T1."""

    phi1: Number = 0
    phi2: Number = 0

    def __post_init__(self) -> None:
        for name in ('phi1', 'phi2'):
            value = getattr(self, name)
            if not math.isfinite(float(value)):
                raise PreconditionError(f'{name} must be finite')

    def lie_fields(
        self, backend: Backend = Backend.FLOAT
    ) -> tuple[LieValuedForm, LieValuedForm]:
        return tuple(
            LieValuedForm.constant((-phi, 0, 0), backend)
            for phi in (self.phi1, self.phi2)
        )


def resolve_backend(
    params: StructureParams | None, *values: object, backend: Backend | None = None
) -> Backend:
    inputs: list[Any] = list(values)
    if params is not None:
        inputs.extend((*params.A, *params.eps))
    natural = scalars.backend_of(*inputs)
    if backend is None:
        return natural
    if backend is Backend.EXACT and natural is not Backend.EXACT:
        raise BackendMismatchError('float inputs in the exact backend')
    return Backend(backend)


def connection_backend(
    conn: InvariantConnection,
    params: StructureParams | None,
    *values: object,
    backend: Backend | None = None,
) -> Backend:
    if conn.phase != 0.0:
        # the rotated connection has float entries
        if backend is Backend.EXACT:
            raise BackendMismatchError('a rotated connection is not exact')
        return Backend.FLOAT
    return resolve_backend(params, conn.a, *values, backend=backend)


def curvature(
    conn: InvariantConnection,
    params: StructureParams | None = None,
    backend: Backend | None = None,
) -> LieValuedForm:
    """F = dA + [A ^ A] / 2, checked to be semibasic."""
    backend = connection_backend(conn, params, backend=backend)
    A = conn.form(backend)  # noqa: N806
    F = exterior_derivative(A) + bracket_wedge(A, A) / 2  # noqa: N806
    if not F.is_semibasic():
        raise NotSemibasicError(
            f'curvature of the connection on {conn.weight} has vertical terms'
        )
    return F


def covariant_derivative(
    conn: InvariantConnection, section: LieValuedForm
) -> LieValuedForm:
    """d_A s = d s + [A ^ s]"""
    A = conn.form(section.backend)  # noqa: N806
    return exterior_derivative(section) + bracket_wedge(A, section)


def covariant_derivative_higgs(
    conn: InvariantConnection,
    phi: Number,
    params: StructureParams | None = None,
    backend: Backend | None = None,
) -> LieValuedForm:
    if conn.root is None:
        raise PreconditionError(
            f'Higgs fields are only considered on root bundles, got {conn.weight}'
        )
    backend = connection_backend(conn, params, phi, backend=backend)
    field = LieValuedForm.constant((-phi, 0, 0), backend)
    return covariant_derivative(conn, field)


def lambda_contraction(
    f: LieValuedForm, structure: InvariantStructure
) -> LieValuedForm:
    """Lambda F = *(F ^ omega^2 / 2)"""
    return hodge_star(f.wedge(structure.omega_squared / 2), structure.params)


@dataclass(frozen=True)
class ResidualReport:
    omega1_norm: float | None = None
    moment_norm: float | None = None
    omega2_norm: float | None = None
    f02_norm: float | None = None
    lambdaF_norm: float | None = None  # noqa: N815
    dbar_u_norm: float | None = None
    lambda_u_norm: float | None = None
    bianchi: float | None = None

    def norms(self) -> dict[str, float]:
        return {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if getattr(self, f.name) is not None and f.name != 'bianchi'
        }

    def max_norm(self) -> float:
        return max(self.norms().values(), default=0.0)

    def vanishes(self, tol: float | None = None) -> bool:
        return self.max_norm() <= resolve_tolerance(tol)


class DTSystem:
    """The connection, Higgs fields and structure forms of one residual evaluation."""

    def __init__(
        self,
        conn: InvariantConnection,
        higgs: HiggsPair,
        params: StructureParams,
        backend: Backend | None = None,
        tol: float | None = None,
    ) -> None:
        self.tol = resolve_tolerance(tol)
        self.backend = backend = connection_backend(
            conn, params, higgs.phi1, higgs.phi2, backend=backend
        )
        self.conn = conn
        self.higgs = higgs
        self.params = params
        self.structure = flaggeom.build_structure(params, backend)
        self.F = curvature(conn, params, backend)
        self.Phi1, self.Phi2 = higgs.lie_fields(backend)
        if conn.root is None:
            self.dPhi1 = self.dPhi2 = LieValuedForm.zero(backend)
        else:
            self.dPhi1 = covariant_derivative(conn, self.Phi1)
            self.dPhi2 = covariant_derivative(conn, self.Phi2)
        self.bianchi = covariant_derivative(conn, self.F).max_abs()
        if self.bianchi > self.tol:
            raise ConsistencyError(
                f'Bianchi identity fails for {conn.weight}: |d_A F| = {self.bianchi}'
            )

    def norm(self, f: LieValuedForm) -> float:
        return f.norm(self.params)

    def star(self, f: LieValuedForm) -> LieValuedForm:
        return hodge_star(f, self.params)

    def half_omega_squared(self) -> Form:
        return self.structure.omega_squared / 2

    def omega1_equation(self) -> LieValuedForm:
        """*d_A Phi1 - F ^ Omega1 + d_A Phi2 ^ omega^2 / 2"""
        return (
            self.star(self.dPhi1)
            - self.F.wedge(self.structure.Omega1)
            + self.dPhi2.wedge(self.half_omega_squared())
        )

    def moment_equation(self) -> LieValuedForm:
        """F ^ omega^2 / 2 - [Phi1, Phi2] omega^3 / 3!"""
        return self.F.wedge(self.half_omega_squared()) - bracket_wedge(
            self.Phi1, self.Phi2
        ).wedge(self.structure.dvol)

    def omega2_equation(self) -> LieValuedForm:
        """*d_A Phi2 - F ^ Omega2 - d_A Phi1 ^ omega^2 / 2"""
        return (
            self.star(self.dPhi2)
            - self.F.wedge(self.structure.Omega2)
            - self.dPhi1.wedge(self.half_omega_squared())
        )

    def f02(self) -> LieValuedForm:
        return type_project(self.F, 0, 2, self.params)

    def lambda_f(self) -> LieValuedForm:
        return lambda_contraction(self.F, self.structure)


def dt_residual(
    conn: InvariantConnection,
    higgs: HiggsPair,
    params: StructureParams,
    *,
    pulled_back: bool = False,
    backend: Backend | None = None,
    tol: float | None = None,
) -> ResidualReport:
    """
    Residuals of the Higgs-pair form of the DT-instanton equations.

    Omega is basic only when eps1 eps2 eps3 = 1; otherwise the equations are
    evaluated upstairs on SU(3) when ``pulled_back`` is set.
    """
    if params.eps_product != 1 and not pulled_back:
        raise PreconditionError(
            'the Higgs-pair equations need a basic Omega (eps1 eps2 eps3 = 1); '
            'pass pulled_back=True to evaluate them on SU(3)'
        )
    system = DTSystem(conn, higgs, params, backend, tol)
    report = ResidualReport(
        omega1_norm=system.norm(system.omega1_equation()),
        moment_norm=system.norm(system.moment_equation()),
        omega2_norm=system.norm(system.omega2_equation()),
        bianchi=system.bianchi,
    )
    logger.debug(
        'dt residual',
        weight=str(conn.weight),
        a=float(conn.a),
        phi2=float(higgs.phi2),
        max_norm=report.max_norm(),
    )
    return report


def phym_residual(
    conn: InvariantConnection,
    params: StructureParams,
    backend: Backend | None = None,
    tol: float | None = None,
) -> ResidualReport:
    system = DTSystem(conn, HiggsPair(), params, backend, tol)
    return ResidualReport(
        f02_norm=system.norm(system.f02()),
        lambdaF_norm=system.norm(system.lambda_f()),
        bianchi=system.bianchi,
    )


def higgs_u(system: DTSystem) -> LieValuedForm:
    """u = (i/4)(Phi1 + i Phi2) conj(Omega)"""
    i = scalars.imaginary_unit(system.backend)
    phi = system.Phi1 + system.Phi2 * i
    return phi.wedge(system.structure.Omega.conj()) * (i / 4)


def dbar_adjoint(u: LieValuedForm, system: DTSystem) -> LieValuedForm:
    """dbar_A^* u = -* del_A * u for a (0,3)-form u."""
    star_u = system.star(u)
    d_star_u = covariant_derivative(system.conn, star_u)
    if not d_star_u.is_semibasic():
        raise ConsistencyError('d_A(*u) has vertical terms; Omega is not basic')
    return system.star(type_project(d_star_u, 1, 3, system.params)) * -1


def u_residual(
    conn: InvariantConnection,
    higgs: HiggsPair,
    params: StructureParams,
    backend: Backend | None = None,
    tol: float | None = None,
) -> ResidualReport:
    """
    Residuals of F^(0,2) = dbar_A^* u and Lambda F = *[u ^ conj(u)] for
    u = (i/4)(Phi1 + i Phi2) conj(Omega).
    """
    if tuple(params.eps) != (1, 1, 1):
        raise PreconditionError('the u-formulation needs eps = (1, 1, 1)')
    system = DTSystem(conn, higgs, params, backend, tol)
    u = higgs_u(system)
    dbar_u = system.f02() - dbar_adjoint(u, system)
    lambda_u = system.lambda_f() - system.star(bracket_wedge(u, u.conj()))
    return ResidualReport(
        dbar_u_norm=system.norm(dbar_u),
        lambda_u_norm=system.norm(lambda_u),
        bianchi=system.bianchi,
    )


def gauge_rotate(
    conn: InvariantConnection, higgs: HiggsPair, t: float
) -> tuple[InvariantConnection, HiggsPair]:
    """Constant gauge transformation by exp(t T1); Higgs fields along T1 are fixed."""
    if conn.root is None:
        raise PreconditionError('gauge_rotate acts on root bundles only')
    return replace(conn, phase=conn.phase + 2 * t), higgs


def curvature_closed_form(
    root: Root | str, a: Number, params: StructureParams
) -> LieValuedForm:
    """
    The curvature of the real-slice connection on P_(r_i), written in the
    (1,0)-forms a_i with (i, j, k) cyclic.
    """
    root = Root.parse(root)
    i = root.slot
    j, k = CYCLIC[i]
    backend = resolve_backend(params, a)
    st = flaggeom.build_structure(params, backend)
    A = [scalars.coerce(x, backend) for x in params.A]  # noqa: N806
    e = [scalars.coerce(x, backend) for x in params.eps]
    a = scalars.coerce(a, backend)
    im = scalars.imaginary_unit(backend)
    ai, aj, ak = (st.alpha[n - 1] for n in (i, j, k))
    Ai, Aj, Ak = A[i - 1], A[j - 1], A[k - 1]  # noqa: N806
    ei, ej, ek = e[i - 1], e[j - 1], e[k - 1]

    def herm(x: Form) -> Form:
        return extalg.wedge(x, x.conj())

    f1 = (
        herm(ai) * (im * (1 - a * a) / (ei * Ai * Ai))
        - herm(aj) * (im / (2 * ej * Aj * Aj))
        - herm(ak) * (im / (2 * ek * Ak * Ak))
    )
    denom = 2 * ej * ek * Aj * Ak
    holo = extalg.wedge(aj, ak)
    mixed = extalg.wedge(aj, ak.conj())
    f2 = holo.imag() * (-a * (ej + ek) / denom) + mixed.imag() * (
        a * (ej - ek) / denom
    )
    f3 = holo.real() * (a * (1 + ej * ek) / denom) + mixed.real() * (
        a * (ej * ek - 1) / denom
    )
    return LieValuedForm((f1, f2, f3))
