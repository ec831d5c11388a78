"""
Exterior algebra over the left-invariant coframe of SU(3).

Forms are sparse maps from strictly increasing index tuples to scalars of a
single backend (see ``scalars``). The exterior derivative of a form with
constant coefficients is the graded Leibniz extension of a structure table,
and the table itself is derived from the Maurer-Cartan equation
``dmu = -mu ^ mu`` of the matrix

    [[ i b1,          th3 + i et3,  -th2 + i et2 ],
     [ -th3 + i et3,  i b2,          th1 + i et1 ],
     [ th2 + i et2,   -th1 + i et1,  i b3        ]],   b3 = -(b1 + b2).

Frame-dependent operations (Hodge star, type projection, norms) act on
semibasic forms only, i.e. forms without ``beta`` factors, and take the frame
scales ``A`` and ``eps`` from any object exposing them as triples. The oriented
orthonormal coframe is ``(Re a1, Im a1, Re a2, Im a2, Re a3, Im a3)`` with
``a_j = A_j (eta_j + i eps_j theta_j)``.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator, Mapping
from enum import IntEnum
from functools import lru_cache, reduce
from types import MappingProxyType
from typing import Protocol

import structlog

from nomad_flag_dt_plugin.config import resolve_tolerance
from nomad_flag_dt_plugin.errors import (
    BackendMismatchError,
    ConsistencyError,
    InvalidParamsError,
    NotSemibasicError,
)
from nomad_flag_dt_plugin.geometry import scalars
from nomad_flag_dt_plugin.geometry.scalars import Backend, Scalar

logger = structlog.get_logger(__name__)


class Coframe(IntEnum):
    """Basis 1-forms. The order is part of the storage format and must not change."""

    BETA1 = 0
    BETA2 = 1
    ETA1 = 2
    THETA1 = 3
    ETA2 = 4
    THETA2 = 5
    ETA3 = 6
    THETA3 = 7

    @property
    def symbol(self) -> str:
        return self.name.lower()


VERTICAL = frozenset({Coframe.BETA1, Coframe.BETA2})
SEMIBASIC = tuple(range(Coframe.ETA1, Coframe.THETA3 + 1))
TOP_KEY = SEMIBASIC


def eta(j: int) -> Coframe:
    return Coframe(2 * j)


def theta(j: int) -> Coframe:
    return Coframe(2 * j + 1)


def permutation_sign(indices: Iterable[int]) -> int:
    seq = list(indices)
    inversions = sum(
        1 for a, b in itertools.combinations(range(len(seq)), 2) if seq[a] > seq[b]
    )
    return -1 if inversions % 2 else 1


def _canonical(indices: tuple[int, ...]) -> tuple[int, tuple[int, ...]] | None:
    if len(set(indices)) != len(indices):
        return None
    return permutation_sign(indices), tuple(sorted(indices))


class Form:
    """
    Immutable element of the exterior algebra, possibly of mixed degree.

    Arithmetic between forms requires a common backend. Scalars on the other
    side of ``*`` or ``/`` are coerced into the form's backend.
    """

    __slots__ = ('_backend', '_terms')

    def __init__(
        self,
        terms: Mapping[tuple[int, ...], object] | None = None,
        backend: Backend = Backend.FLOAT,
    ) -> None:
        self._backend = Backend(backend)
        acc: dict[tuple[int, ...], Scalar] = {}
        for key, value in (terms or {}).items():
            canon = _canonical(tuple(int(i) for i in key))
            if canon is None:
                continue
            sign, ordered = canon
            coeff = scalars.coerce(value, self._backend)
            acc[ordered] = acc.get(ordered, scalars.zero(self._backend)) + (
                coeff if sign > 0 else -coeff
            )
        self._terms = {k: v for k, v in acc.items() if v}

    @classmethod
    def _raw(cls, terms: dict[tuple[int, ...], Scalar], backend: Backend) -> Form:
        form = cls.__new__(cls)
        form._backend = backend
        form._terms = {k: v for k, v in terms.items() if v}
        return form

    @classmethod
    def zero(cls, backend: Backend = Backend.FLOAT) -> Form:
        return cls._raw({}, backend)

    @classmethod
    def scalar(cls, value: object, backend: Backend = Backend.FLOAT) -> Form:
        return cls._raw({(): scalars.coerce(value, backend)}, backend)

    @classmethod
    def basis(cls, index: int, backend: Backend = Backend.FLOAT) -> Form:
        return cls._raw({(int(index),): scalars.one(backend)}, backend)

    @classmethod
    def monomial(
        cls, indices: Iterable[int], coeff: object = 1, backend: Backend = Backend.FLOAT
    ) -> Form:
        return cls({tuple(indices): coeff}, backend)

    @property
    def backend(self) -> Backend:
        return self._backend

    @property
    def terms(self) -> Mapping[tuple[int, ...], Scalar]:
        return MappingProxyType(self._terms)

    def __iter__(self) -> Iterator[tuple[tuple[int, ...], Scalar]]:
        return iter(sorted(self._terms.items()))

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def degrees(self) -> set[int]:
        return {len(k) for k in self._terms}

    def part(self, degree: int) -> Form:
        return Form._raw(
            {k: v for k, v in self._terms.items() if len(k) == degree}, self._backend
        )

    def coefficient(self, indices: Iterable[int]) -> Scalar:
        canon = _canonical(tuple(int(i) for i in indices))
        if canon is None:
            return scalars.zero(self._backend)
        sign, key = canon
        value = self._terms.get(key, scalars.zero(self._backend))
        return value if sign > 0 else -value

    def _check(self, other: Form) -> None:
        if other._backend is not self._backend:
            raise BackendMismatchError(
                f'cannot combine {self._backend.value} and {other._backend.value} forms'
            )

    def __add__(self, other: Form) -> Form:
        if not isinstance(other, Form):
            return NotImplemented
        self._check(other)
        acc = dict(self._terms)
        for k, v in other._terms.items():
            acc[k] = acc[k] + v if k in acc else v
        return Form._raw(acc, self._backend)

    def __neg__(self) -> Form:
        return Form._raw({k: -v for k, v in self._terms.items()}, self._backend)

    def __sub__(self, other: Form) -> Form:
        if not isinstance(other, Form):
            return NotImplemented
        return self + (-other)

    def __mul__(self, value: object) -> Form:
        if isinstance(value, Form):
            return NotImplemented
        c = scalars.coerce(value, self._backend)
        return Form._raw({k: v * c for k, v in self._terms.items()}, self._backend)

    __rmul__ = __mul__

    def __truediv__(self, value: object) -> Form:
        c = scalars.coerce(value, self._backend)
        return Form._raw({k: v / c for k, v in self._terms.items()}, self._backend)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return self._backend is other._backend and self._terms == other._terms

    __hash__ = None  # type: ignore[assignment]

    def wedge(self, other: Form) -> Form:
        return wedge(self, other)

    def conj(self) -> Form:
        return Form._raw(
            {k: scalars.conjugate(v) for k, v in self._terms.items()}, self._backend
        )

    def real(self) -> Form:
        return Form._raw(
            {k: scalars.real_part(v) for k, v in self._terms.items()}, self._backend
        )

    def imag(self) -> Form:
        return Form._raw(
            {k: scalars.imag_part(v) for k, v in self._terms.items()}, self._backend
        )

    def to_backend(self, backend: Backend) -> Form:
        if backend is self._backend:
            return self
        return Form(dict(self._terms), backend)

    def is_semibasic(self) -> bool:
        return not any(VERTICAL.intersection(k) for k in self._terms)

    def semibasic_part(self) -> Form:
        return Form._raw(
            {k: v for k, v in self._terms.items() if not VERTICAL.intersection(k)},
            self._backend,
        )

    def max_abs(self) -> float:
        return max((scalars.magnitude(v) for v in self._terms.values()), default=0.0)

    def is_zero(self, tol: float | None = None) -> bool:
        if self._backend is Backend.EXACT:
            return not self._terms
        return self.max_abs() <= resolve_tolerance(tol)

    def allclose(self, other: Form, tol: float | None = None) -> bool:
        return (self - other).is_zero(tol)

    def __repr__(self) -> str:
        if not self._terms:
            return 'Form(0)'
        parts = []
        for key, value in self:
            name = '^'.join(Coframe(i).symbol for i in key) or '1'
            parts.append(f'({value})*{name}')
        return 'Form(' + ' + '.join(parts) + ')'


def wedge(f: Form, g: Form) -> Form:
    f._check(g)
    acc: dict[tuple[int, ...], Scalar] = {}
    for ki, a in f._terms.items():
        for kj, b in g._terms.items():
            if set(ki).intersection(kj):
                continue
            sign, key = _canonical(ki + kj)
            c = a * b
            c = c if sign > 0 else -c
            acc[key] = acc[key] + c if key in acc else c
    return Form._raw(acc, f.backend)


def wedge_all(forms: Iterable[Form], backend: Backend = Backend.FLOAT) -> Form:
    return reduce(wedge, forms, Form.scalar(1, backend))


class StructureTable:
    """Exterior derivatives of the eight basis 1-forms, stored exactly."""

    def __init__(self, entries: Mapping[Coframe, Form]) -> None:
        missing = set(Coframe) - set(entries)
        if missing:
            raise ConsistencyError(f'structure table lacks {sorted(missing)}')
        self._exact = {
            Coframe(i): f.to_backend(Backend.EXACT) if f.backend is Backend.EXACT else f
            for i, f in entries.items()
        }
        for i, f in self._exact.items():
            if f.backend is not Backend.EXACT or f.degrees() - {2}:
                raise ConsistencyError(f'd{i.symbol} must be an exact 2-form')
        self._float = {i: f.to_backend(Backend.FLOAT) for i, f in self._exact.items()}

    def entry(self, index: int, backend: Backend = Backend.EXACT) -> Form:
        table = self._exact if backend is Backend.EXACT else self._float
        return table[Coframe(index)]

    def __iter__(self) -> Iterator[tuple[Coframe, Form]]:
        return iter(sorted(self._exact.items()))

    def validate(self) -> None:
        """Raise ``ConsistencyError`` unless d(d x) = 0 exactly for every basis form."""
        for index, dx in self:
            ddx = exterior_derivative(dx, self)
            if ddx:
                raise ConsistencyError(f'd(d {index.symbol}) = {ddx!r} != 0')


def maurer_cartan_matrix() -> tuple[tuple[Form, ...], ...]:
    ex = Backend.EXACT
    i = scalars.imaginary_unit(ex)
    b1, b2 = Form.basis(Coframe.BETA1, ex), Form.basis(Coframe.BETA2, ex)
    b3 = -(b1 + b2)
    e = {j: Form.basis(eta(j), ex) for j in (1, 2, 3)}
    t = {j: Form.basis(theta(j), ex) for j in (1, 2, 3)}
    return (
        (b1 * i, t[3] + e[3] * i, -t[2] + e[2] * i),
        (-t[3] + e[3] * i, b2 * i, t[1] + e[1] * i),
        (t[2] + e[2] * i, -t[1] + e[1] * i, b3 * i),
    )


def derive_structure_table() -> StructureTable:
    mu = maurer_cartan_matrix()
    dmu = [
        [
            -reduce(
                Form.__add__,
                (wedge(mu[a][c], mu[c][b]) for c in range(3)),
            )
            for b in range(3)
        ]
        for a in range(3)
    ]
    # dmu is anti-Hermitian because mu is.
    for a, b in itertools.product(range(3), repeat=2):
        if dmu[a][b] + dmu[b][a].conj():
            raise ConsistencyError('Maurer-Cartan differential is not anti-Hermitian')
    entries = {
        Coframe.BETA1: dmu[0][0].imag(),
        Coframe.BETA2: dmu[1][1].imag(),
        Coframe.THETA1: dmu[1][2].real(),
        Coframe.ETA1: dmu[1][2].imag(),
        Coframe.THETA2: -dmu[0][2].real(),
        Coframe.ETA2: dmu[0][2].imag(),
        Coframe.THETA3: dmu[0][1].real(),
        Coframe.ETA3: dmu[0][1].imag(),
    }
    if dmu[2][2].imag() + entries[Coframe.BETA1] + entries[Coframe.BETA2]:
        raise ConsistencyError('trace of the Maurer-Cartan differential is nonzero')
    table = StructureTable(entries)
    table.validate()
    logger.debug('derived structure table', entries=len(entries))
    return table


@lru_cache(maxsize=1)
def structure_table() -> StructureTable:
    return derive_structure_table()


def exterior_derivative(f: Form, table: StructureTable | None = None) -> Form:
    table = table or structure_table()
    backend = f.backend
    acc: dict[tuple[int, ...], Scalar] = {}
    for key, c in f.terms.items():
        for pos, index in enumerate(key):
            lead = -c if pos % 2 else c
            for sub, b in table.entry(index, backend).terms.items():
                canon = _canonical(key[:pos] + sub + key[pos + 1 :])
                if canon is None:
                    continue
                sign, new_key = canon
                value = lead * b if sign > 0 else -(lead * b)
                acc[new_key] = acc[new_key] + value if new_key in acc else value
    return Form._raw(acc, backend)


class FrameScales(Protocol):
    @property
    def A(self) -> tuple: ...

    @property
    def eps(self) -> tuple: ...


def _scales(frame: FrameScales, backend: Backend) -> dict[int, Scalar]:
    scales: dict[int, Scalar] = {}
    for j, (a, e) in enumerate(zip(frame.A, frame.eps), start=1):
        if not a > 0:
            raise InvalidParamsError(f'A{j} must be positive')
        if e == 0:
            raise InvalidParamsError(f'eps{j} must be nonzero')
        scales[eta(j)] = scalars.coerce(a, backend)
        scales[theta(j)] = scalars.coerce(a, backend) * scalars.coerce(e, backend)
    return scales


def _require_semibasic(f: Form, operation: str) -> None:
    if not f.is_semibasic():
        raise NotSemibasicError(f'{operation} needs a semibasic form, got {f!r}')


def alpha(j: int, frame: FrameScales, backend: Backend = Backend.FLOAT) -> Form:
    """The (1,0)-form a_j = A_j (eta_j + i eps_j theta_j)."""
    a = scalars.coerce(frame.A[j - 1], backend)
    e = scalars.coerce(frame.eps[j - 1], backend)
    i = scalars.imaginary_unit(backend)
    return Form({(eta(j),): a, (theta(j),): a * e * i}, backend)


def orthonormal_coframe(
    frame: FrameScales, backend: Backend = Backend.FLOAT
) -> tuple[Form, ...]:
    out: list[Form] = []
    for j in (1, 2, 3):
        a_j = alpha(j, frame, backend)
        out.extend((a_j.real(), a_j.imag()))
    return tuple(out)


def hodge_star(f: Form, frame: FrameScales) -> Form:
    _require_semibasic(f, 'hodge_star')
    s = _scales(frame, f.backend)
    acc: dict[tuple[int, ...], Scalar] = {}
    for key, c in f.terms.items():
        rest = tuple(i for i in SEMIBASIC if i not in key)
        factor = c
        for i in rest:
            factor = factor * s[i]
        for i in key:
            factor = factor / s[i]
        acc[rest] = factor if permutation_sign(key + rest) > 0 else -factor
    return Form._raw(acc, f.backend)


def form_norm(f: Form, frame: FrameScales) -> float:
    _require_semibasic(f, 'form_norm')
    s = _scales(frame, Backend.FLOAT)
    total = 0.0
    for key, c in f.terms.items():
        value = scalars.to_complex(c)
        for i in key:
            value /= s[i]
        total += abs(value) ** 2
    return math.sqrt(total)


def _type_projectors(
    frame: FrameScales, backend: Backend
) -> dict[int, tuple[Form, Form]]:
    """(1,0) and (0,1) parts of every semibasic basis 1-form."""
    _scales(frame, backend)
    i = scalars.imaginary_unit(backend)
    half = scalars.coerce(1, backend) / 2
    out: dict[int, tuple[Form, Form]] = {}
    for j in (1, 2, 3):
        e = scalars.coerce(frame.eps[j - 1], backend)
        ej, tj = eta(j), theta(j)
        out[ej] = (
            Form({(ej,): half, (tj,): i * e * half}, backend),
            Form({(ej,): half, (tj,): -i * e * half}, backend),
        )
        out[tj] = (
            Form({(tj,): half, (ej,): -i * half / e}, backend),
            Form({(tj,): half, (ej,): i * half / e}, backend),
        )
    return out


def type_project(f: Form, p: int, q: int, frame: FrameScales) -> Form:
    """Component of ``f`` spanned by p-fold a's wedged with q-fold conj(a)'s."""
    _require_semibasic(f, 'type_project')
    if p < 0 or q < 0:
        return Form.zero(f.backend)
    projectors = _type_projectors(frame, f.backend)
    result = Form.zero(f.backend)
    for key, c in f.terms.items():
        if len(key) != p + q:
            continue
        for holo in itertools.combinations(range(len(key)), p):
            factors = (
                projectors[index][0 if pos in holo else 1]
                for pos, index in enumerate(key)
            )
            result = result + wedge_all(factors, f.backend) * c
    return result


def top_coefficient(f: Form) -> Scalar:
    """Coefficient of eta1^theta1^eta2^theta2^eta3^theta3."""
    return f.coefficient(TOP_KEY)
