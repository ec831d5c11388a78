"""
Scalar backends for the exterior algebra.

``Backend.EXACT`` stores Gaussian rationals (sympy's ``QQ_I`` domain), so
every ring identity holds exactly. ``Backend.FLOAT`` stores Python
``complex`` values and compares them against an absolute tolerance.
"""

from __future__ import annotations

from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Any

from sympy import QQ, QQ_I

from nomad_flag_dt_plugin.errors import BackendMismatchError

GaussianRational = type(QQ_I.one)
Scalar = Any  # GaussianRational | complex


class Backend(str, Enum):
    EXACT = 'exact'
    FLOAT = 'float'


def is_exact_number(value: object) -> bool:
    if isinstance(value, bool):
        return False
    return isinstance(value, Rational | GaussianRational)


def backend_of(*values: object) -> Backend:
    """EXACT when every value is an exact rational, FLOAT otherwise."""
    return Backend.EXACT if all(is_exact_number(v) for v in values) else Backend.FLOAT


def _qq(value: Rational) -> Any:
    f = Fraction(value)
    return QQ(f.numerator, f.denominator)


def gaussian(re: Rational, im: Rational = 0) -> GaussianRational:
    return QQ_I(_qq(re), _qq(im))


def coerce(value: object, backend: Backend) -> Scalar:
    """Bring ``value`` into ``backend``; floats never enter the exact backend."""
    if backend is Backend.EXACT:
        if isinstance(value, GaussianRational):
            return value
        if is_exact_number(value):
            return gaussian(value)
        raise BackendMismatchError(
            f'cannot use {type(value).__name__} value {value!r} in the exact backend'
        )
    if isinstance(value, GaussianRational):
        return complex(float(value.x), float(value.y))
    if isinstance(value, int | float | complex | Rational):
        return complex(value)
    raise BackendMismatchError(f'not a scalar: {value!r}')


def zero(backend: Backend) -> Scalar:
    return QQ_I.zero if backend is Backend.EXACT else 0j


def one(backend: Backend) -> Scalar:
    return QQ_I.one if backend is Backend.EXACT else 1 + 0j


def imaginary_unit(backend: Backend) -> Scalar:
    return QQ_I.imag_unit if backend is Backend.EXACT else 1j


def conjugate(z: Scalar) -> Scalar:
    if isinstance(z, GaussianRational):
        return z.new(z.x, -z.y)
    return z.conjugate()


def real_part(z: Scalar) -> Scalar:
    if isinstance(z, GaussianRational):
        return z.new(z.x, QQ.zero)
    return complex(z.real, 0.0)


def imag_part(z: Scalar) -> Scalar:
    if isinstance(z, GaussianRational):
        return z.new(z.y, QQ.zero)
    return complex(z.imag, 0.0)


def to_complex(z: Scalar) -> complex:
    if isinstance(z, GaussianRational):
        return complex(float(z.x), float(z.y))
    return complex(z)


def magnitude(z: Scalar) -> float:
    return abs(to_complex(z))


def is_zero(z: Scalar, tol: float) -> bool:
    if isinstance(z, GaussianRational):
        return not z
    return abs(z) <= tol


def to_fraction(z: GaussianRational) -> Fraction:
    """Real part of an exact scalar as a ``Fraction``; the imaginary part must be 0."""
    if z.y:
        raise BackendMismatchError(f'{z} is not real')
    return Fraction(int(z.x.numerator), int(z.x.denominator))


def to_real(z: Scalar, tol: float) -> Fraction | float:
    """Real value of a scalar: a ``Fraction`` when exact, a ``float`` otherwise."""
    if isinstance(z, GaussianRational):
        return to_fraction(z)
    if abs(z.imag) > tol * max(1.0, abs(z.real)):
        raise BackendMismatchError(f'{z} is not real')
    return z.real

