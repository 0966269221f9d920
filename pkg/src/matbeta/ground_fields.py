"""Scalars over the reals, complexes and quaternions, split powers and Gamma.

Quaternions are stored as four real components ``(a, b, c, d)`` meaning
``a + b i + c j + d k``.  Complex parameters are plain Python/numpy complex
numbers; there is no separate wrapper type for them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PoleError

__all__ = [
    "GroundField",
    "Scalar",
    "quat_mul",
    "power_split",
    "complex_gamma",
    "complex_loggamma",
    "gamma_ratio",
]


class GroundField(enum.Enum):
    REAL = "R"
    COMPLEX = "C"
    QUATERNION = "H"

    @property
    def dim(self) -> int:
        return {"R": 1, "C": 2, "H": 4}[self.value]

    @classmethod
    def parse(cls, tag) -> "GroundField":
        if isinstance(tag, cls):
            return tag
        key = str(tag).strip().upper()
        aliases = {"R": "R", "REAL": "R", "C": "C", "COMPLEX": "C",
                   "H": "H", "Q": "H", "QUATERNION": "H"}
        if key not in aliases:
            raise DomainError(f"unknown ground field {tag!r}")
        return cls(aliases[key])


_RANK = {GroundField.REAL: 0, GroundField.COMPLEX: 1, GroundField.QUATERNION: 2}


@dataclass(frozen=True)
class Scalar:
    """An element of R, C or H with an explicit field tag."""

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0
    field: GroundField = GroundField.QUATERNION

    def __post_init__(self):
        if self.field is GroundField.REAL and (self.b or self.c or self.d):
            raise DomainError("real scalar with imaginary components")
        if self.field is GroundField.COMPLEX and (self.c or self.d):
            raise DomainError("complex scalar with j/k components")

    @classmethod
    def from_value(cls, x, field=None) -> "Scalar":
        if isinstance(x, Scalar):
            return x if field is None else x.promote(field)
        z = complex(x)
        if field is None:
            field = GroundField.REAL if z.imag == 0 else GroundField.COMPLEX
        return cls(float(z.real), float(z.imag), 0.0, 0.0, GroundField.parse(field))

    @classmethod
    def unit(cls, name: str) -> "Scalar":
        comps = {"1": (1, 0, 0, 0), "i": (0, 1, 0, 0),
                 "j": (0, 0, 1, 0), "k": (0, 0, 0, 1)}[name]
        return cls(*map(float, comps), GroundField.QUATERNION)

    @property
    def components(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def promote(self, field) -> "Scalar":
        field = GroundField.parse(field)
        if _RANK[field] < _RANK[self.field]:
            raise DomainError(f"cannot demote {self.field.name} scalar to {field.name}")
        return Scalar(self.a, self.b, self.c, self.d, field)

    def conj(self) -> "Scalar":
        return Scalar(self.a, -self.b, -self.c, -self.d, self.field)

    def norm2(self) -> float:
        return self.a ** 2 + self.b ** 2 + self.c ** 2 + self.d ** 2

    def __abs__(self) -> float:
        return math.sqrt(self.norm2())

    def to_complex(self) -> complex:
        if self.c or self.d:
            raise DomainError("quaternion with j/k part is not a complex number")
        return complex(self.a, self.b)

    def complex_pair(self) -> tuple:
        """Return ``(z1, z2)`` with ``q = z1 + z2 j``."""
        return complex(self.a, self.b), complex(self.c, self.d)

    def _coerce(self, other):
        other = Scalar.from_value(other)
        field = max(self.field, other.field, key=_RANK.get)
        return self.promote(field), other.promote(field)

    def __add__(self, other):
        p, q = self._coerce(other)
        return Scalar(p.a + q.a, p.b + q.b, p.c + q.c, p.d + q.d, p.field)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.a, -self.b, -self.c, -self.d, self.field)

    def __sub__(self, other):
        return self + (-Scalar.from_value(other))

    def __rsub__(self, other):
        return Scalar.from_value(other) - self

    def __mul__(self, other):
        p, q = self._coerce(other)
        return quat_mul(p, q)

    def __rmul__(self, other):
        q, p = self._coerce(other)
        return quat_mul(p, q)

    def inverse(self) -> "Scalar":
        n = self.norm2()
        if n == 0:
            raise DomainError("zero has no inverse")
        c = self.conj()
        return Scalar(c.a / n, c.b / n, c.c / n, c.d / n, self.field)

    def __truediv__(self, other):
        return self * Scalar.from_value(other).inverse()

    def isclose(self, other, tol: float = 1e-12) -> bool:
        other = Scalar.from_value(other)
        return all(abs(x - y) <= tol for x, y in zip(self.components, other.components))


def quat_mul(p: Scalar, q: Scalar) -> Scalar:
    """Hamilton product ``p q``."""
    a1, b1, c1, d1 = p.components
    a2, b2, c2, d2 = q.components
    field = max(p.field, q.field, key=_RANK.get)
    return Scalar(
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        field,
    )


def power_split(a, sigma, tau):
    """Split power ``a^{sigma||tau} = a^sigma * conj(a)^tau`` on the principal branch.

    Works elementwise on arrays.  Note that ``Log conj(a) = conj(Log a)``
    away from the negative axis, which is where every caller lives.
    """
    a = np.asarray(a, dtype=complex)
    if np.any(a == 0):
        raise DomainError("split power of zero")
    log_a = np.log(a)
    out = np.exp(sigma * log_a + tau * np.conj(log_a))
    return out[()] if out.ndim == 0 else out


# Lanczos coefficients for g = 7, nine terms.
_G = 7.0
_LANCZOS = np.array([
    0.99999999999980993227684700473478,
    676.520368121885098567009190444019,
    -1259.13921672240287047156078755283,
    771.3234287776530788486528258894,
    -176.61502916214059906584551354,
    12.507343278686904814458936853,
    -0.13857109526572011689554707,
    9.984369578019570859563e-6,
    1.50563273514931155834e-7,
])
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _check_poles(z):
    re = z.real
    bad = (z.imag == 0) & (re <= 0) & (re == np.round(re))
    if np.any(bad):
        raise PoleError(f"Gamma has a pole at {z[bad].ravel()[0].real:g}")


def _loggamma_right(z):
    # valid for Re z >= 0.5
    zm = z - 1.0
    acc = np.full(z.shape, _LANCZOS[0], dtype=complex)
    for k in range(1, len(_LANCZOS)):
        acc = acc + _LANCZOS[k] / (zm + k)
    t = zm + _G + 0.5
    return _HALF_LOG_2PI + (zm + 0.5) * np.log(t) - t + np.log(acc)


def complex_loggamma(z):
    """Logarithm of Gamma, continuous in each half plane (not the principal branch of log Gamma).

    Only ``exp`` of the result is meaningful; products of Gammas are formed as
    sums of these values to avoid overflow.
    """
    z = np.asarray(z, dtype=complex)
    _check_poles(z)
    out = np.empty(z.shape, dtype=complex)
    right = z.real >= 0.5
    if np.any(right):
        out[right] = _loggamma_right(z[right])
    left = ~right
    if np.any(left):
        zl = z[left]
        # reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        out[left] = math.log(math.pi) - np.log(np.sin(np.pi * zl)) - _loggamma_right(1.0 - zl)
    return out[()] if out.ndim == 0 else out


def complex_gamma(z):
    """Gamma function for complex arguments (Lanczos approximation with reflection)."""
    out = np.exp(complex_loggamma(z))
    return out


def gamma_ratio(num, den):
    """``prod Gamma(num) / prod Gamma(den)`` evaluated in log space."""
    num = np.atleast_1d(np.asarray(num, dtype=complex))
    den = np.atleast_1d(np.asarray(den, dtype=complex))
    return complex(np.exp(np.sum(complex_loggamma(num)) - np.sum(complex_loggamma(den))))
