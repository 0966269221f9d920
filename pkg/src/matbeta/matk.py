"""Dense matrices over R, C and H.

Quaternionic matrices are stored through the interleaved complex embedding:
the entry ``q = z1 + z2 j`` occupies the 2x2 block ``[[z1, z2], [-conj z2, conj z1]]``.
Matrix products, adjoints and inverses then reduce to ordinary complex
linear algebra, and the leading p x p quaternionic block is the leading
2p x 2p complex block.

Besides the :class:`MatK` value type the module has batched helpers working on
raw ``(..., k, k)`` arrays; the Monte-Carlo layer uses those directly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import (
    BranchError,
    NotDissipativeError,
    NotHermitianError,
    SingularBlockError,
    StructureError,
)
from .ground_fields import GroundField, Scalar

__all__ = [
    "MatK",
    "SymmetryClass",
    "leading_block",
    "det_k",
    "det_power_split",
    "eigenvalues",
    "is_hermitian",
    "is_positive_definite",
    "is_dissipative",
    "block_det_reduce",
    "classify",
    "j_matrix",
    "complex_to_block",
    "star_involution",
    "is_j_structured",
    "DET_op",
    "quaternion_embed",
    "batch_log_det_pd",
    "batch_log_det_dissipative",
    "batch_leading_log_det_pd",
    "batch_leading_log_det_lu",
]

HERMITIAN_TOL = 1e-10


class SymmetryClass(enum.Enum):
    NONE = "none"
    SYMMETRIC = "symmetric"
    ANTISYMMETRIC = "antisymmetric"
    HERMITIAN = "hermitian"
    ANTIHERMITIAN = "antihermitian"
    JSTAR = "jstar"


def quaternion_embed(z1, z2):
    """Interleaved complex embedding of ``Z1 + Z2 j`` (arrays with trailing ``(n, m)``)."""
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    *batch, n, m = z1.shape
    out = np.empty((*batch, 2 * n, 2 * m), dtype=complex)
    out[..., 0::2, 0::2] = z1
    out[..., 0::2, 1::2] = z2
    out[..., 1::2, 0::2] = -np.conj(z2)
    out[..., 1::2, 1::2] = np.conj(z1)
    return out


def _quaternion_split(emb):
    return emb[..., 0::2, 0::2], emb[..., 0::2, 1::2]


@dataclass(frozen=True, eq=False)
class MatK:
    """Immutable dense matrix over a ground field.

    ``data`` is real for R, complex for C and the interleaved complex
    embedding (twice the logical size) for H.
    """

    field: GroundField
    data: np.ndarray
    sym: SymmetryClass = dc_field(default=SymmetryClass.NONE)

    def __post_init__(self):
        f = GroundField.parse(self.field)
        object.__setattr__(self, "field", f)
        dtype = float if f is GroundField.REAL else complex
        arr = np.array(self.data, dtype=dtype, copy=True)
        if arr.ndim != 2:
            raise ValueError("MatK holds a single 2-d matrix")
        if f is GroundField.QUATERNION:
            if arr.shape[0] % 2 or arr.shape[1] % 2:
                raise StructureError("quaternion embedding must have even shape")
            z1, z2 = _quaternion_split(arr)
            if not (np.allclose(arr[1::2, 1::2], np.conj(z1), atol=1e-12)
                    and np.allclose(arr[1::2, 0::2], -np.conj(z2), atol=1e-12)):
                raise StructureError("array is not a quaternionic embedding")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    # construction
    @classmethod
    def from_array(cls, arr, field) -> "MatK":
        field = GroundField.parse(field)
        if field is GroundField.QUATERNION:
            comps = np.asarray(arr, dtype=float)
            return cls.from_components(comps)
        return cls(field, np.asarray(arr))

    @classmethod
    def from_components(cls, comps) -> "MatK":
        """Quaternionic matrix from a real ``(n, m, 4)`` array of components."""
        comps = np.asarray(comps, dtype=float)
        z1 = comps[..., 0] + 1j * comps[..., 1]
        z2 = comps[..., 2] + 1j * comps[..., 3]
        return cls(GroundField.QUATERNION, quaternion_embed(z1, z2))

    @classmethod
    def from_complex_pair(cls, z1, z2) -> "MatK":
        return cls(GroundField.QUATERNION, quaternion_embed(z1, z2))

    @classmethod
    def identity(cls, n: int, field) -> "MatK":
        field = GroundField.parse(field)
        k = 2 * n if field is GroundField.QUATERNION else n
        return cls(field, np.eye(k))

    @classmethod
    def zeros(cls, n: int, m: int, field) -> "MatK":
        field = GroundField.parse(field)
        s = 2 if field is GroundField.QUATERNION else 1
        return cls(field, np.zeros((s * n, s * m)))

    # shape and entries
    @property
    def _s(self) -> int:
        return 2 if self.field is GroundField.QUATERNION else 1

    @property
    def rows(self) -> int:
        return self.data.shape[0] // self._s

    @property
    def cols(self) -> int:
        return self.data.shape[1] // self._s

    @property
    def shape(self) -> tuple:
        return (self.rows, self.cols)

    def entry(self, i: int, j: int) -> Scalar:
        if self.field is GroundField.QUATERNION:
            z1 = self.data[2 * i, 2 * j]
            z2 = self.data[2 * i, 2 * j + 1]
            return Scalar(float(z1.real), float(z1.imag), float(z2.real), float(z2.imag), self.field)
        return Scalar.from_value(self.data[i, j], self.field)

    def components(self) -> np.ndarray:
        """Real ``(rows, cols, dim K)`` array of entry components."""
        if self.field is GroundField.QUATERNION:
            z1, z2 = _quaternion_split(self.data)
            return np.stack([z1.real, z1.imag, z2.real, z2.imag], axis=-1)
        if self.field is GroundField.COMPLEX:
            return np.stack([self.data.real, self.data.imag], axis=-1)
        return self.data[..., None]

    def _like(self, arr, sym=SymmetryClass.NONE) -> "MatK":
        return MatK(self.field, arr, sym)

    # algebra
    def adjoint(self) -> "MatK":
        return self._like(np.conj(self.data.T))

    @property
    def H(self) -> "MatK":
        return self.adjoint()

    def transpose(self) -> "MatK":
        if self.field is GroundField.QUATERNION:
            z1, z2 = _quaternion_split(self.data)
            return MatK.from_complex_pair(z1.T, z2.T)
        return self._like(self.data.T)

    @property
    def T(self) -> "MatK":
        return self.transpose()

    def conj(self) -> "MatK":
        """Entrywise conjugation."""
        return self.adjoint().transpose()

    def _check(self, other: "MatK"):
        if not isinstance(other, MatK):
            raise TypeError("expected MatK")
        if other.field is not self.field:
            raise StructureError("field mismatch")

    def __add__(self, other):
        self._check(other)
        return self._like(self.data + other.data)

    def __sub__(self, other):
        self._check(other)
        return self._like(self.data - other.data)

    def __neg__(self):
        return self._like(-self.data)

    def __matmul__(self, other):
        self._check(other)
        return self._like(self.data @ other.data)

    def __mul__(self, c):
        c = complex(c) if not isinstance(c, (int, float)) else c
        if isinstance(c, complex):
            if self.field is GroundField.REAL and c.imag:
                raise StructureError("complex scalar times real matrix")
            if self.field is GroundField.QUATERNION and c.imag:
                raise StructureError("use explicit quaternion scalars over H")
        return self._like(self.data * c)

    __rmul__ = __mul__

    def inverse(self) -> "MatK":
        return self._like(np.linalg.inv(self.data))

    def real_embedding(self) -> np.ndarray:
        """The matrix as an operator on R^{d n}."""
        if self.field is GroundField.REAL:
            return np.array(self.data)
        a, b = self.data.real, self.data.imag
        return np.block([[a, -b], [b, a]])

    def allclose(self, other: "MatK", tol: float = 1e-10) -> bool:
        return self.field is other.field and np.allclose(self.data, other.data, atol=tol, rtol=0)


def leading_block(m: MatK, p: int) -> MatK:
    if not 1 <= p <= min(m.rows, m.cols):
        raise IndexError(f"leading block size {p} out of range for {m.shape}")
    s = m._s
    return MatK(m.field, m.data[: s * p, : s * p])


def _square(m: MatK):
    if m.rows != m.cols:
        raise StructureError("square matrix required")


def det_k(m: MatK) -> complex:
    """Determinant; over H the non-negative fourth root of the real-embedding determinant."""
    _square(m)
    if m.field is GroundField.QUATERNION:
        # det of the complex embedding is real and >= 0; the real embedding squares it
        d = np.linalg.det(m.data).real
        return complex(np.sqrt(max(d, 0.0)))
    return complex(np.linalg.det(m.data))


def eigenvalues(m: MatK) -> np.ndarray:
    """Eigenvalues of the complex (or real) representative; over H those of the embedding."""
    _square(m)
    return np.linalg.eigvals(m.data)


def _scale(a: np.ndarray) -> float:
    return max(float(np.max(np.abs(a))) if a.size else 0.0, 1.0)


def is_hermitian(m: MatK, tol: float = HERMITIAN_TOL) -> bool:
    _square(m)
    return bool(np.max(np.abs(m.data - np.conj(m.data.T)), initial=0.0) <= tol * _scale(m.data))


def is_positive_definite(m: MatK, tol: float = 1e-12) -> bool:
    if not is_hermitian(m):
        raise NotHermitianError("positive-definiteness test needs a hermitian matrix")
    a = 0.5 * (m.data + np.conj(m.data.T))
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return False
    return bool(np.all(np.abs(np.diag(chol)) > tol * np.sqrt(_scale(a))))


def is_dissipative(m: MatK) -> bool:
    _square(m)
    return is_positive_definite(m + m.adjoint())


def det_power_split(r: MatK, sigma, tau=0.0) -> complex:
    """``det R^{sigma||tau}`` for a dissipative matrix through its eigenvalues."""
    if not is_dissipative(r):
        raise NotDissipativeError("matrix is not dissipative")
    lam = eigenvalues(r)
    if np.any(lam.real <= 1e-10 * _scale(r.data)):
        raise BranchError("eigenvalue with non-positive real part")
    log_sum = np.sum(np.log(lam))
    if r.field is GroundField.QUATERNION:
        # det over H is det(embedding)^{1/2}; the embedding spectrum is conjugation-closed
        log_sum = 0.5 * log_sum.real
    return complex(np.exp(sigma * log_sum + tau * np.conj(log_sum)))


def block_det_reduce(a: MatK, b: MatK, c: MatK, d: MatK) -> complex:
    """``det A * det(D - C A^{-1} B)``, the Schur-complement determinant."""
    _square(a)
    _square(d)
    if abs(det_k(a)) <= 1e-13 * _scale(a.data) ** a.rows:
        raise SingularBlockError("leading block is singular")
    schur = d - c @ MatK(a.field, np.linalg.solve(a.data, b.data))
    return det_k(a) * det_k(schur)


def classify(m: MatK, tol: float = 1e-12) -> SymmetryClass:
    """First matching symmetry class (J-structure is checked last, on even real/complex sizes)."""
    x = m.data
    sc = tol * _scale(x)

    def close(u, v):
        return np.max(np.abs(u - v), initial=0.0) <= sc

    if m.rows == m.cols:
        if m.field is not GroundField.QUATERNION:
            if close(x, x.T):
                return SymmetryClass.SYMMETRIC
            if close(x, -x.T):
                return SymmetryClass.ANTISYMMETRIC
        if close(x, np.conj(x.T)):
            return SymmetryClass.HERMITIAN
        if close(x, -np.conj(x.T)):
            return SymmetryClass.ANTIHERMITIAN
        if m.field is not GroundField.QUATERNION and m.rows % 2 == 0 and is_j_structured(m.data, tol):
            return SymmetryClass.JSTAR
    return SymmetryClass.NONE


# --- J-structured layer -------------------------------------------------------

_J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


def j_matrix(n_blocks: int) -> np.ndarray:
    """Block-diagonal J with ``n_blocks`` copies of ``[[0, -1], [1, 0]]``."""
    return np.kron(np.eye(n_blocks), _J2)


def complex_to_block(z) -> np.ndarray:
    """The real 2x2 block ``z° = Re z + Im z * J2`` (entrywise for arrays, kron-style)."""
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        return z.real * np.eye(2) + z.imag * _J2
    return np.kron(z.real, np.eye(2)) + np.kron(z.imag, _J2)


def star_involution(psi: np.ndarray) -> np.ndarray:
    """``psi* = J psi^t J^{-1}`` on 2x2 real blocks."""
    psi = np.asarray(psi)
    return _J2 @ psi.T @ np.linalg.inv(_J2)


def is_j_structured(r: np.ndarray, tol: float = 1e-10) -> bool:
    r = np.asarray(r)
    k = r.shape[0]
    if k % 2:
        return False
    j = j_matrix(k // 2)
    lhs = np.linalg.solve(j, r.T @ j)
    return bool(np.max(np.abs(lhs - r)) <= tol * _scale(r))


def DET_op(a: np.ndarray, tol: float = 1e-10) -> float:
    """Square root of ``|det A_R|`` for a J-structured matrix."""
    a = np.asarray(a)
    if not is_j_structured(a, tol):
        raise StructureError("matrix violates J^{-1} R^t J = R")
    if np.iscomplexobj(a):
        a_r = np.block([[a.real, -a.imag], [a.imag, a.real]])
    else:
        a_r = a
    return float(np.sqrt(abs(np.linalg.det(a_r))))


# --- batched helpers ----------------------------------------------------------

def batch_log_det_pd(x: np.ndarray, quaternion: bool = False) -> np.ndarray:
    """Real log-determinant of a batch of hermitian positive definite matrices."""
    _, ld = np.linalg.slogdet(x)
    return 0.5 * ld if quaternion else ld


def batch_leading_log_det_pd(x: np.ndarray, sizes, quaternion: bool = False) -> np.ndarray:
    """Log-determinants of leading blocks of PD matrices from one Cholesky factorization.

    ``sizes`` are logical block sizes; returns an array of shape ``(len(sizes), batch)``.
    """
    chol = np.linalg.cholesky(x)
    logdiag = 2.0 * np.log(np.abs(np.diagonal(chol, axis1=-2, axis2=-1)))
    cum = np.cumsum(logdiag, axis=-1)
    s = 2 if quaternion else 1
    out = np.stack([cum[..., s * k - 1] for k in sizes])
    return 0.5 * out if quaternion else out


def batch_log_det_dissipative(x: np.ndarray, kind: str = "complex") -> np.ndarray:
    """Branch-consistent ``sum Log(eigenvalues)`` for a batch of dissipative matrices.

    ``kind`` is ``"real"`` or ``"quaternion"`` (determinant is real positive; the
    quaternionic value is the log of the H-determinant) or ``"complex"``.
    """
    if kind in ("real", "quaternion"):
        sign, ld = np.linalg.slogdet(x)
        if np.any(sign.real <= 0):
            raise BranchError("dissipative real/quaternion determinant must be positive")
        return 0.5 * ld if kind == "quaternion" else ld
    k = x.shape[-1]
    if k == 1:
        return np.log(x[..., 0, 0])
    if k == 2:
        tr = x[..., 0, 0] + x[..., 1, 1]
        det = x[..., 0, 0] * x[..., 1, 1] - x[..., 0, 1] * x[..., 1, 0]
        disc = np.sqrt(tr * tr / 4 - det)
        l1, l2 = tr / 2 + disc, tr / 2 - disc
        return np.log(l1) + np.log(l2)
    return np.sum(np.log(np.linalg.eigvals(x)), axis=-1)


def batch_leading_log_det_lu(x: np.ndarray) -> np.ndarray:
    """Cumulative ``sum Log(pivot)`` of unpivoted LU for a batch of dissipative matrices.

    Entry ``[..., j-1]`` is the log of the leading ``j x j`` minor.  Schur
    complements of a dissipative matrix are dissipative, so every pivot has
    positive real part and the cumulative principal logs form the same
    continuous branch as ``sum Log(eigenvalues)`` (both agree on the identity
    and the dissipative set is convex).
    """
    a = np.array(x, dtype=complex if np.iscomplexobj(x) else float, copy=True)
    m = a.shape[-1]
    logs = np.empty(a.shape[:-1], dtype=complex)
    for k in range(m):
        piv = a[..., k, k]
        if np.any(piv.real <= 0):
            raise NotDissipativeError("LU pivot with non-positive real part")
        logs[..., k] = np.log(piv.astype(complex))
        if k + 1 < m:
            a[..., k + 1:, k + 1:] -= a[..., k + 1:, k, None] * (a[..., k, None, k + 1:] / piv[..., None, None])
    return np.cumsum(logs, axis=-1)
