"""Coordinate models of the classical symmetric spaces.

Ball points, Cayley transforms onto cones, wedges, Siegel domains and
sections of wedges, the fractional-linear action ``z -> (a + z c)^{-1} (b + z d)``
with its Jacobian, invariant densities, the Berezin kernel and parabolic
eigenfunctions.  Matrices are :class:`~matbeta.matk.MatK` values throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import DomainError, SingularError, StructureError
from .ground_fields import GroundField
from .matk import MatK, det_k, is_positive_definite, j_matrix

__all__ = [
    "SERIES",
    "SpaceFamily",
    "GroupElement",
    "ball_projector",
    "ball_basis",
    "random_ball_point",
    "random_group_element",
    "operator_norm",
    "cayley",
    "cayley_inv",
    "modified_cayley_sp2nc",
    "modified_cayley_sp2nc_inv",
    "modified_cayley_so",
    "modified_cayley_so_inv",
    "mobius",
    "mobius_jacobian",
    "fd_jacobian",
    "jacobian_exponent",
    "invariant_density",
    "berezin_kernel",
    "section_embed",
    "section_project",
    "parabolic_eigenfunction",
    "section_eigenfunction",
    "section_parabolic_action",
    "ball_to_model",
]

R, C, H = GroundField.REAL, GroundField.COMPLEX, GroundField.QUATERNION

# series -> (field, ball symmetry, second form: (kind, sign)) ; kind in {bilinear, sesquilinear}
SERIES = {
    "GL_R": (R, "sym", ("bilinear", -1)),
    "GL_C": (C, "herm", ("sesquilinear", -1)),
    "GL_H": (H, "herm", ("sesquilinear", -1)),
    "Upq_R": (R, "rect", None),
    "Upq_C": (C, "rect", None),
    "Upq_H": (H, "rect", None),
    "Sp2nR": (C, "sym", ("bilinear", -1)),
    "Sp2nC": (H, "antiherm", ("sesquilinear", +1)),
    "OnC": (R, "antisym", ("bilinear", +1)),
    "SOstar": (C, "antisym", ("bilinear", +1)),
}


@dataclass(frozen=True)
class SpaceFamily:
    """One of the ten series together with its rank data.

    ``n`` is the ball size for square series; ``p, q`` for the ``Upq`` series.
    For ``OnC``/``SOstar`` the ball is ``n x n`` antisymmetric and ``odd`` marks
    the bordered model used for odd ``n``.
    """

    series: str
    n: int | None = None
    p: int | None = None
    q: int | None = None

    def __post_init__(self):
        if self.series not in SERIES:
            raise DomainError(f"unknown series {self.series!r}")
        if self.series.startswith("Upq"):
            if self.p is None and self.n is not None:
                object.__setattr__(self, "p", self.n)
                object.__setattr__(self, "q", self.n)
            if self.p is None or self.q is None or not 1 <= self.p <= self.q:
                raise DomainError("Upq series needs 1 <= p <= q")
        elif self.n is None or self.n < 1:
            raise DomainError("rank n must be a positive integer")

    @property
    def field(self) -> GroundField:
        return SERIES[self.series][0]

    @property
    def ball_kind(self) -> str:
        return SERIES[self.series][1]

    @property
    def ball_shape(self) -> tuple:
        if self.series.startswith("Upq"):
            return (self.p, self.q)
        return (self.n, self.n)

    @property
    def odd(self) -> bool:
        return self.series in ("OnC", "SOstar") and self.n % 2 == 1

    @property
    def dim(self) -> int:
        """Real dimension of G/K (dimension of the ball)."""
        return ball_basis(self).shape[0]


# --- linear structure of balls and Lie algebras --------------------------------

_OMEGA2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _h_project(x):
    """Project a complex matrix onto quaternionic embeddings."""
    k = x.shape[0] // 2
    om = np.kron(np.eye(k), _OMEGA2)
    ko = np.kron(np.eye(x.shape[1] // 2), _OMEGA2)
    return 0.5 * (x + om @ np.conj(x) @ np.linalg.inv(ko))


def ball_projector(family: SpaceFamily):
    """Real-linear projector onto the tangent space of the ball (on raw data arrays)."""
    f, kind = family.field, family.ball_kind

    def proj(x):
        if f is R:
            x = np.real(x)
        if f is H:
            x = _h_project(x)
        if kind == "sym":
            x = 0.5 * (x + x.T)
        elif kind == "antisym":
            x = 0.5 * (x - x.T)
        elif kind == "herm":
            x = 0.5 * (x + np.conj(x.T))
        elif kind == "antiherm":
            x = 0.5 * (x - np.conj(x.T))
        return x

    return proj


def _data_shape(family, shape):
    s = 2 if family.field is H else 1
    return (s * shape[0], s * shape[1])


def _to_real_vec(x, field):
    return x.ravel() if field is R else np.concatenate([x.real.ravel(), x.imag.ravel()])


def _from_real_vec(v, field, shape):
    if field is R:
        return v.reshape(shape)
    k = int(np.prod(shape))
    return (v[:k] + 1j * v[k:]).reshape(shape)


@lru_cache(maxsize=None)
def _basis_cached(family: SpaceFamily):
    shape = _data_shape(family, family.ball_shape)
    proj = ball_projector(family)
    nreal = int(np.prod(shape)) * (1 if family.field is R else 2)
    cols = [_to_real_vec(proj(_from_real_vec(e, family.field, shape)), family.field)
            for e in np.eye(nreal)]
    u, s, _ = np.linalg.svd(np.array(cols).T, full_matrices=False)
    basis = u[:, s > 1e-9].T
    basis.setflags(write=False)
    return basis


def ball_basis(family: SpaceFamily) -> np.ndarray:
    """Orthonormal real basis (rows) of the ball's linear span, in raw-data coordinates."""
    return _basis_cached(family)


def _coords_to_matrix(family, c):
    shape = _data_shape(family, family.ball_shape)
    return _from_real_vec(ball_basis(family).T @ c, family.field, shape)


def _matrix_to_coords(family, x):
    return ball_basis(family) @ _to_real_vec(np.asarray(x), family.field)


def operator_norm(z: MatK) -> float:
    """Largest singular value (the embedding preserves it over H)."""
    return float(np.linalg.norm(z.data, 2))


def random_ball_point(family: SpaceFamily, rng, radius: float = 0.9) -> MatK:
    c = rng.standard_normal(ball_basis(family).shape[0])
    x = _coords_to_matrix(family, c)
    nrm = np.linalg.norm(x, 2)
    x = x * (radius * rng.uniform(0.05, 1.0) / nrm)
    return MatK(family.field, x)


@dataclass(frozen=True, eq=False)
class GroupElement:
    """Block matrix ``[[alpha, beta], [gamma, delta]]`` acting by fractional-linear maps."""

    family: SpaceFamily
    g: MatK

    def _split(self):
        s = 2 if self.g.field is H else 1
        p = self.family.ball_shape[0] * s
        x = self.g.data
        return x[:p, :p], x[:p, p:], x[p:, :p], x[p:, p:]

    @property
    def blocks(self):
        f = self.g.field
        return tuple(MatK(f, b) for b in self._split())

    @classmethod
    def identity(cls, family):
        p, q = family.ball_shape
        return cls(family, MatK.identity(p + q, family.field))

    @classmethod
    def block_diagonal(cls, family, a: MatK, d: MatK):
        f = family.field
        top = np.hstack([a.data, np.zeros((a.data.shape[0], d.data.shape[1]))])
        bot = np.hstack([np.zeros((d.data.shape[0], a.data.shape[1])), d.data])
        return cls(family, MatK(f, np.vstack([top, bot])))

    def compose(self, other: "GroupElement") -> "GroupElement":
        """Element acting as ``self`` first, then ``other`` (right action)."""
        return GroupElement(self.family, self.g @ other.g)

    def preserves_form(self, tol: float = 1e-10) -> bool:
        p, q = self.family.ball_shape
        s = 2 if self.g.field is H else 1
        m = np.diag([1.0] * (s * p) + [-1.0] * (s * q))
        x = self.g.data
        return bool(np.max(np.abs(x @ m @ np.conj(x.T) - m)) < tol)


def _forms(family):
    p, q = family.ball_shape
    s = 2 if family.field is H else 1
    m = np.diag([1.0] * (s * p) + [-1.0] * (s * q))
    second = SERIES[family.series][2]
    lam = None
    if second is not None:
        kind, sign = second
        e = np.eye(s * p)
        z = np.zeros_like(e)
        lam = (kind, np.block([[z, e], [sign * e, z]]))
    return m, lam


def _lie_project(family, x, iters: int = 60):
    m, lam = _forms(family)
    for _ in range(iters):
        if family.field is R:
            x = np.real(x)
        if family.field is H:
            x = _h_project(x)
        x = 0.5 * (x - m @ np.conj(x.T) @ m)
        if lam is not None:
            kind, lm = lam
            xt = x.T if kind == "bilinear" else np.conj(x.T)
            x = 0.5 * (x - np.linalg.solve(lm, xt @ lm))
    return x


def random_group_element(family: SpaceFamily, rng, scale: float = 0.5) -> GroupElement:
    """Exponential of a random Lie algebra element (Gaussian, projected onto the algebra)."""
    p, q = family.ball_shape
    s = 2 if family.field is H else 1
    k = s * (p + q)
    x = rng.standard_normal((k, k))
    if family.field is not R:
        x = x + 1j * rng.standard_normal((k, k))
    x = _lie_project(family, x)
    x = x * (scale / max(np.linalg.norm(x, 2), 1e-300))
    return GroupElement(family, MatK(family.field, expm(x)))


# --- actions and Jacobians ---------------------------------------------------

def _inv(a):
    try:
        if np.linalg.cond(a) > 1e13:
            raise np.linalg.LinAlgError
        return np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise SingularError("singular pivot in fractional-linear map") from exc


def mobius(g: GroupElement, z: MatK) -> MatK:
    """``z^{[g]} = (alpha + z gamma)^{-1} (beta + z delta)``."""
    a, b, c, d = g._split()
    x = z.data
    return MatK(z.field, _inv(a + x @ c) @ (b + x @ d))


def jacobian_exponent(family: SpaceFamily) -> float:
    """The exponent h with Jacobian ``|det(alpha + z gamma)|^{-h}``."""
    if family.series.startswith("Upq"):
        return float((family.p + family.q) * family.field.dim)
    return 2.0 * family.dim / family.n


def mobius_jacobian(g: GroupElement, z: MatK) -> float:
    a, _, c, _ = g._split()
    d = abs(det_k(MatK(z.field, a + z.data @ c)))
    if d == 0:
        raise SingularError("alpha + z gamma is singular")
    return float(d ** (-jacobian_exponent(g.family)))


def fd_jacobian(g: GroupElement, z: MatK, eps: float = 1e-6) -> float:
    """Finite-difference Jacobian of the action in orthonormal ball coordinates."""
    fam = g.family
    c0 = _matrix_to_coords(fam, z.data)
    cols = []
    for k in range(len(c0)):
        e = np.zeros_like(c0)
        e[k] = eps
        zp = mobius(g, MatK(fam.field, _coords_to_matrix(fam, c0 + e)))
        zm = mobius(g, MatK(fam.field, _coords_to_matrix(fam, c0 - e)))
        cols.append((_matrix_to_coords(fam, zp.data) - _matrix_to_coords(fam, zm.data)) / (2 * eps))
    return float(abs(np.linalg.det(np.array(cols).T)))


# --- Cayley transforms --------------------------------------------------------

def _eye_like(x):
    return np.eye(x.shape[0])


def cayley(z: MatK) -> MatK:
    """``R = -1 + 2 (1 + z)^{-1}``; an involution."""
    x = z.data
    return MatK(z.field, -_eye_like(x) + 2.0 * _inv(_eye_like(x) + x))


cayley_inv = cayley


def _quat_i(n):
    return np.kron(np.eye(n), np.diag([1j, -1j]))


def modified_cayley_sp2nc(z: MatK) -> MatK:
    """``R = -1 + 2 (1 + i z)^{-1}`` for quaternionic anti-hermitian ``z``."""
    if z.field is not H:
        raise StructureError("Sp(2n,C) model lives over H")
    x = z.data
    return MatK(H, -_eye_like(x) + 2.0 * _inv(_eye_like(x) + _quat_i(z.rows) @ x))


def modified_cayley_sp2nc_inv(r: MatK) -> MatK:
    x = r.data
    zi = -_eye_like(x) + 2.0 * _inv(_eye_like(x) + x)
    return MatK(H, np.linalg.solve(_quat_i(r.rows), zi))


def _bordered(z):
    x = z.data
    k = x.shape[0]
    out = np.zeros((k + 1, k + 1), dtype=x.dtype)
    out[1:, 1:] = x
    return out


def modified_cayley_so(z: MatK) -> MatK:
    """``R = -1 + 2 (1 + J z)^{-1}`` for antisymmetric ``z``; odd sizes are bordered first."""
    x = z.data if z.rows % 2 == 0 else _bordered(z)
    j = j_matrix(x.shape[0] // 2)
    return MatK(z.field, -_eye_like(x) + 2.0 * _inv(_eye_like(x) + j @ x))


def modified_cayley_so_inv(r: MatK, odd: bool = False) -> MatK:
    x = r.data
    j = j_matrix(x.shape[0] // 2)
    zz = np.linalg.solve(j, -_eye_like(x) + 2.0 * _inv(_eye_like(x) + x))
    if odd:
        zz = zz[1:, 1:]
    return MatK(r.field, zz)


def section_embed(z: MatK, p: int, q: int):
    """Ball point ``z = (X Y)`` of size p x q to section coordinates ``(L, K)``."""
    s = 2 if z.field is H else 1
    x, y = z.data[:, : s * (q - p)], z.data[:, s * (q - p):]
    inv = _inv(np.eye(s * p) + y)
    k = -np.eye(s * p) + 2.0 * inv
    l = -inv @ x
    return MatK(z.field, l), MatK(z.field, k)


def section_project(l: MatK, k: MatK) -> MatK:
    """Inverse of :func:`section_embed`."""
    p = k.data.shape[0]
    inv_y = 0.5 * (np.eye(p) + k.data)          # (1+Y)^{-1}
    y = _inv(inv_y) - np.eye(p)
    x = -np.linalg.solve(inv_y, l.data)
    return MatK(k.field, np.hstack([x, y]))


def _section_matrix(l: MatK, k: MatK) -> MatK:
    lp = l.data.shape[1]
    p = k.data.shape[0]
    top = np.hstack([np.eye(lp), np.zeros((lp, p))])
    bot = np.hstack([2.0 * l.data, k.data])
    return MatK(k.field, np.vstack([top, bot]))


def ball_to_model(family: SpaceFamily, z: MatK):
    """Transport a ball point to the model used by the integrals of the family."""
    s = family.series
    if s.startswith("Upq") and family.p < family.q:
        return section_embed(z, family.p, family.q)
    if s == "Sp2nC":
        return modified_cayley_sp2nc(z)
    if s in ("OnC", "SOstar"):
        return modified_cayley_so(z)
    return cayley(z)


# --- densities and kernels ----------------------------------------------------

def _logdet_pd(x: MatK) -> float:
    if not is_positive_definite(x):
        raise DomainError("point outside the domain")
    return float(np.log(det_k(x).real))


def invariant_density(family: SpaceFamily, point, model: str = "ball") -> float:
    """Density of the invariant measure with respect to Lebesgue measure.

    ``model`` is ``"ball"`` (``|det(1-zz*)|^{-h/2}``), ``"wedge"`` for every
    cone/wedge/Siegel/SO realization (``det(R+R*)^{-dim/m}``) or ``"section"``
    where ``point`` is ``(L, K)`` and the density is ``det(M-LL*)^{-h/2}``.
    """
    h = jacobian_exponent(family)
    if model == "ball":
        z = point
        one = MatK.identity(z.rows, z.field)
        return float(np.exp(-0.5 * h * _logdet_pd(one - z @ z.adjoint())))
    if model == "wedge":
        r = point
        m = r.rows
        if family.series in ("OnC", "SOstar"):
            m = r.rows
        return float(np.exp(-family.dim / m * _logdet_pd(r + r.adjoint())))
    if model == "section":
        l, k = point
        mm = MatK(k.field, 0.5 * (k.data + np.conj(k.data.T)))
        return float(np.exp(-0.5 * h * _logdet_pd(mm - l @ l.adjoint())))
    raise DomainError(f"unknown model {model!r}")


def berezin_kernel(point, alpha, model: str = "ball") -> complex:
    """Berezin kernel ``B_alpha`` in ball, wedge or section coordinates.

    Ball: ``det(1 - zz*)^alpha``; wedge: ``(det 2(R+R*) / |det(1+R)|^2)^alpha``;
    section with ``point = (L, K)``: ``(4^p det(M-LL*) / |det(1+K)|^2)^alpha``.
    All three agree under the transports of :func:`ball_to_model`.
    """
    if model == "ball":
        z = point
        one = MatK.identity(z.rows, z.field)
        return complex(np.exp(alpha * _logdet_pd(one - z @ z.adjoint())))
    if model == "wedge":
        r = point
        one = MatK.identity(r.rows, r.field)
        num = _logdet_pd((r + r.adjoint()) * 2.0)
        den = 2.0 * np.log(abs(det_k(one + r)))
        return complex(np.exp(alpha * (num - den)))
    if model == "section":
        l, k = point
        p = k.rows
        mm = MatK(k.field, 0.5 * (k.data + np.conj(k.data.T)))
        one = MatK.identity(p, k.field)
        num = p * np.log(4.0) + _logdet_pd(mm - l @ l.adjoint())
        den = 2.0 * np.log(abs(det_k(one + k)))
        return complex(np.exp(alpha * (num - den)))
    raise DomainError(f"unknown model {model!r}")


# --- parabolic eigenfunctions -------------------------------------------------

def parabolic_eigenfunction(t: MatK, lam, block_sizes=None, power_scale: float = 1.0) -> complex:
    """``prod_j det[T]_{b_j}^{c (lam_j - lam_{j+1})}`` with ``lam_{n+1} = 0``.

    ``block_sizes`` defaults to ``1..len(lam)``; the even SO models use
    ``2, 4, ...`` with ``power_scale = 1/2``.
    """
    lam = np.asarray(lam, dtype=complex)
    sizes = list(range(1, len(lam) + 1)) if block_sizes is None else list(block_sizes)
    diffs = lam - np.append(lam[1:], 0.0)
    s = 2 if t.field is H else 1
    out = 0.0 + 0.0j
    for b, dl in zip(sizes, diffs):
        blk = MatK(t.field, t.data[: s * b, : s * b])
        out += power_scale * dl * _logdet_pd(blk)
    return complex(np.exp(out))


def section_eigenfunction(l: MatK, k: MatK, lam) -> complex:
    mm = MatK(k.field, 0.5 * (k.data + np.conj(k.data.T)))
    return parabolic_eigenfunction(mm - l @ l.adjoint(), lam)


def section_parabolic_action(a: MatK, c: MatK, d: MatK, z: MatK, l: MatK, k: MatK, tol: float = 1e-10):
    """``(L, K) -> (D L A* + C A*, D K D* + C C* + 2 D L C* + Z)``."""
    if np.max(np.abs(a.data @ np.conj(a.data.T) - np.eye(a.data.shape[0])), initial=0) > tol:
        raise StructureError("A must be unitary")
    if np.max(np.abs(z.data + np.conj(z.data.T)), initial=0) > tol:
        raise StructureError("Z must be anti-hermitian")
    a_h = a.adjoint()
    l_new = d @ l @ a_h + c @ a_h
    k_new = d @ k @ d.adjoint() + c @ c.adjoint() + (d @ l @ c.adjoint()) * 2.0 + z
    return l_new, k_new
