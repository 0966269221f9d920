"""Spherical functions, the spherical transform of the Berezin kernel and its Plancherel inversion.

Everything here concerns the real series O(p, q)/O(p) x O(q) in the section
model ``R = [[1, 0], [2L, M + N]]``.  Section points are pairs ``(L, K)`` with
``K = M + N`` as in :mod:`matbeta.models`.

Two conventions are kept for the parabolic eigenfunction on the last minor:

``"rho"`` (default)
    ``det[M - LL^t]_p^{rho + i s_p}`` with ``rho = (q+p)/4 - 1/2``; the other
    minors carry ``-1/2 + i(s_j - s_{j+1})``.  With this choice the integral of
    ``B_alpha u_{-s}`` is symmetric in each ``s_j`` and equals the product
    returned by :func:`spherical_transform_A`.
``"literal"``
    ``-1/2 + i s_p`` on the last minor as well.

Two variants of the Plancherel density differ in the argument of the
c-function factors: ``"rescaled"`` (default) evaluates them at ``2s`` because
the minors are quadratic in the horocyclic coordinate; ``"as_printed"`` uses
``s``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, HypothesisViolation, TruncationError
from .ground_fields import GroundField, complex_loggamma
from .matk import MatK
from .models import berezin_kernel, section_embed, section_project
from .sampling import haar_batch

R = GroundField.REAL

CONVENTIONS = ("rho", "literal")
DENSITY_VARIANTS = ("rescaled", "as_printed")

HypothesisError = HypothesisViolation


@dataclass(frozen=True)
class SphericalParams:
    """Spectral parameter ``s_1 >= ... >= s_p >= 0``."""

    s: tuple

    def __post_init__(self):
        s = tuple(float(x) for x in np.atleast_1d(self.s))
        if not s:
            raise DomainError("need at least one spectral parameter")
        if any(x < 0 for x in s) or any(a < b for a, b in zip(s, s[1:])):
            raise DomainError(f"s must satisfy s_1 >= ... >= s_p >= 0, got {s}")
        object.__setattr__(self, "s", s)

    @property
    def p(self) -> int:
        return len(self.s)


@dataclass(frozen=True)
class PlancherelPoint:
    s: SphericalParams
    density: float
    alpha: float

    def __post_init__(self):
        if not self.density >= 0:
            raise DomainError("Plancherel density must be non-negative")


@dataclass(frozen=True)
class SphericalValue:
    mean: complex
    stderr: float
    k_samples: int


@dataclass(frozen=True)
class InversionResult:
    value: float
    stderr: float           # Monte-Carlo error of the Haar averages
    quad_err: float         # |I(h) - I(2h)| on the s grid
    tail_fraction: float
    reference: float        # B_alpha at the point
    imag: float             # imaginary residue (zero up to MC noise)
    nodes: np.ndarray = dataclasses.field(default=None, repr=False)
    density: np.ndarray = dataclasses.field(default=None, repr=False)
    phi: np.ndarray = dataclasses.field(default=None, repr=False)

    @property
    def error(self) -> float:
        return math.hypot(self.stderr, self.quad_err)

    @property
    def rel_err(self) -> float:
        return abs(self.value - self.reference) / abs(self.reference)


def rho(p: int, q: int) -> float:
    return (q + p) / 4 - 0.5


def _spectral(s) -> np.ndarray:
    if isinstance(s, SphericalParams):
        return np.array(s.s)
    return np.atleast_1d(np.asarray(s, dtype=float))


def eigen_exponents(s, p: int, q: int, convention: str = "rho") -> np.ndarray:
    """Exponents ``e_j`` of ``det[M - LL^t]_j`` in ``u_s``; ``s`` may be batched on the last axis."""
    if convention not in CONVENTIONS:
        raise DomainError(f"unknown convention {convention!r}")
    s = np.asarray(s, dtype=float)
    if s.shape[-1] != p:
        raise DomainError(f"expected {p} spectral parameters, got {s.shape[-1]}")
    nxt = np.concatenate([s[..., 1:], np.zeros(s.shape[:-1] + (1,))], axis=-1)
    e = -0.5 + 1j * (s - nxt)
    if convention == "rho":
        e[..., -1] += rho(p, q) + 0.5
    return e


def _section_minor_logs(l: np.ndarray, k: np.ndarray) -> np.ndarray:
    """``log det[M - LL^t]_j`` for batched real ``L`` (.., p, q-p) and ``K`` (.., p, p)."""
    m = 0.5 * (k + np.swapaxes(k, -1, -2))
    w = m - l @ np.swapaxes(l, -1, -2)
    try:
        c = np.linalg.cholesky(w)
    except np.linalg.LinAlgError as exc:
        raise DomainError("M - LL^t is not positive definite") from exc
    return 2.0 * np.cumsum(np.log(np.diagonal(c, axis1=-2, axis2=-1)), axis=-1)


def _split(point):
    l, k = point
    l = l.data if isinstance(l, MatK) else np.asarray(l, dtype=float)
    k = k.data if isinstance(k, MatK) else np.asarray(k, dtype=float)
    if np.iscomplexobj(l) or np.iscomplexobj(k):
        raise DomainError("the O(p,q) section model is real")
    p = k.shape[0]
    return l.reshape(p, -1), k, p, p + l.reshape(p, -1).shape[1]


def u_s(point, s, q: int | None = None, convention: str = "rho") -> complex:
    """Parabolic eigenfunction ``prod_j det[M - LL^t]_j^{e_j}`` at a section point ``(L, K)``."""
    l, k, p, qq = _split(point)
    q = qq if q is None else q
    e = eigen_exponents(_spectral(s), p, q, convention)
    return complex(np.exp(np.sum(e * _section_minor_logs(l, k))))


def _ball_batch_minor_logs(z: np.ndarray, p: int, q: int) -> np.ndarray:
    x, y = z[..., : q - p], z[..., q - p:]
    inv = np.linalg.inv(np.eye(p) + y)
    k = -np.eye(p) + 2.0 * inv
    l = -inv @ x
    return _section_minor_logs(l, k)


def orbit_minor_logs(point, k_samples: int, rng) -> np.ndarray:
    """Minor logs along ``k_samples`` Haar-random points of the K-orbit of ``point``.

    The compact group acts in the ball model by ``z -> u z v^t`` with
    ``(u, v)`` Haar on O(p) x O(q); the result is transported back to the
    section model.
    """
    if k_samples < 1:
        raise DomainError("k_samples must be >= 1")
    l, k, p, q = _split(point)
    z = section_project(MatK(R, l), MatK(R, k)).data
    u = haar_batch(p, R, rng, k_samples)
    v = haar_batch(q, R, rng, k_samples)
    zk = u @ z @ np.swapaxes(v, -1, -2)
    out = _ball_batch_minor_logs(zk, p, q)
    if not np.all(np.isfinite(out)):
        raise DomainError("orbit left the domain")
    return out


def spherical_phi(point, s, k_samples: int, rng, q: int | None = None,
                  convention: str = "rho") -> SphericalValue:
    """Monte-Carlo Haar average of ``u_s`` over the K-orbit of ``point``."""
    l, k, p, qq = _split(point)
    q = qq if q is None else q
    logs = orbit_minor_logs(point, k_samples, rng)
    e = eigen_exponents(_spectral(s), p, q, convention)
    vals = np.exp(logs @ e)
    se = float(np.sqrt((vals.real.var() + vals.imag.var()) / max(k_samples - 1, 1))) if k_samples > 1 else math.inf
    return SphericalValue(complex(vals.mean()), se, k_samples)


def spherical_transform_A(alpha, s, p: int, q: int) -> complex:
    """Spherical transform of ``B_alpha``, normalized as the integral of ``B_alpha u_{-s}``.

    ``4^{alpha p} pi^{sum_k (k + (q-p)/2 - 1)} prod_k Gamma(alpha - rho + i s_k)
    Gamma(alpha - rho - i s_k) / Gamma(2 alpha - (p - k))``, the value of the
    section-wedge integral at ``lam_j = alpha + rho - (p-j)/2 - i s_j``,
    ``sig = 2 alpha``.
    """
    s = _spectral(s)
    if s.size != p:
        raise DomainError(f"expected {p} spectral parameters")
    a = alpha - rho(p, q)
    k = np.arange(1, p + 1)
    num = np.concatenate([a + 1j * s, a - 1j * s])
    den = 2 * alpha - (p - k)
    log = (np.sum(complex_loggamma(num)) - np.sum(complex_loggamma(den.astype(complex)))
           + alpha * p * math.log(4.0) + np.sum(k + (q - p) / 2 - 1) * math.log(math.pi))
    return complex(np.exp(log))


def _log_gamma_ratio_sq(a: float, x: np.ndarray) -> np.ndarray:
    """``log |Gamma(a + ix) / Gamma(ix)|^2`` for real ``x >= 0`` via ``|Gamma(ix)|^2 = pi / (x sinh pi x)``."""
    x = np.abs(np.asarray(x, dtype=float))
    if a == 0:
        return np.zeros_like(x)
    out = np.full(x.shape, -np.inf)
    pos = x > 0
    xp = x[pos]
    if a == 0.5:
        # |Gamma(1/2 + ix)|^2 = pi / cosh(pi x), so the ratio is x tanh(pi x)
        out[pos] = np.log(xp) + np.log(np.tanh(np.pi * xp))
        return out
    log_sinh = np.pi * xp + np.log1p(-np.exp(-2 * np.pi * xp)) - math.log(2.0)
    out[pos] = (2.0 * complex_loggamma(a + 1j * xp).real
                + np.log(xp) + log_sinh - math.log(math.pi))
    return out


def log_plancherel_density(s, alpha, p: int, q: int, variant: str = "rescaled") -> np.ndarray:
    """Log of the Plancherel integrand; ``s`` has shape (..., p), rows in the closed chamber."""
    if variant not in DENSITY_VARIANTS:
        raise DomainError(f"unknown variant {variant!r}")
    thr = rho(p, q)
    if not alpha > thr:
        raise HypothesisViolation(f"alpha = {alpha} must exceed (q+p)/4 - 1/2 = {thr}")
    s = np.asarray(s, dtype=float)
    if s.shape[-1] != p:
        raise DomainError(f"expected {p} spectral parameters")
    if np.any(s < 0) or np.any(np.diff(s, axis=-1) > 0):
        raise DomainError("s outside the chamber s_1 >= ... >= s_p >= 0")
    c = 2.0 if variant == "rescaled" else 1.0
    k = np.arange(1, p + 1)
    out = -np.sum([complex_loggamma(complex(2 * alpha - (p - kk))).real for kk in k])
    out = out + np.sum(2.0 * complex_loggamma(alpha - thr + 1j * s).real, axis=-1)
    out = out + np.sum(_log_gamma_ratio_sq((q - p) / 2, c * s), axis=-1)
    for i in range(p):
        for j in range(i + 1, p):
            for d in (s[..., i] - s[..., j], s[..., i] + s[..., j]):
                out = out + _log_gamma_ratio_sq(0.5, c * d)
    return out


def plancherel_density(s, alpha, p: int | None = None, q: int | None = None,
                       variant: str = "rescaled") -> float:
    """Non-negative Plancherel integrand at one spectral point (zero on the chamber walls)."""
    s = _spectral(s)
    p = s.size if p is None else p
    if q is None:
        raise DomainError("q is required")
    return float(np.exp(log_plancherel_density(s, alpha, p, q, variant)))


def _chamber_grid(s_grid: np.ndarray, p: int):
    mesh = np.stack(np.meshgrid(*([s_grid] * p), indexing="ij"), axis=-1).reshape(-1, p)
    keep = np.all(np.diff(mesh, axis=-1) <= 0, axis=-1)
    return mesh[keep]


def inversion_check(point, alpha, p: int, q: int, s_grid=None, k_samples: int = 20_000, rng=None,
                    variant: str = "rescaled", convention: str = "rho",
                    max_tail: float = 0.01) -> InversionResult:
    """Reconstruct ``B_alpha(point)`` from the Plancherel integral with Monte-Carlo ``phi_s``.

    The overall constant is fixed at the base point, where ``B_alpha = 1`` and
    ``phi_s = 1``; the reconstruction is therefore the density-weighted
    average of ``phi_s(point)`` over the chamber.  The same Haar draws serve
    every grid node, so the reconstruction is itself a mean over K samples and
    its standard error is exact.  ``s_grid`` is a uniform 1-D grid starting
    at 0 and is used on every axis.
    """
    l, k, pp, qq = _split(point)
    if (pp, qq) != (p, q):
        raise DomainError(f"point has shape (p, q) = {(pp, qq)}, expected {(p, q)}")
    if s_grid is None:
        s_grid = np.linspace(0.0, 12.0, 1201)
    s_grid = np.asarray(s_grid, dtype=float)
    h = float(s_grid[1] - s_grid[0])
    if s_grid[0] != 0 or not np.allclose(np.diff(s_grid), h):
        raise DomainError("s_grid must be uniform and start at 0")
    rng = np.random.default_rng(0) if rng is None else rng

    nodes = _chamber_grid(s_grid, p)
    dens = np.exp(log_plancherel_density(nodes, alpha, p, q, variant))

    # tail mass beyond the grid, from the same density on a doubled range
    ext = np.arange(0.0, 2 * s_grid[-1] + h / 2, h)
    ext_nodes = _chamber_grid(ext, p)
    ext_total = np.exp(log_plancherel_density(ext_nodes, alpha, p, q, variant)).sum()
    tail = float(1.0 - dens.sum() / ext_total) if ext_total > 0 else 1.0
    if tail > max_tail:
        raise TruncationError(f"estimated tail mass {tail:.3g} exceeds {max_tail:g}")

    logs = orbit_minor_logs(point, k_samples, rng)
    e = eigen_exponents(nodes, p, q, convention).T
    coarse = np.all(np.rint(nodes / h).astype(int) % 2 == 0, axis=-1)
    w_fine = dens / dens.sum()
    w_half = np.where(coarse, dens, 0.0) / dens[coarse].sum()
    fine, half = np.empty(k_samples, complex), np.empty(k_samples, complex)
    phi = np.zeros(len(nodes), complex)
    step = max(1, 4_000_000 // len(nodes))
    for i in range(0, k_samples, step):
        v = np.exp(logs[i:i + step] @ e)
        fine[i:i + step] = v @ w_fine
        half[i:i + step] = v @ w_half
        phi += v.sum(axis=0)
    phi /= k_samples
    val = fine.mean()
    se = float(fine.real.std(ddof=1) / math.sqrt(k_samples)) if k_samples > 1 else math.inf
    ref = berezin_kernel(section_project(MatK(R, l), MatK(R, k)), alpha, model="ball").real
    return InversionResult(float(val.real), se, float(abs(val.real - half.mean().real)), tail,
                           float(ref), float(val.imag), nodes, dens, phi)

def ball_point(p: int, q: int, radius: float, rng=None) -> tuple:
    """Section point ``(L, K)`` obtained from a ball point of operator norm ``radius``."""
    rng = np.random.default_rng(0) if rng is None else rng
    z = rng.standard_normal((p, q))
    z *= radius / np.linalg.norm(z, 2)
    return section_embed(MatK(R, z), p, q)


def base_point(p: int, q: int) -> tuple:
    return MatK(R, np.zeros((p, q - p))), MatK(R, np.eye(p))


def density_curve(alpha, q: int, s_values, variant: str = "rescaled") -> np.ndarray:
    """Rank-one density on a list of ``s`` values (convenience for plotting and tables)."""
    s = np.asarray(s_values, dtype=float).reshape(-1, 1)
    return np.exp(log_plancherel_density(s, alpha, 1, q, variant))
