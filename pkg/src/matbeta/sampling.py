"""Random points with exactly known proposal densities, and Haar samplers.

All samplers are vectorized: they return a batch of points together with the
log density of the generating procedure, in the Lebesgue normalization where
every free real component of a matrix entry contributes one coordinate.

Positive definite parts use a Cholesky parameterization ``T = G G*``; the
squared diagonal of ``G`` is beta-prime distributed and the strictly lower
entries are Student-t, with scales tied to the diagonal draws.  The change of
variables ``G -> T`` has Jacobian ``2^m prod_j g_jj^{d(m-j)+1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.special import betaln, gammaln

from .errors import ConfigError
from .ground_fields import GroundField
from .matk import MatK, quaternion_embed

__all__ = [
    "ProposalConfig",
    "SeededRng",
    "block_rng",
    "beta_prime_logpdf",
    "student_t_logpdf",
    "ConeSample",
    "sample_cone",
    "sample_antihermitian",
    "sample_wedge",
    "sample_section",
    "sample_siegel",
    "sample_so",
    "haar_unitary",
    "haar_batch",
]

R, C, H = GroundField.REAL, GroundField.COMPLEX, GroundField.QUATERNION


@dataclass
class ProposalConfig:
    """Tuning knobs of the importance-sampling proposals.

    ``shrink`` multiplies the matched beta-prime exponents (values below 1 make
    the proposal tails heavier than the integrand's), ``scale`` widens the
    Student-t parts, ``nu_margin`` is subtracted from the matched degrees of
    freedom, which are then clipped to ``[nu_min, nu_max]``.
    """

    shrink: float = 0.85
    scale: float = 1.25
    nu_margin: float = 0.5
    nu_min: float = 1.0
    nu_max: float = 12.0
    exp_floor: float = 0.05
    block_size: int = 1 << 15
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0 < self.shrink <= 1.5 and self.scale > 0 and self.nu_min > 0
                and self.nu_max >= self.nu_min and self.exp_floor > 0 and self.block_size > 0):
            raise ConfigError("invalid proposal configuration")

    @classmethod
    def from_dict(cls, d: dict) -> "ProposalConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown proposal keys: {sorted(unknown)}")
        return cls(**d)

    def for_family(self, fid: str) -> "ProposalConfig":
        over = self.overrides.get(fid)
        if not over:
            return self
        base = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "overrides"}
        base.update(over)
        return ProposalConfig(**base)


@dataclass(frozen=True)
class SeededRng:
    """Counter-based stream identified by ``(seed, stream)``."""

    seed: int
    stream: int = 0
    algorithm: str = "philox"

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & 0xFFFFFFFFFFFFFFFF, self.stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def block_rng(seed: int, block: int) -> np.random.Generator:
    return SeededRng(seed, block).generator()


# --- elementary densities ------------------------------------------------------

def beta_prime_sample(a, b, rng, size):
    x = rng.standard_gamma(a, size=size)
    y = rng.standard_gamma(b, size=size)
    return x / y


def beta_prime_logpdf(y, a, b):
    return (a - 1) * np.log(y) - (a + b) * np.log1p(y) - betaln(a, b)


def student_t_logpdf(x, nu, scale):
    """Log density of the isotropic ``k``-variate Student-t on the last axis of ``x``.

    ``scale`` broadcasts against ``x.shape[:-1]``.
    """
    x = np.asarray(x, dtype=float)
    k = x.shape[-1]
    z2 = np.sum(x ** 2, axis=-1) / np.asarray(scale) ** 2
    return (gammaln((nu + k) / 2) - gammaln(nu / 2) - 0.5 * k * np.log(nu * math.pi)
            - k * np.log(scale) - (nu + k) / 2 * np.log1p(z2 / nu))


def student_t_sample(rng, nu, scale, size, k):
    """Isotropic ``k``-variate Student-t draws, shape ``(size, k)``."""
    z = rng.standard_normal((size, k))
    g = rng.chisquare(nu, size=size)
    return np.asarray(scale)[..., None] * z / np.sqrt(g / nu)[:, None]


def _group(rng, nu, scale, size, k):
    x = student_t_sample(rng, nu, scale, size, k)
    return x, student_t_logpdf(x, nu, scale)


# --- cones ---------------------------------------------------------------------

@dataclass
class ConeSample:
    """Batch of PD matrices ``T`` (raw arrays; quaternionic ones embedded)."""

    T: np.ndarray
    y: np.ndarray        # squared Cholesky diagonal, shape (N, m)
    logq: np.ndarray


def _assemble(field_, comps):
    """Matrices from component arrays ``(..., d)``: real, complex, or quaternion-embedded."""
    if field_ is R:
        return comps[..., 0]
    if field_ is C:
        return comps[..., 0] + 1j * comps[..., 1]
    return quaternion_embed(comps[..., 0] + 1j * comps[..., 1], comps[..., 2] + 1j * comps[..., 3])


def sample_cone(m: int, field_, a, b, nu, rng, size: int, cfg: ProposalConfig | None = None) -> ConeSample:
    """PD hermitian ``m x m`` matrices over ``field_`` via ``T = G G*``.

    ``g_jj^2 ~ BetaPrime(a_j, b_j)``; each strictly lower entry ``g_ij`` is an
    isotropic ``d``-variate Student-t with ``nu_i`` degrees of freedom and scale
    ``cfg.scale * sqrt((1+y_i)(1+y_j) / nu_i)``.
    """
    cfg = cfg or ProposalConfig()
    field_ = GroundField.parse(field_)
    d = field_.dim
    a = np.broadcast_to(np.asarray(a, float), (m,))
    b = np.broadcast_to(np.asarray(b, float), (m,))
    nu = np.broadcast_to(np.asarray(nu, float), (m,))
    y = np.stack([beta_prime_sample(a[j], b[j], rng, size) for j in range(m)], axis=1)
    logq = np.zeros(size)
    for j in range(m):
        # T-density in the y variables: p(y_j) y_j^{-d(m-j-1)/2}, 0-based j
        logq += beta_prime_logpdf(y[:, j], a[j], b[j]) - 0.5 * d * (m - j - 1) * np.log(y[:, j])
    comps = np.zeros((size, m, m, 4))
    for i in range(m):
        for j in range(i):
            sc = cfg.scale * np.sqrt((1 + y[:, i]) * (1 + y[:, j]) / nu[i])
            x, lq = _group(rng, nu[i], sc, size, d)
            comps[:, i, j, :d] = x
            logq += lq
    comps[:, range(m), range(m), 0] = np.sqrt(y)
    g = _assemble(field_, comps)
    t = g @ np.conj(np.swapaxes(g, -1, -2))
    return ConeSample(t, y, logq)


# --- standardized extras ---------------------------------------------------------
#
# The non-cone coordinates are drawn in a standardized form X' and mapped by
# X = A X' A* with A the Cholesky factor of 1 + (hermitian part).  Leading
# minors then factor, det[1 + T + X]_j = det[1 + T]_j det[1 + X']_j, and the
# real-linear map X' -> A X' A* has Jacobian Det_K(1 + T)^{dim/n}, a character
# of the triangular group fixed by homogeneity.

def chol_logdet_k(a: np.ndarray, kind: str) -> np.ndarray:
    """``log Det_K(A A*)`` of the ``n x n`` K-matrix represented by the ambient factor ``a``.

    ``kind``: ``"R"``/``"C"`` (plain), ``"H"`` (quaternion embedding), ``"JR"``
    (real block form of a complex matrix), ``"JC"`` (quaternion embedding in
    the J-structured complex model).
    """
    ld = np.sum(np.log(np.diagonal(a, axis1=-2, axis2=-1).real), axis=-1)
    return 2 * ld if kind in ("R", "C") else ld


def antihermitian_dim(n: int, kind: str) -> int:
    return {"R": n * (n - 1) // 2, "C": n * n, "H": n * (2 * n + 1),
            "JR": n * (n - 1), "JC": n * (2 * n - 1)}[kind]


def _antiherm_prime(n, kind, nu_diag, nu_off, rng, size, cfg):
    """Standardized anti-hermitian (or J-structured anti-hermitian) matrices."""
    logq = np.zeros(size)
    nu_diag = np.broadcast_to(np.asarray(nu_diag, float), (n,))
    nu_off = np.broadcast_to(np.asarray(nu_off, float), (n,))
    if kind in ("R", "C", "H"):
        d = GroundField.parse(kind).dim
        comps = np.zeros((size, n, n, 4))
        for i in range(n):
            if d > 1:
                x, lq = _group(rng, nu_diag[i], cfg.scale / math.sqrt(nu_diag[i]), size, d - 1)
                comps[:, i, i, 1:d] = x
                logq += lq
            for j in range(i):
                x, lq = _group(rng, nu_off[i], cfg.scale / math.sqrt(nu_off[i]), size, d)
                comps[:, i, j, :d] = x
                logq += lq
        diag = comps.copy()
        diag[:, np.tril_indices(n, -1)[0], np.tril_indices(n, -1)[1]] = 0
        low = comps - diag
        lowm = _assemble(GroundField.parse(kind), low)
        s = lowm - np.conj(np.swapaxes(lowm, -1, -2))
        if d > 1:
            s = s + _assemble(GroundField.parse(kind), diag)
        return s, logq
    real = kind == "JR"
    s = np.zeros((size, 2 * n, 2 * n), dtype=float if real else complex)
    for i in range(n):
        if not real:
            x, lq = _group(rng, nu_diag[i], cfg.scale / math.sqrt(nu_diag[i]), size, 1)
            s[:, 2 * i, 2 * i] = 1j * x[:, 0]
            s[:, 2 * i + 1, 2 * i + 1] = 1j * x[:, 0]
            logq += lq
        for j in range(i):
            x, lq = _group(rng, nu_off[i], cfg.scale / math.sqrt(nu_off[i]), size, 2 if real else 4)
            logq += lq
            blk = _so_blocks(real, x)
            s[:, 2 * i:2 * i + 2, 2 * j:2 * j + 2] = blk
            s[:, 2 * j:2 * j + 2, 2 * i:2 * i + 2] = -np.conj(np.swapaxes(blk, -1, -2))
    return s, logq


def _so_blocks(real, comps):
    """2x2 blocks of the J-structured anti-hermitian part from component arrays."""
    if real:
        al, be = comps[..., 0], comps[..., 1]
        return np.stack([np.stack([al, be], -1), np.stack([be, -al], -1)], -2)
    a = comps[..., 0] + 1j * comps[..., 1]
    bb = comps[..., 2] + 1j * comps[..., 3]
    return np.stack([np.stack([a, bb], -1), np.stack([np.conj(bb), -np.conj(a)], -1)], -2)


def sample_antihermitian(herm: np.ndarray, kind: str, nu_diag, nu_off, rng, cfg: ProposalConfig | None = None):
    """Anti-hermitian ``S = A S' A*`` with ``A = chol(1 + herm)``; returns ``(S, logq)``.

    ``S'`` has independent isotropic Student-t groups (one per diagonal entry's
    imaginary part, one per strictly lower entry) of scale ``cfg.scale / sqrt(nu)``.
    """
    cfg = cfg or ProposalConfig()
    size, m, _ = herm.shape
    n = m // 2 if kind in ("H", "JR", "JC") else m
    a = np.linalg.cholesky(np.eye(m) + herm)
    sp, logq = _antiherm_prime(n, kind, nu_diag, nu_off, rng, size, cfg)
    s = a @ sp @ np.conj(np.swapaxes(a, -1, -2))
    if kind in ("R", "JR"):
        s = s.real
    logq = logq - antihermitian_dim(n, kind) / n * chol_logdet_k(a, kind) if n else logq
    return s, logq


# --- family samplers ---------------------------------------------------------------

def sample_wedge(n, field_, a, b, nu_t, nu_diag, nu_off, rng, size, cfg=None):
    """Dissipative ``R = T + S``; returns ``(T, S, y, logq)``."""
    field_ = GroundField.parse(field_)
    cone = sample_cone(n, field_, a, b, nu_t, rng, size, cfg)
    s, lq = sample_antihermitian(cone.T, field_.value, nu_diag, nu_off, rng, cfg)
    return cone.T, s, cone.y, cone.logq + lq


def sample_section(p, q, field_, a, b, nu_t, nu_l, nu_diag, nu_off, rng, size, cfg=None):
    """Section point ``(L, M, N)`` with ``M = W + L L*`` and ``W`` from :func:`sample_cone`.

    ``L = B L'`` with ``B = chol(1 + W)`` and the rows of ``L'`` isotropic
    Student-t; ``N`` is standardized by ``chol(1 + M)``.  The shear ``W -> M``
    has unit Jacobian.  Returns ``(L, M, N, W, y, logq)``.
    """
    cfg = cfg or ProposalConfig()
    field_ = GroundField.parse(field_)
    d = field_.dim
    cone = sample_cone(p, field_, a, b, nu_t, rng, size, cfg)
    k = q - p
    nu_l = np.broadcast_to(np.asarray(nu_l, float), (p,))
    logq = cone.logq.copy()
    comps = np.zeros((size, p, k, 4))
    for i in range(p):
        x, lq = _group(rng, nu_l[i], cfg.scale / math.sqrt(nu_l[i]), size, k * d)
        comps[:, i, :, :d] = x.reshape(size, k, d)
        logq += lq
    lp = _assemble(field_, comps)
    m = cone.T.shape[-1]
    bmat = np.linalg.cholesky(np.eye(m) + cone.T)
    l = bmat @ lp
    # left multiplication by B on p x k matrices: |Det_K B|^{d k}
    logq -= d * k * 0.5 * chol_logdet_k(bmat, field_.value)
    llh = l @ np.conj(np.swapaxes(l, -1, -2))
    mm = cone.T + (llh.real if field_ is R else llh)
    nmat, lq = sample_antihermitian(mm, field_.value, nu_diag, nu_off, rng, cfg)
    return l, mm, nmat, cone.T, cone.y, logq + lq


def _sym_prime(n, nu_diag, nu_off, rng, size, cfg, complex_entries):
    nc = 2 if complex_entries else 1
    s = np.zeros((size, n, n), dtype=complex if complex_entries else float)
    logq = np.zeros(size)
    nu_diag = np.broadcast_to(np.asarray(nu_diag, float), (n,))
    nu_off = np.broadcast_to(np.asarray(nu_off, float), (n,))
    for i in range(n):
        for j in range(i + 1):
            nu = nu_diag[i] if i == j else nu_off[i]
            x, lq = _group(rng, nu, cfg.scale / math.sqrt(nu), size, nc)
            logq += lq
            v = x[:, 0] + 1j * x[:, 1] if complex_entries else x[:, 0]
            s[:, i, j] = v
            s[:, j, i] = v
    return s, logq


def sample_siegel(variant, n, a, b, nu_t, nu_diag, nu_off, rng, size, cfg=None):
    """Siegel-type points with ``S = A S' A^t``, ``A = chol(1 + T)``.

    ``"Sp2nR"``: ``R = T + iS`` with ``T`` real symmetric PD, ``S`` real symmetric;
    returns ``(R, T, y, logq)`` with ``R`` complex.
    ``"Sp2nC"``: ``R = T + S j`` with ``T`` complex hermitian PD and ``S`` complex
    symmetric; ``R`` is returned as its quaternionic embedding.
    """
    cfg = cfg or ProposalConfig()
    if variant not in ("Sp2nR", "Sp2nC"):
        raise ConfigError(f"unknown Siegel variant {variant!r}")
    cplx = variant == "Sp2nC"
    cone = sample_cone(n, C if cplx else R, a, b, nu_t, rng, size, cfg)
    am = np.linalg.cholesky(np.eye(n) + cone.T)
    sp, lq = _sym_prime(n, nu_diag, nu_off, rng, size, cfg, cplx)
    s = am @ sp @ np.swapaxes(am, -1, -2)
    # symmetric matrices: real dim n(n+1)/2 (x2 for complex entries)
    dim = n * (n + 1) // 2 * (2 if cplx else 1)
    logq = cone.logq + lq - dim / n * chol_logdet_k(am, "C" if cplx else "R")
    r = quaternion_embed(cone.T, s) if cplx else cone.T + 1j * s
    return r, cone.T, cone.y, logq


def _complex_to_real_blocks(t):
    """``tau -> tau°``: each complex entry ``x + iy`` becomes ``[[x, -y], [y, x]]``."""
    size, n, _ = t.shape
    out = np.zeros((size, 2 * n, 2 * n))
    out[:, 0::2, 0::2] = t.real
    out[:, 1::2, 1::2] = t.real
    out[:, 0::2, 1::2] = -t.imag
    out[:, 1::2, 0::2] = t.imag
    return out


def sample_so(variant, n, a, b, nu_t, nu_diag, nu_off, nu_y, rng, size, cfg=None, odd=False):
    """J-structured models of ``O(m,C)/O(m)`` (``"OnC"``) and ``SO*(2m)/U(m)`` (``"SOstar"``).

    The hermitian part is ``tau°`` for a complex hermitian PD ``tau`` (real model)
    or the embedding of a quaternionic hermitian PD ``tau`` (complex model).
    With ``odd`` the bordered ``(2 + 2n)`` model is produced: the free border
    column ``y = 2 B y'`` (``B = chol(1 + W)``, ``y'`` Student-t per pair) and
    ``T' = W + (x*x + y y*)/4``, a unit-Jacobian shear.  Returns ``(R, W, y_diag, logq)``.
    """
    cfg = cfg or ProposalConfig()
    if variant == "OnC":
        real, kind, fc = True, "JR", C
    elif variant == "SOstar":
        real, kind, fc = False, "JC", H
    else:
        raise ConfigError(f"unknown SO variant {variant!r}")
    cone = sample_cone(n, fc, a, b, nu_t, rng, size, cfg)
    w = _complex_to_real_blocks(cone.T) if real else cone.T
    logq = cone.logq
    tprime = w
    k = 2 * n
    if odd:
        nc = 1 if real else 2
        nu_y = np.broadcast_to(np.asarray(nu_y, float), (n,))
        comps = np.zeros((size, k, nc))
        for i in range(n):
            x, lq = _group(rng, nu_y[i], cfg.scale / math.sqrt(nu_y[i]), size, 2 * nc)
            comps[:, 2 * i:2 * i + 2, :] = x.reshape(size, 2, nc)
            logq = logq + lq
        yp = comps[..., 0] if real else comps[..., 0] + 1j * comps[..., 1]
        bmat = np.linalg.cholesky(np.eye(k) + w)
        yv = 2 * np.einsum("nij,nj->ni", bmat, yp)
        # y' -> 2 B y': 2^{real dim} |det_R B| (B real) or |det_C B|^2 (B complex)
        ld = np.sum(np.log(np.diagonal(bmat, axis1=-2, axis2=-1).real), axis=-1)
        logq = logq - (k * nc) * math.log(2.0) - (1 if real else 2) * ld
        xv = np.empty_like(yv)
        xv[:, 0::2] = yv[:, 1::2]
        xv[:, 1::2] = -yv[:, 0::2]
        border = (np.conj(xv)[:, :, None] * xv[:, None, :] + yv[:, :, None] * np.conj(yv)[:, None, :]) / 4
        tprime = w + (border.real if real else border)
    s, lq = sample_antihermitian(tprime, kind, nu_diag, nu_off, rng, cfg)
    logq = logq + lq
    if not odd:
        return w + s, w, cone.y, logq
    big = np.zeros((size, k + 2, k + 2), dtype=float if real else complex)
    big[:, 0, 0] = 1
    big[:, 1, 1] = 1
    big[:, 0, 2:] = xv
    big[:, 2:, 1] = yv
    big[:, 2:, 2:] = tprime + s
    return big, w, cone.y, logq


# --- Haar measure ------------------------------------------------------------------

def _qr_haar(x):
    q, r = np.linalg.qr(x)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[..., None, :]


def _quaternion_gram_schmidt(e):
    """Gram-Schmidt on quaternionic columns (pairs of embedded complex columns)."""
    e = e.copy()
    n = e.shape[-1] // 2
    for k in range(n):
        v = e[..., :, 2 * k:2 * k + 2]
        for j in range(k):
            qj = e[..., :, 2 * j:2 * j + 2]
            v = v - qj @ (np.conj(np.swapaxes(qj, -1, -2)) @ v)
        nrm = np.sqrt(np.sum(np.abs(v[..., :, 0]) ** 2, axis=-1))
        e[..., :, 2 * k:2 * k + 2] = v / nrm[..., None, None]
    return e


def haar_batch(n: int, field_, rng, size: int) -> np.ndarray:
    """``size`` Haar-distributed elements of O(n), U(n) or Sp(n) as raw arrays."""
    field_ = GroundField.parse(field_)
    if field_ is R:
        return _qr_haar(rng.standard_normal((size, n, n)))
    if field_ is C:
        return _qr_haar((rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))) / math.sqrt(2))
    z1 = rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))
    z2 = rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))
    return _quaternion_gram_schmidt(quaternion_embed(z1, z2))


def haar_unitary(n: int, field_, rng) -> MatK:
    field_ = GroundField.parse(field_)
    return MatK(field_, haar_batch(n, field_, rng, 1)[0])
