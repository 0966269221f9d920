"""Monte-Carlo verification of the left-hand sides, the reduction oracle and verdicts.

The integrand of every family is assembled from the sampled matrices
directly: leading minors of the numerator matrix (``T``, ``M - L L*`` or
``R + R*``) and of the denominator matrix (``1 + R``) come from an unpivoted
LU factorization, whose cumulative pivot logs give the branch of
``det^{sigma|tau}`` defined through eigenvalues.

Samples are produced in fixed-size blocks; block ``b`` uses a Philox stream
keyed by ``(seed, b)``.  Shards own contiguous block ranges and the per-block
moments are merged by a fixed pairwise tree, so an estimate does not depend on
the shard count at all, bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .closed_form import (
    ParamSet,
    convergence_check,
    gamma_arguments,
    get_family,
)
from .errors import ConvergenceError, DomainError, NonfiniteWeight, QuadratureFailure
from .ground_fields import GroundField
from .matk import batch_leading_log_det_lu
from .sampling import (
    ProposalConfig,
    block_rng,
    sample_cone,
    sample_section,
    sample_siegel,
    sample_so,
    sample_wedge,
)

__all__ = [
    "EstimateResult",
    "Verdict",
    "make_plan",
    "estimate_lhs",
    "weight_diagnostics",
    "compare",
    "record",
    "divergence_ladder",
    "DivergenceReport",
    "reduction_oracle",
]

R, C, H = GroundField.REAL, GroundField.COMPLEX, GroundField.QUATERNION

# family id -> (model, field or variant, odd)
MODELS = {
    "F0_1": ("cone", R), "F0_2": ("cone", C), "F0_3": ("cone", H),
    "F0_4": ("wedge", R), "F0_5": ("wedge", C), "F0_6": ("wedge", H),
    "F0_7": ("section", R), "F0_8": ("section", C), "F0_9": ("section", H),
    "F0_10": ("siegel", "Sp2nR"), "F0_11": ("siegel", "Sp2nC"),
    "F0_14": ("so", "OnC"), "F0_15": ("so", "SOstar"),
    "F0_17": ("so_odd", "OnC"), "F0_18": ("so_odd", "SOstar"),
}


def kappa(fid: str, ps: ParamSet) -> float:
    """Exponent of the measure factor, written as ``prod y_i^{-kappa}`` in the Cholesky variables."""
    n = ps.r
    return {
        "F0_1": (n + 1) / 2, "F0_2": n, "F0_3": 2 * n - 1,
        "F0_4": n, "F0_5": 2 * n, "F0_6": 4 * n,
        "F0_7": (n + (ps.q or n)) / 2, "F0_8": n + (ps.q or n), "F0_9": 2 * (n + (ps.q or n)),
        "F0_10": n + 1, "F0_11": 2 * n + 1,
        "F0_14": 2 * n - 1, "F0_15": 2 * (2 * n - 1),
        "F0_17": 2 * n, "F0_18": 4 * n,
    }[fid]


def cone_field(fid: str) -> GroundField:
    model, f = MODELS[fid]
    if model in ("cone", "wedge", "section"):
        return f
    return {"Sp2nR": R, "Sp2nC": C, "OnC": C, "SOstar": H}[f]


# --- integrand pieces ------------------------------------------------------------

def _minors(x, quaternion=False, step=1, offset=0, r=None):
    """Logs of leading minors; quaternionic ones from the embedding, ``step``/``offset`` select sizes."""
    cum = batch_leading_log_det_lu(x)
    if quaternion:
        return 0.5 * cum[..., 1::2].real
    sel = cum[..., offset::step]
    return sel[..., :r] if r is not None else sel


def _diffs(v):
    v = np.asarray(v, dtype=complex)
    return v - np.append(v[1:], 0.0)


def _log_integrand(lt, l1, ps: ParamSet, kap: float, scale: float = 1.0):
    """``sum dlam_j Lt_j - sum (dsig_j L1_j + dtau_j conj L1_j) - kappa Lt_r``.

    ``scale`` multiplies every exponent (1/2 for the J-structured models).
    """
    dl, ds = _diffs(ps.lam) * scale, _diffs(ps.sig) * scale
    out = lt @ dl - l1 @ ds - kap * lt[..., -1]
    if ps.tau is not None:
        out = out - np.conj(l1) @ (_diffs(ps.tau) * scale)
    return out


@dataclass
class Plan:
    """A family/parameter pair bound to its proposal: ``draw(rng, size) -> (log f, log q)``."""

    fid: str
    ps: ParamSet
    cfg: ProposalConfig
    a: np.ndarray
    b: np.ndarray
    nus: dict
    draw: object = field(repr=False, default=None)


def _nu(decay, k, cfg):
    return float(np.clip(decay - k - cfg.nu_margin, cfg.nu_min, cfg.nu_max))


def make_plan(fid: str, ps: ParamSet, cfg: ProposalConfig | None = None) -> Plan:
    """Bind the proposal to the family.

    Beta-prime exponents: ``a_i`` is the exact small-``y_i`` exponent of the
    integrand times the Cholesky Jacobian, ``b_i`` the large-``y_i`` decay read
    off the second numerator Gamma argument; both are multiplied by
    ``cfg.shrink``.  Student-t degrees of freedom come from the polynomial
    decay of the integrand along each coordinate group.
    """
    fam = get_family(fid)
    ps.validate_for(fam)
    cfg = (cfg or ProposalConfig()).for_family(fid)
    model, kind = MODELS[fid]
    cf = cone_field(fid)
    d, m = cf.dim, ps.r
    kap = kappa(fid, ps)
    lam = np.real(np.asarray(ps.lam))
    alpha = np.array([lam[i] - kap + d * (m - i - 1) / 2 + 1 for i in range(m)])
    second = [v.real for k, kind_, _, v in gamma_arguments(fam, ps) if kind_ == "num"][1::2]
    a = np.maximum(cfg.shrink * alpha, cfg.exp_floor)
    b = np.maximum(cfg.shrink * np.array(second), cfg.exp_floor)
    stot = np.real(np.asarray(ps.sig)) + (np.real(np.asarray(ps.tau)) if ps.tau is not None else 0)
    quad = lambda k: np.array([_nu(2 * s, k, cfg) for s in stot])
    lin = lambda k: np.array([_nu(s, k, cfg) for s in stot])
    nus = {"t": quad(d)}
    plan = Plan(fid, ps, cfg, a, b, nus)

    if model == "cone":
        q = cf is H

        def draw(rng, size):
            c = sample_cone(m, cf, a, b, nus["t"], rng, size, cfg)
            eye = np.eye(c.T.shape[-1])
            # T = G G* with triangular G, so its leading minors are partial products of y
            lt = np.cumsum(np.log(c.y), axis=-1)
            l1 = _minors(eye + c.T, q)
            return _log_integrand(lt, l1, ps, kap), c.logq

    elif model == "wedge":
        q = cf is H
        nus["diag"] = lin(3) if cf is H else lin(1)
        nus["off"] = quad(d)

        def draw(rng, size):
            t, s, y, logq = sample_wedge(m, cf, a, b, nus["t"], nus["diag"], nus["off"], rng, size, cfg)
            eye = np.eye(t.shape[-1])
            lt = _minors(t, q)
            l1 = _minors(eye + t + s, q)
            return _log_integrand(lt, l1, ps, kap), logq

    elif model == "section":
        q = cf is H
        pq = ps.q
        nus["l"] = quad((pq - m) * d)
        nus["diag"] = lin(3) if cf is H else lin(1)
        nus["off"] = quad(d)

        def draw(rng, size):
            l, mm, nn, w, y, logq = sample_section(m, pq, cf, a, b, nus["t"], nus["l"], nus["diag"],
                                                   nus["off"], rng, size, cfg)
            eye = np.eye(mm.shape[-1])
            llh = l @ np.conj(np.swapaxes(l, -1, -2))
            lt = _minors(mm - (llh.real if cf is R else llh), q)
            l1 = _minors(eye + mm + nn, q)
            return _log_integrand(lt, l1, ps, kap), logq

    elif model == "siegel":
        if kind == "Sp2nR":
            nus["diag"], nus["off"] = lin(1), quad(1)
        else:
            nus["diag"], nus["off"] = lin(2), quad(2)

        def draw(rng, size):
            rr, t, y, logq = sample_siegel(kind, m, a, b, nus["t"], nus["diag"], nus["off"], rng, size, cfg)
            lt = _minors(t)
            eye = np.eye(rr.shape[-1])
            l1 = _minors(eye + rr, quaternion=(kind == "Sp2nC"))
            return _log_integrand(lt, l1, ps, kap), logq

    else:
        odd = model == "so_odd"
        nus["diag"] = lin(1)
        nus["off"] = quad(2 if kind == "OnC" else 4)
        nus["y"] = quad(2 if kind == "OnC" else 4)
        off = 3 if odd else 1

        def draw(rng, size):
            rr, w, y, logq = sample_so(kind, m, a, b, nus["t"], nus["diag"], nus["off"], nus["y"],
                                       rng, size, cfg, odd=odd)
            eye = np.eye(rr.shape[-1])
            num = rr + np.conj(np.swapaxes(rr, -1, -2)) if odd else w
            lt = _minors(num, step=2, offset=off)
            l1 = _minors(eye + rr, step=2, offset=off)
            if kind == "OnC":
                lt, l1 = lt.real, l1.real
            # exponents (lam_j - lam_{j+1})/2 act on minors of even size;
            # kappa is stated for the half-logs, hence kappa / 2 on the full logs
            return _log_integrand(lt, l1, ps, kap / 2, scale=0.5) + 0j, logq

    plan.draw = draw
    return plan


# --- moments and their deterministic reduction -----------------------------------

@dataclass(frozen=True)
class _Moments:
    n: int
    mean: complex
    m2_re: float
    m2_im: float

    @staticmethod
    def of(w: np.ndarray) -> "_Moments":
        mu = complex(np.mean(w))
        return _Moments(len(w), mu, float(np.sum((w.real - mu.real) ** 2)),
                        float(np.sum((w.imag - mu.imag) ** 2)))

    def merge(self, o: "_Moments") -> "_Moments":
        n = self.n + o.n
        delta = o.mean - self.mean
        f = self.n * o.n / n
        return _Moments(n, self.mean + delta * (o.n / n), self.m2_re + o.m2_re + delta.real ** 2 * f,
                        self.m2_im + o.m2_im + delta.imag ** 2 * f)


def _pairwise(items):
    items = list(items)
    while len(items) > 1:
        nxt = [items[i].merge(items[i + 1]) for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def _block_sizes(n_samples: int, block: int):
    nb, rem = divmod(n_samples, block)
    return [block] * nb + ([rem] if rem else [])


def _weights(plan: Plan, seed: int, b: int, size: int) -> np.ndarray:
    logf, logq = plan.draw(block_rng(seed, b), size)
    w = np.exp(logf - logq)
    if not np.all(np.isfinite(w)):
        raise NonfiniteWeight(f"{plan.fid}: non-finite importance weight in block {b}")
    return w


@dataclass
class EstimateResult:
    family: str
    params: ParamSet
    mean: complex
    stderr: float
    stderr_re: float
    stderr_im: float
    n_samples: int
    seed: int
    shards: int

    def to_dict(self) -> dict:
        return {"family": self.family, "params": self.params.to_dict(),
                "mean": {"re": self.mean.real, "im": self.mean.imag}, "stderr": self.stderr,
                "n": self.n_samples, "seed": self.seed, "shards": self.shards}


def _check(fid, ps, allow_divergent):
    rep = convergence_check(fid, ps)
    if not rep.ok and not allow_divergent:
        err = ConvergenceError(f"{fid}: parameters outside the convergence domain: "
                               + ", ".join(f"{t} = {v.real:g}" for t, v in rep.violations))
        err.report = rep
        raise err
    return rep


def estimate_lhs(fid: str, ps: ParamSet, n_samples: int = 1_000_000, seed: int = 0, shards: int = 1,
                 cfg: ProposalConfig | None = None, allow_divergent: bool = False) -> EstimateResult:
    """Importance-sampling estimate of the family's integral."""
    if n_samples < 2:
        raise DomainError("need at least two samples")
    if shards < 1:
        raise DomainError("shards must be positive")
    fid = get_family(fid).id
    _check(fid, ps, allow_divergent)
    plan = make_plan(fid, ps, cfg)
    sizes = _block_sizes(int(n_samples), plan.cfg.block_size)
    chunks = np.array_split(np.arange(len(sizes)), min(shards, len(sizes)))

    def run(idx):
        return [_Moments.of(_weights(plan, seed, int(b), sizes[b])) for b in idx]

    if len(chunks) == 1:
        parts = run(chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as ex:
            parts = [m for res in ex.map(run, chunks) for m in res]
    tot = _pairwise(parts)
    n = tot.n
    se_re = math.sqrt(tot.m2_re / (n - 1) / n)
    se_im = math.sqrt(tot.m2_im / (n - 1) / n)
    return EstimateResult(fid, ps, tot.mean, math.hypot(se_re, se_im), se_re, se_im, n, seed, shards)


def weight_diagnostics(fid: str, ps: ParamSet, n_samples: int = 200_000, seed: int = 0,
                       cfg: ProposalConfig | None = None, allow_divergent: bool = False) -> dict:
    """Tail diagnostics of ``|w|``: top-1% share of the total and a Hill tail-index estimate."""
    fid = get_family(fid).id
    _check(fid, ps, allow_divergent)
    plan = make_plan(fid, ps, cfg)
    sizes = _block_sizes(int(n_samples), plan.cfg.block_size)
    w = np.abs(np.concatenate([_weights(plan, seed, b, s) for b, s in enumerate(sizes)]))
    return {"top1_share": top_share(w, 0.01), "hill_alpha": hill_alpha(w), "n": len(w)}


def top_share(w: np.ndarray, frac: float = 0.01) -> float:
    w = np.sort(np.abs(w))
    k = max(1, int(len(w) * frac))
    tot = w.sum()
    return float(w[-k:].sum() / tot) if tot > 0 else 0.0


def hill_alpha(w: np.ndarray, k: int | None = None) -> float:
    """Hill estimator of the tail index from the ``k`` largest values (``k = sqrt(N)`` by default)."""
    w = np.sort(np.abs(w))
    w = w[w > 0]
    k = k or max(10, int(math.sqrt(len(w))))
    k = min(k, len(w) - 1)
    top = w[-k:]
    base = w[-k - 1]
    s = np.mean(np.log(top / base))
    return float(1.0 / s) if s > 0 else float("inf")


# --- comparisons ----------------------------------------------------------------------

@dataclass
class Verdict:
    passed: bool | None
    z: float
    z_re: float
    z_im: float
    rel_err: float
    z_max: float
    rel_max: float
    source: str
    mode: str = "absolute"      # or "ratio"
    ratio: complex | None = None

    @property
    def label(self) -> str:
        if self.mode == "ratio":
            return "ratio"
        return "pass" if self.passed else "fail"


def compare(est: EstimateResult, reference: complex, z_max: float = 3.0, rel_max: float = 0.02,
            source: str = "closed_form") -> Verdict:
    """Component-wise z-scores and relative error; ratio mode for undetermined constants."""
    reference = complex(reference)
    if not (math.isfinite(reference.real) and math.isfinite(reference.imag)):
        raise DomainError("reference must be finite")
    diff = est.mean - reference
    z_re = diff.real / est.stderr_re if est.stderr_re > 0 else (0.0 if diff.real == 0 else math.inf)
    z_im = diff.imag / est.stderr_im if est.stderr_im > 0 else (0.0 if diff.imag == 0 else math.inf)
    z = max(abs(z_re), abs(z_im))
    rel = abs(diff) / abs(reference) if reference != 0 else abs(diff)
    if get_family(est.family).unknown_constant:
        return Verdict(None, z, z_re, z_im, rel, z_max, rel_max, source, "ratio", est.mean / reference)
    return Verdict(bool(z <= z_max and rel <= rel_max), z, z_re, z_im, rel, z_max, rel_max, source)


def record(est: EstimateResult, reference: complex, verdict: Verdict) -> dict:
    """JSON-ready record with the fixed key set."""
    p = est.params
    rank = {"p": p.p, "q": p.q} if p.p is not None else {"n": p.n}

    def vec(v):
        return None if v is None else [{"re": x.real, "im": x.imag} for x in v]

    rec = {
        "family": est.family,
        "params": {"lambda": vec(p.lam), "sigma": vec(p.sig), "tau": vec(p.tau), "rank": rank},
        "mean": {"re": est.mean.real, "im": est.mean.imag},
        "stderr": est.stderr,
        "n": est.n_samples,
        "seed": est.seed,
        "shards": est.shards,
        "reference": {"re": complex(reference).real, "im": complex(reference).imag},
        "z": verdict.z,
        "rel_err": verdict.rel_err,
        "z_max": verdict.z_max,
        "rel_max": verdict.rel_max,
        "source": verdict.source,
        "verdict": verdict.label,
    }
    if verdict.ratio is not None:
        rec["ratio"] = {"re": verdict.ratio.real, "im": verdict.ratio.imag}
    return rec


# --- divergence ladder --------------------------------------------------------------

@dataclass
class DivergenceReport:
    ladder: list           # (N, |estimate|, stderr)
    hill_alpha: float
    non_decreasing: bool
    divergent: bool
    convergence_ok: bool


def divergence_ladder(fid: str, ps: ParamSet, seed: int = 0, max_exp: int = 7,
                      cfg: ProposalConfig | None = None, alpha_crit: float = 1.25) -> DivergenceReport:
    """Prefix estimates at ``N = 10^2 .. 10^max_exp`` from one stream.

    The flag is raised when the Hill estimate of the weight tail index is at or
    below ``alpha_crit`` (a tail index at most 1 means the mean is infinite), or
    when the estimate keeps growing by more than twice the previous rung's
    error bar at every rung of the last three decades.
    """
    fid = get_family(fid).id
    rep = convergence_check(fid, ps)
    plan = make_plan(fid, ps, cfg)
    n_max = 10 ** max_exp
    rungs = [10 ** e for e in range(2, max_exp + 1)]
    sizes = _block_sizes(n_max, plan.cfg.block_size)
    acc = None
    done = 0
    ladder = []
    tail = []
    ri = 0
    for b, s in enumerate(sizes):
        w = _weights(plan, seed, b, s)
        tail.append(np.sort(np.abs(w))[-2000:])
        start = 0
        while ri < len(rungs) and rungs[ri] <= done + s:
            cut = rungs[ri] - done
            piece = _Moments.of(w[start:cut])
            acc = piece if acc is None else acc.merge(piece)
            start = cut
            nn = acc.n
            se = math.sqrt((acc.m2_re + acc.m2_im) / (nn - 1) / nn)
            ladder.append((nn, abs(acc.mean), se))
            ri += 1
        if start < s:
            piece = _Moments.of(w[start:])
            acc = piece if acc is None else acc.merge(piece)
        done += s
    alpha = hill_alpha(np.concatenate(tail), k=max(10, int(math.sqrt(n_max))))
    mags = [m for _, m, _ in ladder]
    nondec = all(mags[i + 1] >= mags[i] for i in range(len(mags) - 1))
    # prefix estimates are nested, so a step is compared with the earlier rung's error
    growth = len(ladder) >= 4 and all(ladder[i + 1][1] - ladder[i][1] > 2.0 * ladder[i][2]
                                      for i in range(len(ladder) - 4, len(ladder) - 1))
    return DivergenceReport(ladder, alpha, nondec, bool(alpha <= alpha_crit or growth), rep.ok)


# --- reduction oracle -----------------------------------------------------------------
#
# The integral is peeled one row at a time.  With T = [[P, q*], [q, r]],
# u = r - q P^{-1} q* and h = q (P(1+P))^{-1/2} (cone) or the peel-form
# normalization of (q, b) (wedges), the last row separates into a factor
#   int u^{lam_n - kappa_n} (1 + u + |h|^2 [+ s])^{-sigma_n} du dh [ds]
# while the remaining (n-1)-row integral has shifted parameters.  Every
# separated factor is evaluated by adaptive quadrature; only the sphere
# area and exact scalings of homogeneous integrands are used
# analytically.

_QUAD_LIMIT = 400


def _quad(f, lo, hi, tol, what):
    val, err = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=tol, limit=_QUAD_LIMIT, complex_func=True)
    if not np.isfinite(val) or abs(err) > max(50 * tol * abs(val), 1e-300):
        raise QuadratureFailure(f"{what}: value {val}, error estimate {err}")
    return complex(val)


def _line(f, tol, what, center: float = 0.0):
    return _quad(f, -np.inf, center, tol, what) + _quad(f, center, np.inf, tol, what)


def mellin_quad(a, b, tol: float = 1e-11) -> complex:
    """``int_0^inf t^{a-1} (1+t)^{-b} dt`` on the log scale ``t = e^s``."""
    a, b = complex(a), complex(b)
    if a.real <= 0 or (b - a).real <= 0:
        raise QuadratureFailure(f"divergent Mellin integral a={a}, b={b}")
    return _line(lambda s: np.exp(a * s - b * np.logaddexp(0.0, s)), tol, f"mellin(a={a}, b={b})")


def lemma43_quad(a, c, s, tol: float = 1e-11) -> complex:
    """``int int u^{a-1} v^{c-1} (1+u+v)^{-s} du dv`` by nested quadrature in log coordinates."""
    a, c, s = complex(a), complex(c), complex(s)
    if a.real <= 0 or c.real <= 0 or (s - a - c).real <= 0:
        raise QuadratureFailure(f"divergent double integral a={a}, c={c}, s={s}")
    what = f"lemma43(a={a}, c={c}, s={s})"

    def inner(x):
        lx = np.logaddexp(0.0, x)
        g = lambda t: np.exp(a * x + c * t - s * np.logaddexp(lx, t))
        return _line(g, tol, what, center=float(lx))

    return _line(inner, tol * 10, what)


def sphere_area(k: int) -> float:
    """Area of the unit sphere in ``R^k``."""
    return 2 * math.pi ** (k / 2) / math.gamma(k / 2)


def _radial(a, k, s, tol):
    """``int_{u>0, h in R^k} u^{a-1} (1+u+|h|^2)^{-s} du dh`` with ``v = |h|^2``."""
    if k == 0:
        return mellin_quad(a, s, tol)
    return sphere_area(k) / 2 * lemma43_quad(a, k / 2, s, tol)


def contour_quad(sig, tau, tol: float = 1e-11) -> complex:
    """``int_R (1+ix)^{-sig} (1-ix)^{-tau} dx`` by quadrature."""
    sig, tau = complex(sig), complex(tau)
    if (sig + tau).real <= 1:
        raise QuadratureFailure(f"divergent contour integral sig={sig}, tau={tau}")
    f = lambda x: np.exp(-sig * np.log(1 + 1j * x) - tau * np.log(1 - 1j * x))
    return _quad(f, -np.inf, np.inf, tol, f"contour(sig={sig}, tau={tau})")


def quaternion_shell_quad(sig, tol: float = 1e-11) -> complex:
    """``int_{R^3} (1 + |c|^2)^{-sig/2} dc = 4 pi int_0^inf z^2 (1+z^2)^{-sig/2} dz``."""
    sig = complex(sig)
    if sig.real <= 3:
        raise QuadratureFailure(f"divergent quaternionic shell integral sig={sig}")
    f = lambda t: np.exp(3 * t - sig / 2 * np.logaddexp(0.0, 2 * t))
    return 4 * math.pi * _line(f, tol, f"shell(sig={sig})")


def separated_factor(fid: str, m: int, lam, sig, tau=None, tol: float = 1e-11) -> complex:
    """Last-row factor of the ``m``-row integral of family ``fid`` (one of F0_1..F0_6)."""
    if fid in ("F0_1", "F0_2", "F0_3"):
        d = MODELS[fid][1].dim
        kap = d * (m - 1) / 2 + 1
        return _radial(lam - kap + 1, d * (m - 1), sig, tol)
    if fid == "F0_4":
        return _radial(lam - m + 1, 2 * m - 2, sig, tol)
    if fid == "F0_5":
        # (w + ic)^{-sig} (w - ic)^{-tau} integrates to w^{1-sig-tau} times the unit contour integral
        return contour_quad(sig, tau, tol) * _radial(lam - 2 * m + 1, 4 * m - 4, sig + tau - 1, tol)
    if fid == "F0_6":
        # |w + c|^{-sig} over imaginary quaternions c integrates to w^{3-sig} times the shell integral
        return quaternion_shell_quad(sig, tol) * _radial(lam - 4 * m + 1, 8 * m - 8, sig - 3, tol)
    raise DomainError(f"no reduction recursion for {fid}")


# parameter shifts of the remaining (m-1)-row integral: (dlam, dsig, dtau)
_SHIFTS = {"F0_1": (0, -0.5, 0), "F0_2": (0, -1, 0), "F0_3": (0, -2, 0),
           "F0_4": (-0.5, -1, 0), "F0_5": (-1, -1, -1), "F0_6": (-2, -4, 0)}


def reduction_oracle(fid: str, ps: ParamSet, tol: float = 1e-11, with_factors: bool = False):
    """Value of the integral by the row-peeling recursion with quadrature factors."""
    fid = get_family(fid).id
    if fid not in _SHIFTS:
        raise DomainError(f"reduction oracle covers F0_1..F0_6, not {fid}")
    ps.validate_for(get_family(fid))
    lam = np.array(ps.lam, dtype=complex)
    sig = np.array(ps.sig, dtype=complex)
    tau = np.array(ps.tau, dtype=complex) if ps.tau is not None else np.zeros_like(sig)
    dl, ds, dt = _SHIFTS[fid]
    factors = []
    for m in range(ps.r, 0, -1):
        factors.append(separated_factor(fid, m, lam[m - 1], sig[m - 1], tau[m - 1], tol))
        lam, sig, tau = lam[:m - 1] + dl, sig[:m - 1] + ds, tau[:m - 1] + dt
    val = complex(np.prod(factors))
    return (val, factors[::-1]) if with_factors else val
