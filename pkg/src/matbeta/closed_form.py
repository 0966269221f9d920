"""Closed-form right-hand sides of the matrix beta integrals.

Every family is described by a declarative term table (``data/term_tables.yaml``):
a product over ``k`` of a power of two, a power of pi and a ratio of Gamma
products whose arguments are affine in ``(lam_k, sig_k, tau_k, k, n, p, q)``.
:func:`rhs_value` and :func:`convergence_check` read the same table.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np
import yaml

from .errors import ConvergenceError, DomainError, InconsistentRatio
from .ground_fields import complex_loggamma

__all__ = [
    "FAMILY_IDS",
    "VARIANTS",
    "IntegralFamily",
    "ParamSet",
    "ConvergenceReport",
    "term_table",
    "get_family",
    "rhs_value",
    "rhs_log_terms",
    "convergence_check",
    "gamma_arguments",
    "lemma_factor",
    "CalibrationResult",
    "calibrate_constant",
]

VARIANTS = ("corrected", "as_printed")

# --- tiny arithmetic evaluator for the table expressions ---------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_NAMES = {"lam", "sig", "tau", "sig_n", "k", "n", "p", "q"}


def _compile(expr: str):
    tree = ast.parse(expr, mode="eval").body

    def check(node):
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            check(node.left)
            check(node.right)
        elif isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            check(node.operand)
        elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            pass
        elif isinstance(node, ast.Name) and node.id in _NAMES:
            pass
        else:
            raise DomainError(f"unsupported term-table expression {expr!r}")

    check(tree)
    return tree


def _eval(node, env):
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp):
        return _UNOPS[type(node.op)](_eval(node.operand, env))
    if isinstance(node, ast.Constant):
        return node.value
    return env[node.id]


@dataclass(frozen=True)
class _Expr:
    text: str

    def __call__(self, env):
        return complex(_eval(_compile_cached(self.text), env))


@lru_cache(maxsize=None)
def _compile_cached(text):
    return _compile(text)


# --- families and parameters --------------------------------------------------

@dataclass(frozen=True)
class _Term:
    coef: _Expr
    two: _Expr
    pi: _Expr
    num: tuple
    den: tuple


@dataclass(frozen=True)
class IntegralFamily:
    id: str
    title: str
    series: str
    rank_kind: str              # "n" or "pq"
    has_tau: bool
    unknown_constant: bool
    misprint: str | None
    terms: dict = field(repr=False)

    @property
    def flagged(self) -> bool:
        return self.misprint is not None


@lru_cache(maxsize=1)
def term_table() -> dict:
    text = resources.files("matbeta").joinpath("data/term_tables.yaml").read_text()
    raw = yaml.safe_load(text)
    out = {}
    for fid, rec in raw.items():
        terms = {}
        for vname in VARIANTS:
            v = rec["variants"][vname]
            for e in [v["two"], v["pi"], *v["num"], *v["den"], v.get("coef", "1")]:
                _compile_cached(e)
            terms[vname] = _Term(_Expr(str(v.get("coef", "1"))), _Expr(str(v["two"])),
                                 _Expr(str(v["pi"])), tuple(map(_Expr, v["num"])),
                                 tuple(map(_Expr, v["den"])))
        out[fid] = IntegralFamily(fid, rec["title"], rec["series"], rec["rank"],
                                  bool(rec["tau"]), bool(rec.get("unknown_constant", False)),
                                  rec.get("misprint"), terms)
    return out


FAMILY_IDS = ("F0_1", "F0_2", "F0_3", "F0_4", "F0_5", "F0_6", "F0_7", "F0_8", "F0_9",
              "F0_10", "F0_11", "F0_14", "F0_15", "F0_17", "F0_18")


def get_family(fid) -> IntegralFamily:
    if isinstance(fid, IntegralFamily):
        return fid
    table = term_table()
    if fid not in table:
        raise DomainError(f"unknown integral family {fid!r}")
    return table[fid]


@dataclass(frozen=True)
class ParamSet:
    """Parameters ``lam, sig, tau`` (length r) and rank data.

    For sections ``p`` is the length and ``q`` the second size; otherwise ``n``.
    Trailing ``lam_{r+1} = sig_{r+1} = tau_{r+1} = 0`` is implied.
    """

    lam: tuple
    sig: tuple
    tau: tuple | None = None
    n: int | None = None
    p: int | None = None
    q: int | None = None

    def __post_init__(self):
        for name in ("lam", "sig", "tau"):
            v = getattr(self, name)
            if v is not None:
                v = np.atleast_1d(np.asarray(v, dtype=complex))
                object.__setattr__(self, name, tuple(complex(x) for x in v))
        r = len(self.lam)
        if len(self.sig) != r or (self.tau is not None and len(self.tau) != r):
            raise DomainError("lam, sig, tau must have equal length")
        if self.p is None and self.n is None:
            object.__setattr__(self, "n", r)
        if self.p is not None:
            if self.q is None or self.p != r or self.q < self.p:
                raise DomainError("section parameters need p = len(lam) <= q")
        elif self.n != r:
            raise DomainError("rank n must equal len(lam)")

    @property
    def r(self) -> int:
        return len(self.lam)

    def validate_for(self, fam: IntegralFamily):
        if fam.has_tau and self.tau is None:
            raise DomainError(f"{fam.id} needs tau")
        if not fam.has_tau and self.tau is not None:
            raise DomainError(f"{fam.id} takes no tau")
        if fam.rank_kind == "pq" and self.p is None:
            raise DomainError(f"{fam.id} needs (p, q)")
        if fam.rank_kind == "n" and self.p is not None:
            raise DomainError(f"{fam.id} is indexed by n, not (p, q)")

    def to_dict(self) -> dict:
        def enc(v):
            return None if v is None else [[x.real, x.imag] for x in v]
        return {"lambda": enc(self.lam), "sigma": enc(self.sig), "tau": enc(self.tau),
                "n": self.n, "p": self.p, "q": self.q}


def _env(ps: ParamSet, k: int) -> dict:
    r = ps.r
    return {"lam": ps.lam[k - 1], "sig": ps.sig[k - 1],
            "tau": ps.tau[k - 1] if ps.tau is not None else 0.0,
            "sig_n": ps.sig[r - 1], "k": k, "n": ps.n if ps.n is not None else r,
            "p": ps.p if ps.p is not None else r, "q": ps.q if ps.q is not None else r}


def gamma_arguments(fam, ps: ParamSet, variant: str = "corrected"):
    """List of ``(k, 'num'|'den', expression, value)`` for every Gamma in the product."""
    fam = get_family(fam)
    term = fam.terms[variant]
    out = []
    for k in range(1, ps.r + 1):
        env = _env(ps, k)
        out += [(k, "num", e.text, e(env)) for e in term.num]
        out += [(k, "den", e.text, e(env)) for e in term.den]
    return out


@dataclass(frozen=True)
class ConvergenceReport:
    ok: bool
    violations: tuple = ()


def convergence_check(fam, ps: ParamSet, variant: str = "corrected") -> ConvergenceReport:
    """Every numerator Gamma argument must have positive real part."""
    bad = tuple((f"k={k}: {text}", val) for k, kind, text, val in gamma_arguments(fam, ps, variant)
                if kind == "num" and val.real <= 0)
    return ConvergenceReport(not bad, bad)


def rhs_log_terms(fam, ps: ParamSet, variant: str = "corrected") -> list:
    """Complex log of each k-term of the product (the sum is the log of the RHS)."""
    fam = get_family(fam)
    ps.validate_for(fam)
    term = fam.terms[variant]
    out = []
    for k in range(1, ps.r + 1):
        env = _env(ps, k)
        lg = np.log(term.coef(env)) + term.two(env) * math.log(2.0) + term.pi(env) * math.log(math.pi)
        lg += np.sum(complex_loggamma(np.array([e(env) for e in term.num])))
        lg -= np.sum(complex_loggamma(np.array([e(env) for e in term.den])))
        out.append(complex(lg))
    return out


def rhs_value(fam, ps: ParamSet, variant: str = "corrected", constant: float = 1.0,
              check: bool = True) -> complex:
    """Literal product of the family's closed form (unknown constants default to 1)."""
    fam = get_family(fam)
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}")
    if check:
        rep = convergence_check(fam, ps, variant)
        if not rep.ok:
            raise ConvergenceError(f"{fam.id}: divergent, Re <= 0 for {rep.violations[0][0]}")
    return constant * complex(np.exp(sum(rhs_log_terms(fam, ps, variant))))


# --- auxiliary one- and two-dimensional factors ------------------------------

def _g(*z):
    return np.exp(complex_loggamma(np.array(z, dtype=complex)))


def lemma_factor(kind: str, *args, variant: str = "corrected") -> complex:
    """Closed forms of the auxiliary lemmas.

    ``L4_1(k)`` sphere area, ``L4_2(mu, nu)`` Beta function,
    ``L4_3(a, b, c)``, ``L4_4(k, lam, sig)``,
    ``F5_3_contour(a, b, mu, nu)`` the line integral of ``(a+ix)^-mu (b-ix)^-nu``,
    ``F5_3(n, lam, sig, tau)`` the complex separated factor and
    ``F5_4_quat(n, lam, sig)`` the quaternionic one (``variant`` selects the printed or
    re-derived 2-power/pi-power).
    """
    def need_positive(*vals):
        for v in vals:
            if complex(v).real <= 0:
                raise ConvergenceError(f"{kind}: Gamma argument {v} has Re <= 0")

    if kind == "L4_1":
        (k,) = args
        return complex(2 * math.pi ** (k / 2) / _g(k / 2)[0])
    if kind == "L4_2":
        mu, nu = args
        need_positive(mu, nu)
        g = _g(mu, nu, mu + nu)
        return complex(g[0] * g[1] / g[2])
    if kind == "L4_3":
        a, b, c = args
        need_positive(b, c, a - b - c)
        g = _g(b, c, a - b - c, a)
        return complex(g[0] * g[1] * g[2] / g[3])
    if kind == "L4_4":
        k, lam, sig = args
        need_positive(lam - k / 2, sig - lam)
        g = _g(lam - k / 2, sig - lam, sig)
        return complex(math.pi ** (k / 2) * g[0] * g[1] / g[2])
    if kind == "F5_3_contour":
        a, b, mu, nu = args
        if not (a > 0 and b > 0):
            raise DomainError("contour formula needs a, b > 0")
        need_positive(mu + nu - 1)
        g = _g(mu + nu - 1, mu, nu)
        return complex(2 * math.pi * (a + b) ** (1 - mu - nu) * g[0] / (g[1] * g[2]))
    if kind == "F5_3":
        n, lam, sig, tau = args
        need_positive(lam - 2 * n + 1, sig + tau - lam)
        g = _g(lam - 2 * n + 1, sig + tau - lam, sig, tau)
        return complex(2.0 ** (2 - sig - tau) * math.pi ** (2 * n - 1) * g[0] * g[1] / (g[2] * g[3]))
    if kind == "F5_4_quat":
        n, lam, sig = args
        need_positive(lam - 4 * n + 1, sig - lam)
        g = _g(lam - 4 * n + 1, sig - lam, sig / 2, sig / 2 - 1)
        if variant == "as_printed":
            pre = 2.0 ** (sig - 4) * math.pi ** (4 * n - 3)
        else:
            pre = 2.0 ** (4 - sig) * math.pi ** (4 * n - 2)
        return complex(pre * g[0] * g[1] / (g[2] * g[3]))
    raise DomainError(f"unknown lemma kind {kind!r}")


# --- calibration of undetermined constants -----------------------------------

@dataclass
class CalibrationResult:
    family: str
    ratios: list
    stderrs: list
    pooled: float
    pooled_stderr: float
    chi2: float
    dof: int
    consistent: bool
    cv: float
    log2_constant: float
    log2_distance: float
    per_setting_log2: list


def calibrate_constant(fam, param_list, n_samples: int = 200_000, seed: int = 0,
                       estimator=None, z_max: float = 3.0, raise_on_inconsistent: bool = True,
                       variant: str = "corrected") -> CalibrationResult:
    """Estimate ``C = LHS / RHS(C=1)`` on several parameter settings.

    The settings must agree within ``z_max`` pooled standard errors, otherwise
    :class:`InconsistentRatio` is raised (or recorded when ``raise_on_inconsistent``
    is false).
    """
    fam = get_family(fam)
    if len(param_list) < 3:
        raise DomainError("calibration needs at least three parameter settings")
    if estimator is None:
        from .mc_verify import estimate_lhs

        def estimator(f, ps):
            return estimate_lhs(f, ps, n_samples=n_samples, seed=seed)

    ratios, errs = [], []
    for ps in param_list:
        rep = convergence_check(fam, ps, variant)
        if not rep.ok:
            raise ConvergenceError(f"{fam.id}: setting outside convergence domain")
        rhs = rhs_value(fam, ps, variant)
        est = estimator(fam.id, ps)
        ratio = est.mean / rhs
        ratios.append(float(ratio.real))
        errs.append(float(est.stderr / abs(rhs)))
    r = np.array(ratios)
    e = np.maximum(np.array(errs), 1e-300)
    w = 1.0 / e ** 2
    pooled = float(np.sum(w * r) / np.sum(w))
    pooled_se = float(np.sqrt(1.0 / np.sum(w)))
    z = np.abs(r - pooled) / np.sqrt(e ** 2 + pooled_se ** 2)
    chi2 = float(np.sum(((r - pooled) / e) ** 2))
    consistent = bool(np.all(z <= z_max))
    log2c = math.log2(pooled) if pooled > 0 else float("nan")
    res = CalibrationResult(fam.id, ratios, errs, pooled, pooled_se, chi2, len(r) - 1, consistent,
                            float(np.std(r) / abs(np.mean(r))), log2c,
                            abs(log2c - round(log2c)) if math.isfinite(log2c) else float("nan"),
                            [math.log2(x) if x > 0 else float("nan") for x in ratios])
    if not consistent and raise_on_inconsistent:
        err = InconsistentRatio(f"{fam.id}: ratios {np.round(r, 5).tolist()} disagree beyond {z_max} sigma")
        err.result = res
        raise err
    return res
