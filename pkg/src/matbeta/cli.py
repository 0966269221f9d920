"""Command-line front end: ``matbeta verify | table | plancherel | calibrate``.

Exit codes: 0 every non-flagged check passed, 1 at least one comparison
failed, 2 configuration or hypothesis error, 3 runtime fault.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from . import plancherel as pl
from .closed_form import calibrate_constant, convergence_check, get_family, rhs_value
from .config import (
    RunConfig,
    dumps17,
    load_config_file,
    params_from_dict,
    preset_n_samples,
    preset_params,
    preset_seed,
    records_to_csv,
    shards_from_env,
)
from .errors import ConfigError, ConvergenceError, DomainError, HypothesisViolation
from .mc_verify import compare, estimate_lhs, record, reduction_oracle

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
ORACLE_FAMILIES = ("F0_1", "F0_2", "F0_3", "F0_4", "F0_5", "F0_6")


class _Fault(Exception):
    """Runtime failure carrying the records produced so far."""

    def __init__(self, records, cause):
        super().__init__(str(cause))
        self.records = records
        self.cause = cause


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="matbeta", description="Verify matrix beta integrals by Monte Carlo.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML file with flat keys (CLI flags take precedence)")
        p.add_argument("--output", help="report path (stdout when omitted)")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--seed", type=int)
        p.add_argument("--nondeterministic", action="store_true", default=None)

    def mc(p):
        p.add_argument("--n", type=float, help="number of samples (e.g. 1e6)")
        p.add_argument("--shards", type=int)
        p.add_argument("--z-max", type=float)
        p.add_argument("--rel-max", type=float)
        p.add_argument("--variant", choices=("corrected", "as_printed"))

    v = sub.add_parser("verify", help="estimate selected integrals and compare with a reference")
    common(v)
    mc(v)
    v.add_argument("--family", action="append", dest="families")
    v.add_argument("--all", action="store_true", dest="all_families", default=None)
    v.add_argument("--rank")
    v.add_argument("--lambda", nargs="+", dest="lam")
    v.add_argument("--sigma", nargs="+")
    v.add_argument("--tau", nargs="+")
    v.add_argument("--p", type=int)
    v.add_argument("--q", type=int)
    v.add_argument("--reference", choices=("closed_form", "reduction_oracle"))
    v.add_argument("--allow-divergent", action="store_true", default=None)

    t = sub.add_parser("table", help="reproduce the golden verification table")
    common(t)
    mc(t)

    c = sub.add_parser("calibrate", help="calibrate the undetermined constant of a family")
    common(c)
    mc(c)
    c.add_argument("--family", action="append", dest="families")

    p = sub.add_parser("plancherel", help="Plancherel density grid and inversion check")
    common(p)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--s-max", type=float)
    p.add_argument("--s-step", type=float)
    p.add_argument("--density-variant", choices=pl.DENSITY_VARIANTS)
    p.add_argument("--invert", action="store_true", default=None)
    p.add_argument("--point", help="'base' or 'radius:<r>' (ball point of that operator norm)")
    p.add_argument("--k-samples", type=int)
    p.add_argument("--summary", help="inversion JSON path (stdout when omitted)")
    return ap


def build_config(argv) -> tuple[RunConfig, argparse.Namespace]:
    args = _parser().parse_args(argv)
    vals = {}
    if getattr(args, "config", None):
        vals.update(load_config_file(args.config))
    for key, val in vars(args).items():
        if key in ("config", "lam", "sigma", "tau") or val is None:
            continue
        if key == "n":
            val = int(val)
        vals[key] = val
    if getattr(args, "lam", None) is not None:
        vals["params"] = [{"lambda": args.lam, "sigma": args.sigma, "tau": args.tau,
                           "p": getattr(args, "p", None), "q": getattr(args, "q", None)}]
        vals.pop("p", None)
        vals.pop("q", None)
    if "rank" in vals:
        vals["rank"] = str(vals["rank"])
    try:
        cfg = RunConfig(**vals)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.shards = shards_from_env(cfg.shards)
    return cfg.validate(), args


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(cfg: RunConfig, records: list) -> str:
    if cfg.format == "csv":
        return records_to_csv(records)
    return dumps17({"command": cfg.command, "variant": cfg.variant, "records": records})


def _selection(cfg: RunConfig) -> list:
    """``[(family, ParamSet)]`` chosen by the config."""
    if cfg.params:
        if len(cfg.families) != 1 or cfg.all_families:
            raise ConfigError("inline parameters need exactly one --family")
        fid = get_family(cfg.families[0]).id
        return [(fid, params_from_dict(d)) for d in cfg.params]
    if cfg.rank not in ("min", "1", "two", "2"):
        raise ConfigError("without inline parameters rank must be min, 1, two or 2")
    presets = preset_params("rank_two" if cfg.rank in ("two", "2") else "rank_min")
    if cfg.all_families or not cfg.families:
        return list(presets.items())
    fams = [get_family(f).id for f in cfg.families]
    missing = [f for f in fams if f not in presets]
    if missing:
        raise ConfigError(f"no preset for {', '.join(missing)} at rank {cfg.rank}")
    return [(f, presets[f]) for f in fams]


def _check_one(cfg: RunConfig, fid: str, ps, n: int, seed: int) -> dict:
    fam = get_family(fid)
    rel_max = cfg.rel_max if cfg.rel_max is not None else (0.02 if ps.r == 1 else 0.05)
    flagged = False
    if not convergence_check(fam, ps, cfg.variant).ok:
        if not cfg.allow_divergent:
            raise ConvergenceError(f"{fid}: {convergence_check(fam, ps, cfg.variant)}")
        flagged = True
    est = estimate_lhs(fid, ps, n_samples=n, seed=seed, shards=cfg.shards, allow_divergent=cfg.allow_divergent)
    if cfg.reference == "reduction_oracle":
        if fid not in ORACLE_FAMILIES:
            raise ConfigError(f"the reduction oracle covers {', '.join(ORACLE_FAMILIES)} only")
        ref = reduction_oracle(fid, ps)
    else:
        try:
            ref = rhs_value(fid, ps, variant=cfg.variant, check=not flagged)
        except DomainError:
            if not flagged:
                raise
            ref = None
    if ref is None or not np.isfinite(ref):
        rec = {"family": fid, "params": record_params(est), "mean": est.mean, "stderr": est.stderr,
               "n": est.n_samples, "seed": seed, "reference": None, "z": None, "rel_err": None,
               "verdict": "fail"}
    else:
        rec = record(est, ref, compare(est, ref, cfg.z_max, rel_max, cfg.reference))
    if flagged:
        rec["flagged"] = True
    return rec


def record_params(est) -> dict:
    p = est.params
    vec = (lambda v: None if v is None else [{"re": x.real, "im": x.imag} for x in v])
    rank = {"p": p.p, "q": p.q} if p.p is not None else {"n": p.n}
    return {"lambda": vec(p.lam), "sigma": vec(p.sig), "tau": vec(p.tau), "rank": rank}


def _run_checks(cfg: RunConfig, items, n: int, seed: int, keep_shards: bool) -> list:
    records = []
    for fid, ps in items:
        try:
            rec = _check_one(cfg, fid, ps, n, seed)
        except (ConfigError, ConvergenceError, HypothesisViolation):
            raise
        except Exception as exc:          # runtime fault: flush what we have
            records.append({"family": fid, "params": {"lambda": None, "sigma": None, "tau": None, "rank": {}},
                            "error": f"{type(exc).__name__}: {exc}", "verdict": "error"})
            raise _Fault(records, exc) from exc
        if not keep_shards:
            rec.pop("shards", None)
        records.append(rec)
    return records


def _exit_code(records: list) -> int:
    bad = [r for r in records if not r.get("flagged") and r["verdict"] == "fail"]
    return EXIT_FAIL if bad else EXIT_PASS


def _seed(cfg: RunConfig) -> int:
    if cfg.seed is not None:
        return cfg.seed
    return int(np.random.SeedSequence().entropy % (2 ** 63))


def cmd_verify(cfg: RunConfig) -> int:
    n = cfg.n or preset_n_samples()
    records = _run_checks(cfg, _selection(cfg), n, _seed(cfg), keep_shards=True)
    _emit(_report(cfg, records), cfg.output)
    return _exit_code(records)


def cmd_table(cfg: RunConfig) -> int:
    """Every family at minimal rank with the preset seed; shard count never enters the output."""
    if cfg.nondeterministic:
        raise ConfigError("the golden table is seeded; --nondeterministic is not allowed")
    seed = cfg.seed if cfg.seed is not None else preset_seed()
    n = cfg.n or preset_n_samples()
    items = list(preset_params("rank_min").items())
    records = _run_checks(cfg, items, n, seed, keep_shards=False)
    _emit(_report(cfg, records), cfg.output)
    return _exit_code(records)


def cmd_calibrate(cfg: RunConfig) -> int:
    settings = preset_params("calibration")
    fams = [get_family(f).id for f in cfg.families] if cfg.families else list(settings)
    n = cfg.n or 200_000
    seed = _seed(cfg)
    out, ok = [], True
    for fid in fams:
        if fid not in settings:
            raise ConfigError(f"no calibration settings for {fid}")

        def est(f, ps):
            return estimate_lhs(f, ps, n_samples=n, seed=seed, shards=cfg.shards)

        res = calibrate_constant(fid, settings[fid], estimator=est, z_max=cfg.z_max,
                                 raise_on_inconsistent=False, variant=cfg.variant)
        passed = res.consistent and res.log2_distance < 0.1
        ok &= passed
        d = dataclasses.asdict(res)
        d["settings"] = [params_from_ps(ps) for ps in settings[fid]]
        d["verdict"] = "pass" if passed else "fail"
        out.append(d)
    _emit(dumps17({"command": "calibrate", "n": n, "seed": seed, "results": out}), cfg.output)
    return EXIT_PASS if ok else EXIT_FAIL


def params_from_ps(ps) -> dict:
    vec = (lambda v: None if v is None else [[x.real, x.imag] for x in v])
    return {"lambda": vec(ps.lam), "sigma": vec(ps.sig), "tau": vec(ps.tau), "n": ps.n, "p": ps.p, "q": ps.q}


def _point(cfg: RunConfig):
    if cfg.point == "base":
        return pl.base_point(cfg.p, cfg.q)
    if cfg.point.startswith("radius:"):
        try:
            r = float(cfg.point.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"bad point {cfg.point!r}") from exc
        if not 0 <= r < 1:
            raise ConfigError("radius must lie in [0, 1)")
        return pl.ball_point(cfg.p, cfg.q, r, np.random.default_rng(_seed(cfg)))
    raise ConfigError("point must be 'base' or 'radius:<r>'")


def cmd_plancherel(cfg: RunConfig) -> int:
    p, q, a = cfg.p, cfg.q, cfg.alpha
    thr = pl.rho(p, q)
    if not a > thr:
        raise HypothesisViolation(f"alpha = {a:g} must exceed (q+p)/4 - 1/2 = {thr:g}")
    grid = np.arange(0.0, cfg.s_max + cfg.s_step / 2, cfg.s_step)
    head = [f"s{j + 1}" for j in range(p)] + ["density"]
    f17 = (lambda x: format(float(x), ".17g"))
    if not cfg.invert:
        nodes = pl._chamber_grid(grid, p)
        dens = np.exp(pl.log_plancherel_density(nodes, a, p, q, cfg.density_variant))
        rows = [[*map(f17, row), f17(d)] for row, d in zip(nodes, dens)]
    else:
        rng = np.random.default_rng(_seed(cfg))
        res = pl.inversion_check(_point(cfg), a, p, q, s_grid=grid, k_samples=cfg.k_samples, rng=rng,
                                 variant=cfg.density_variant)
        head += ["phi_re", "phi_im", "partial_sum"]
        partial = np.cumsum(res.density * res.phi.real) / res.density.sum()
        rows = [[*map(f17, row), f17(d), f17(ph.real), f17(ph.imag), f17(ps)]
                for row, d, ph, ps in zip(res.nodes, res.density, res.phi, partial)]
        summary = {"p": p, "q": q, "alpha": a, "point": cfg.point, "variant": cfg.density_variant,
                   "k_samples": cfg.k_samples, "reconstruction": res.value, "reference": res.reference,
                   "rel_err": res.rel_err, "imag": res.imag,
                   "error": {"quadrature": res.quad_err, "mc": res.stderr, "truncation": res.tail_fraction}}
        text = dumps17(summary)
        if cfg.summary:
            _emit(text, cfg.summary)
        else:
            sys.stderr.write(text)
    _emit("\n".join([",".join(head)] + [",".join(r) for r in rows]) + "\n", cfg.output)
    return EXIT_PASS


HANDLERS = {"verify": cmd_verify, "table": cmd_table, "calibrate": cmd_calibrate, "plancherel": cmd_plancherel}


def main(argv=None) -> int:
    try:
        cfg, _ = build_config(argv)
    except SystemExit as exc:            # argparse usage errors
        return EXIT_CONFIG if exc.code else EXIT_PASS
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    try:
        return HANDLERS[cfg.command](cfg)
    except (ConfigError, ConvergenceError, HypothesisViolation, DomainError) as exc:
        # faults inside a check arrive wrapped in _Fault; a bare DomainError is a bad selection
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_CONFIG
    except _Fault as exc:
        _emit(_report(cfg, exc.records), cfg.output)
        sys.stderr.write(f"runtime fault: {exc}\n")
        return EXIT_RUNTIME
    except Exception as exc:
        sys.stderr.write(f"runtime fault: {type(exc).__name__}: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
