"""Run configuration, parameter-set parsing, presets and report serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field, fields
from functools import lru_cache
from importlib import resources

import yaml

from .closed_form import VARIANTS, ParamSet
from .errors import ConfigError

COMMANDS = ("verify", "table", "plancherel", "calibrate")
FORMATS = ("json", "csv")
CSV_HEADER = ("family", "rank", "z", "rel_err", "verdict")
SHARDS_ENV = "MATBETA_SHARDS"


@dataclass
class RunConfig:
    """Validated settings of one CLI invocation."""

    command: str = "verify"
    families: list = field(default_factory=list)
    all_families: bool = False
    rank: str = "min"                   # "min", "two" or an integer as text
    params: list = field(default_factory=list)
    n: int | None = None
    seed: int | None = None
    shards: int = 1
    z_max: float = 3.0
    rel_max: float | None = None
    output: str | None = None
    format: str = "json"
    variant: str = "corrected"
    reference: str = "closed_form"
    allow_divergent: bool = False
    nondeterministic: bool = False
    # plancherel
    p: int = 1
    q: int = 2
    alpha: float = 2.0
    s_max: float = 8.0
    s_step: float = 0.05
    density_variant: str = "rescaled"
    invert: bool = False
    point: str = "base"
    k_samples: int = 20_000
    summary: str | None = None

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        if self.reference not in ("closed_form", "reduction_oracle"):
            raise ConfigError("reference must be closed_form or reduction_oracle")
        if self.rank not in ("min", "two"):
            try:
                if int(self.rank) < 1:
                    raise ValueError
            except ValueError as exc:
                raise ConfigError(f"rank must be 'min', 'two' or a positive integer, got {self.rank!r}") from exc
        if self.n is not None and self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.shards < 1:
            raise ConfigError("shards must be >= 1")
        if self.z_max <= 0 or (self.rel_max is not None and self.rel_max <= 0):
            raise ConfigError("tolerances must be positive")
        if self.command == "plancherel":
            if self.p not in (1, 2) or self.q < self.p:
                raise ConfigError("plancherel needs p in {1, 2} and q >= p")
            if self.s_max <= 0 or self.s_step <= 0:
                raise ConfigError("s-max and s-step must be positive")
            if self.k_samples < 2:
                raise ConfigError("k-samples must be >= 2")
        if self.seed is None and not self.nondeterministic and self.command != "table":
            raise ConfigError("a seed is required (or pass --nondeterministic)")
        return self


_FIELD_NAMES = {f.name for f in fields(RunConfig)}


def load_config_file(path: str) -> dict:
    """Flat key/value YAML file; ``params`` may hold a list of parameter sets."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must be a mapping")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = sorted(set(data) - _FIELD_NAMES)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return data


def shards_from_env(default: int) -> int:
    raw = os.environ.get(SHARDS_ENV)
    if raw is None or raw == "":
        return default
    try:
        val = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SHARDS_ENV} must be an integer") from exc
    if val < 1:
        raise ConfigError(f"{SHARDS_ENV} must be >= 1")
    return val


# --- parameter sets -----------------------------------------------------------

def _number(x):
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigError(f"complex entries are [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, str):
        try:
            return complex(x.replace(" ", ""))
        except ValueError as exc:
            raise ConfigError(f"not a number: {x!r}") from exc
    if isinstance(x, (int, float, complex)):
        return x
    raise ConfigError(f"not a number: {x!r}")


_PARAM_KEYS = {"family", "lambda", "sigma", "tau", "n", "p", "q"}


def params_from_dict(d: dict) -> ParamSet:
    unknown = sorted(set(d) - _PARAM_KEYS)
    if unknown:
        raise ConfigError(f"unknown parameter keys: {', '.join(unknown)}")
    try:
        vec = {k: None if d.get(k) is None else [_number(x) for x in d[k]] for k in ("lambda", "sigma", "tau")}
        return ParamSet(vec["lambda"], vec["sigma"], vec["tau"], p=d.get("p"), q=d.get("q"))
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"bad parameter set {d!r}") from exc


@lru_cache(maxsize=1)
def _presets() -> dict:
    text = resources.files("matbeta").joinpath("data/default_params.yaml").read_text()
    return yaml.safe_load(text)


def preset_seed() -> int:
    return int(_presets()["seed"])


def preset_n_samples() -> int:
    return int(_presets()["n_samples"])


def preset_params(kind: str) -> dict:
    """``{family: ParamSet}`` for ``kind`` in ``rank_min``, ``rank_two``; lists for ``calibration``."""
    raw = _presets()[kind]
    if kind == "calibration":
        return {f: [params_from_dict(e) for e in lst] for f, lst in raw.items()}
    return {f: params_from_dict(e) for f, e in raw.items()}


# --- serialization ------------------------------------------------------------

def _fmt(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt(obj)
    if isinstance(obj, complex):
        return _encode({"re": obj.real, "im": obj.imag}, indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):
        return _encode(obj.item(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps17(obj, indent: int = 2) -> str:
    """JSON with every float written to 17 significant digits (round-trips doubles)."""
    return _encode(obj, indent, 0) + "\n"


def _rank_label(params: dict) -> str:
    r = params.get("rank", {})
    if "p" in r:
        return f"{r['p']}x{r['q']}"
    return str(r.get("n"))


def records_to_csv(records: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in records:
        z = rec.get("z")
        rel = rec.get("rel_err")
        w.writerow([rec["family"], _rank_label(rec.get("params", {})),
                    "" if z is None else _fmt(z), "" if rel is None else _fmt(rel), rec["verdict"]])
    return buf.getvalue()


def schema() -> dict:
    return json.loads(resources.files("matbeta").joinpath("data/report_schema.json").read_text())
