"""Experiment configuration: a TOML document with optional command-line overrides.

Schema (every key optional; top-level values are the defaults, section values are examples)::

    T_S = 0.1                 # system temperature, > 0 (inf allowed)
    T_E = 1.0                 # environment temperature, > 0
    omega_S = 1.0
    omega_E = 1.0
    nu_frac = 0.05            # system-environment angle in units of pi/2
    epsilon_frac = 0.95       # intra-environment angle in units of pi/2
    n_collisions = 2000
    strategy = "strategy2"    # markovian | strategy1 | strategy2 | exact

    [initial_system]
    kind = "thermal"          # thermal (at T_S) | bloch
    r = [0.0, 0.0, 1.0]       # Bloch vector, bloch only

    [blp]                     # state pair for the non-Markovianity measure
    a = [1.0, 0.0, 0.0]
    b = [-1.0, 0.0, 0.0]

    [output]
    format = "csv"            # csv | json
    path = "run.csv"          # omitted: standard output

    [sweep]
    epsilon_frac = [0.90, 0.92, 0.95]
    T_E = [1.0]
    workers = 1

    [exact]
    n_env = 8                 # at most 13 (register cap)
    n_collisions = 8          # optional, defaults to n_env
"""

import math
import sys
from dataclasses import dataclass, fields

import tomli_w

from .model import HALF_PI, ModelParams, Strategy, bloch_state

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


_TOP = {"T_S", "T_E", "omega_S", "omega_E", "nu_frac", "epsilon_frac", "n_collisions", "strategy"}
_SECTIONS = {
    "initial_system": {"kind", "r"},
    "blp": {"a", "b"},
    "output": {"format", "path"},
    "sweep": {"epsilon_frac", "T_E", "workers"},
    "exact": {"n_env", "n_collisions"},
}

ALL_KEYS = sorted(_TOP) + [f"{s}.{k}" for s, keys in _SECTIONS.items() for k in sorted(keys)]


@dataclass(frozen=True)
class ExperimentConfig:
    T_S: float = 0.1
    T_E: float = 1.0
    omega_S: float = 1.0
    omega_E: float = 1.0
    nu_frac: float = 0.05
    epsilon_frac: float = 0.95
    n_collisions: int = 2000
    strategy: str = "strategy2"
    initial_kind: str = "thermal"
    initial_r: tuple = (0.0, 0.0, 1.0)
    blp_a: tuple = (1.0, 0.0, 0.0)
    blp_b: tuple = (-1.0, 0.0, 0.0)
    output_format: str = "csv"
    output_path: str = None
    sweep_epsilon_frac: tuple = None
    sweep_T_E: tuple = None
    sweep_workers: int = 1
    exact_n_env: int = None
    exact_n_collisions: int = None

    @property
    def model(self):
        return ModelParams(
            T_S=self.T_S, T_E=self.T_E, omega_S=self.omega_S, omega_E=self.omega_E,
            nu=self.nu_frac * HALF_PI, epsilon=self.epsilon_frac * HALF_PI,
            n_collisions=self.n_collisions, strategy=Strategy(self.strategy),
        )

    def initial_state(self):
        if self.initial_kind == "bloch":
            return bloch_state(self.initial_r)
        return self.model.system_thermal_state()

    @property
    def has_sweep(self):
        return self.sweep_epsilon_frac is not None or self.sweep_T_E is not None

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _fail(key, msg):
    raise ConfigError(f"{key}: {msg}")


def _number(key, val):
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        _fail(key, f"expected a number, got {val!r}")
    return float(val)


def _positive(key, val, allow_inf=False):
    val = _number(key, val)
    if not val > 0 or (math.isinf(val) and not allow_inf) or math.isnan(val):
        _fail(key, f"must be > 0{'' if allow_inf else ' and finite'}, got {val}")
    return val


def _fraction(key, val):
    val = _number(key, val)
    if not 0.0 <= val <= 1.0:
        _fail(key, f"must lie in [0, 1] (fraction of pi/2), got {val}")
    return val


def _integer(key, val, lo, hi=None):
    if isinstance(val, bool) or not isinstance(val, int):
        _fail(key, f"expected an integer, got {val!r}")
    if val < lo or (hi is not None and val > hi):
        bound = f">= {lo}" if hi is None else f"in [{lo}, {hi}]"
        _fail(key, f"must be {bound}, got {val}")
    return val


def _choice(key, val, options):
    if val not in options:
        _fail(key, f"must be one of {sorted(options)}, got {val!r}")
    return val


def _vector(key, val):
    if not isinstance(val, (list, tuple)) or len(val) != 3:
        _fail(key, f"expected a 3-component Bloch vector, got {val!r}")
    vec = tuple(_number(key, v) for v in val)
    if math.sqrt(sum(v * v for v in vec)) > 1 + 1e-12:
        _fail(key, "Bloch vector norm must be <= 1")
    return vec


def _grid(key, val, check):
    if not isinstance(val, (list, tuple)) or not val:
        _fail(key, "sweep list must be a non-empty list")
    return tuple(check(key, v) for v in val)


def _check_keys(doc):
    for key, val in doc.items():
        if key in _SECTIONS:
            if not isinstance(val, dict):
                _fail(key, "expected a table")
            for sub in val:
                if sub not in _SECTIONS[key]:
                    _fail(f"{key}.{sub}", "unknown key")
        elif key not in _TOP:
            _fail(key, "unknown key")


def config_from_dict(doc):
    """Validate a parsed document and fill defaults."""
    _check_keys(doc)
    out = {}
    if "T_S" in doc:
        out["T_S"] = _positive("T_S", doc["T_S"], allow_inf=True)
    if "T_E" in doc:
        out["T_E"] = _positive("T_E", doc["T_E"])
    for key in ("omega_S", "omega_E"):
        if key in doc:
            out[key] = _number(key, doc[key])
            if not math.isfinite(out[key]):
                _fail(key, "must be finite")
    for key in ("nu_frac", "epsilon_frac"):
        if key in doc:
            out[key] = _fraction(key, doc[key])
    if "n_collisions" in doc:
        out["n_collisions"] = _integer("n_collisions", doc["n_collisions"], 1)
    if "strategy" in doc:
        out["strategy"] = _choice("strategy", doc["strategy"], {s.value for s in Strategy})

    init = doc.get("initial_system", {})
    if "kind" in init:
        out["initial_kind"] = _choice("initial_system.kind", init["kind"], {"thermal", "bloch"})
    if "r" in init:
        out["initial_r"] = _vector("initial_system.r", init["r"])

    blp = doc.get("blp", {})
    for key in ("a", "b"):
        if key in blp:
            out[f"blp_{key}"] = _vector(f"blp.{key}", blp[key])

    output = doc.get("output", {})
    if "format" in output:
        out["output_format"] = _choice("output.format", output["format"], {"csv", "json"})
    if "path" in output:
        if not isinstance(output["path"], str) or not output["path"]:
            _fail("output.path", "expected a non-empty string")
        out["output_path"] = output["path"]

    sweep = doc.get("sweep", {})
    if "epsilon_frac" in sweep:
        out["sweep_epsilon_frac"] = _grid("sweep.epsilon_frac", sweep["epsilon_frac"], _fraction)
    if "T_E" in sweep:
        out["sweep_T_E"] = _grid("sweep.T_E", sweep["T_E"], _positive)
    if "workers" in sweep:
        out["sweep_workers"] = _integer("sweep.workers", sweep["workers"], 1)

    exact = doc.get("exact", {})
    if "n_env" in exact:
        # the register cap is enforced at run time as a size error
        out["exact_n_env"] = _integer("exact.n_env", exact["n_env"], 1)
    if "n_collisions" in exact:
        out["exact_n_collisions"] = _integer("exact.n_collisions", exact["n_collisions"], 1)

    cfg = ExperimentConfig(**out)
    try:
        cfg.model
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def parse_config(text, overrides=None):
    """Parse a TOML document, apply ``overrides`` (dotted keys) and validate.

    Precedence is override > document > default.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    for dotted, val in (overrides or {}).items():
        set_dotted(doc, dotted, val)
    return config_from_dict(doc)


def set_dotted(doc, dotted, val):
    head, _, tail = dotted.partition(".")
    if tail:
        section = doc.setdefault(head, {})
        if not isinstance(section, dict):
            _fail(head, "expected a table")
        section[tail] = val
    else:
        doc[head] = val


def parse_value(text):
    """Interpret a command-line value as a TOML literal, else as a bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def config_to_dict(cfg):
    doc = {
        "T_S": cfg.T_S, "T_E": cfg.T_E, "omega_S": cfg.omega_S, "omega_E": cfg.omega_E,
        "nu_frac": cfg.nu_frac, "epsilon_frac": cfg.epsilon_frac,
        "n_collisions": cfg.n_collisions, "strategy": cfg.strategy,
        "initial_system": {"kind": cfg.initial_kind, "r": list(cfg.initial_r)},
        "blp": {"a": list(cfg.blp_a), "b": list(cfg.blp_b)},
        "output": {"format": cfg.output_format},
    }
    if cfg.output_path is not None:
        doc["output"]["path"] = cfg.output_path
    sweep = {"workers": cfg.sweep_workers}
    if cfg.sweep_epsilon_frac is not None:
        sweep["epsilon_frac"] = list(cfg.sweep_epsilon_frac)
    if cfg.sweep_T_E is not None:
        sweep["T_E"] = list(cfg.sweep_T_E)
    doc["sweep"] = sweep
    if cfg.exact_n_env is not None or cfg.exact_n_collisions is not None:
        doc["exact"] = {k: v for k, v in (("n_env", cfg.exact_n_env),
                                          ("n_collisions", cfg.exact_n_collisions))
                        if v is not None}
    return doc


def serialize_config(cfg):
    return tomli_w.dumps(config_to_dict(cfg))
