"""Run configuration and manifests for the experiment driver.

A run is described by an :class:`ExperimentConfig`: which experiment,
which preset (``desk`` or ``full``), master seed, thread count, output
directory, and optional parameter overrides.  Anything not overridden
comes from the experiment's preset table.  Config files are flat INI
with ``[run]`` and ``[params]`` sections; unknown sections or keys are
hard errors, never warnings.

Every run writes a :class:`RunManifest` to ``summary.json``: the echo of
the resolved configuration, schema/code versions, wall clock, summary
metrics, a pass/fail record per check, and a content digest for every
data file the run produced.
"""
from __future__ import annotations

import configparser
import dataclasses
import json
import math
from dataclasses import dataclass
from typing import Optional

SCHEMA_VERSION = 1
CODE_VERSION = "0.1.0"

EXPERIMENT_NAMES = ("E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8")
PRESET_NAMES = ("desk", "full")

#: Allowed exponents for the slow-growth column-count curve
#: k(t) = floor(t ** a).
ALPHA_EXPONENTS = (0.20, 0.25, 0.33)

#: Geodesic-deviation upper-bound mode needs the column curve to grow
#: strictly slower than t ** (9/31).
ALPHA_CAP_E6 = 9.0 / 31.0

_INITIALS = ("flat", "seed")


class ConfigError(ValueError):
    """Invalid run configuration (bad value, unknown key, bad file)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs.  ``None`` fields fall back to the preset."""

    experiment: str
    preset: str = "desk"
    seed: int = 5
    threads: int = 1
    out_dir: str = "runs"
    t: Optional[float] = None
    k: Optional[int] = None
    replicas: Optional[int] = None
    initial: Optional[str] = None
    alpha_exponent: Optional[float] = None
    k_list: Optional[tuple] = None
    grid_m: Optional[int] = None
    significance: Optional[float] = None
    gamma_grid: Optional[tuple] = None
    s_fractions: Optional[tuple] = None
    x_values: Optional[tuple] = None
    c_prefactor: Optional[float] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_NAMES:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"expected one of {EXPERIMENT_NAMES}")
        if self.preset not in PRESET_NAMES:
            raise ConfigError(f"unknown preset {self.preset!r}")
        if not (0 <= int(self.seed) < 1 << 64):
            raise ConfigError("seed must fit in an unsigned 64-bit word")
        if not (1 <= int(self.threads) <= 256):
            raise ConfigError("threads must be in 1..256")
        if self.t is not None and not (self.t > 0.0):
            raise ConfigError("t must be positive")
        if self.k is not None and self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.k is not None and self.alpha_exponent is not None:
            raise ConfigError("give either k or alpha_exponent, not both")
        if self.replicas is not None and self.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        if self.initial is not None and self.initial not in _INITIALS:
            raise ConfigError(f"initial must be one of {_INITIALS}")
        if self.alpha_exponent is not None:
            if not any(abs(self.alpha_exponent - a) < 1e-12
                       for a in ALPHA_EXPONENTS):
                raise ConfigError(
                    f"alpha_exponent must be one of {ALPHA_EXPONENTS} "
                    "(arbitrary exponents are not supported)")
            if (self.experiment == "E6"
                    and self.alpha_exponent >= ALPHA_CAP_E6):
                raise ConfigError(
                    "E6 deviation-bound mode needs alpha_exponent "
                    f"< 9/31 = {ALPHA_CAP_E6:.6f}")
        if self.k_list is not None:
            ks = tuple(int(v) for v in self.k_list)
            if not ks or any(v < 1 for v in ks) or list(ks) != sorted(ks):
                raise ConfigError("k_list must be ascending positive ints")
            object.__setattr__(self, "k_list", ks)
        if self.grid_m is not None and self.grid_m < 2:
            raise ConfigError("grid_m must be >= 2")
        if (self.significance is not None
                and not (0.0 < self.significance < 1.0)):
            raise ConfigError("significance must lie in (0, 1)")
        if self.gamma_grid is not None:
            gs = tuple(float(g) for g in self.gamma_grid)
            if any(not (2.0 / 3.0 < g < 1.0) for g in gs):
                raise ConfigError("gamma values must lie in (2/3, 1)")
            object.__setattr__(self, "gamma_grid", gs)
        if self.s_fractions is not None:
            fs = tuple(float(f) for f in self.s_fractions)
            if any(not (0.0 < f < 1.0) for f in fs):
                raise ConfigError("s_fractions must lie in (0, 1)")
            object.__setattr__(self, "s_fractions", fs)
        if self.x_values is not None:
            xs = tuple(float(x) for x in self.x_values)
            if any(not (x > 0.0) for x in xs):
                raise ConfigError("x_values must be positive")
            object.__setattr__(self, "x_values", xs)
        if self.c_prefactor is not None and not (self.c_prefactor > 0.0):
            raise ConfigError("c_prefactor must be positive")

    def alpha_columns(self, t: float) -> int:
        """Column count from the slow-growth curve at horizon t."""
        if self.alpha_exponent is None:
            raise ConfigError("no alpha_exponent configured")
        return max(1, int(math.floor(t ** self.alpha_exponent)))

    def overrides(self) -> dict:
        """The explicitly-set parameter fields (everything non-None
        outside the run-control block)."""
        skip = {"experiment", "preset", "seed", "threads", "out_dir"}
        out = {}
        for f in dataclasses.fields(self):
            if f.name in skip:
                continue
            v = getattr(self, f.name)
            if v is not None:
                out[f.name] = v
        return out


@dataclass
class RunManifest:
    """What a run did: configuration echo, versions, wall clock, summary
    metrics, pass/fail per check, and a digest per output file."""

    experiment: str
    preset: str
    config: dict
    schema_version: int
    code_version: str
    wall_clock_s: float
    metrics: dict
    checks: dict
    files: dict

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    def to_json(self) -> str:
        body = dataclasses.asdict(self)
        body["passed"] = self.passed
        return dumps17(body)


class _Float17Encoder(json.JSONEncoder):
    """JSON with every float serialized to 17 significant digits."""

    def iterencode(self, o, _one_shot=False):
        markers = {} if self.check_circular else None

        def floatstr(x, allow_nan=self.allow_nan):
            if x != x:
                text = "NaN"
            elif x == math.inf:
                text = "Infinity"
            elif x == -math.inf:
                text = "-Infinity"
            else:
                return format(x, ".17g")
            if not allow_nan:
                raise ValueError(
                    f"out of range float values are not JSON compliant: {x!r}")
            return text

        it = json.encoder._make_iterencode(
            markers, self.default, json.encoder.encode_basestring_ascii,
            self.indent, floatstr, self.key_separator, self.item_separator,
            self.sort_keys, self.skipkeys, _one_shot)
        return it(o, 0)


def dumps17(obj) -> str:
    return json.dumps(obj, cls=_Float17Encoder, sort_keys=True, indent=2)


_RUN_KEYS = ("experiment", "preset", "seed", "threads", "out")

_TUPLE_FLOAT = ("gamma_grid", "s_fractions", "x_values")
_TUPLE_INT = ("k_list",)
_SCALAR = {
    "t": float,
    "k": int,
    "replicas": int,
    "initial": str,
    "alpha_exponent": float,
    "grid_m": int,
    "significance": float,
    "c_prefactor": float,
}


def _split_tuple(raw: str, conv):
    parts = [p.strip() for p in raw.replace(",", " ").split()]
    if not parts:
        raise ConfigError("empty list value")
    return tuple(conv(p) for p in parts)


def load_config(path: str) -> dict:
    """Parse an INI config file into ExperimentConfig keyword arguments.

    Unknown sections and unknown keys are hard errors: a typo must never
    silently fall back to a preset value.
    """
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc

    extra = set(cp.sections()) - {"run", "params"}
    if extra:
        raise ConfigError(
            f"unknown config section(s): {', '.join(sorted(extra))}")

    kwargs: dict = {}
    if cp.has_section("run"):
        for key, raw in cp.items("run"):
            if key not in _RUN_KEYS:
                raise ConfigError(f"unknown [run] key: {key}")
            try:
                if key == "seed":
                    kwargs["seed"] = int(raw, 0)
                elif key == "threads":
                    kwargs["threads"] = int(raw)
                elif key == "out":
                    kwargs["out_dir"] = raw
                else:
                    kwargs[key] = raw
            except ValueError as exc:
                raise ConfigError(f"bad [run] value {key} = {raw!r}") from exc
    if cp.has_section("params"):
        for key, raw in cp.items("params"):
            try:
                if key in _TUPLE_FLOAT:
                    kwargs[key] = _split_tuple(raw, float)
                elif key in _TUPLE_INT:
                    kwargs[key] = _split_tuple(raw, int)
                elif key in _SCALAR:
                    kwargs[key] = _SCALAR[key](raw)
                else:
                    raise ConfigError(f"unknown [params] key: {key}")
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(
                    f"bad [params] value {key} = {raw!r}") from exc
    return kwargs
