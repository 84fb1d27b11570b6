"""INI run configurations for the command line.

A config file holds a subset of these sections::

    [run]        seed, threads, out, format
    [model]      name plus that model's parameters
    [scheme]     type = regular | irregular | power_decay | high_frequency
    [kernel]     base, order, rule, scale, table
    [adaptive]   grid_rule, M, bandwidths, c, c0_mode, c0_value,
                 quadrature_step, engine, points_per_bandwidth
    [estimate]   mode, h, method, data, points | interval + n_points
    [experiment] eval_interval, n_points, replications, levy_hole

Unknown sections or keys are rejected. Every problem is reported as a
:class:`ConfigError` naming the section and field.
"""
from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adaptive import AdaptiveConfig
from .bench import ExperimentSpec, default_interval, high_frequency_scheme
from .estimator import FFTSettings
from .kernel import KernelSpec, kernel_from_record
from .levy_sim import MODELS, Irregular, ModelSpec, PowerDecay, Regular, SamplingScheme


class ConfigError(ValueError):
    """Invalid configuration; ``where`` is ``[section] key`` or a file position."""

    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}")


# -----------------------------------------------------------------------------
# value converters
# -----------------------------------------------------------------------------
def _int(s: str) -> int:
    v = float(s)
    if not v.is_integer():
        raise ValueError(f"expected an integer, got {s!r}")
    return int(v)


def _float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"expected a finite number, got {s!r}")
    return v


def _floats(s: str) -> tuple[float, ...]:
    parts = [p for p in s.replace(";", ",").split(",") if p.strip()]
    if not parts:
        raise ValueError("expected a comma-separated list of numbers")
    return tuple(_float(p) for p in parts)


def _pair(s: str) -> tuple[float, float]:
    v = _floats(s)
    if len(v) != 2:
        raise ValueError(f"expected two numbers 'a, b', got {s!r}")
    return v


def _choice(*options):
    def conv(s: str) -> str:
        s = s.strip().lower()
        if s not in options:
            raise ValueError(f"expected one of {options}, got {s!r}")
        return s

    return conv


_SCHEMA = {
    "run": {"seed": _int, "threads": _int, "out": str, "format": _choice("csv", "json")},
    "model": None,   # keys depend on the model name
    "scheme": {
        "type": _choice("regular", "irregular", "power_decay", "high_frequency"),
        "delta": _float, "n": _int, "deltas": _floats, "C": _float, "alpha": _float,
        "total_time": _float, "exponent": _float,
    },
    "kernel": {"base": str, "order": str, "rule": str, "scale": str, "table": str},
    "adaptive": {
        "grid_rule": _choice("theory", "simulation", "explicit"), "M": _int, "bandwidths": _floats,
        "c": _float, "c0_mode": _choice("oracle", "empirical", "manual"), "c0_value": _float,
        "quadrature_step": _float, "engine": _choice("auto", "direct", "fft"),
        "points_per_bandwidth": _float,
    },
    "estimate": {
        "mode": _choice("fixed", "adaptive"), "h": _float, "method": _choice("auto", "direct", "fft"),
        "data": str, "points": _floats, "interval": _pair, "n_points": _int,
    },
    "experiment": {"eval_interval": _pair, "n_points": _int, "replications": _int, "levy_hole": _float},
}

_SCHEME_KEYS = {
    "regular": {"delta", "n"},
    "irregular": {"deltas"},
    "power_decay": {"C", "alpha", "n"},
    "high_frequency": {"total_time", "exponent"},
}


def _parser() -> configparser.ConfigParser:
    p = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    p.optionxform = str   # keep "C" and "M" case-sensitive
    return p


# -----------------------------------------------------------------------------
# RunConfig
# -----------------------------------------------------------------------------
@dataclass
class RunConfig:
    """Typed view of one config file; ``raw`` keeps the converted key/values."""

    raw: dict = field(default_factory=dict)
    root: Path = Path(".")
    source: str = "<config>"

    def section(self, name: str) -> dict:
        return self.raw.get(name, {})

    def has(self, name: str) -> bool:
        return name in self.raw

    def get(self, section: str, key: str, default=None):
        return self.raw.get(section, {}).get(key, default)

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.root / p

    # -- typed builders -------------------------------------------------------
    @property
    def seed(self) -> int:
        return self.get("run", "seed", 0)

    def require(self, *names: str) -> None:
        for n in names:
            if not self.has(n):
                raise ConfigError(f"[{n}]", "section is required for this command")

    def model(self) -> ModelSpec:
        self.require("model")
        sec = dict(self.raw["model"])
        return _guard("model", lambda: MODELS[sec.pop("name")](**sec))

    def scheme(self) -> SamplingScheme:
        self.require("scheme")
        sec = self.raw["scheme"]
        kind = sec["type"]
        if kind == "regular":
            return _guard("scheme", lambda: Regular(sec["delta"], sec["n"]))
        if kind == "irregular":
            return _guard("scheme", lambda: Irregular(sec["deltas"]))
        if kind == "power_decay":
            return _guard("scheme", lambda: PowerDecay(sec["C"], sec["alpha"], sec["n"]))
        return _guard(
            "scheme", lambda: high_frequency_scheme(sec["total_time"], sec.get("exponent", 1.0 / 3.0))
        )

    def kernel(self) -> KernelSpec:
        return _guard("kernel", lambda: kernel_from_record(self.section("kernel"), self.root))

    def adaptive(self) -> AdaptiveConfig:
        sec = dict(self.section("adaptive"))
        ppb = sec.pop("points_per_bandwidth", None)
        if "bandwidths" in sec and "grid_rule" not in sec:
            sec["grid_rule"] = "explicit"
        if ppb is not None:
            sec["fft"] = FFTSettings(points_per_bandwidth=ppb)
        return _guard("adaptive", lambda: AdaptiveConfig(**sec))

    def estimate_points(self) -> np.ndarray:
        sec = self.section("estimate")
        if "points" in sec:
            if "interval" in sec:
                raise ConfigError("[estimate] points", "give either points or interval, not both")
            return np.asarray(sec["points"], dtype=float)
        if "interval" not in sec:
            raise ConfigError("[estimate] points", "give points or interval (+ n_points)")
        a, b = sec["interval"]
        n = sec.get("n_points", 50)
        if not a < b or n < 1:
            raise ConfigError("[estimate] interval", "need a < b and n_points >= 1")
        return np.linspace(a, b, n)

    def experiment(self, replications: int | None = None) -> ExperimentSpec:
        model, scheme = self.model(), self.scheme()
        sec = dict(self.section("experiment"))
        if replications is not None:
            sec["replications"] = replications
        return _guard(
            "experiment",
            lambda: ExperimentSpec(
                model, scheme, self.adaptive(), self.kernel(),
                sec.get("eval_interval", default_interval(model)),
                n_points=sec.get("n_points", 50),
                replications=sec.get("replications", 10),
                master_seed=self.seed,
                levy_hole=sec.get("levy_hole", 0.04),
            ),
        )


def _guard(section: str, build):
    try:
        return build()
    except ConfigError:
        raise
    except KeyError as exc:
        raise ConfigError(f"[{section}] {exc.args[0]}", "missing or unknown value") from None
    except TypeError as exc:
        raise ConfigError(f"[{section}]", str(exc)) from None
    except ValueError as exc:
        raise ConfigError(f"[{section}]", str(exc)) from None


def _model_schema(name: str) -> dict:
    cls = MODELS[name]
    return {f.name: _float for f in dataclasses.fields(cls)}


def parse_config(text: str, source: str = "<config>", root: Path | str = ".") -> RunConfig:
    """Parse and validate INI text; raises :class:`ConfigError` on the first problem."""
    p = _parser()
    try:
        p.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(source, str(exc).replace("\n", " ")) from None
    raw: dict = {}
    for sec in p.sections():
        if sec not in _SCHEMA:
            raise ConfigError(f"[{sec}]", f"unknown section; expected one of {sorted(_SCHEMA)}")
        items = dict(p.items(sec))
        schema = _SCHEMA[sec]
        if sec == "model":
            name = items.pop("name", None)
            if name is None:
                raise ConfigError("[model] name", f"required; one of {sorted(MODELS)}")
            name = name.strip().lower()
            if name not in MODELS:
                raise ConfigError("[model] name", f"unknown model {name!r}; one of {sorted(MODELS)}")
            schema = _model_schema(name)
            out = {"name": name}
        else:
            out = {}
        for key, value in items.items():
            if key not in schema:
                raise ConfigError(f"[{sec}] {key}", f"unknown key; allowed: {sorted(schema)}")
            try:
                out[key] = schema[key](value.strip())
            except ValueError as exc:
                raise ConfigError(f"[{sec}] {key}", str(exc)) from None
        raw[sec] = out
    _check_scheme(raw.get("scheme"))
    return RunConfig(raw, Path(root), source)


def _check_scheme(sec):
    if sec is None:
        return
    if "type" not in sec:
        raise ConfigError("[scheme] type", f"required; one of {sorted(_SCHEME_KEYS)}")
    allowed = _SCHEME_KEYS[sec["type"]] | {"type"}
    extra = set(sec) - allowed
    if extra:
        key = sorted(extra)[0]
        raise ConfigError(f"[scheme] {key}", f"not used by scheme type {sec['type']!r}")
    optional = {"exponent"}
    for key in sorted(allowed - set(sec) - optional):
        raise ConfigError(f"[scheme] {key}", f"required for scheme type {sec['type']!r}")


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, source=str(path), root=path.parent)
