"""Run configuration and its INI-style file format.

Grammar (``configparser`` syntax, ``;`` or ``#`` comments, all sections optional)::

    [problem]
    epsilon = 0.5                       ; positive
    lambda = 1                          ; cubic coefficient, f(u) = lambda u^3
    nonlinearity = cubic                ; cubic | constant | zero
    constant = 0                        ; K for nonlinearity = constant
    phi1 = gaussian(amplitude=2)        ; preset(name=value, ...)
    phi2 = gaussian(amplitude=3)
    a = -32
    b = 32

    [grid]
    h = 1/16                            ; or M = 1024; fractions allowed
    dealias = false

    [time]
    tau = 0.1
    T = 2

    [method]
    methods = ewi4, ewi6                ; ewi2 | ewi4 | ewi6 | rk4

    [study]
    tau_levels = 4                      ; tau, tau/2, tau/4, ...
    epsilon_levels = 1                  ; epsilon, epsilon/2, ...
    tau_per_epsilon = 4                 ; tau_0 divisor per epsilon halving
    h_values = 1/2, 1/4, 1/8            ; spatial and stability studies

    [reference]
    enabled = true
    cache_dir = .kgewi-cache
    tau = 1e-5
    h = 1/16
    order = 6

    [output]
    csv = results.csv
    json = results.json
    energy_stride = 1                   ; 0 disables energy tracking
    wall_time = true                    ; false writes an empty column
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from ..grid import GridSpec
from ..problem import (
    ConstantNonlinearity,
    CubicNonlinearity,
    KGEProblem,
    PolynomialNonlinearity,
    preset,
)

__all__ = [
    "ConfigError",
    "MethodSpec",
    "RunConfig",
    "parse_method",
    "parse_preset",
    "load_config",
    "parse_config",
]

METHOD_TAGS = ("ewi2", "ewi4", "ewi6", "rk4")


class ConfigError(ValueError):
    """Invalid or unreadable run configuration."""


@dataclass(frozen=True)
class MethodSpec:
    """A time integrator: ``family`` is ``"ewi"`` or ``"rk4"``."""

    family: str
    order: int

    @property
    def tag(self) -> str:
        return "rk4" if self.family == "rk4" else f"ewi{self.order}"


def parse_method(tag: str) -> MethodSpec:
    tag = tag.strip().lower()
    if tag not in METHOD_TAGS:
        raise ConfigError(f"unknown method {tag!r}; choose from {', '.join(METHOD_TAGS)}")
    if tag == "rk4":
        return MethodSpec("rk4", 4)
    return MethodSpec("ewi", int(tag[3:]))


def _number(text: str, what: str) -> float:
    text = str(text).strip()
    try:
        value = float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{what}: cannot parse number {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{what}: must be finite, got {text!r}")
    return value


_PRESET_RE = re.compile(r"^\s*([A-Za-z_]\w*)\s*(?:\((.*)\))?\s*$")


def parse_preset(text: str):
    """Parse ``name(key=value, ...)`` into an :class:`~kgewi.problem.InitialData`."""
    m = _PRESET_RE.match(text)
    if m is None:
        raise ConfigError(f"cannot parse initial-data preset {text!r}")
    name, body = m.group(1), m.group(2)
    params = {}
    if body and body.strip():
        for item in body.split(","):
            if "=" not in item:
                raise ConfigError(f"preset parameter {item.strip()!r} is not key=value")
            k, v = item.split("=", 1)
            params[k.strip()] = _number(v, f"preset {name}.{k.strip()}")
    try:
        return preset(name, **params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class RunConfig:
    """Everything a harness run needs; see the module docstring for the file format."""

    epsilon: float = 0.5
    lam: float = 1.0
    nonlinearity: str = "cubic"
    constant: float = 0.0
    phi1: str = "gaussian(amplitude=2)"
    phi2: str = "gaussian(amplitude=3)"
    a: float = -32.0
    b: float = 32.0
    h: float = 1.0 / 16
    dealias: bool = False
    tau: float = 0.1
    T: float = 2.0
    methods: tuple = ("ewi4",)
    tau_levels: int = 1
    epsilon_levels: int = 1
    tau_per_epsilon: float = 4.0
    h_values: tuple = ()
    reference: bool = True
    cache_dir: str = ".kgewi-cache"
    ref_tau: float = 1e-5
    ref_h: float = 1.0 / 16
    ref_order: int = 6
    csv: str | None = None
    json: str | None = None
    energy_stride: int = 1
    wall_time: bool = True
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("epsilon", "tau", "T", "h", "ref_tau", "ref_h", "tau_per_epsilon"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive, got {value!r}")
        if not self.b > self.a:
            raise ConfigError(f"need b > a, got a={self.a}, b={self.b}")
        if self.nonlinearity not in ("cubic", "constant", "zero"):
            raise ConfigError(f"unknown nonlinearity {self.nonlinearity!r}")
        if not self.methods:
            raise ConfigError("at least one method is required")
        for tag in self.methods:
            parse_method(tag)
        if self.ref_order not in (2, 4, 6):
            raise ConfigError(f"reference order must be 2, 4 or 6, got {self.ref_order}")
        for name in ("tau_levels", "epsilon_levels"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.energy_stride < 0:
            raise ConfigError("energy_stride must be >= 0")
        for h in (self.h, self.ref_h, *self.h_values):
            self.grid_for(h)
        parse_preset(self.phi1)
        parse_preset(self.phi2)

    # -- derived objects ---------------------------------------------------
    def grid_for(self, h: float) -> GridSpec:
        ratio = (self.b - self.a) / h
        M = int(round(ratio))
        if M < 4 or M % 2 or abs(ratio - M) > 1e-9 * max(1.0, ratio):
            raise ConfigError(f"h = {h} does not divide [{self.a}, {self.b}] into an even number of cells")
        return GridSpec(self.a, self.b, M)

    @property
    def grid(self) -> GridSpec:
        return self.grid_for(self.h)

    @property
    def method_specs(self) -> list:
        return [parse_method(t) for t in self.methods]

    def make_nonlinearity(self):
        if self.nonlinearity == "cubic":
            return CubicNonlinearity(self.lam)
        if self.nonlinearity == "constant":
            return ConstantNonlinearity(self.constant)
        return PolynomialNonlinearity([0.0])

    def problem(self, epsilon: float | None = None) -> KGEProblem:
        eps = self.epsilon if epsilon is None else epsilon
        return KGEProblem(eps, self.make_nonlinearity(), parse_preset(self.phi1), parse_preset(self.phi2))

    def epsilon_ladder(self) -> list:
        """``[(epsilon_k, tau_k)]`` with ``epsilon_k = epsilon / 2^k`` and ``tau_k = tau / r^k``."""
        return [(self.epsilon / 2**k, self.tau / self.tau_per_epsilon**k) for k in range(self.epsilon_levels)]

    def replace(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("extra")
        d["methods"] = list(self.methods)
        d["h_values"] = list(self.h_values)
        return d


def _bool(text: str, what: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{what}: expected a boolean, got {text!r}")


def _int(text: str, what: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"{what}: expected an integer, got {text!r}") from None


# (section, key) -> (field, parser)
_FIELDS = {
    ("problem", "epsilon"): ("epsilon", _number),
    ("problem", "lambda"): ("lam", _number),
    ("problem", "nonlinearity"): ("nonlinearity", lambda s, w: s.strip().lower()),
    ("problem", "constant"): ("constant", _number),
    ("problem", "phi1"): ("phi1", lambda s, w: s.strip()),
    ("problem", "phi2"): ("phi2", lambda s, w: s.strip()),
    ("problem", "a"): ("a", _number),
    ("problem", "b"): ("b", _number),
    ("grid", "h"): ("h", _number),
    ("grid", "dealias"): ("dealias", _bool),
    ("time", "tau"): ("tau", _number),
    ("time", "t"): ("T", _number),
    ("method", "methods"): ("methods", lambda s, w: tuple(x.strip().lower() for x in s.split(",") if x.strip())),
    ("study", "tau_levels"): ("tau_levels", _int),
    ("study", "epsilon_levels"): ("epsilon_levels", _int),
    ("study", "tau_per_epsilon"): ("tau_per_epsilon", _number),
    ("study", "h_values"): ("h_values", lambda s, w: tuple(_number(x, w) for x in s.split(",") if x.strip())),
    ("reference", "enabled"): ("reference", _bool),
    ("reference", "cache_dir"): ("cache_dir", lambda s, w: s.strip()),
    ("reference", "tau"): ("ref_tau", _number),
    ("reference", "h"): ("ref_h", _number),
    ("reference", "order"): ("ref_order", _int),
    ("output", "csv"): ("csv", lambda s, w: s.strip() or None),
    ("output", "json"): ("json", lambda s, w: s.strip() or None),
    ("output", "energy_stride"): ("energy_stride", _int),
    ("output", "wall_time"): ("wall_time", _bool),
}


def parse_config(text: str, base_dir: str | Path | None = None) -> RunConfig:
    """Parse config text; relative paths resolve against ``base_dir`` when given."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str.lower
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    values = {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            sec = section.lower()
            if (sec, key) == ("grid", "m"):
                values["_M"] = _int(raw, "grid.M")
                continue
            if (sec, key) not in _FIELDS:
                raise ConfigError(f"unknown key [{section}] {key}")
            name, parse = _FIELDS[(sec, key)]
            values[name] = parse(raw, f"{section}.{key}")
    if "_M" in values:
        M = values.pop("_M")
        if "h" in values:
            raise ConfigError("give either grid.h or grid.M, not both")
        if M < 4 or M % 2:
            raise ConfigError(f"grid.M must be even and >= 4, got {M}")
        values["h"] = (values.get("b", RunConfig.b) - values.get("a", RunConfig.a)) / M
    if base_dir is not None:
        base = Path(base_dir)
        for name in ("csv", "json", "cache_dir"):
            if values.get(name) and not Path(values[name]).is_absolute():
                values[name] = str(base / values[name])
    try:
        return RunConfig(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return parse_config(text)
