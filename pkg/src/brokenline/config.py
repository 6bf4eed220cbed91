"""Experiment configuration: INI-style sections, schema checks, env overrides."""

from __future__ import annotations

import configparser
import hashlib
import json
import math
import os
import re
from dataclasses import dataclass, field

from .broken_line import Dimensions

ENV_PREFIX = "BROKENLINE_"


class ConfigError(ValueError):
    """Schema violation, carrying the source location when known."""

    def __init__(self, message, section=None, key=None, line=None, source=None):
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if section:
            where.append(f"[{section}]" + (f" {key}" if key else ""))
        super().__init__(("%s: " % ", ".join(where) if where else "") + message)
        self.section, self.key, self.line = section, key, line


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _int(s):
    return int(s, 0)


def _bool(s):
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _list(conv):
    def parse(s):
        items = [t for t in re.split(r"[,\s]+", s.strip()) if t]
        if not items:
            raise ValueError("empty list")
        return tuple(conv(t) for t in items)

    return parse


def _optional(conv):
    def parse(s):
        return None if s.strip().lower() in ("", "none", "default") else conv(s)

    return parse


def _positive(v):
    vals = v if isinstance(v, tuple) else (v,)
    return all(x > 0 for x in vals)


def _above_one(v):
    vals = v if isinstance(v, tuple) else (v,)
    return all(x > 1 for x in vals)


def _any(_):
    return True


@dataclass(frozen=True)
class Key:
    parse: object
    default: object
    check: object = _any
    hint: str = ""


# Every accepted key, its parser, default and range check.
SCHEMA = {
    "run": {
        "experiments": Key(_list(str), ("specfun",)),
        "seed": Key(_int, 0, lambda v: 0 <= v < 2**64, "0 <= seed < 2^64"),
        "out": Key(str, "results"),
        "threads": Key(_int, 1, lambda v: v >= 1, ">= 1"),
        "record_timing": Key(_bool, False),
    },
    "dims": {
        "d1": Key(_float, 1.5, lambda v: v > 1, "> 1"),
        "d2": Key(_float, 3.0, lambda v: v > 1, "> 1"),
    },
    "grid": {
        "r": Key(_list(_float), (1250.0, 2500.0, 5000.0, 10000.0), _above_one, "> 1"),
        "r_growth": Key(_list(_float), (1e2, 1e3, 1e4, 1e6), _above_one, "> 1"),
        "nodes": Key(_int, 4000, lambda v: v >= 16, ">= 16"),
        "scheme": Key(str, "log", lambda v: v in ("log", "uniform"), "log or uniform"),
    },
    "quadrature": {
        "tol": Key(_float, 1e-8, lambda v: 0 < v < 1, "0 < tol < 1"),
    },
    "probe": {
        "p": Key(_optional(_list(_float)), None, lambda v: v is None or _above_one(v), "> 1"),
        "q": Key(_optional(_list(_float)), None, lambda v: v is None or _above_one(v), "> 1"),
        "family": Key(_list(_int), (20, 20, 10), lambda v: len(v) == 3 and min(v) >= 0 and sum(v) > 0,
                      "three non-negative counts"),
        "sets": Key(_int, 30, lambda v: v >= 1, ">= 1"),
    },
    "specfun": {
        "orders": Key(_list(_float), (-0.25, 0.0, 0.5, 1.5), lambda v: all(abs(x) < 10 for x in v), "|nu| < 10"),
        "args": Key(_list(_float), (0.01, 0.5, 1.0, 2.0, 10.0), _positive, "> 0"),
    },
    "appendix": {
        "eps": Key(_float, 0.05, lambda v: 0 < v < 0.5, "0 < eps < 0.5"),
        "cases": Key(_optional(_list(_int)), (1, 2, 3, 4), lambda v: v is None or set(v) <= {1, 2, 3, 4},
                     "subset of 1..4"),
    },
    "hh": {
        "per_decade": Key(_int, 400, lambda v: v >= 10, ">= 10"),
    },
    "th": {
        "a": Key(_float, 1.0, _positive, "> 0"),
        "b": Key(_float, 1.5, _positive, "> 0"),
        "c": Key(_float, 1.0, _positive, "> 0"),
        "p": Key(_list(_float), (1.5, 2.0, 4.0), _above_one, "> 1"),
        "r": Key(_list(_float), (100.0, 200.0, 400.0), _above_one, "> 1"),
    },
    "endpoint": {
        "r": Key(_list(_float), (1e2, 1e4), _above_one, "> 1"),
    },
    "duality": {
        "r": Key(_float, 200.0, _above_one, "> 1"),
        "nodes": Key(_int, 2000, lambda v: v >= 16, ">= 16"),
        "pairs": Key(_int, 20, lambda v: v >= 1, ">= 1"),
    },
}

# Keys that change neither computation nor output bytes.
NON_SEMANTIC = {("run", "out"), ("run", "threads")}


def _line_index(text):
    """``(section, key) -> line number`` for diagnostics."""
    out, section = {}, None
    for no, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip().lower()
            out[(section, None)] = no
            continue
        m = re.match(r"([^=:]+)[=:]", s)
        if m and section:
            out[(section, m.group(1).strip().lower())] = no
    return out


@dataclass
class Config:
    values: dict
    source: str | None = None
    overrides: dict = field(default_factory=dict)

    def get(self, section, key):
        return self.values[section][key]

    # shorthands used by the experiments
    @property
    def dims(self) -> Dimensions:
        return Dimensions(self.get("dims", "d1"), self.get("dims", "d2"))

    @property
    def seed(self) -> int:
        return self.get("run", "seed")

    @property
    def tol(self) -> float:
        return self.get("quadrature", "tol")

    @property
    def nodes(self) -> int:
        return self.get("grid", "nodes")

    @property
    def R_doubling(self):
        return self.get("grid", "r")

    @property
    def R_growth(self):
        return self.get("grid", "r_growth")

    @property
    def family(self):
        return self.get("probe", "family")

    @property
    def sets(self) -> int:
        return self.get("probe", "sets")

    @property
    def timing(self) -> bool:
        return self.get("run", "record_timing")

    @property
    def experiments(self):
        return self.get("run", "experiments")

    def p_list(self, experiment: str):
        """Configured ``p`` values, else a default inside the expected range."""
        given = self.get("probe", "p")
        if given is not None:
            return given
        dims = self.dims
        if experiment == "hardy":
            return (1.0 + 0.5 * (dims.d_star - 1.0),)
        if experiment == "riesz":
            return tuple(round(1.0 + f * (dims.p0 - 1.0), 12) for f in (0.15, 0.5, 0.75))
        return (1.5, 2.0, 4.0)

    def semantic(self) -> dict:
        return {s: {k: v for k, v in kv.items() if (s, k) not in NON_SEMANTIC}
                for s, kv in self.values.items()}

    def digest(self) -> str:
        text = json.dumps(self.semantic(), sort_keys=True, default=repr)
        return hashlib.sha256(text.encode()).hexdigest()

    def echo(self) -> str:
        lines = []
        for s in SCHEMA:
            lines.append(f"[{s}]")
            for k, v in self.values[s].items():
                lines.append(f"{k} = {_format(v)}")
        return "\n".join(lines) + "\n"


def _format(v):
    if v is None:
        return "none"
    if isinstance(v, tuple):
        return ", ".join(_format(x) for x in v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def _convert(section, key, raw, lines, source):
    spec = SCHEMA[section][key]
    line = lines.get((section, key))
    try:
        value = spec.parse(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"cannot parse {raw!r} ({exc})", section, key, line, source) from None
    if not spec.check(value):
        raise ConfigError(f"value {raw!r} out of range (expected {spec.hint})", section, key, line, source)
    return value


def parse_config(text: str = "", source=None, env=None, overrides=None) -> Config:
    """Validate ``text`` against :data:`SCHEMA`.

    ``env`` (default ``os.environ``) may carry ``BROKENLINE_<SECTION>_<KEY>``
    values, which win over the file; ``overrides`` maps ``(section, key)``
    to raw strings and wins over both.
    """
    parser = configparser.ConfigParser(interpolation=None, strict=True, inline_comment_prefixes=("#", ";"))
    lines = _line_index(text)
    try:
        parser.read_string(text, source=str(source or "<config>"))
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " "), source=source,
                          line=getattr(exc, "lineno", None)) from None
    values = {s: {k: spec.default for k, spec in keys.items()} for s, keys in SCHEMA.items()}
    for section in parser.sections():
        sec = section.lower()
        if sec not in SCHEMA:
            raise ConfigError("unknown section", section, None, lines.get((sec, None)), source)
        for key, raw in parser.items(section):
            if key not in SCHEMA[sec]:
                raise ConfigError("unknown key", sec, key, lines.get((sec, key)), source)
            values[sec][key] = _convert(sec, key, raw, lines, source)
    env = os.environ if env is None else env
    applied = {}
    for name, raw in sorted(env.items()):
        if not name.startswith(ENV_PREFIX):
            continue
        rest = name[len(ENV_PREFIX):].lower()
        match = [(s, k) for s in SCHEMA for k in SCHEMA[s] if rest == f"{s}_{k}"]
        if not match:
            raise ConfigError(f"environment variable {name} names no config key")
        s, k = match[0]
        values[s][k] = _convert(s, k, raw, {}, f"${name}")
        applied[(s, k)] = raw
    for (s, k), raw in (overrides or {}).items():
        values[s][k] = _convert(s, k, raw, {}, "command line")
        applied[(s, k)] = raw
    from .experiments import BY_ID

    for exp in values["run"]["experiments"]:
        if exp not in BY_ID:
            raise ConfigError(f"unknown experiment {exp!r}", "run", "experiments",
                              lines.get(("run", "experiments")), source)
    if not values["dims"]["d1"] <= values["dims"]["d2"]:
        raise ConfigError("d1 must not exceed d2", "dims", "d2", lines.get(("dims", "d2")), source)
    return Config(values, str(source) if source else None, applied)


def load_config(path=None, env=None, overrides=None) -> Config:
    if path is None:
        return parse_config("", None, env, overrides)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, path, env, overrides)
