"""Run configuration: INI-style files, command-line overrides, and echo.

Precedence, lowest first: built-in defaults, config file keys, command-line
flags.

Example file::

    [grid]
    x_f = 2
    t_f = 2
    n_x = 100
    n_t = 100

    [source]
    name = affine
    alpha = 1

    [noise]
    sigma = 0.1
    seed = 7

    [boundary]
    kind = linear-exact
    c1 = 1
    c2 = 0
    alpha = 1

    [run]
    trials = 200
    guard = 1e6
    record = points:2:2
    threads = 4

    [output]
    dir = runs/affine
"""

from __future__ import annotations

import configparser
import io
import re
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .grid import BoundaryData, GridSpec, constant_boundary
from .oracle import LinearExactParams, linear_exact_boundary
from .solver import DEFAULT_GUARD, Record
from .source import Source, make_source


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending line when known."""


BC_KINDS = ("constant", "linear-exact", "table")


@dataclass(frozen=True)
class RunConfig:
    x_f: float = 1.0
    t_f: float = 1.0
    n_x: int = 100
    n_t: int = 100
    source: str = "zero"
    source_params: dict = field(default_factory=dict)
    sigma: float = 0.0
    seed: int = 0
    bc_kind: str = "constant"
    bc_params: dict = field(default_factory=lambda: {"value": 0.0})
    trials: int = 1
    guard: float = DEFAULT_GUARD
    record: str = "full"
    threads: int | None = None
    out: str = "out"

    def grid(self) -> GridSpec:
        return GridSpec(self.x_f, self.t_f, self.n_x, self.n_t)

    def make_source(self) -> Source:
        return make_source(self.source, **self.source_params)

    def boundary(self, spec: GridSpec | None = None) -> BoundaryData:
        spec = spec or self.grid()
        p = self.bc_params
        if self.bc_kind == "constant":
            return constant_boundary(spec, float(p.get("value", 0.0)))
        if self.bc_kind == "linear-exact":
            return linear_exact_boundary(
                spec, LinearExactParams(float(p["c1"]), float(p["c2"]), float(p["alpha"]))
            )
        if self.bc_kind == "table":
            return BoundaryData(np.asarray(p["f"], dtype=float), np.asarray(p["g"], dtype=float))
        raise ConfigError(f"unknown boundary kind {self.bc_kind!r}")

    def make_record(self) -> Record:
        return parse_record(self.record)

    def as_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> "RunConfig":
        try:
            self.grid()
            self.make_source()
            self.make_record()
            if self.bc_kind != "table":
                self.boundary()
        except (ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.sigma < 0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        return self


# --- record mode text form --------------------------------------------------------

def parse_record(text: str) -> Record:
    """``full`` | ``slices:t=40,x=4`` | ``points:2:2;0.5:0.5`` (slices may add ``;points...``)."""
    text = text.strip()
    if text == "full":
        return Record.full()
    mode, _, rest = text.partition(":")
    if mode == "slices":
        slices, _, pts = rest.partition(";points=")
        items = []
        for part in filter(None, slices.split(",")):
            axis, _, value = part.partition("=")
            items.append((axis.strip(), float(value)))
        return Record.of_slices(items, _parse_points(pts) if pts else ())
    if mode == "points":
        return Record.of_points(_parse_points(rest))
    raise ValueError(f"unknown record mode {text!r}")


def _parse_points(text):
    points = []
    for part in filter(None, text.split(";")):
        x, t = part.split(":")
        points.append((float(x), float(t)))
    return points


def parse_source_text(text: str) -> tuple[str, dict]:
    """``affine:alpha=-1,beta=0`` -> ("affine", {"alpha": -1.0, "beta": 0.0})."""
    name, _, rest = text.partition(":")
    return name.strip(), _kv_floats(rest)


def parse_bc_text(text: str) -> tuple[str, dict]:
    """``1`` | ``constant:value=1`` | ``linear-exact:c1=1,c2=0,alpha=1`` | ``table:path.csv``."""
    text = text.strip()
    try:
        return "constant", {"value": float(text)}
    except ValueError:
        pass
    kind, _, rest = text.partition(":")
    if kind == "table":
        f, g = read_boundary_table(rest)
        return "table", {"f": f, "g": g}
    if kind not in BC_KINDS:
        raise ConfigError(f"unknown boundary kind {kind!r}; expected one of {', '.join(BC_KINDS)}")
    return kind, _kv_floats(rest)


def read_boundary_table(path: str) -> tuple[list, list]:
    """Two-column file: ``f`` samples then ``g`` samples, lines ``f,<value>`` / ``g,<value>``."""
    f, g = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition(",")
            if key not in ("f", "g"):
                raise ConfigError(f"{path}:{lineno}: expected 'f,<value>' or 'g,<value>', got {line!r}")
            (f if key == "f" else g).append(float(value))
    return f, g


def _kv_floats(text: str) -> dict:
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, eq, value = part.partition("=")
        if not eq:
            raise ConfigError(f"expected key=value, got {part!r}")
        out[key.strip()] = float(value)
    return out


# --- INI file round trip ----------------------------------------------------------

_SECTIONS = {
    "grid": {"x_f": float, "t_f": float, "n_x": int, "n_t": int},
    "noise": {"sigma": float, "seed": int},
    "run": {"trials": int, "guard": float, "record": str, "threads": int},
    "output": {"dir": str},
}


def _line_of(text: str, section: str, key: str) -> int | None:
    current = None
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[(.+)\]", s)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", s):
            return lineno
    return None


def _where(text, section, key):
    line = _line_of(text, section, key)
    return f"line {line}" if line else f"[{section}] {key}"


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    cfg = base or RunConfig()
    updates = {}
    for section in cp.sections():
        if section not in (*_SECTIONS, "source", "boundary"):
            raise ConfigError(f"line {_line_of_section(text, section)}: unknown section [{section}]")
    for section, keys in _SECTIONS.items():
        if not cp.has_section(section):
            continue
        for key, value in cp.items(section):
            if key not in keys:
                raise ConfigError(f"{_where(text, section, key)}: unknown key {key!r} in [{section}]")
            try:
                converted = keys[key](float(value)) if keys[key] is int and "e" in value.lower() else keys[key](value)
            except ValueError:
                raise ConfigError(f"{_where(text, section, key)}: bad value {value!r} for {key}") from None
            updates["out" if key == "dir" else key] = converted
    if cp.has_section("source"):
        items = dict(cp.items("source"))
        if "name" not in items:
            raise ConfigError("[source] needs a 'name' key")
        updates["source"] = items.pop("name")
        updates["source_params"] = _floats(text, "source", items)
    if cp.has_section("boundary"):
        items = dict(cp.items("boundary"))
        kind = items.pop("kind", "constant")
        if kind not in BC_KINDS:
            raise ConfigError(f"{_where(text, 'boundary', 'kind')}: unknown boundary kind {kind!r}")
        if kind == "table":
            params = {}
            for key in ("f", "g"):
                try:
                    params[key] = [float(v) for v in items[key].split()]
                except (KeyError, ValueError):
                    raise ConfigError(f"{_where(text, 'boundary', key)}: table boundary needs whitespace-separated '{key}' values") from None
        else:
            params = _floats(text, "boundary", items)
        updates["bc_kind"] = kind
        updates["bc_params"] = params
    try:
        return replace(cfg, **updates).validate()
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _line_of_section(text, section):
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.strip() == f"[{section}]":
            return lineno
    return "?"


def _floats(text, section, items):
    out = {}
    for key, value in items.items():
        try:
            out[key] = float(value)
        except ValueError:
            raise ConfigError(f"{_where(text, section, key)}: expected a number for {key}, got {value!r}") from None
    return out


def emit_config(cfg: RunConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp["grid"] = {"x_f": repr(cfg.x_f), "t_f": repr(cfg.t_f), "n_x": str(cfg.n_x), "n_t": str(cfg.n_t)}
    cp["source"] = {"name": cfg.source, **{k: repr(float(v)) for k, v in cfg.source_params.items()}}
    cp["noise"] = {"sigma": repr(cfg.sigma), "seed": str(cfg.seed)}
    if cfg.bc_kind == "table":
        bc = {k: " ".join(repr(float(v)) for v in cfg.bc_params[k]) for k in ("f", "g")}
    else:
        bc = {k: repr(float(v)) for k, v in cfg.bc_params.items()}
    cp["boundary"] = {"kind": cfg.bc_kind, **bc}
    run = {"trials": str(cfg.trials), "guard": repr(cfg.guard), "record": cfg.record}
    if cfg.threads is not None:
        run["threads"] = str(cfg.threads)
    cp["run"] = run
    cp["output"] = {"dir": cfg.out}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def load_config(path: str, base: RunConfig | None = None) -> RunConfig:
    with open(path) as fh:
        text = fh.read()
    try:
        return parse_config(text, base)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
