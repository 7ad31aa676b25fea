"""INI configuration files, overrides and the three built-in experiment presets.

Schema (every section optional when ``[preset] name`` supplies a base)::

    [preset]
    name = example1

    [physics]       hbar, mass, g
    [grid]          x_l, x_r, J | dx, dt, N | t_final
    [nonlinearity]  kind = cubic | quintic | none
    [potential]     kind = zero | gaussian | tabulated; amplitude, width, center;
                    x_samples, v_samples (comma separated)
    [initial]       kind = bright_soliton | chirped_gaussian | gaussian; A, B, x0, k0, alpha, g
    [boundary]      order; k0 (both sides), k0_left, k0_right
    [solver]        picard_tol, picard_max_iter
"""
from __future__ import annotations

import configparser
import dataclasses
import io
import re
from pathlib import Path

from .core import (
    ConfigError,
    InitialCondition,
    NonlinearitySpec,
    PhysicalParams,
    PotentialSpec,
    grid_from_spacing,
    make_grid,
)
from .solver import BoundarySpec, SimulationConfig, SolverSettings

SECTIONS = ("physics", "grid", "nonlinearity", "potential", "initial", "boundary", "solver")
GRID_KEYS = ("x_l", "x_r", "J", "dx", "dt", "N", "t_final")
ORDER_ALIASES = {
    "1": "abc1_linear",
    "2": "abc2_nonlinear",
    "3": "abc3_nonlinear",
    "dirichlet": "dirichlet_zero",
    "neumann": "neumann_zero",
}

_SECTION_TYPES = {
    "physics": PhysicalParams,
    "nonlinearity": NonlinearitySpec,
    "potential": PotentialSpec,
    "initial": InitialCondition,
    "boundary": BoundarySpec,
    "solver": SolverSettings,
}


class ConfigFileError(ConfigError):
    def __init__(self, key: str, message: str, path=None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line else f"{path}: "
        ValueError.__init__(self, f"{where}{key}: {message}")
        self.key = key
        self.line = line
        self.path = path


# -- presets ------------------------------------------------------------------

def example1(dx: float = 0.1, dt: float = 0.01, t_final: float = 6.0, k0: float = 2.0, g: float = -2.0) -> SimulationConfig:
    """Bright soliton leaving [0, 30] through the right boundary (final time 6)."""
    return SimulationConfig(
        physics=PhysicalParams(1.0, 0.5, g),
        grid=grid_from_spacing(0.0, 30.0, dx, dt, t_final),
        nonlinearity=NonlinearitySpec("cubic"),
        potential=PotentialSpec("zero"),
        initial=InitialCondition("bright_soliton", A=1.0, B=2.0, x0=15.0, g=g),
        boundary=BoundarySpec("abc3_nonlinear", k0, k0),
    )


def example2(dx: float = 0.01, dt: float = 0.001, t_final: float = 1.0, k0: float = 8.0) -> SimulationConfig:
    """Focusing quintic NLS, chirped Gaussian on [-5, 5] (final time 1.0)."""
    return SimulationConfig(
        physics=PhysicalParams(1.0, 0.5, -2.0),
        grid=grid_from_spacing(-5.0, 5.0, dx, dt, t_final),
        nonlinearity=NonlinearitySpec("quintic"),
        potential=PotentialSpec("zero"),
        initial=InitialCondition("chirped_gaussian", k0=8.0),
        boundary=BoundarySpec("abc3_nonlinear", k0, k0),
    )


def example3(dx: float = 0.1, dt: float = 0.0375, t_final: float = 6.0, k0: float = 2.0) -> SimulationConfig:
    """Repulsive cubic NLS with a Gaussian barrier and Gaussian data on [0, 30] (final time 6)."""
    return SimulationConfig(
        physics=PhysicalParams(1.0, 0.5, 2.0),
        grid=grid_from_spacing(0.0, 30.0, dx, dt, t_final),
        nonlinearity=NonlinearitySpec("cubic"),
        potential=PotentialSpec("gaussian", amplitude=1.0, width=0.5, center=15.0),
        initial=InitialCondition("gaussian", alpha=0.1, x0=15.0),
        boundary=BoundarySpec("abc3_nonlinear", k0, k0),
    )


PRESETS = {"example1": example1, "example2": example2, "example3": example3}


def preset(name: str) -> SimulationConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError("preset.name", f"unknown preset {name!r} (choose from {', '.join(PRESETS)})") from None


# -- flat key access ----------------------------------------------------------

def _coerce(value, target, key: str):
    """Convert a string (or value) to the type of ``target``."""
    if isinstance(target, tuple):
        if isinstance(value, str):
            value = [v for v in re.split(r"[,\s]+", value.strip()) if v]
        try:
            return tuple(float(v) for v in value)
        except ValueError:
            raise ConfigError(key, f"expected a list of numbers, got {value!r}") from None
    if isinstance(target, bool):
        raise ConfigError(key, "boolean fields are not configurable")
    if isinstance(target, int):
        try:
            f = float(value)
        except (TypeError, ValueError):
            raise ConfigError(key, f"expected an integer, got {value!r}") from None
        if f != int(f):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return int(f)
    if isinstance(target, float):
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(key, f"expected a number, got {value!r}") from None
    return str(value).strip()


def _grid_values(config: SimulationConfig) -> dict:
    g = config.grid
    return {"x_l": g.x_l, "x_r": g.x_r, "J": g.J, "dt": g.dt, "N": g.N}


def apply_overrides(config: SimulationConfig, overrides: dict) -> SimulationConfig:
    """Return ``config`` with ``{"section.key": value}`` entries replaced.

    Grid keys keep the other quantities fixed where possible: changing ``dt``
    keeps the final time, changing ``dx`` keeps the domain.
    """
    sections = {name: dataclasses.asdict(getattr(config, name)) for name in _SECTION_TYPES}
    grid = _grid_values(config)
    grid_updates = {}
    for full_key, raw in overrides.items():
        section, _, key = full_key.partition(".")
        if not key:
            raise ConfigError(full_key, "override keys look like section.key")
        if section == "grid":
            if key not in GRID_KEYS:
                raise ConfigError(full_key, "unknown grid key")
            target = 0 if key in ("J", "N") else 0.0
            grid_updates[key] = _coerce(raw, target, full_key)
            continue
        if section not in sections:
            raise ConfigError(full_key, "unknown section")
        if section == "boundary" and key == "k0":
            k = _coerce(raw, 0.0, full_key)
            sections["boundary"]["k0_left"] = sections["boundary"]["k0_right"] = k
            continue
        if section == "boundary" and key == "order":
            raw = ORDER_ALIASES.get(str(raw).strip(), raw)
        if key not in sections[section]:
            raise ConfigError(full_key, "unknown key")
        sections[section][key] = _coerce(raw, sections[section][key], full_key)

    try:
        built = {name: cls(**sections[name]) for name, cls in _SECTION_TYPES.items()}
    except ConfigError:
        raise
    return SimulationConfig(grid=_build_grid(grid, grid_updates), **built)


def _build_grid(current: dict, updates: dict):
    x_l = updates.get("x_l", current["x_l"])
    x_r = updates.get("x_r", current["x_r"])
    t_final = current["N"] * current["dt"]
    dt = updates.get("dt", current["dt"])
    if not dt > 0:
        raise ConfigError("grid.dt", "dt must be > 0")
    if "dx" in updates and not updates["dx"] > 0:
        raise ConfigError("grid.dx", "dx must be > 0")
    if "dx" in updates and "J" in updates:
        raise ConfigError("grid.dx", "give either dx or J, not both")
    if "N" in updates and "t_final" in updates:
        raise ConfigError("grid.t_final", "give either N or t_final, not both")
    if "J" in updates:
        J = updates["J"]
    elif "dx" in updates:
        J = _count(x_r - x_l, updates["dx"], "grid.dx")
    elif "x_l" in updates or "x_r" in updates:
        J = _count(x_r - x_l, (current["x_r"] - current["x_l"]) / current["J"], "grid.x_r")
    else:
        J = current["J"]
    if "N" in updates:
        N = updates["N"]
    else:
        N = _count(updates.get("t_final", t_final), dt, "grid.t_final")
    return make_grid(x_l, x_r, J, dt, N)


def _count(span: float, step: float, key: str) -> int:
    if not step > 0:
        raise ConfigError(key, "step must be > 0")
    n = int(round(span / step))
    if n < 1 or abs(n * step - span) > 1e-9 * max(abs(span), 1.0):
        raise ConfigError(key, f"{span} is not a whole multiple of {step}")
    return n


# -- files --------------------------------------------------------------------

def _key_lines(text: str) -> dict:
    """Map (section, key) -> 1-based line number, plus (section, None) for headers."""
    lines = {}
    section = None
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", stripped)
        if m:
            section = m.group(1).strip()
            lines[(section, None)] = i
            continue
        m = re.match(r"([^=:]+)[=:]", stripped)
        if m and section is not None:
            lines[(section, m.group(1).strip())] = i
    return lines


def loads_config(text: str, source="<string>") -> SimulationConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(source))
    except configparser.Error as exc:
        raise ConfigFileError("file", str(exc).splitlines()[0], source, getattr(exc, "lineno", None)) from None
    lines = _key_lines(text)

    def located(key: str, message: str):
        section, _, opt = key.partition(".")
        line = lines.get((section, opt or None)) or lines.get((section, None))
        return ConfigFileError(key, message, source, line)

    for section in parser.sections():
        if section not in SECTIONS and section != "preset":
            raise located(section, "unknown section")

    if parser.has_section("preset"):
        name = parser.get("preset", "name", fallback=None)
        if name is None:
            raise located("preset.name", "missing key")
        try:
            base = preset(name.strip())
        except ConfigError as exc:
            raise located("preset.name", str(exc).split(": ", 1)[-1]) from None
    else:
        missing = [s for s in SECTIONS if s != "solver" and not parser.has_section(s)]
        if missing:
            raise ConfigFileError(f"{missing[0]}", "missing section (or give [preset] name)", source)
        base = None

    overrides = {}
    for section in SECTIONS:
        if parser.has_section(section):
            for key, value in parser.items(section):
                overrides[f"{section}.{key}"] = value

    if base is None:
        base = _skeleton(overrides, located)
    try:
        return apply_overrides(base, overrides)
    except ConfigError as exc:
        raise located(exc.key if "." in exc.key else _qualify(exc.key), str(exc).split(": ", 1)[-1]) from None


def _qualify(key: str) -> str:
    for name, cls in _SECTION_TYPES.items():
        if key in {f.name for f in dataclasses.fields(cls)}:
            return f"{name}.{key}"
    if key in GRID_KEYS:
        return f"grid.{key}"
    return key


def _skeleton(overrides: dict, located) -> SimulationConfig:
    """A full config built only from file values, for files without a preset."""
    required = ["grid.x_l", "grid.x_r", "grid.dt", "physics.g"]
    for key in required:
        if key not in overrides:
            raise located(key, "missing key")
    if "grid.J" not in overrides and "grid.dx" not in overrides:
        raise located("grid.J", "missing key (give J or dx)")
    if "grid.N" not in overrides and "grid.t_final" not in overrides:
        raise located("grid.N", "missing key (give N or t_final)")
    for key in ("nonlinearity.kind", "initial.kind", "boundary.order"):
        if key not in overrides:
            raise located(key, "missing key")
    if "boundary.k0" not in overrides and not {"boundary.k0_left", "boundary.k0_right"} <= overrides.keys():
        raise located("boundary.k0", "missing key (give k0 or k0_left and k0_right)")
    # placeholder grid, replaced by the overrides
    return SimulationConfig(
        physics=PhysicalParams(),
        grid=make_grid(0.0, 1.0, 4, 1.0, 1),
        initial=InitialCondition("gaussian"),
    )


def load_config(path) -> SimulationConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigFileError("file", exc.strerror or str(exc), path) from None
    return loads_config(text, path)


def dumps_config(config: SimulationConfig) -> str:
    """Serialize every field; floats use repr so parsing gives back an equal config."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str

    def fmt(v):
        if isinstance(v, tuple):
            return ", ".join(repr(float(x)) for x in v)
        if isinstance(v, float):
            return repr(v)
        return str(v)

    for name in SECTIONS:
        if name == "grid":
            parser["grid"] = {k: fmt(v) for k, v in _grid_values(config).items()}
            continue
        parser[name] = {k: fmt(v) for k, v in dataclasses.asdict(getattr(config, name)).items()}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def resolve(target: str) -> SimulationConfig:
    """A preset name or a path to a config file."""
    if target in PRESETS:
        return preset(target)
    return load_config(target)
