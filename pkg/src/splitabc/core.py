"""Grids, physical parameters, potentials, nonlinearities and exact solutions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np


class ConfigError(ValueError):
    """Invalid parameter; ``key`` names the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class PhysicalParams:
    hbar: float = 1.0
    mass: float = 0.5
    g: float = 0.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise ConfigError("hbar", "must be > 0")
        if not self.mass > 0:
            raise ConfigError("mass", "must be > 0")
        if not np.isfinite(self.g):
            raise ConfigError("g", "must be finite")


@dataclass(frozen=True)
class Grid:
    x_l: float
    x_r: float
    J: int
    dt: float
    N: int

    @property
    def dx(self) -> float:
        return (self.x_r - self.x_l) / self.J

    @property
    def x(self) -> np.ndarray:
        """Node coordinates x_{-1}..x_{J+1} (ghosts included)."""
        return self.x_l + np.arange(-1, self.J + 2) * self.dx

    @property
    def x_phys(self) -> np.ndarray:
        return self.x[1:-1]

    @property
    def t_final(self) -> float:
        return self.N * self.dt

    def times(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.dt


def make_grid(x_l: float, x_r: float, J: int, dt: float, N: int) -> Grid:
    if not (np.isfinite(x_l) and np.isfinite(x_r)) or x_r <= x_l:
        raise ConfigError("x_r", f"degenerate domain [{x_l}, {x_r}]")
    if int(J) != J or J < 4:
        raise ConfigError("J", "need an integer J >= 4 for the boundary stencils")
    if not (np.isfinite(dt) and dt > 0):
        raise ConfigError("dt", "must be > 0")
    if int(N) != N or N < 1:
        raise ConfigError("N", "must be an integer >= 1")
    return Grid(float(x_l), float(x_r), int(J), float(dt), int(N))


def grid_from_spacing(x_l: float, x_r: float, dx: float, dt: float, t_final: float) -> Grid:
    """Grid with the given dx and dt; both must divide the spans to within rounding."""
    if not dx > 0:
        raise ConfigError("dx", "must be > 0")
    if not dt > 0:
        raise ConfigError("dt", "must be > 0")
    J = int(round((x_r - x_l) / dx))
    N = int(round(t_final / dt))
    if abs(J * dx - (x_r - x_l)) > 1e-9 * (x_r - x_l):
        raise ConfigError("dx", f"dx={dx} does not divide the domain length")
    if N < 1 or abs(N * dt - t_final) > 1e-9 * max(t_final, 1.0):
        raise ConfigError("t_final", f"t_final={t_final} is not a multiple of dt={dt}")
    return make_grid(x_l, x_r, J, dt, N)


@dataclass(frozen=True)
class NonlinearitySpec:
    kind: Literal["cubic", "quintic", "none"] = "cubic"

    def __post_init__(self):
        if self.kind not in ("cubic", "quintic", "none"):
            raise ConfigError("nonlinearity.kind", f"unknown kind {self.kind!r}")

    def __call__(self, rho):
        return eval_nonlinearity(self, rho)


def eval_nonlinearity(f: NonlinearitySpec, rho):
    """f(rho) for rho = |psi|^2; works elementwise on arrays."""
    rho_arr = np.asarray(rho, dtype=float)
    if np.any(rho_arr < 0):
        raise ValueError("rho must be nonnegative")
    if f.kind == "cubic":
        out = rho_arr
    elif f.kind == "quintic":
        out = rho_arr * rho_arr
    else:
        out = np.zeros_like(rho_arr)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PotentialSpec:
    kind: Literal["zero", "gaussian", "tabulated"] = "zero"
    amplitude: float = 1.0
    width: float = 0.5
    center: float = 0.0
    # tabulated: sample abscissae and values, linearly interpolated
    x_samples: tuple[float, ...] = ()
    v_samples: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("zero", "gaussian", "tabulated"):
            raise ConfigError("potential.kind", f"unknown kind {self.kind!r}")
        if self.kind == "tabulated":
            if len(self.x_samples) < 2 or len(self.x_samples) != len(self.v_samples):
                raise ConfigError("potential.x_samples", "need >= 2 (x, v) samples of equal length")
            if np.any(np.diff(self.x_samples) <= 0):
                raise ConfigError("potential.x_samples", "must be strictly increasing")


def eval_potential(v: PotentialSpec, x):
    xa = np.asarray(x, dtype=float)
    if v.kind == "zero":
        out = np.zeros_like(xa)
    elif v.kind == "gaussian":
        out = v.amplitude * np.exp(-v.width * (xa - v.center) ** 2)
    else:
        lo, hi = v.x_samples[0], v.x_samples[-1]
        # one rounding unit of slack so grid endpoints built from dx are accepted
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        if np.any(xa < lo - tol) or np.any(xa > hi + tol):
            raise ValueError(f"tabulated potential queried outside [{lo}, {hi}]")
        out = np.interp(xa, v.x_samples, v.v_samples)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class InitialCondition:
    kind: Literal["bright_soliton", "chirped_gaussian", "gaussian"] = "bright_soliton"
    A: float = 1.0
    B: float = 2.0
    x0: float = 0.0
    k0: float = 0.0
    alpha: float = 1.0
    # bright_soliton amplitude is A*sqrt(-2/g), so the data is the exact soliton for this g
    g: float = -2.0

    def __post_init__(self):
        if self.kind not in ("bright_soliton", "chirped_gaussian", "gaussian"):
            raise ConfigError("initial.kind", f"unknown kind {self.kind!r}")
        if self.kind == "gaussian" and not self.alpha > 0:
            raise ConfigError("initial.alpha", "must be > 0")
        if self.kind == "bright_soliton" and not self.g < 0:
            raise ConfigError("initial.g", "bright soliton needs g < 0")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "bright_soliton":
            xi = x - self.x0
            amp = self.A * np.sqrt(-2.0 / self.g)
            return amp / np.cosh(self.A * xi) * np.exp(1j * self.B * xi)
        if self.kind == "chirped_gaussian":
            return np.exp(-x * x + 1j * self.k0 * x)
        return np.exp(-self.alpha * (x - self.x0) ** 2) + 0j


@dataclass(frozen=True)
class WaveField:
    """psi at one time level, ghosts included: values[0] is x_{-1}, values[-1] is x_{J+1}."""

    values: np.ndarray
    time_index: int = 0

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.time_index < 0:
            raise ValueError("time_index must be >= 0")

    @property
    def J(self) -> int:
        return self.values.size - 3

    @property
    def physical(self) -> np.ndarray:
        return self.values[1:-1]

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def __eq__(self, other):
        if not isinstance(other, WaveField):
            return NotImplemented
        return self.time_index == other.time_index and np.array_equal(self.values, other.values)

    __hash__ = None


def eval_initial(ic: InitialCondition, grid: Grid) -> WaveField:
    return WaveField(ic(grid.x), 0)


def exact_soliton(x, t, A: float, B: float, g: float, x0: float = 0.0):
    """Bright soliton of i psi_t = -psi_xx + g|psi|^2 psi, centred at x0 when t=0."""
    if not g < 0:
        raise ValueError("the bright soliton needs focusing nonlinearity (g < 0)")
    xi = np.asarray(x, dtype=float) - x0
    t = np.asarray(t, dtype=float)
    envelope = A * np.sqrt(-2.0 / g) / np.cosh(A * xi - 2 * A * B * t)
    out = envelope * np.exp(1j * B * xi + 1j * (A * A - B * B) * t)
    return complex(out) if np.ndim(out) == 0 else out
