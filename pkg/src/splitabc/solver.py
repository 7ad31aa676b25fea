"""Crank-Nicolson stepping with nonlinear absorbing boundary rows.

Unknown layout per step: psi^{n+1} at x_{-1}..x_{J+1} (J+3 values). Rows are
the left boundary row, the interior CN equations at j=0..J, then the right
boundary row. Each boundary row couples (s-1, s, s+1); it is made tridiagonal
by eliminating the far neighbour with the adjacent CN row.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.linalg import lapack

from .core import (
    ConfigError,
    Grid,
    InitialCondition,
    NonlinearitySpec,
    PhysicalParams,
    PotentialSpec,
    WaveField,
    eval_initial,
    eval_nonlinearity,
    eval_potential,
)

log = logging.getLogger(__name__)

BoundaryOrder = Literal["abc1_linear", "abc2_nonlinear", "abc3_nonlinear", "dirichlet_zero", "neumann_zero"]
BOUNDARY_ORDERS = ("abc1_linear", "abc2_nonlinear", "abc3_nonlinear", "dirichlet_zero", "neumann_zero")

BLOWUP_FACTOR = 1e6


class SolverError(RuntimeError):
    pass


class SingularSystemError(SolverError):
    def __init__(self, row: int):
        super().__init__(f"singular pivot in tridiagonal solve at row {row}")
        self.row = row


class PicardDivergenceError(SolverError):
    def __init__(self, step: int, iterations: int, change: float):
        super().__init__(
            f"Picard iteration did not converge at step {step} "
            f"after {iterations} iterations (last relative change {change:.3e})"
        )
        self.step = step
        self.iterations = iterations


class BlowUpError(SolverError):
    def __init__(self, step: int, reason: str):
        super().__init__(f"solution blew up at step {step}: {reason}")
        self.step = step


@dataclass(frozen=True)
class BoundarySpec:
    order: BoundaryOrder = "abc3_nonlinear"
    k0_left: float = 2.0
    k0_right: float = 2.0

    def __post_init__(self):
        if self.order not in BOUNDARY_ORDERS:
            raise ConfigError("boundary.order", f"unknown order {self.order!r}")
        for key in ("k0_left", "k0_right"):
            val = getattr(self, key)
            if not (np.isfinite(val) and val > 0):
                raise ConfigError(f"boundary.{key}", "must be > 0")


@dataclass(frozen=True)
class SolverSettings:
    picard_tol: float = 1e-12
    picard_max_iter: int = 50

    def __post_init__(self):
        if not self.picard_tol > 0:
            raise ConfigError("solver.picard_tol", "must be > 0")
        if int(self.picard_max_iter) != self.picard_max_iter or self.picard_max_iter < 1:
            raise ConfigError("solver.picard_max_iter", "must be an integer >= 1")


@dataclass(frozen=True)
class SimulationConfig:
    physics: PhysicalParams
    grid: Grid
    nonlinearity: NonlinearitySpec = NonlinearitySpec("cubic")
    potential: PotentialSpec = PotentialSpec("zero")
    initial: InitialCondition = InitialCondition()
    boundary: BoundarySpec = BoundarySpec()
    solver: SolverSettings = SolverSettings()

    def __post_init__(self):
        if not np.isfinite(self.grid.t_final):
            raise ConfigError("grid.N", "final time must be finite")

    @property
    def is_linear(self) -> bool:
        return self.nonlinearity.kind == "none" or self.physics.g == 0.0


@dataclass
class BandedSystem:
    """Tridiagonal system; ``left_row``/``right_row`` keep the unreduced boundary rows.

    A boundary row is ((c_{s-1}, c_s, c_{s+1}), rhs).
    """

    lower: np.ndarray
    main: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray
    left_row: tuple = None
    right_row: tuple = None

    @property
    def size(self) -> int:
        return self.main.size

    def dense(self) -> np.ndarray:
        return np.diag(self.main) + np.diag(self.lower, -1) + np.diag(self.upper, 1)


def potential_term(psi_n: np.ndarray, iterate: np.ndarray, config: SimulationConfig, x: np.ndarray) -> np.ndarray:
    """V + g f(|psi*|^2) with psi* the midpoint of the iterate and the old level."""
    rho = np.abs(0.5 * (iterate + psi_n)) ** 2
    w = eval_potential(config.potential, x) + config.physics.g * eval_nonlinearity(config.nonlinearity, rho)
    return np.asarray(w, dtype=float)


def boundary_row(
    order: str,
    sign: int,
    k0: float,
    w_s: float,
    old: np.ndarray,
    physics: PhysicalParams,
    dx: float,
    dt: float,
) -> tuple[np.ndarray, complex]:
    """Coefficients on (u_{s-1}, u_s, u_{s+1}) and right-hand side for one boundary.

    ``old`` holds (psi^n_{s-1}, psi^n_s, psi^n_{s+1}); ``sign`` is -1 on the left, +1 on the right.
    """
    hbar, m = physics.hbar, physics.mass
    om, o0, op = old
    if order == "abc3_nonlinear":
        alpha = 3j * hbar**2 * k0**2 / m - 2j * w_s
        beta = hbar**2 * k0**3 / m - 6 * k0 * w_s
        p = alpha / (4 * dx) - hbar / (dx * dt)
        q = sign * (6j * hbar * k0 / dt + 0.5 * beta)
        coef = np.array([-p, q, p])
        rhs = -((alpha / (4 * dx) + hbar / (dx * dt)) * (op - om) + sign * (-6j * hbar * k0 / dt + 0.5 * beta) * o0)
    elif order == "abc2_nonlinear":
        # i hbar psi_t + sign i hbar sqrt(2 hbar/m) k0 psi_x + (hbar k0^2 - W) psi = 0
        c = sign * 1j * hbar * np.sqrt(2 * hbar / m) * k0 / (2 * dx)
        d = 0.5 * (hbar * k0**2 - w_s)
        coef = np.array([-0.5 * c, 1j * hbar / dt + d, 0.5 * c])
        rhs = -(0.5 * c * (op - om) + (-1j * hbar / dt + d) * o0)
    elif order == "abc1_linear":
        c = 1j * np.sqrt(hbar / (2 * m)) / (2 * dx)
        d = sign * k0
        coef = np.array([-0.5 * c, 0.5 * d, 0.5 * c])
        rhs = -(0.5 * c * (op - om) + 0.5 * d * o0)
    elif order == "dirichlet_zero":
        coef = np.array([0.0, 1.0, 0.0], dtype=complex)
        rhs = 0.0
    elif order == "neumann_zero":
        coef = np.array([-1.0, 0.0, 1.0], dtype=complex)
        rhs = 0.0
    else:
        raise ValueError(f"unknown boundary order {order!r}")
    return np.asarray(coef, dtype=complex), complex(rhs)


def assemble_system(psi_n: WaveField, iterate: WaveField, config: SimulationConfig) -> BandedSystem:
    grid = config.grid
    n = grid.J + 3
    old = np.asarray(psi_n.values if isinstance(psi_n, WaveField) else psi_n, dtype=complex)
    guess = np.asarray(iterate.values if isinstance(iterate, WaveField) else iterate, dtype=complex)
    if old.size != n or guess.size != n:
        raise ValueError(f"field sizes {old.size}, {guess.size} do not match grid size J+3={n}")
    if not (np.all(np.isfinite(old)) and np.all(np.isfinite(guess))):
        raise ValueError("non-finite entries in input fields")

    hbar, m = config.physics.hbar, config.physics.mass
    dx, dt = grid.dx, grid.dt
    x = grid.x
    w = potential_term(old, guess, config, x)
    kappa = hbar**2 / (2 * m * dx**2)

    # interior rows, unknown index j-1..j+1 for j = 0..J, written as
    # [-hbar^2/2m D2 + W] psi^{n+1/2} - i hbar (u - psi^n)/dt = 0
    wj = w[1:-1]
    off = np.full(grid.J + 1, -0.5 * kappa, dtype=complex)
    diag = kappa + 0.5 * wj - 1j * hbar / dt
    rhs_int = -(-0.5 * kappa * (old[2:] + old[:-2]) + (kappa + 0.5 * wj + 1j * hbar / dt) * old[1:-1])

    lower = np.zeros(n - 1, dtype=complex)
    main = np.zeros(n, dtype=complex)
    upper = np.zeros(n - 1, dtype=complex)
    rhs = np.zeros(n, dtype=complex)
    main[1:-1] = diag
    lower[:-1] = off  # row r couples column r-1, r = 1..J+1
    upper[1:] = off
    rhs[1:-1] = rhs_int

    b = config.boundary
    left, rhs_l = boundary_row(b.order, -1, b.k0_left, w[1], old[0:3], config.physics, dx, dt)
    right, rhs_r = boundary_row(b.order, +1, b.k0_right, w[-2], old[-3:], config.physics, dx, dt)

    # left: row 0 has (c_{-1}, c_0, c_1); drop c_1 using interior row j=0 (row 1)
    r = left[2] / upper[1]
    main[0] = left[0] - r * lower[0]
    upper[0] = left[1] - r * main[1]
    rhs[0] = rhs_l - r * rhs[1]
    # right: last row has (c_{J-1}, c_J, c_{J+1}); drop c_{J-1} using row J+1
    r = right[0] / lower[-2]
    lower[-1] = right[1] - r * main[-2]
    main[-1] = right[2] - r * upper[-1]
    rhs[-1] = rhs_r - r * rhs[-2]

    return BandedSystem(lower, main, upper, rhs, left_row=(left, rhs_l), right_row=(right, rhs_r))


def solve_banded(system: BandedSystem) -> np.ndarray:
    """Direct tridiagonal solve (LAPACK gtsv, partial pivoting)."""
    if system.size < 3:
        raise ValueError("tridiagonal system needs size >= 3")
    dl = np.array(system.lower, dtype=complex)
    d = np.array(system.main, dtype=complex)
    du = np.array(system.upper, dtype=complex)
    b = np.array(system.rhs, dtype=complex)
    _, _, _, x, info = lapack.zgtsv(dl, d, du, b)
    if info > 0:
        raise SingularSystemError(info - 1)
    if info < 0:
        raise ValueError(f"invalid argument {-info} to zgtsv")
    if not np.all(np.isfinite(x)):
        raise SingularSystemError(int(np.argmin(np.isfinite(x))))
    return x


def picard_step(psi_n: WaveField, config: SimulationConfig, step: int | None = None) -> tuple[WaveField, int]:
    """One time step; nonlinearity frozen at the previous iterate until the update stalls."""
    if not psi_n.is_finite():
        raise ValueError("psi_n contains non-finite values")
    settings = config.solver
    guess = psi_n.values
    change = np.inf
    for k in range(1, settings.picard_max_iter + 1):
        new = solve_banded(assemble_system(psi_n, guess, config))
        if config.is_linear:
            return WaveField(new, psi_n.time_index + 1), 1
        scale = np.max(np.abs(new))
        diff = np.max(np.abs(new - guess))
        change = diff / scale if scale > 0 else diff
        guess = new
        if change <= settings.picard_tol:
            return WaveField(new, psi_n.time_index + 1), k
    raise PicardDivergenceError(psi_n.time_index if step is None else step, settings.picard_max_iter, change)


@dataclass
class Probes:
    """What to record during a run.

    ``oracle(x, t)`` enables boundary and L1 errors; ``boundary_node`` is a physical
    index (default J, the right boundary).
    """

    snapshot_times: Sequence[float] = ()
    oracle: Callable | None = None
    boundary_node: int | None = None
    every: int = 1


@dataclass
class RunObservables:
    times: np.ndarray
    mass: np.ndarray
    boundary_error: np.ndarray
    reflection: np.ndarray
    # retained-mass fraction, sum |psi^n|^2 / sum |psi^0|^2
    reflection_sq: np.ndarray = None
    snapshots: list = field(default_factory=list)
    # sum_j |psi_j^n - oracle(x_j, t^n)| over physical nodes, per recorded level
    error_sum: np.ndarray = None
    iterations: np.ndarray = None

    def __len__(self):
        return self.times.size


def _snapshot_indices(times: Sequence[float], grid: Grid) -> dict[int, float]:
    out = {}
    for t in times:
        n = int(round(t / grid.dt))
        if n < 0 or n > grid.N or abs(n * grid.dt - t) > 1e-9 * max(1.0, abs(t)):
            raise ConfigError("snapshots", f"time {t} is not a grid time in [0, {grid.t_final}]")
        out[n] = n * grid.dt
    return out


def run_simulation(
    config: SimulationConfig,
    probes: Probes | None = None,
    initial: WaveField | None = None,
) -> tuple[RunObservables, WaveField]:
    from .analysis import mass as discrete_mass

    probes = probes or Probes()
    grid = config.grid
    x = grid.x
    psi = eval_initial(config.initial, grid) if initial is None else initial
    if psi.values.size != grid.J + 3:
        raise ValueError("initial field does not match the grid")
    if not psi.is_finite():
        raise ValueError("initial field is not finite")

    snap_at = _snapshot_indices(probes.snapshot_times, grid)
    bnode = grid.J if probes.boundary_node is None else probes.boundary_node
    every = max(1, int(probes.every))

    abs0 = np.abs(psi.physical)
    sum0 = abs0.sum()
    sq0 = np.sum(abs0**2)
    max0 = abs0.max()
    limit = BLOWUP_FACTOR * max0 if max0 > 0 else np.inf

    rec_t, rec_m, rec_b, rec_r, rec_r2, rec_e, rec_it = [], [], [], [], [], [], []
    snapshots = []

    def record(field_: WaveField, n: int, its: int):
        t = n * grid.dt
        phys = field_.physical
        rec_t.append(t)
        rec_m.append(discrete_mass(field_, grid))
        amp = np.abs(phys)
        rec_r.append(amp.sum() / sum0 if sum0 > 0 else np.nan)
        rec_r2.append(np.sum(amp**2) / sq0 if sq0 > 0 else np.nan)
        if probes.oracle is not None:
            exact = probes.oracle(x[1:-1], t)
            err = np.abs(phys - exact)
            rec_e.append(err.sum())
            rec_b.append(err[bnode])
        else:
            rec_e.append(np.nan)
            rec_b.append(np.nan)
        rec_it.append(its)

    record(psi, 0, 0)
    if 0 in snap_at:
        snapshots.append((snap_at[0], psi))
    for n in range(1, grid.N + 1):
        psi, its = picard_step(psi, config, step=n)
        if not psi.is_finite():
            raise BlowUpError(n, "non-finite values")
        peak = np.abs(psi.physical).max()
        if peak > limit:
            raise BlowUpError(n, f"max|psi|={peak:.3e} exceeds {BLOWUP_FACTOR:g} x initial max")
        if n % every == 0 or n == grid.N:
            record(psi, n, its)
        if n in snap_at:
            snapshots.append((snap_at[n], psi))
    log.debug("run finished: N=%d, mean Picard iterations %.2f", grid.N, np.mean(rec_it[1:]) if grid.N else 0)

    obs = RunObservables(
        times=np.array(rec_t),
        mass=np.array(rec_m),
        boundary_error=np.array(rec_b),
        reflection=np.array(rec_r),
        reflection_sq=np.array(rec_r2),
        snapshots=snapshots,
        error_sum=np.array(rec_e),
        iterations=np.array(rec_it, dtype=int),
    )
    return obs, psi
