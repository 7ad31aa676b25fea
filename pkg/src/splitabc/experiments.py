"""Experiment drivers (single runs, mesh refinement, k0 sweeps) and CSV output."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import convergence_order, l1_from_error_sums
from .config import apply_overrides, example1, resolve
from .core import ConfigError, exact_soliton
from .solver import Probes, RunObservables, SimulationConfig, WaveField, run_simulation


@dataclass
class Table:
    header: list[str]
    rows: list[list]

    def column(self, name: str) -> list:
        i = self.header.index(name)
        return [row[i] for row in self.rows]

    def __len__(self):
        return len(self.rows)


OBSERVABLE_COLUMNS = ["t", "mass", "boundary_error", "reflection", "reflection_sq", "picard_iterations"]


def observables_table(obs: RunObservables | None) -> Table:
    if obs is None or len(obs) == 0:
        return Table(list(OBSERVABLE_COLUMNS), [])
    rows = [
        [float(t), float(m), float(b), float(r), float(r2), int(it)]
        for t, m, b, r, r2, it in zip(
            obs.times, obs.mass, obs.boundary_error, obs.reflection, obs.reflection_sq, obs.iterations
        )
    ]
    return Table(list(OBSERVABLE_COLUMNS), rows)


def snapshot_tables(field_: WaveField, x: np.ndarray) -> tuple[Table, Table]:
    """(x, |psi|) and (x, Re, Im, |psi|) over the physical nodes."""
    xs, v = x[1:-1], field_.physical
    amp = Table(["x", "abs_psi"], [[float(a), float(b)] for a, b in zip(xs, np.abs(v))])
    full = Table(
        ["x", "re_psi", "im_psi", "abs_psi"],
        [[float(a), float(c.real), float(c.imag), float(abs(c))] for a, c in zip(xs, v)],
    )
    return amp, full


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.8e}"
    return str(value)


def emit_csv(table: Table | RunObservables | None, path) -> Path:
    """Write a header row plus data rows; floats as 9-significant-digit scientific notation."""
    if not isinstance(table, Table):
        table = observables_table(table)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(table.header)
        for row in table.rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _time_tag(t: float) -> str:
    return f"t{t:.6f}"


def soliton_oracle(config: SimulationConfig):
    ic = config.initial
    if ic.kind != "bright_soliton" or config.nonlinearity.kind != "cubic" or config.potential.kind != "zero":
        return None
    if config.physics.g >= 0 or (config.physics.hbar, config.physics.mass) != (1.0, 0.5):
        return None
    if ic.g != config.physics.g:
        return None
    return partial(_soliton, A=ic.A, B=ic.B, g=config.physics.g, x0=ic.x0)


def _soliton(x, t, A, B, g, x0):
    return exact_soliton(x, t, A, B, g, x0)


@dataclass
class RunResult:
    config: SimulationConfig
    observables: RunObservables
    final: WaveField
    files: list[Path]


def run_example(
    target: str | SimulationConfig,
    overrides: dict | None = None,
    snapshots: Sequence[float] = (),
    out_dir=None,
    label: str | None = None,
    suffix: str = "",
) -> RunResult:
    """Run a preset or config file; write observables and snapshot CSVs when ``out_dir`` is set."""
    config = target if isinstance(target, SimulationConfig) else resolve(target)
    if overrides:
        config = apply_overrides(config, overrides)
    if label is None:
        label = target if isinstance(target, str) and "/" not in target and not target.endswith(".ini") else (
            Path(target).stem if isinstance(target, str) else "config"
        )
    probes = Probes(snapshot_times=tuple(snapshots), oracle=soliton_oracle(config))
    obs, final = run_simulation(config, probes)
    files = []
    if out_dir is not None:
        out = Path(out_dir)
        stem = f"run_{label}{suffix}"
        files.append(emit_csv(obs, out / f"{stem}_observables.csv"))
        x = config.grid.x
        for t, snap in obs.snapshots:
            amp, full = snapshot_tables(snap, x)
            files.append(emit_csv(amp, out / f"{stem}_snapshot_{_time_tag(t)}.csv"))
            files.append(emit_csv(full, out / f"{stem}_snapshot_{_time_tag(t)}_complex.csv"))
    return RunResult(config, obs, final, files)


def _map(func, items, workers: int):
    if workers and workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]


def _l1_history(args):
    dx, t_max, times, base = args
    config = apply_overrides(base, {"grid.dx": dx, "grid.dt": dx * dx, "grid.t_final": t_max})
    oracle = soliton_oracle(config)
    if oracle is None:
        raise ConfigError("initial.kind", "convergence study needs the exact bright-soliton oracle")
    obs, _ = run_simulation(config, Probes(oracle=oracle))
    dt = config.grid.dt
    out = []
    for t in times:
        n = int(round(t / dt))
        if abs(n * dt - t) > 1e-9 * max(1.0, t):
            raise ConfigError("times", f"time {t} is not a multiple of dt={dt}")
        out.append(l1_from_error_sums(obs.error_sum, config.grid.J, n))
    return out


CONVERGENCE_COLUMNS = ["t", "dx", "dt", "E1", "order"]


def convergence_table(
    dx_list: Sequence[float] = (0.2, 0.1, 0.05),
    times: Sequence[float] = (2.0, 3.0, 4.0, 5.0, 6.0),
    base: SimulationConfig | None = None,
    workers: int = 1,
) -> Table:
    """L1 errors against the exact soliton with dt = dx^2, plus observed orders between successive dx."""
    dx_list = [float(d) for d in dx_list]
    if not dx_list or any(d <= 0 for d in dx_list):
        raise ConfigError("dx_list", "need positive mesh sizes")
    for a, b in zip(dx_list, dx_list[1:]):
        if abs(a / b - 2.0) > 1e-9:
            raise ConfigError("dx_list", "mesh sizes must halve successively")
    base = example1() if base is None else base
    t_max = max(times)
    histories = _map(_l1_history, [(dx, t_max, tuple(times), base) for dx in dx_list], workers)
    rows = []
    for i, t in enumerate(times):
        prev = None
        for dx, hist in zip(dx_list, histories):
            e = hist[i]
            order = convergence_order(prev, e) if prev is not None else None
            rows.append([float(t), dx, dx * dx, e, order])
            prev = e
    return Table(list(CONVERGENCE_COLUMNS), rows)


def _sweep_point(args):
    g, k0, dt, t_final, dx = args
    config = example1(dx=dx, dt=dt, t_final=t_final, k0=k0, g=g)
    obs, _ = run_simulation(config)
    return float(obs.reflection[-1]), float(obs.reflection_sq[-1])


SWEEP_COLUMNS = ["g", "k0", "r", "r_sq"]


def k0_sweep(
    k0_list: Sequence[float],
    g_list: Sequence[float] = (-2.0,),
    dt: float = 0.05,
    t_final: float = 6.0,
    dx: float = 0.1,
    workers: int = 1,
) -> Table:
    """Final-time reflection ratios of the Example 1 soliton for each (g, k0).

    ``r`` is the amplitude-sum ratio and ``r_sq`` the retained-mass fraction.
    """
    if any(not k > 0 for k in k0_list):
        raise ConfigError("k0_list", "k0 values must be positive")
    points = [(float(g), float(k), dt, t_final, dx) for g in g_list for k in k0_list]
    results = _map(_sweep_point, points, workers)
    rows = [[g, k, r, r2] for (g, k, *_), (r, r2) in zip(points, results)]
    return Table(list(SWEEP_COLUMNS), rows)


