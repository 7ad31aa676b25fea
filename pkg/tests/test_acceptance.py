"""Acceptance suite. Each criterion prints one PASS/FAIL line; run with ``pytest -s`` to see them."""
import numpy as np
import pytest

from splitabc.analysis import (
    PotentialDecomposition,
    initial_energy,
    normal_mode_roots,
    order3_dispersion_residual,
)
from splitabc.config import apply_overrides, example2, example3
from splitabc.core import (
    InitialCondition,
    NonlinearitySpec,
    PhysicalParams,
    PotentialSpec,
    WaveField,
    eval_initial,
    make_grid,
)
from splitabc.experiments import convergence_table, k0_sweep
from splitabc.solver import (
    BoundarySpec,
    SimulationConfig,
    SolverSettings,
    picard_step,
    run_simulation,
)

TABLE2_K0 = [0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.125, 2.25, 2.5, 2.75, 3.0,
             3.25, 3.5, 3.75, 4.0, 4.25, 4.5, 4.75, 5.0]
# printed g=-2 row (k0 = 0.5 .. 4.5)
TABLE2_PUBLISHED = [6.07e-2, 1.601e-2, 4.70e-3, 1.52e-3, 5.17e-4, 1.81e-4, 7.30e-5, 6.13e-5, 7.06e-5,
                    1.51e-4, 3.23e-4, 6.10e-4, 1.04e-3, 1.62e-3, 2.40e-3, 3.39e-3, 4.60e-3, 6.06e-3]


def report(name, ok, detail):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def table1():
    return convergence_table((0.2, 0.1, 0.05), times=(2.0, 3.0, 4.0, 5.0, 6.0), workers=3)


@pytest.fixture(scope="module")
def table2():
    table = k0_sweep(TABLE2_K0, (-2.0, -10.0), dt=0.05, t_final=6.0, dx=0.1, workers=4)
    by = {(g, k): (r, r2) for g, k, r, r2 in table.rows}
    return by


# -- 1, 2: mesh refinement ---------------------------------------------------

def test_c1_convergence_order(table1):
    orders = {(t, dx): o for t, dx, _, _, o in table1.rows if o is not None}
    picked = [o for (t, _), o in orders.items() if t >= 3.0]
    ok = len(picked) == 8 and all(1.85 <= o <= 2.30 for o in picked)
    report("C1 convergence order", ok, "orders t=3..6: " + ", ".join(f"{o:.3f}" for o in picked))


def test_c2_l1_magnitudes(table1):
    e = {(t, dx): err for t, dx, _, err, _ in table1.rows}
    e1, e2 = e[(4.0, 0.1)], e[(4.0, 0.05)]
    ok = abs(e1 / 8.091e-3 - 1) <= 0.3 and abs(e2 / 1.955e-3 - 1) <= 0.3
    report("C2 L1 magnitudes", ok, f"E1(t=4, dx=0.1)={e1:.4e} (8.091e-3), E1(t=4, dx=0.05)={e2:.4e} (1.955e-3)")


# -- 3, 4: reflection ratio sweep -------------------------------------------

def test_c3_reflection_curve(table2):
    r_sq = {k: table2[(-2.0, k)][1] for k in TABLE2_K0}
    r_abs = {k: table2[(-2.0, k)][0] for k in TABLE2_K0}
    kmin = min(r_sq, key=r_sq.get)
    inside = [r_sq[k] for k in TABLE2_K0 if 1.0 <= k <= 5.0]
    ok = (abs(kmin - 2.125) <= 0.125 and r_sq[kmin] < 5e-4 and max(inside) < 1e-2 and r_sq[0.5] > 1e-2)
    print(f"\n  amplitude-sum ratio for reference: r(2.0)={r_abs[2.0]:.3e}, r(2.125)={r_abs[2.125]:.3e}")
    report(
        "C3 reflection curve (mass ratio)", ok,
        f"argmin k0={kmin}, min={r_sq[kmin]:.3e}, max on [1,5]={max(inside):.3e}, r(0.5)={r_sq[0.5]:.3e}",
    )


def test_c3_table_values_reproduced(table2):
    rel = [abs(table2[(-2.0, k)][1] / p - 1) for k, p in zip(TABLE2_K0, TABLE2_PUBLISHED)]
    report("C3 printed table values", max(rel) < 0.05, f"max relative deviation {max(rel):.2%} over 18 entries")


def test_c4_nonlinearity_insensitive(table2):
    devs = {k: abs(table2[(-10.0, k)][1] / table2[(-2.0, k)][1] - 1) for k in (1.0, 2.0, 3.0, 5.0)}
    ok = all(d <= 0.02 for d in devs.values())
    report("C4 g=-2 vs g=-10", ok, ", ".join(f"k0={k}: {d:.2e}" for k, d in devs.items()))


# -- 5: quintic --------------------------------------------------------------

def test_c5_quintic():
    cfg = example2()
    psi0 = eval_initial(cfg.initial, cfg.grid)
    energy = initial_energy(psi0, cfg.grid)
    obs, final = run_simulation(cfg)
    r_sq = float(obs.reflection_sq[-1])
    ok = abs(energy / 80.5478 - 1) <= 0.01 and r_sq < 1e-3
    print(f"\n  amplitude-sum ratio for reference: r={obs.reflection[-1]:.3e}")
    report("C5 quintic", ok, f"E(psi0)={energy:.4f}, final mass ratio={r_sq:.3e}")


# -- 6: well-posedness -------------------------------------------------------

def test_c6_wellposedness():
    rng = np.random.default_rng(2024)
    phys = PhysicalParams()
    bad = 0
    worst_zero = 0.0
    worst_disp = 0.0
    for order in (2, 3):
        for i in range(1000):
            k0 = rng.uniform(1e-3, 20)
            v1, f1 = rng.uniform(-10, 10, 2)
            total = 0.0 if i % 10 == 0 else rng.uniform(-10, 10)
            split = rng.uniform()
            d = PotentialDecomposition(v1=v1, f1=f1, v2=split * total, f2=total - split * total)
            res = normal_mode_roots(order, k0, d, phys)
            bad += res.wellposed != (d.v2 + d.f2 <= 0)
            if d.v2 + d.f2 == 0:
                worst_zero = max(worst_zero, abs(res.s.real))
            if order == 3:
                worst_disp = max(worst_disp, abs(order3_dispersion_residual(res.k, k0, phys)))
    ok = bad == 0 and worst_zero < 1e-12 and worst_disp < 1e-12
    report("C6 well-posedness", ok,
           f"exceptions={bad}, max|Re s| at v2+f2=0: {worst_zero:.1e}, dispersion residual {worst_disp:.1e}")


# -- 7: properties -----------------------------------------------------------

def _config(J, x_l, x_r, dt, N, g=0.0, kind="cubic", order="dirichlet_zero", k0=(2.0, 2.0),
            initial=InitialCondition("gaussian", alpha=0.5), potential=PotentialSpec("zero"),
            hbar=1.0, mass=0.5):
    return SimulationConfig(
        physics=PhysicalParams(hbar, mass, g),
        grid=make_grid(x_l, x_r, J, dt, N),
        nonlinearity=NonlinearitySpec(kind),
        potential=potential,
        initial=initial,
        boundary=BoundarySpec(order, *k0),
        solver=SolverSettings(),
    )


def _dense_cn_gap():
    J, dt = 8, 0.01
    cfg = _config(J, 0.0, 1.0, dt, 1, kind="none")
    x = cfg.grid.x
    psi0 = np.sin(np.pi * x) * np.exp(2j * x)
    psi0[1] = psi0[-2] = 0.0
    new, _ = picard_step(WaveField(psi0), cfg)
    n, dx = J - 1, cfg.grid.dx
    lap = (np.diag(-2 * np.ones(n)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)) / dx**2
    h = -lap
    v = np.linalg.solve(1j / dt * np.eye(n) - h / 2, (1j / dt * np.eye(n) + h / 2) @ psi0[2:-2])
    return np.max(np.abs(new.physical[1:-1] - v))


def _mass_drift():
    cfg = _config(100, -10.0, 10.0, 0.01, 50, g=-2.0, potential=PotentialSpec("gaussian", 0.5, 1.0, 0.0))
    x = cfg.grid.x
    obs, _ = run_simulation(cfg, initial=WaveField(np.exp(-0.5 * x**2 + 1.5j * x)))
    n = np.arange(1, obs.mass.size)
    return float(np.max(np.abs(obs.mass[1:] / obs.mass[0] - 1) / (10 * cfg.solver.picard_tol * n)))


def _mirror_gap():
    common = dict(J=300, x_l=-15.0, x_r=15.0, dt=0.01, N=300, g=-2.0, order="abc3_nonlinear")
    _, a = run_simulation(_config(k0=(1.5, 2.0), initial=InitialCondition("bright_soliton", A=1, B=2, x0=5.0), **common))
    _, b = run_simulation(_config(k0=(2.0, 1.5), initial=InitialCondition("bright_soliton", A=1, B=-2, x0=-5.0), **common))
    return np.max(np.abs(a.values - b.values[::-1]))


def _zero_fixed():
    cfg = _config(40, -10.0, 10.0, 0.01, 10, g=-2.0, order="abc3_nonlinear",
                  potential=PotentialSpec("gaussian", 1.0, 0.5, 0.0))
    _, final = run_simulation(cfg, initial=WaveField(np.zeros(43)))
    return bool(np.all(final.values == 0))


def test_c7_property_suite():
    dense, drift, mirror, zero = _dense_cn_gap(), _mass_drift(), _mirror_gap(), _zero_fixed()
    ok = dense < 1e-10 and drift <= 1.0 and mirror < 1e-10 and zero
    report("C7 property suite", ok,
           f"dense CN gap {dense:.1e}, mass drift/bound {drift:.2f}, mirror gap {mirror:.1e}, zero fixed point {zero}")


# -- Example 3 ---------------------------------------------------------------

EX3_K0 = (1.25, 1.5, 1.75, 2.0)


@pytest.fixture(scope="module")
def example3_runs():
    runs = {}
    for k0 in EX3_K0:
        runs[k0] = run_simulation(example3(k0=k0))
    runs["dirichlet"] = run_simulation(apply_overrides(example3(), {"boundary.order": "dirichlet_zero"}))
    runs["neumann"] = run_simulation(apply_overrides(example3(), {"boundary.order": "neumann_zero"}))
    return runs


def test_example3_literal(example3_runs):
    r = {k: float(example3_runs[k][0].reflection[-1]) for k in EX3_K0}
    r_dir = float(example3_runs["dirichlet"][0].reflection[-1])
    ok = max(r.values()) < 5e-2 and r_dir > 0.5
    report("Example 3 reflection ratio", ok,
           ", ".join(f"k0={k}: {v:.3e}" for k, v in r.items()) + f", dirichlet {r_dir:.3e}")


def test_example3_against_large_domain(example3_runs):
    # wide Dirichlet box, nothing reaches its walls by t=6
    base = example3()
    ref_cfg = apply_overrides(base, {"grid.x_l": -45.0, "grid.x_r": 75.0, "boundary.order": "dirichlet_zero"})
    _, ref = run_simulation(ref_cfg)
    lo = int(round((base.grid.x_l - ref_cfg.grid.x_l) / base.grid.dx))
    ref_slice = ref.values[lo:lo + base.grid.J + 3]
    psi0 = eval_initial(base.initial, base.grid)
    scale = np.sum(np.abs(psi0.physical))

    def spurious(field):
        return float(np.sum(np.abs(field.physical - ref_slice[1:-1])) / scale)

    abc = {k: spurious(example3_runs[k][1]) for k in EX3_K0}
    walls = {name: spurious(example3_runs[name][1]) for name in ("dirichlet", "neumann")}
    ok = max(abc.values()) < 5e-2 and min(walls.values()) > 0.5
    report("Example 3 spurious reflection vs wide-domain reference", ok,
           ", ".join(f"k0={k}: {v:.3e}" for k, v in abc.items())
           + ", " + ", ".join(f"{n} {v:.3e}" for n, v in walls.items()))
