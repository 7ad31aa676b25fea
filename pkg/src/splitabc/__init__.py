"""Finite-difference solver for the 1D nonlinear Schroedinger equation with split nonlinear absorbing boundaries."""
from .analysis import (
    NormalModeResult,
    PotentialDecomposition,
    convergence_order,
    initial_energy,
    l1_error,
    mass,
    normal_mode_roots,
    reflection_ratio,
)
from .config import load_config, loads_config, dumps_config, preset
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
    exact_soliton,
    make_grid,
)
from .solver import (
    BandedSystem,
    BlowUpError,
    BoundarySpec,
    PicardDivergenceError,
    Probes,
    RunObservables,
    SimulationConfig,
    SingularSystemError,
    SolverSettings,
    assemble_system,
    picard_step,
    run_simulation,
    solve_banded,
)

__version__ = "0.1.0"
