"""Error norms, reflection ratio, mass, blow-up energy and normal-mode roots."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Grid, PhysicalParams, WaveField

WELLPOSED_SLACK = 1e-12


def _values(psi) -> np.ndarray:
    return psi.values if isinstance(psi, WaveField) else np.asarray(psi)


def l1_error(numeric, oracle) -> float:
    """Mean absolute error over a (time, space) sample array of physical nodes.

    Both arguments are arrays of shape (N+1, J+1); ``oracle`` may also be a
    callable (n, j) -> exact values, in which case it is evaluated on the
    index grid of ``numeric``.
    """
    numeric = np.asarray(numeric)
    if callable(oracle):
        n_idx, j_idx = np.indices(numeric.shape)
        oracle = oracle(n_idx, j_idx)
    oracle = np.asarray(oracle)
    if numeric.shape != oracle.shape:
        raise ValueError(f"shape mismatch: {numeric.shape} vs {oracle.shape}")
    if numeric.size == 0:
        raise ValueError("empty sample")
    return float(np.mean(np.abs(numeric - oracle)))


def l1_from_error_sums(error_sum: np.ndarray, J: int, n_upto: int) -> float:
    """L1 error up to time level ``n_upto`` from per-level sums of |error|."""
    return float(np.sum(error_sum[: n_upto + 1]) / ((J + 1) * (n_upto + 1)))


def convergence_order(e_coarse: float, e_fine: float) -> float:
    if not (e_coarse > 0 and e_fine > 0):
        raise ValueError("errors must be positive")
    return float(np.log2(e_coarse / e_fine))


def reflection_ratio(psi_n, psi_0, power: int = 1) -> float:
    """sum_j |psi_j^n|^p / sum_j |psi_j^0|^p over physical nodes j=0..J.

    ``power=1`` is the amplitude-sum ratio. ``power=2`` is the retained-mass
    fraction, which is the quantity behind the published k0 sweep values.
    """
    vn, v0 = _values(psi_n), _values(psi_0)
    if vn.shape != v0.shape:
        raise ValueError("fields must share the grid")
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    denom = np.sum(np.abs(v0[1:-1]) ** power)
    if denom == 0:
        raise ValueError("initial field is identically zero")
    return float(np.sum(np.abs(vn[1:-1]) ** power) / denom)


def mass(psi, grid: Grid) -> float:
    v = _values(psi)[1:-1]
    return float(np.sum(np.abs(v) ** 2) * grid.dx)


def initial_energy(psi0, grid: Grid) -> float:
    """||psi'||^2 - (2/3)||psi||_6^6 on the physical nodes (centred differences, one-sided at the ends)."""
    v = _values(psi0)[1:-1]
    grad = np.gradient(v, grid.dx, edge_order=2)
    return float(np.sum(np.abs(grad) ** 2) * grid.dx - (2.0 / 3.0) * np.sum(np.abs(v) ** 6) * grid.dx)


@dataclass(frozen=True)
class PotentialDecomposition:
    """V + f = v1 + f1 + i(v2 + f2)."""

    v1: float = 0.0
    v2: float = 0.0
    f1: float = 0.0
    f2: float = 0.0

    @classmethod
    def from_complex(cls, potential: complex, nonlinear: complex = 0.0) -> "PotentialDecomposition":
        p, q = complex(potential), complex(nonlinear)
        return cls(p.real, p.imag, q.real, q.imag)


@dataclass(frozen=True)
class NormalModeResult:
    order: int
    k: complex
    s: complex
    wellposed: bool


def normal_mode_roots(order: int, k0: float, decomp: PotentialDecomposition, physics: PhysicalParams) -> NormalModeResult:
    """Normal-mode root (k, s) for the right boundary of the 2nd or 3rd order split ABC."""
    if not k0 > 0:
        raise ValueError("k0 must be > 0")
    hbar, m = physics.hbar, physics.mass
    re = decomp.v1 + decomp.f1
    im = decomp.v2 + decomp.f2
    if order == 2:
        k = 1j * np.sqrt(2 * m / hbar) * k0
        s = -1j * k0**2 - 1j * re / hbar + im / hbar
    elif order == 3:
        k = 1j * k0
        s = -1j * hbar / (2 * m) * k0**2 - 1j * re / hbar + im / hbar
    else:
        raise ValueError("order must be 2 or 3")
    return NormalModeResult(order, complex(k), complex(s), bool(s.real <= WELLPOSED_SLACK))


def order3_dispersion_residual(k: complex, k0: float, physics: PhysicalParams) -> complex:
    """hbar^2/2m k^2 - hbar^2 k0^2/2m (3ik + k0)/(ik + 3k0); zero at the boundary root."""
    c = physics.hbar**2 / (2 * physics.mass)
    return c * k * k - c * k0**2 * (3j * k + k0) / (1j * k + 3 * k0)
