"""Real-time propagation of the excited determinant under the density-dependent Hamiltonian."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .excitation import ExcitationPair
from .grid import CoulombKernel, Grid, convolve
from .scf import GroundState

__all__ = [
    "TddftParams",
    "PropagationState",
    "EvolutionTrace",
    "excited_initial_state",
    "step",
    "evolve",
]


@dataclass(frozen=True)
class TddftParams:
    dt: float = 0.002
    t_final: float = 10.0
    sample_every: int = 50

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_final <= 0:
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if self.sample_every < 1:
            raise ValueError(f"sample_every must be >= 1, got {self.sample_every}")


@dataclass(frozen=True, eq=False)
class PropagationState:
    """Occupied orbitals of the excited determinant plus the spectator hole."""

    grid: Grid
    orbitals: np.ndarray   # (n_occ, n_nodes) complex; last row is the evolved LUMO
    hole: np.ndarray       # evolved HOMO; does not contribute to the density
    time: float
    density: np.ndarray


@dataclass(frozen=True, eq=False)
class EvolutionTrace:
    times: np.ndarray
    density_minus_ground: np.ndarray   # (n_samples, n_nodes)
    com_lumo: np.ndarray
    com_hole: np.ndarray
    norm_drift: np.ndarray
    mass: np.ndarray


def excited_initial_state(state: GroundState, pair: ExcitationPair) -> PropagationState:
    """Occupied set with the HOMO swapped for the LUMO; the HOMO becomes the hole."""
    occ = state.orbitals[: state.n_occ]
    orbitals = np.vstack([occ[:-1], pair.lumo]).astype(complex)
    density = 2.0 * np.sum(np.abs(orbitals) ** 2, axis=0)
    return PropagationState(
        grid=state.grid,
        orbitals=orbitals,
        hole=pair.homo.astype(complex),
        time=0.0,
        density=density,
    )


def _hamiltonian_diagonals(grid: Grid, potential: np.ndarray):
    dx2 = grid.dx**2
    return potential + 1.0 / dx2, -0.5 / dx2


def _apply_h(main: np.ndarray, off: float, psi: np.ndarray) -> np.ndarray:
    out = main * psi
    out[..., 1:] += off * psi[..., :-1]
    out[..., :-1] += off * psi[..., 1:]
    return out


def _cayley_step(grid: Grid, potential: np.ndarray, dt: float, psi: np.ndarray) -> np.ndarray:
    """(1 + i dt/2 H)^-1 (1 - i dt/2 H) psi for a stack of orbitals."""
    main, off = _hamiltonian_diagonals(grid, potential)
    z = 0.5j * dt
    rhs = psi - z * _apply_h(main, off, psi)
    n = grid.n
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = z * off
    ab[1] = 1.0 + z * main
    ab[2, :-1] = z * off
    return solve_banded((1, 1), ab, rhs.T).T


def step(
    state: PropagationState,
    dt: float,
    kernel: CoulombKernel,
    v_ext: np.ndarray,
) -> PropagationState:
    """One Crank-Nicolson step with a predictor-corrector midpoint density.

    The predictor propagates with the Hamiltonian at the current density; the
    corrector repeats the step with the density averaged between current and
    predictor. Each pass is a Cayley transform of a Hermitian tridiagonal
    operator, so orbital norms are preserved to solver round-off.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    grid = state.grid
    stack = np.vstack([state.orbitals, state.hole])

    v_now = v_ext + convolve(kernel, state.density)
    predicted = _cayley_step(grid, v_now, dt, state.orbitals)
    rho_pred = 2.0 * np.sum(np.abs(predicted) ** 2, axis=0)

    v_mid = v_ext + convolve(kernel, 0.5 * (state.density + rho_pred))
    stack = _cayley_step(grid, v_mid, dt, stack)

    orbitals = stack[:-1]
    return PropagationState(
        grid=grid,
        orbitals=orbitals,
        hole=stack[-1],
        time=state.time + dt,
        density=2.0 * np.sum(np.abs(orbitals) ** 2, axis=0),
    )


def _observe(state: PropagationState, rho_ground: np.ndarray):
    grid = state.grid
    dx = grid.dx
    x = grid.nodes
    com_lumo = dx * float(np.sum(x * np.abs(state.orbitals[-1]) ** 2))
    com_hole = dx * float(np.sum(x * np.abs(state.hole) ** 2))
    norms = np.sqrt(dx * np.sum(np.abs(state.orbitals) ** 2, axis=1))
    drift = float(np.max(np.abs(norms - 1.0)))
    mass = dx * float(np.sum(state.density))
    return state.density - rho_ground, com_lumo, com_hole, drift, mass


def evolve(
    state0: PropagationState,
    params: TddftParams,
    kernel: CoulombKernel,
    v_ext: np.ndarray,
    rho_ground: np.ndarray,
) -> EvolutionTrace:
    """Propagate to t_final, sampling observables every sample_every steps."""
    n_steps = round(params.t_final / params.dt)
    if n_steps < 1:
        raise ValueError("t_final shorter than one time step")

    times = [state0.time]
    snapshots = []
    com_l, com_h, drifts, masses = [], [], [], []

    def record(s):
        snap, cl, ch, dr, m = _observe(s, rho_ground)
        snapshots.append(snap)
        com_l.append(cl)
        com_h.append(ch)
        drifts.append(dr)
        masses.append(m)

    record(state0)
    state = state0
    for k in range(1, n_steps + 1):
        state = step(state, params.dt, kernel, v_ext)
        if k % params.sample_every == 0 or k == n_steps:
            times.append(state.time)
            record(state)

    return EvolutionTrace(
        times=np.asarray(times),
        density_minus_ground=np.asarray(snapshots),
        com_lumo=np.asarray(com_l),
        com_hole=np.asarray(com_h),
        norm_drift=np.asarray(drifts),
        mass=np.asarray(masses),
    )
