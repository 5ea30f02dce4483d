"""HOMO/LUMO extraction and the four excitation goal functionals."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import CoulombKernel, Grid, convolve, integrate
from .scf import GroundState

__all__ = [
    "ExcitationPair",
    "Goal",
    "GOAL_KINDS",
    "homo_lumo",
    "charge_transfer",
    "overlap",
    "bandgap",
    "bandgap_deviation",
    "lifetime",
    "evaluate_goal",
    "center_of_mass",
]

GOAL_KINDS = ("charge-transfer", "overlap", "lifetime", "bandgap-max", "bandgap-target")


@dataclass(frozen=True, eq=False)
class ExcitationPair:
    """Highest occupied and lowest unoccupied orbital of a converged state."""

    grid: Grid
    homo: np.ndarray
    lumo: np.ndarray
    eps_h: float
    eps_l: float


@dataclass(frozen=True)
class Goal:
    """An optimization objective; scores are normalized so lower is better."""

    kind: str
    target: float | None = None

    def __post_init__(self):
        if self.kind not in GOAL_KINDS:
            raise ValueError(f"unknown goal {self.kind!r}, expected one of {GOAL_KINDS}")
        if self.kind == "bandgap-target":
            if self.target is None or not np.isfinite(self.target):
                raise ValueError("bandgap-target requires a finite target value")
        elif self.target is not None:
            raise ValueError(f"goal {self.kind!r} takes no target value")


def homo_lumo(state: GroundState) -> ExcitationPair:
    """Eigenpairs n_occ and n_occ+1 of the converged Hamiltonian."""
    if not state.converged:
        raise ValueError("ground state did not converge")
    if state.eigenvalues.size < state.n_occ + 1:
        raise ValueError(
            f"need at least {state.n_occ + 1} eigenpairs, have {state.eigenvalues.size}"
        )
    i = state.n_occ - 1
    return ExcitationPair(
        grid=state.grid,
        homo=state.orbitals[i],
        lumo=state.orbitals[i + 1],
        eps_h=float(state.eigenvalues[i]),
        eps_l=float(state.eigenvalues[i + 1]),
    )


def center_of_mass(grid: Grid, orbital: np.ndarray) -> float:
    """Position expectation int x |phi|^2 of a normalized orbital."""
    return float(integrate(grid, grid.nodes * np.abs(orbital) ** 2))


def charge_transfer(pair: ExcitationPair) -> float:
    """int x (|lumo|^2 - |homo|^2): how far the excitation displaces charge."""
    return center_of_mass(pair.grid, pair.lumo) - center_of_mass(pair.grid, pair.homo)


def overlap(pair: ExcitationPair) -> float:
    """Spatial electron-hole overlap int |homo|^2 |lumo|^2."""
    return float(integrate(pair.grid, pair.homo**2 * pair.lumo**2))


def bandgap(pair: ExcitationPair) -> float:
    return pair.eps_l - pair.eps_h


def bandgap_deviation(pair: ExcitationPair, target: float) -> float:
    return (bandgap(pair) - target) ** 2


def lifetime(state: GroundState, pair: ExcitationPair, kernel: CoulombKernel) -> float:
    """Squared Hilbert-Schmidt norm of the commutator driving the excited state.

    The excited density matrix swaps the HOMO for the LUMO; the only change in
    the mean-field Hamiltonian is then the Hartree field of the electron-hole
    pair, w = v_d * 2(|lumo|^2 - |homo|^2). The trace reduces to a sum over
    the excited occupied orbitals of the residual of w*phi outside the
    occupied space; zero iff the excited determinant is stationary.
    """
    grid = state.grid
    dx = grid.dx
    n_occ = state.n_occ
    occ = state.orbitals[:n_occ]
    w = convolve(kernel, 2.0 * (pair.lumo**2 - pair.homo**2))

    # occupied orbitals after excitation: HOMO replaced by LUMO
    excited = np.vstack([occ[: n_occ - 1], pair.lumo])
    # summation set: occupied orbitals projected off the HOMO, plus the LUMO
    homo_coeff = dx * (occ @ pair.homo)
    targets = np.vstack([occ - np.outer(homo_coeff, pair.homo), pair.lumo])

    driven = targets * w
    residual = driven - dx * (driven @ excited.T) @ excited
    return 2.0 * dx * float(np.sum(residual**2))


def evaluate_goal(
    goal: Goal, state: GroundState, pair: ExcitationPair, kernel: CoulombKernel
) -> float:
    """Score a candidate under the goal; lower is always better."""
    if goal.kind == "charge-transfer":
        return -charge_transfer(pair)
    if goal.kind == "overlap":
        return overlap(pair)
    if goal.kind == "lifetime":
        return lifetime(state, pair, kernel)
    if goal.kind == "bandgap-max":
        return -bandgap(pair)
    return bandgap_deviation(pair, goal.target)
