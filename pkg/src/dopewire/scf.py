"""Kohn-Sham Hamiltonian assembly, tridiagonal eigensolves, and the SCF loop."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .grid import CoulombKernel, Grid, convolve, coulomb_kernel, integrate, kinetic_apply
from .nuclei import ModelParams, external_potential, nuclear_density

__all__ = [
    "ScfParams",
    "Hamiltonian",
    "GroundState",
    "assemble",
    "lowest_eigenpairs",
    "density_from",
    "scf_ground_state",
    "ks_energy",
]

# adjacent eigenvalues closer than this (relative) are treated as one block
_DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class ScfParams:
    """Self-consistency controls: damping, convergence threshold, iteration caps."""

    mixing: float = 0.3
    tol: float = 1e-8
    max_iter: int = 500
    extra_states: int = 4
    history: int = 5

    def __post_init__(self):
        if not (0.0 < self.mixing <= 1.0):
            raise ValueError(f"mixing must be in (0, 1], got {self.mixing}")
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.extra_states < 1:
            raise ValueError(f"extra_states must be >= 1, got {self.extra_states}")
        if self.history < 1:
            raise ValueError(f"history must be >= 1, got {self.history}")


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """-1/2 d^2/dx^2 + v on the grid; the stencil keeps it symmetric tridiagonal."""

    grid: Grid
    potential: np.ndarray

    def apply(self, values: np.ndarray) -> np.ndarray:
        return kinetic_apply(self.grid, values) + self.potential * values

    def tridiagonal(self) -> tuple[np.ndarray, np.ndarray]:
        """(main, off) diagonals with the kinetic stencil folded in."""
        dx2 = self.grid.dx**2
        main = self.potential + 1.0 / dx2
        off = np.full(self.grid.n - 1, -0.5 / dx2)
        return main, off


@dataclass(frozen=True, eq=False)
class GroundState:
    """Converged occupied orbitals plus a few virtuals, and SCF diagnostics."""

    grid: Grid
    n_occ: int
    orbitals: np.ndarray      # (n_states, n_nodes), discrete-L2 normalized
    eigenvalues: np.ndarray   # ascending, a.u.
    density: np.ndarray
    iterations: int
    residual: float
    converged: bool
    energy_history: tuple[float, ...]

    @property
    def energy(self) -> float:
        return self.energy_history[-1]


def assemble(grid: Grid, v_ext: np.ndarray, rho: np.ndarray, kernel: CoulombKernel) -> Hamiltonian:
    """Mean-field Hamiltonian for a given electron density: v = v_ext + v_H[rho]."""
    v_ext = np.asarray(v_ext)
    if v_ext.shape != (grid.n,):
        raise ValueError(f"v_ext has shape {v_ext.shape}, grid has {grid.n} nodes")
    return Hamiltonian(grid=grid, potential=v_ext + convolve(kernel, rho))


def lowest_eigenpairs(h: Hamiltonian, k: int) -> tuple[np.ndarray, np.ndarray]:
    """The k lowest eigenvalues (ascending) and discrete-L2 orthonormal orbitals."""
    n = h.grid.n
    if not (1 <= k <= n):
        raise ValueError(f"need 1 <= k <= {n}, got {k}")
    main, off = h.tridiagonal()
    eigs, vecs = eigh_tridiagonal(
        main, off, select="i", select_range=(0, k - 1), lapack_driver="stebz"
    )
    eigs = _rayleigh_refine(main, off, vecs)
    _reorthonormalize_degenerate(eigs, vecs)
    # deterministic sign: largest-magnitude component positive
    flip = vecs[np.argmax(np.abs(vecs), axis=0), np.arange(vecs.shape[1])] < 0
    vecs[:, flip] *= -1.0
    return eigs, vecs.T / np.sqrt(h.grid.dx)


def _rayleigh_refine(main: np.ndarray, off: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Rayleigh quotients in extended precision.

    Bisection locates eigenvalues to ~norm(H)*eps absolute; with the stencil
    norm ~2/dx^2 that is poor relative accuracy for the lowest box modes. The
    quotient evaluated in long double recovers them to near machine precision.
    """
    v = vecs.astype(np.longdouble)
    hv = main.astype(np.longdouble)[:, None] * v
    if len(off):
        o = off.astype(np.longdouble)[:, None]
        hv[1:] += o * v[:-1]
        hv[:-1] += o * v[1:]
    quotients = np.sum(v * hv, axis=0) / np.sum(v * v, axis=0)
    # ties inside degenerate clusters may invert at the last bit; keep ascending
    return np.maximum.accumulate(quotients.astype(np.float64))


def _reorthonormalize_degenerate(eigs: np.ndarray, vecs: np.ndarray) -> None:
    gaps = np.diff(eigs)
    cuts = np.nonzero(gaps > _DEGENERACY_TOL * np.maximum(1.0, np.abs(eigs[1:])))[0] + 1
    for lo, hi in zip(np.r_[0, cuts], np.r_[cuts, eigs.size]):
        if hi - lo > 1:
            q, _ = np.linalg.qr(vecs[:, lo:hi])
            vecs[:, lo:hi] = q


def density_from(orbitals: np.ndarray, n_occ: int) -> np.ndarray:
    """Total density of n_occ doubly occupied orbitals: 2 sum |phi_i|^2."""
    orbitals = np.asarray(orbitals)
    if orbitals.ndim != 2 or orbitals.shape[0] < n_occ:
        raise ValueError(f"need at least {n_occ} orbitals, got shape {orbitals.shape}")
    return 2.0 * np.sum(np.abs(orbitals[:n_occ]) ** 2, axis=0)


class _AndersonMixer:
    """Anderson-accelerated damped density mixing.

    Keeps a short history of (density, residual) pairs and extrapolates the
    next input density from the least-squares combination that minimizes the
    residual, then relaxes by beta. Plain damped mixing cycles indefinitely on
    strongly doped profiles (the left/right charge-transfer mode flips sign
    each iteration); the history update breaks that cycle.
    """

    def __init__(self, beta: float, history: int):
        self.beta = beta
        self.history = history
        self._rho: list[np.ndarray] = []
        self._res: list[np.ndarray] = []

    def update(self, rho: np.ndarray, residual: np.ndarray) -> np.ndarray:
        self._rho.append(rho.copy())
        self._res.append(residual.copy())
        if len(self._rho) > self.history:
            self._rho.pop(0)
            self._res.pop(0)
        k = len(self._rho)
        if k == 1:
            return rho + self.beta * residual
        dr = np.array([r - self._res[-1] for r in self._res[:-1]])
        dp = np.array([p - self._rho[-1] for p in self._rho[:-1]])
        gram = dr @ dr.T
        coef = np.linalg.solve(
            gram + 1e-12 * np.trace(gram) * np.eye(k - 1), -dr @ self._res[-1]
        )
        rho_opt = self._rho[-1] + coef @ dp
        res_opt = self._res[-1] + coef @ dr
        return rho_opt + self.beta * res_opt


def scf_ground_state(
    profile,
    params: ModelParams,
    scf: ScfParams,
    grid: Grid,
    kernel: CoulombKernel | None = None,
) -> GroundState:
    """Iterate density -> lowest orbitals -> density to a self-consistent ground state.

    Starts from the non-interacting density (rho = 0) and stops when the
    density change drops below scf.tol in the max norm. A non-converged run is
    returned with converged=False rather than raised, so callers can decide.
    """
    if kernel is None:
        kernel = coulomb_kernel(grid, params.d)
    mu = nuclear_density(profile, params, grid)
    v_ext = external_potential(mu, kernel)
    n_states = params.n_occ + scf.extra_states

    rho = np.zeros(grid.n)
    mixer = _AndersonMixer(beta=scf.mixing, history=scf.history)
    energies: list[float] = []
    converged = False
    iteration = 0
    for iteration in range(1, scf.max_iter + 1):
        h = assemble(grid, v_ext, rho, kernel)
        eigs, orbitals = lowest_eigenpairs(h, n_states)
        rho_out = density_from(orbitals, params.n_occ)
        change = rho_out - rho
        residual = float(np.max(np.abs(change)))
        # kinetic energy via <phi, h phi> = eps: T = 2 sum eps_occ - int v rho
        kinetic = 2.0 * float(np.sum(eigs[: params.n_occ])) - integrate(
            grid, h.potential * rho_out
        )
        hartree = 0.5 * integrate(grid, rho_out * convolve(kernel, rho_out))
        energies.append(kinetic + integrate(grid, v_ext * rho_out) + hartree)
        if residual <= scf.tol:
            converged = True
            break
        rho = mixer.update(rho, change)

    return GroundState(
        grid=grid,
        n_occ=params.n_occ,
        orbitals=orbitals,
        eigenvalues=eigs,
        density=rho_out,
        iterations=iteration,
        residual=residual,
        converged=converged,
        energy_history=tuple(energies),
    )


def ks_energy(state: GroundState, mu: np.ndarray, kernel: CoulombKernel) -> float:
    """Total energy T + V_ext + Hartree of a state for the given nuclear density."""
    grid = state.grid
    occ = state.orbitals[: state.n_occ]
    kinetic = 2.0 * grid.dx * float(
        np.sum([np.dot(phi, kinetic_apply(grid, phi)) for phi in occ])
    )
    v_ext = external_potential(mu, kernel)
    hartree = 0.5 * integrate(grid, state.density * convolve(kernel, state.density))
    return kinetic + integrate(grid, v_ext * state.density) + hartree
