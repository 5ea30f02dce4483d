"""Doping profiles, the Gaussian nuclear charge density, and the external potential."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import CoulombKernel, Grid, convolve

__all__ = [
    "ProfileConstraints",
    "ModelParams",
    "DEFAULT_CONSTRAINTS",
    "validate_profile",
    "profile_from_string",
    "profile_to_string",
    "uniform_profile",
    "nuclear_density",
    "external_potential",
]


@dataclass(frozen=True)
class ProfileConstraints:
    """Integer bounds and total charge a doping profile must satisfy."""

    n_atoms: int = 20
    z_min: int = 3
    z_max: int = 9
    total: int = 120

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError("n_atoms must be >= 1")
        if not (0 < self.z_min <= self.z_max):
            raise ValueError("need 0 < z_min <= z_max")
        if not (self.n_atoms * self.z_min <= self.total <= self.n_atoms * self.z_max):
            raise ValueError(
                f"total charge {self.total} infeasible for {self.n_atoms} atoms "
                f"in [{self.z_min}, {self.z_max}]"
            )


DEFAULT_CONSTRAINTS = ProfileConstraints()


def _default_positions() -> tuple[float, ...]:
    return tuple(-9.5 + 1.0 * k for k in range(20))


@dataclass(frozen=True)
class ModelParams:
    """Fixed nuclear positions and smearing of the chain model (atomic units)."""

    positions: tuple[float, ...] = _default_positions()
    sigma2: float = 1.0 / 2000.0
    d: float = 0.01
    n_occ: int = 60

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.size < 1 or np.any(np.diff(pos) <= 0):
            raise ValueError("positions must be strictly increasing")
        if self.sigma2 <= 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if self.d <= 0:
            raise ValueError(f"d must be positive, got {self.d}")
        if self.n_occ < 1:
            raise ValueError(f"n_occ must be >= 1, got {self.n_occ}")


def validate_profile(charges, constraints: ProfileConstraints = DEFAULT_CONSTRAINTS) -> tuple[int, ...]:
    """Check length, per-site bounds, and total charge; return the profile tuple."""
    profile = tuple(int(z) for z in charges)
    if any(int(z) != z for z in charges):
        raise ValueError("charges must be integers")
    if len(profile) != constraints.n_atoms:
        raise ValueError(
            f"profile has {len(profile)} charges, expected {constraints.n_atoms}"
        )
    for idx, z in enumerate(profile):
        if not (constraints.z_min <= z <= constraints.z_max):
            raise ValueError(
                f"charge {z} at site {idx} outside [{constraints.z_min}, {constraints.z_max}]"
            )
    total = sum(profile)
    if total != constraints.total:
        raise ValueError(f"total charge {total}, expected {constraints.total}")
    return profile


def profile_from_string(text: str, constraints: ProfileConstraints = DEFAULT_CONSTRAINTS) -> tuple[int, ...]:
    """Parse a profile serialized as one digit per site, e.g. '666...6'."""
    if not text.isdigit():
        raise ValueError(f"profile string must be all digits, got {text!r}")
    return validate_profile([int(c) for c in text], constraints)


def profile_to_string(profile) -> str:
    return "".join(str(int(z)) for z in profile)


def uniform_profile(constraints: ProfileConstraints = DEFAULT_CONSTRAINTS) -> tuple[int, ...]:
    """The homogeneous profile (all sites equal); requires total divisible by n_atoms."""
    z, rem = divmod(constraints.total, constraints.n_atoms)
    if rem:
        raise ValueError(
            f"total {constraints.total} not divisible by {constraints.n_atoms} atoms"
        )
    return validate_profile([z] * constraints.n_atoms, constraints)


def nuclear_density(profile, params: ModelParams, grid: Grid) -> np.ndarray:
    """Sum of normalized Gaussians of variance sigma2, one per site, weighted by Z."""
    charges = np.asarray(profile, dtype=float)
    positions = np.asarray(params.positions)
    if charges.shape != positions.shape:
        raise ValueError(
            f"profile has {charges.size} charges for {positions.size} positions"
        )
    sigma = np.sqrt(params.sigma2)
    if np.any(positions - 6 * sigma < grid.x_min) or np.any(positions + 6 * sigma > grid.x_max):
        raise ValueError("nuclear Gaussians must lie well inside the grid domain")
    spread = np.exp(-((grid.nodes[None, :] - positions[:, None]) ** 2) / (2.0 * params.sigma2))
    return (charges @ spread) / np.sqrt(2.0 * np.pi * params.sigma2)


def external_potential(mu: np.ndarray, kernel: CoulombKernel) -> np.ndarray:
    """Attractive potential generated by the nuclear density through the wire kernel."""
    mu = np.asarray(mu)
    if np.any(mu < 0):
        raise ValueError("nuclear density must be nonnegative")
    return -convolve(kernel, mu)
