"""Shared model fixtures. Expensive full-resolution states are session-scoped."""
from __future__ import annotations

import numpy as np
import pytest

import dopewire as dw

PAPER_DOPED = "75748566666666577476"
PAPER_CHARGE_TRANSFER = (4, 5, 6, 6, 7, 6, 5, 6, 7, 5, 6, 7, 6, 5, 6, 5, 6, 6, 8, 8)


@pytest.fixture(scope="session")
def paper_grid():
    return dw.build_grid(-10.0, 10.0, 0.01)


@pytest.fixture(scope="session")
def paper_kernel(paper_grid):
    return dw.coulomb_kernel(paper_grid, 0.01)


@pytest.fixture(scope="session")
def paper_params():
    return dw.ModelParams()


@pytest.fixture(scope="session")
def carbon_state(paper_grid, paper_kernel, paper_params):
    state = dw.scf_ground_state(
        dw.uniform_profile(), paper_params, dw.ScfParams(), paper_grid, paper_kernel
    )
    assert state.converged
    return state


@pytest.fixture(scope="session")
def doped_state(paper_grid, paper_kernel, paper_params):
    profile = dw.profile_from_string(PAPER_DOPED)
    state = dw.scf_ground_state(
        profile, paper_params, dw.ScfParams(), paper_grid, paper_kernel
    )
    assert state.converged
    return state


class SmallModel:
    """4 atoms, charges in {5,6,7} summing to 24; cheap enough for search tests."""

    def __init__(self):
        self.constraints = dw.ProfileConstraints(n_atoms=4, z_min=5, z_max=7, total=24)
        self.params = dw.ModelParams(positions=(-1.5, -0.5, 0.5, 1.5), n_occ=12)
        self.grid = dw.build_grid(-4.0, 4.0, 0.02)
        self.kernel = dw.coulomb_kernel(self.grid, self.params.d)

    def solve(self, profile, tol=1e-8):
        return dw.scf_ground_state(
            profile, self.params, dw.ScfParams(tol=tol), self.grid, self.kernel
        )


class TinyModel:
    """2 atoms, 8 electrons on a 199-node grid; fits the dense-matrix oracles."""

    def __init__(self):
        self.constraints = dw.ProfileConstraints(n_atoms=2, z_min=3, z_max=5, total=8)
        self.params = dw.ModelParams(positions=(-0.5, 0.5), n_occ=4)
        self.grid = dw.build_grid(-2.0, 2.0, 0.02)
        self.kernel = dw.coulomb_kernel(self.grid, self.params.d)

    def solve(self, profile, tol=1e-12):
        return dw.scf_ground_state(
            profile, self.params, dw.ScfParams(tol=tol), self.grid, self.kernel
        )


@pytest.fixture(scope="session")
def small_model():
    return SmallModel()


@pytest.fixture(scope="session")
def tiny_model():
    return TinyModel()


@pytest.fixture(scope="session")
def tiny_state(tiny_model):
    state = tiny_model.solve((4, 4))
    assert state.converged
    return state


def random_profile(rng, constraints):
    """Uniform-ish random feasible profile by repair moves from a random draw."""
    z = rng.integers(constraints.z_min, constraints.z_max + 1, constraints.n_atoms)
    while z.sum() != constraints.total:
        i = rng.integers(0, constraints.n_atoms)
        if z.sum() > constraints.total and z[i] > constraints.z_min:
            z[i] -= 1
        elif z.sum() < constraints.total and z[i] < constraints.z_max:
            z[i] += 1
    return tuple(int(v) for v in z)
