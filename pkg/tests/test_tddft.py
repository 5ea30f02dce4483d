import numpy as np
import pytest

import dopewire as dw


def _tiny_setup(tiny_model, profile):
    state = tiny_model.solve(profile)
    assert state.converged
    mu = dw.nuclear_density(profile, tiny_model.params, tiny_model.grid)
    v_ext = dw.external_potential(mu, tiny_model.kernel)
    return state, v_ext


def test_tddft_params_validation():
    with pytest.raises(ValueError):
        dw.TddftParams(dt=0.0)
    with pytest.raises(ValueError):
        dw.TddftParams(t_final=-1.0)
    with pytest.raises(ValueError):
        dw.TddftParams(sample_every=0)


def test_excited_initial_state_contract(tiny_state, tiny_model):
    grid = tiny_model.grid
    pair = dw.homo_lumo(tiny_state)
    excited = dw.excited_initial_state(tiny_state, pair)
    n = tiny_state.n_occ
    assert excited.orbitals.shape == (n, grid.n)
    assert dw.integrate(grid, excited.density) == pytest.approx(2.0 * n, abs=1e-10)
    gram = grid.dx * (excited.orbitals @ excited.orbitals.conj().T)
    assert np.max(np.abs(gram - np.eye(n))) < 1e-10
    delta = excited.density - tiny_state.density
    expected = 2.0 * (np.abs(pair.lumo) ** 2 - np.abs(pair.homo) ** 2)
    assert np.max(np.abs(delta - expected)) < 1e-12
    assert np.max(np.abs(excited.hole - pair.homo)) == 0.0


def test_ground_state_initial_data_is_stationary(tiny_model):
    state, v_ext = _tiny_setup(tiny_model, (4, 4))
    grid = tiny_model.grid
    ground = dw.PropagationState(
        grid=grid,
        orbitals=state.orbitals[: state.n_occ].astype(complex),
        hole=state.orbitals[state.n_occ - 1].astype(complex),
        time=0.0,
        density=state.density.copy(),
    )
    current = ground
    for _ in range(1000):
        current = dw.step(current, 0.002, tiny_model.kernel, v_ext)
    assert np.max(np.abs(current.density - state.density)) < 1e-6


def test_norms_and_gram_conserved(tiny_model):
    state, v_ext = _tiny_setup(tiny_model, (3, 5))
    pair = dw.homo_lumo(state)
    excited = dw.excited_initial_state(state, pair)
    grid = tiny_model.grid
    current = excited
    for _ in range(5000):
        current = dw.step(current, 0.002, tiny_model.kernel, v_ext)
    norms = np.sqrt(grid.dx * np.sum(np.abs(current.orbitals) ** 2, axis=1))
    assert np.max(np.abs(norms - 1.0)) < 1e-7
    gram = grid.dx * (current.orbitals @ current.orbitals.conj().T)
    assert np.max(np.abs(gram - np.eye(state.n_occ))) < 1e-7
    assert abs(np.sqrt(grid.dx * np.sum(np.abs(current.hole) ** 2)) - 1.0) < 1e-7


def test_single_step_norm_preservation(tiny_model):
    state, v_ext = _tiny_setup(tiny_model, (4, 4))
    pair = dw.homo_lumo(state)
    excited = dw.excited_initial_state(state, pair)
    stepped = dw.step(excited, 0.002, tiny_model.kernel, v_ext)
    grid = tiny_model.grid
    norms = np.sqrt(grid.dx * np.sum(np.abs(stepped.orbitals) ** 2, axis=1))
    assert np.max(np.abs(norms - 1.0)) < 1e-10
    assert stepped.time == pytest.approx(0.002)
    with pytest.raises(ValueError):
        dw.step(excited, -0.1, tiny_model.kernel, v_ext)


def test_parity_preserved_for_symmetric_profile(tiny_model):
    state, v_ext = _tiny_setup(tiny_model, (4, 4))
    pair = dw.homo_lumo(state)
    trace = dw.evolve(
        dw.excited_initial_state(state, pair),
        dw.TddftParams(dt=0.002, t_final=1.0, sample_every=100),
        tiny_model.kernel, v_ext, state.density,
    )
    assert np.max(np.abs(trace.com_lumo)) < 1e-6
    final = trace.density_minus_ground[-1] + state.density
    assert np.max(np.abs(final - final[::-1])) < 1e-6


def test_evolve_trace_contract(tiny_model):
    state, v_ext = _tiny_setup(tiny_model, (3, 5))
    pair = dw.homo_lumo(state)
    params = dw.TddftParams(dt=0.002, t_final=0.5, sample_every=50)
    trace = dw.evolve(
        dw.excited_initial_state(state, pair), params,
        tiny_model.kernel, v_ext, state.density,
    )
    assert np.all(np.diff(trace.times) > 0)
    assert trace.times[0] == 0.0
    assert trace.times[-1] == pytest.approx(0.5)
    assert trace.density_minus_ground.shape == (trace.times.size, tiny_model.grid.n)
    n_electrons = 2.0 * state.n_occ
    assert np.max(np.abs(trace.mass - n_electrons)) < 1e-6
    assert np.max(trace.norm_drift) < 1e-7


def test_self_convergence_second_order(tiny_model):
    state, v_ext = _tiny_setup(tiny_model, (3, 5))
    pair = dw.homo_lumo(state)
    excited = dw.excited_initial_state(state, pair)
    t_final = 0.05

    def propagate(dt):
        current = excited
        for _ in range(round(t_final / dt)):
            current = dw.step(current, dt, tiny_model.kernel, v_ext)
        return current

    reference = propagate(0.000125)
    errors = []
    for dt in (0.002, 0.001, 0.0005):
        final = propagate(dt)
        errors.append((
            np.max(np.abs(final.orbitals - reference.orbitals)),
            np.max(np.abs(final.density - reference.density)),
        ))
    for column in (0, 1):
        for fine, coarse in zip(errors[1:], errors):
            ratio = coarse[column] / fine[column]
            assert 3.0 < ratio < 5.0
