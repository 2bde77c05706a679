import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from collisionmodel.analysis import trace_distance_to_fixed_point
from collisionmodel.engine import iter_exact, run_exact, run_trajectory
from collisionmodel.model import HALF_PI, bloch_state, register_hamiltonian
from collisionmodel.qmath import SizeError, expectation, trace_distance, von_neumann_entropy

from conftest import default_params, random_density_matrix

STRATS = ("markovian", "strategy1", "strategy2")


def systems(strategy, rho0, **kw):
    return run_trajectory(default_params(strategy=strategy, **kw), rho0).systems


def test_epsilon_zero_all_strategies_agree():
    rho0 = bloch_state([0.3, -0.2, 0.5])
    ref = systems("markovian", rho0, epsilon=0.0, n_collisions=200)
    for s in ("strategy1", "strategy2"):
        got = systems(s, rho0, epsilon=0.0, n_collisions=200)
        assert np.abs(got - ref).max() < 1e-13


@pytest.mark.parametrize("strategy", STRATS)
def test_nu_zero_system_frozen(strategy):
    rho0 = bloch_state([0.5, 0.1, -0.4])
    got = systems(strategy, rho0, nu=0.0, n_collisions=50)
    assert np.abs(got - rho0).max() < 1e-13


def test_first_step_strategy1_equals_strategy2():
    rho0 = bloch_state([0.6, 0.0, 0.3])
    a = systems("strategy1", rho0, n_collisions=1)
    b = systems("strategy2", rho0, n_collisions=1)
    assert np.abs(a - b).max() < 1e-15


def test_incoming_env_first_step_equal_between_strategies():
    rho0 = default_params().system_thermal_state()
    a = run_trajectory(default_params(strategy="strategy1", n_collisions=1), rho0)
    b = run_trajectory(default_params(strategy="strategy2", n_collisions=1), rho0)
    assert trace_distance(a.incoming_envs[1], b.incoming_envs[1]) <= 1e-15


def test_strategy2_incoming_env_matches_exact_chain():
    rho0 = default_params().system_thermal_state()
    s2 = run_trajectory(default_params(strategy="strategy2", n_collisions=6), rho0)
    ex, _ = run_exact(default_params(strategy="exact", n_collisions=6), rho0, n_env=7)
    assert np.abs(s2.incoming_envs - ex.incoming_envs).max() < 1e-13


def test_incoming_env_divergence_from_carried_coherence():
    # E_2 after the system collision picks up -2 c s Im(x) from the S E_2
    # coherence x = <01|rho|10>; Strategy 1 discards x, so the two differ
    p = default_params(strategy="strategy2", n_collisions=1)
    joint = run_trajectory(p, p.system_thermal_state()).snapshots[0].joint_SE_next
    x = joint[1, 2]
    assert abs(x.imag) > 1e-6
    c, s = math.cos(p.nu), math.sin(p.nu)
    u = np.kron(np.eye(2), np.eye(2)) * c + 1j * s * np.eye(4)[[0, 2, 1, 3]]
    sys_m = np.trace(joint.reshape(2, 2, 2, 2), axis1=1, axis2=3)
    env_m = np.trace(joint.reshape(2, 2, 2, 2), axis1=0, axis2=2)
    with_corr = u @ joint @ u.conj().T
    without = u @ np.kron(sys_m, env_m) @ u.conj().T
    pop = lambda r: np.trace(r.reshape(2, 2, 2, 2), axis1=0, axis2=2)[0, 0].real
    assert abs((pop(with_corr) - pop(without)) - (-2 * c * s * x.imag)) < 1e-15


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 1.5), st.floats(0.1, 5.0), st.floats(-1, 1), st.floats(-1, 1))
def test_markovian_coherence_factor(nu, t_e, x, y):
    r = np.array([x, y, 0.0])
    if np.linalg.norm(r) > 1:
        r /= np.linalg.norm(r)
    rho0 = bloch_state(r)
    p = default_params(strategy="markovian", nu=nu, T_E=t_e, n_collisions=1)
    traj = run_trajectory(p, rho0)
    env = p.env_thermal_state()
    a, b = env[0, 0].real, env[1, 1].real
    c, s = math.cos(nu), math.sin(nu)
    expected = rho0[0, 1] * c * (c + 1j * s * (a - b))
    assert abs(traj.systems[1][0, 1] - expected) < 1e-14


def test_markovian_full_swap_one_step():
    rho0 = bloch_state([0.2, 0.4, 0.1])
    p = default_params(strategy="markovian", nu=HALF_PI, n_collisions=1)
    traj = run_trajectory(p, rho0)
    assert np.abs(traj.systems[1] - p.env_thermal_state()).max() < 1e-15


def test_n_collisions_zero_rejected():
    with pytest.raises(ValueError):
        default_params(n_collisions=0)


def test_invalid_initial_state_rejected():
    with pytest.raises(ValueError):
        run_trajectory(default_params(n_collisions=2), np.diag([0.7, 0.7]))
    with pytest.raises(ValueError):
        run_trajectory(default_params(n_collisions=2), np.eye(4) / 4)


def test_exact_marginals_match_strategy2():
    rho0 = bloch_state([0.5, -0.3, 0.2])
    p = default_params(strategy="exact", n_collisions=8)
    traj, _ = run_exact(p, rho0, n_env=8)
    s2 = systems("strategy2", rho0, n_collisions=8)
    assert np.abs(traj.systems - s2).max() < 1e-12


def test_exact_single_unit_equals_markovian():
    rho0 = bloch_state([0.5, 0.5, 0.0])
    traj, _ = run_exact(default_params(strategy="exact", n_collisions=1), rho0, n_env=1)
    ref = systems("markovian", rho0, n_collisions=1)
    assert np.abs(traj.systems - ref).max() < 1e-15


def test_exact_global_entropy_and_energy_conserved(rng):
    rho0 = random_density_matrix(rng, 1)
    n_env = 6
    p = default_params(strategy="exact", n_collisions=n_env)
    env = p.env_thermal_state()
    s0 = von_neumann_entropy(rho0) + n_env * von_neumann_entropy(env)
    h = register_hamiltonian([p.omega_S] + [p.omega_E] * n_env)
    e0 = expectation(h, np.kron(rho0, np.kron(np.kron(np.kron(env, env), np.kron(env, env)),
                                              np.kron(env, env))))
    for _, register in iter_exact(p, rho0, n_env):
        assert abs(von_neumann_entropy(register) - s0) < 1e-10
        assert abs(expectation(h, register) - e0) < 1e-12


def test_exact_size_errors():
    rho0 = np.eye(2) / 2
    with pytest.raises(SizeError, match="n_env <= 13"):
        run_exact(default_params(strategy="exact", n_collisions=1), rho0, n_env=14)
    with pytest.raises(SizeError, match="n_collisions <= 3"):
        run_exact(default_params(strategy="exact", n_collisions=4), rho0, n_env=3)


def test_run_trajectory_exact_dispatch():
    rho0 = bloch_state([0, 0, 0.5])
    traj = run_trajectory(default_params(strategy="exact", n_collisions=4), rho0)
    assert len(traj) == 4
    assert np.abs(traj.systems - systems("strategy2", rho0, n_collisions=4)).max() < 1e-13


@pytest.mark.parametrize("strategy", STRATS)
def test_determinism(strategy):
    rho0 = bloch_state([1, 0, 0])
    a = systems(strategy, rho0, n_collisions=100)
    b = systems(strategy, rho0, n_collisions=100)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("strategy", STRATS)
def test_states_stay_valid(strategy):
    traj = run_trajectory(default_params(strategy=strategy, n_collisions=500), bloch_state([1, 0, 0]))
    for rho in traj.systems[::25]:
        assert abs(np.trace(rho) - 1) < 1e-12
        assert np.abs(rho - rho.conj().T).max() < 1e-12
        assert np.linalg.eigvalsh(rho).min() > -1e-12


def test_strategy2_trace_distance_not_monotone():
    traj = run_trajectory(default_params(n_collisions=300), default_params().system_thermal_state())
    d = trace_distance_to_fixed_point(traj)
    assert np.diff(d).max() > 0


def test_markovian_trace_distance_monotone():
    p = default_params(strategy="markovian", n_collisions=300)
    d = trace_distance_to_fixed_point(run_trajectory(p, p.system_thermal_state()))
    assert np.diff(d).max() <= 1e-15


def test_trajectory_provenance():
    p = default_params(n_collisions=3)
    prov = run_trajectory(p, np.eye(2) / 2).provenance()
    assert prov["n_collisions"] == 3 and prov["strategy"] == "strategy2" and "version" in prov
