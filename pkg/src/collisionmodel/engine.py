"""Collision dynamics for the Markovian limit, Strategy 1, Strategy 2 and the
exact full-chain register.

One step ``i`` builds the register ``(S, E_i, E_{i+1})``, applies the
system-environment partial swap on ``(S, E_i)`` and then the
intra-environment partial swap on ``(E_i, E_{i+1})``. ``E_{i+1}`` always
enters fresh in the environment Gibbs state. The strategies differ only in
what is carried to the next step:

* Strategy 1 keeps the two marginals ``rho^S`` and ``rho^{E_{i+1}}`` and
  drops every correlation.
* Strategy 2 keeps the joint ``rho^{S E_{i+1}}``.
* The exact mode keeps the whole chain and never traces anything out.

Collision indices start at 1; index 0 is the initial state.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._version import __version__
from .model import Strategy, embed_unitary, partial_swap
from .qmath import (
    MAX_QUBITS, SizeError, apply_two_qubit_unitary, check_density_matrix,
    dag, partial_trace, tensor_all,
)


@dataclass
class CarriedState:
    """State handed from one collision to the next.

    Only the field that belongs to ``strategy`` is populated besides
    ``system``: ``env`` for Strategy 1 (the factor ``rho~^{E_i}``), ``joint``
    for Strategy 2 (``rho^{S E_i}``, system first) and ``register`` for the
    exact chain.
    """

    strategy: Strategy
    system: np.ndarray
    env: np.ndarray = None
    joint: np.ndarray = None
    register: np.ndarray = None
    index: int = 0


@dataclass
class StepSnapshot:
    index: int
    system: np.ndarray
    incoming_env: np.ndarray
    env_pair_pre: np.ndarray
    env_pair_post: np.ndarray
    joint_SE_next: np.ndarray = None


@dataclass
class Trajectory:
    params: object
    initial_system: np.ndarray
    snapshots: list = field(default_factory=list)
    version: str = __version__

    def __len__(self):
        return len(self.snapshots)

    @property
    def systems(self):
        """System states, shape ``(N + 1, 2, 2)``; entry 0 is the initial state."""
        return np.array([self.initial_system] + [s.system for s in self.snapshots])

    @property
    def incoming_envs(self):
        """Reduced state of ``E_{i+1}`` right before collision ``i + 1``.

        Entry 0 is the fresh ``E_1``.
        """
        fresh = self.params.env_thermal_state()
        return np.array([fresh] + [s.incoming_env for s in self.snapshots])

    def provenance(self):
        return {"version": self.version, **self.params.as_dict()}


@lru_cache(maxsize=64)
def _unitaries(nu, eps):
    u_se = embed_unitary(partial_swap(nu), 3, (0, 1))
    u_ee = embed_unitary(partial_swap(eps), 3, (1, 2))
    u = u_ee @ u_se
    u.flags.writeable = False
    u2 = partial_swap(nu)
    u2.flags.writeable = False
    return u, u2


def _project(m):
    # Hermitian, unit-trace projection; the Strategy 1 update is bilinear in
    # the carried factors, so rounding drift along trace and anti-Hermitian
    # directions doubles every step unless removed.
    m = (m + dag(m)) / 2
    return m / np.trace(m).real


def initial_carried(strategy, initial_system, params):
    strategy = Strategy(strategy)
    rho = np.asarray(initial_system, dtype=complex)
    env = params.env_thermal_state()
    if strategy is Strategy.MARKOVIAN:
        return CarriedState(strategy, rho)
    if strategy is Strategy.STRATEGY1:
        return CarriedState(strategy, rho, env=env)
    if strategy is Strategy.STRATEGY2:
        return CarriedState(strategy, rho, joint=np.kron(rho, env))
    raise ValueError("use run_exact for the exact chain")


def _expect(s, strategy):
    if s.strategy is not strategy:
        raise ValueError(f"expected a {strategy.value} carried state, got {s.strategy.value}")


def step_markovian(s, p):
    """Single collision with a fresh unit and no intra-environment coupling."""
    _expect(s, Strategy.MARKOVIAN)
    env = p.env_thermal_state()
    _, u = _unitaries(p.nu, 0.0)
    post = u @ np.kron(s.system, env) @ dag(u)
    system = partial_trace(post, [0])
    env_post = partial_trace(post, [1])
    snap = StepSnapshot(
        index=s.index + 1,
        system=system,
        incoming_env=env,
        env_pair_pre=np.kron(env, env),
        env_pair_post=np.kron(env_post, env),
    )
    return CarriedState(Strategy.MARKOVIAN, system, index=s.index + 1), snap


def step_strategy1(s, p):
    """One collision that forgets all correlations before the next one."""
    _expect(s, Strategy.STRATEGY1)
    env = p.env_thermal_state()
    u, _ = _unitaries(p.nu, p.effective_epsilon)
    pre = tensor_all(s.system, s.env, env)
    post = u @ pre @ dag(u)
    system = _project(partial_trace(post, [0]))
    env_next = _project(partial_trace(post, [2]))
    snap = StepSnapshot(
        index=s.index + 1,
        system=system,
        incoming_env=env_next,
        env_pair_pre=np.kron(s.env, env),
        env_pair_post=partial_trace(post, [1, 2]),
    )
    return CarriedState(Strategy.STRATEGY1, system, env=env_next, index=s.index + 1), snap


def step_strategy2(s, p):
    """One collision that keeps the system correlated with the next unit."""
    _expect(s, Strategy.STRATEGY2)
    env = p.env_thermal_state()
    u, _ = _unitaries(p.nu, p.effective_epsilon)
    pre = np.kron(s.joint, env)
    post = u @ pre @ dag(u)
    joint = partial_trace(post, [0, 2])
    system = partial_trace(joint, [0])
    snap = StepSnapshot(
        index=s.index + 1,
        system=system,
        incoming_env=partial_trace(joint, [1]),
        env_pair_pre=partial_trace(pre, [1, 2]),
        env_pair_post=partial_trace(post, [1, 2]),
        joint_SE_next=joint,
    )
    return CarriedState(Strategy.STRATEGY2, system, joint=joint, index=s.index + 1), snap


_STEPS = {
    Strategy.MARKOVIAN: step_markovian,
    Strategy.STRATEGY1: step_strategy1,
    Strategy.STRATEGY2: step_strategy2,
}


def run_trajectory(p, initial_system):
    """Iterate ``p.n_collisions`` collisions under ``p.strategy``.

    Deterministic: identical inputs give bit-identical snapshots.
    """
    if p.n_collisions < 1:
        raise ValueError("n_collisions must be >= 1")
    rho0 = check_density_matrix(initial_system)
    if rho0.shape != (2, 2):
        raise ValueError("the system is a single qubit")
    if p.strategy is Strategy.EXACT:
        traj, _ = run_exact(p, rho0, n_env=p.n_collisions)
        return traj
    step = _STEPS[p.strategy]
    state = initial_carried(p.strategy, rho0, p)
    traj = Trajectory(p, rho0)
    for _ in range(p.n_collisions):
        state, snap = step(state, p)
        traj.snapshots.append(snap)
    return traj


def check_exact_size(p, n_env):
    """Validate the full-chain register size; returns ``n_env`` as an int."""
    n_env = int(n_env)
    if n_env < 1:
        raise ValueError("n_env must be >= 1")
    if 1 + n_env > MAX_QUBITS:
        raise SizeError(
            f"exact register needs {1 + n_env} qubits; use n_env <= {MAX_QUBITS - 1}")
    if p.n_collisions > n_env:
        raise SizeError(
            f"n_collisions={p.n_collisions} exceeds n_env={n_env}; each unit is used "
            f"once, so use n_collisions <= {n_env}")
    return n_env


def iter_exact(p, initial_system, n_env):
    """Yield ``(snapshot, global_state)`` after each collision of the full chain.

    Qubit 0 is the system and qubit ``j`` is ``E_j``. The last collision has
    no ``E_{n_env + 1}`` to couple to, so its intra-environment swap is
    skipped; that swap never reaches the system anyway.
    """
    n_env = check_exact_size(p, n_env)
    rho0 = check_density_matrix(initial_system)
    env = p.env_thermal_state()
    register = tensor_all(rho0, *([env] * n_env))
    u_se = partial_swap(p.nu)
    u_ee = partial_swap(p.effective_epsilon)
    for i in range(1, p.n_collisions + 1):
        has_next = i + 1 <= n_env
        pair = [i, i + 1] if has_next else [i]
        pair_pre = partial_trace(register, pair)
        register = apply_two_qubit_unitary(register, u_se, (0, i))
        if has_next:
            register = apply_two_qubit_unitary(register, u_ee, (i, i + 1))
        pair_post = partial_trace(register, pair)
        if has_next:
            incoming = partial_trace(register, [i + 1])
            joint = partial_trace(register, [0, i + 1])
        else:
            pair_pre = np.kron(pair_pre, env)
            pair_post = np.kron(pair_post, env)
            incoming = env
            joint = np.kron(partial_trace(register, [0]), env)
        snap = StepSnapshot(
            index=i,
            system=partial_trace(register, [0]),
            incoming_env=incoming,
            env_pair_pre=pair_pre,
            env_pair_post=pair_post,
            joint_SE_next=joint,
        )
        yield snap, register


def run_exact(p, initial_system, n_env):
    """Full-chain run. Returns ``(trajectory, final_global_state)``."""
    rho0 = check_density_matrix(initial_system)
    traj = Trajectory(p, rho0)
    final = None
    for snap, register in iter_exact(p, rho0, n_env):
        traj.snapshots.append(snap)
        final = register
    return traj, final


def incoming_env_state(snapshot):
    return snapshot.incoming_env

