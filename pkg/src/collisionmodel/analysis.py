"""Observables computed from trajectories.

Array conventions: per-collision arrays have length ``N`` (entry ``j`` is
collision ``j + 1``); cumulative arrays have length ``N + 1`` and start at 0
for the state before the first collision.

Entropy production is measured against the environment Gibbs state
``rho_* = thermal(beta_E, omega_E)``, which every strategy leaves invariant
when the qubits are resonant. Heat terms are weighted by ``beta_E``.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .engine import check_exact_size, iter_exact
from .model import register_hamiltonian
from .qmath import (
    expectation, mutual_information, partial_trace, relative_entropy,
    tensor_all, trace_distance, von_neumann_entropy,
)

logger = logging.getLogger(__name__)


@dataclass
class BLPResult:
    pair_distances: np.ndarray
    increments: np.ndarray
    measure: float


@dataclass
class EntropyLedger:
    per_step_sigma: np.ndarray
    cumulative_sigma: np.ndarray
    relent_to_fixed_point: np.ndarray
    delta_S_system: np.ndarray
    heat_two_qubit: np.ndarray
    heat_naive: np.ndarray
    rw_terms: tuple = None


@dataclass
class ExactDecomposition:
    """Three estimators of the cumulative entropy production on an exact run.

    All arrays are per collision (length ``N``).
    """

    mutual_info: np.ndarray
    env_relent: np.ndarray
    sigma_rw: np.ndarray
    sigma_telescoping: np.ndarray
    sigma_heat: np.ndarray
    discrepancy: np.ndarray
    global_entropy: np.ndarray


def trace_distances(states_a, states_b):
    return np.array([trace_distance(a, b) for a, b in zip(states_a, states_b)])


def trace_distance_to_fixed_point(traj):
    fp = traj.params.env_thermal_state()
    return np.array([trace_distance(s, fp) for s in traj.systems])


def blp_measure(traj_a, traj_b):
    """Sum of trace-distance revivals between two system trajectories.

    The state pair is whatever the caller ran; no optimisation over pairs.
    """
    if traj_a.params != traj_b.params:
        raise ValueError("BLP trajectories must share the same parameters")
    if len(traj_a) != len(traj_b):
        raise ValueError("BLP trajectories must have equal length")
    dist = trace_distances(traj_a.systems, traj_b.systems)
    inc = np.diff(dist)
    return BLPResult(dist, inc, float(inc[inc > 0].sum()))


def entropy_production_step(prev_system, next_system, fixed_point):
    return relative_entropy(prev_system, fixed_point) - relative_entropy(next_system, fixed_point)


def heat_flux_step(snapshot, p):
    """``beta_E`` times the energy gained by the pair ``(E_i, E_{i+1})``."""
    h = register_hamiltonian([p.omega_E, p.omega_E])
    return p.beta_E * expectation(h, snapshot.env_pair_post - snapshot.env_pair_pre)


def heat_flux_naive(snapshot, p):
    """``beta_E`` times the energy gained by ``E_i`` alone.

    Misses the energy ``E_i`` hands to ``E_{i+1}``, so it is wrong whenever
    the intra-environment coupling is on. Kept as a diagnostic.
    """
    h = register_hamiltonian([p.omega_E])
    pre = partial_trace(snapshot.env_pair_pre, [0])
    post = partial_trace(snapshot.env_pair_post, [0])
    return p.beta_E * expectation(h, post - pre)


def entropy_ledger(traj):
    p = traj.params
    fp = p.env_thermal_state()
    systems = traj.systems
    relent = np.array([relative_entropy(s, fp) for s in systems])
    per_step = relent[:-1] - relent[1:]
    entropies = np.array([von_neumann_entropy(s) for s in systems])
    return EntropyLedger(
        per_step_sigma=per_step,
        cumulative_sigma=np.concatenate([[0.0], np.cumsum(per_step)]),
        relent_to_fixed_point=relent,
        delta_S_system=np.diff(entropies),
        heat_two_qubit=np.array([heat_flux_step(s, p) for s in traj.snapshots]),
        heat_naive=np.array([heat_flux_naive(s, p) for s in traj.snapshots]),
    )


def entropy_rate(ledger):
    """Discrete rate: the entropy produced in each collision."""
    return np.array(ledger.per_step_sigma, copy=True)


def sigma_from_relative_entropy(traj):
    """Cumulative ``S(rho_0 || rho_*) - S(rho_i || rho_*)``."""
    fp = traj.params.env_thermal_state()
    relent = np.array([relative_entropy(s, fp) for s in traj.systems])
    return relent[0] - relent


def _sigma_from_flux(traj, flux):
    entropies = np.array([von_neumann_entropy(s) for s in traj.systems])
    heat = np.array([flux(s, traj.params) for s in traj.snapshots])
    return (entropies - entropies[0]) + np.concatenate([[0.0], np.cumsum(heat)])


def sigma_from_heat(traj):
    """Cumulative system entropy change plus two-qubit entropy flux."""
    return _sigma_from_flux(traj, heat_flux_step)


def sigma_naive(traj):
    """Same as :func:`sigma_from_heat` with the single-qubit flux."""
    return _sigma_from_flux(traj, heat_flux_naive)


def rw_decomposition(global_state, env_initial, split=(0,)):
    """Correlation and environment-displacement terms of the entropy production.

    Parameters
    ----------
    global_state : ndarray
        System plus environment, never partially traced during evolution.
    env_initial : ndarray
        Initial state of the environment qubits (the complement of ``split``).
    split : sequence of int
        System qubits.

    Returns
    -------
    mutual_info, env_relent : float
    """
    k = int(np.log2(global_state.shape[0]))
    env_qubits = [q for q in range(k) if q not in split]
    env_now = partial_trace(global_state, env_qubits)
    return mutual_information(global_state, split), relative_entropy(env_now, env_initial)


def _register_energy_diag(k, omegas, skip=()):
    # diagonal of sum_q omega_q sigma_z^(q); bit 0 of each qubit is the +1 level
    idx = np.arange(2 ** k)
    diag = np.zeros(2 ** k)
    for q, w in enumerate(omegas):
        if q in skip:
            continue
        bit = (idx >> (k - 1 - q)) & 1
        diag += w * (1 - 2 * bit)
    return diag


def exact_decomposition(p, initial_system, n_env):
    """Run the full chain and evaluate all three entropy-production estimators."""
    n_env = check_exact_size(p, n_env)
    fp = p.env_thermal_state()
    env0 = tensor_all(*([fp] * n_env))
    k = n_env + 1
    h_env = _register_energy_diag(k, [p.omega_S] + [p.omega_E] * n_env, skip=(0,))
    rho0 = np.asarray(initial_system, dtype=complex)
    e_env0 = float(np.dot(h_env, np.real(np.diag(tensor_all(rho0, env0)))))
    s0 = von_neumann_entropy(rho0)
    rel0 = relative_entropy(rho0, fp)

    rows = []
    for snap, register in iter_exact(p, rho0, n_env):
        mi, rel_env = rw_decomposition(register, env0, split=(0,))
        e_env = float(np.dot(h_env, np.real(np.diag(register))))
        d_entropy = von_neumann_entropy(snap.system) - s0
        sigma_heat = d_entropy + p.beta_E * (e_env - e_env0)
        sigma_tel = rel0 - relative_entropy(snap.system, fp)
        rows.append((mi, rel_env, mi + rel_env, sigma_tel, sigma_heat,
                     von_neumann_entropy(register)))
        logger.debug("exact collision %d done", snap.index)
    a = np.array(rows).reshape(-1, 6)
    est = a[:, 2:5]
    return ExactDecomposition(
        mutual_info=a[:, 0],
        env_relent=a[:, 1],
        sigma_rw=a[:, 2],
        sigma_telescoping=a[:, 3],
        sigma_heat=a[:, 4],
        discrepancy=est.max(axis=1) - est.min(axis=1),
        global_entropy=a[:, 5],
    )


def summarize(traj, ledger=None):
    """Scalar summary shared by the simulate and sweep reports."""
    ledger = ledger or entropy_ledger(traj)
    return {
        "min_sigma_rate": float(ledger.per_step_sigma.min()),
        "argmin_sigma_rate": int(ledger.per_step_sigma.argmin()) + 1,
        "sigma_final": float(ledger.cumulative_sigma[-1]),
        "final_rate": float(ledger.per_step_sigma[-1]),
    }
