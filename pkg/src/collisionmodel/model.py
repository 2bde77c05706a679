"""Physical setup: Hamiltonians, Gibbs states, partial-SWAP couplings.

Conventions
-----------
* ``hbar = k_B = 1``; temperatures are in energy units.
* Basis vector 0 is the ``+1`` eigenvector of ``sigma_z``. With
  ``H = omega * sigma_z`` this is the *excited* level, so a cold qubit is
  close to ``diag(0, 1)``.
* Inside a collision register qubit 0 is the system, qubit 1 the environment
  unit it collides with (``E_i``) and qubit 2 the next unit (``E_{i+1}``).
"""

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from .qmath import tensor_all

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)

SWAP = np.array([[1, 0, 0, 0],
                 [0, 0, 1, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1]], dtype=complex)

HALF_PI = math.pi / 2


class Strategy(str, enum.Enum):
    MARKOVIAN = "markovian"
    STRATEGY1 = "strategy1"
    STRATEGY2 = "strategy2"
    EXACT = "exact"


@dataclass(frozen=True)
class ModelParams:
    """Physical configuration of one collision-model run.

    ``nu`` and ``epsilon`` are absolute angles in radians. ``T_S`` may be
    ``math.inf`` (maximally mixed initial system).
    """

    T_S: float = 0.1
    T_E: float = 1.0
    omega_S: float = 1.0
    omega_E: float = 1.0
    nu: float = 0.05 * HALF_PI
    epsilon: float = 0.95 * HALF_PI
    n_collisions: int = 2000
    strategy: Strategy = Strategy.STRATEGY2

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        if not self.T_S > 0:
            raise ValueError(f"T_S must be > 0, got {self.T_S}")
        if not (self.T_E > 0 and math.isfinite(self.T_E)):
            raise ValueError(f"T_E must be finite and > 0, got {self.T_E}")
        for name in ("omega_S", "omega_E"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        for name in ("nu", "epsilon"):
            val = getattr(self, name)
            if not 0.0 <= val <= HALF_PI + 1e-12:
                raise ValueError(f"{name} must lie in [0, pi/2], got {val}")
        if int(self.n_collisions) != self.n_collisions or self.n_collisions < 1:
            raise ValueError(f"n_collisions must be a positive integer, got {self.n_collisions}")

    @property
    def beta_S(self):
        return 1.0 / self.T_S

    @property
    def beta_E(self):
        return 1.0 / self.T_E

    @property
    def effective_epsilon(self):
        """Intra-environment angle actually used; zero in the Markovian limit."""
        return 0.0 if self.strategy is Strategy.MARKOVIAN else self.epsilon

    def with_(self, **changes):
        return replace(self, **changes)

    def system_thermal_state(self):
        return thermal_state(self.beta_S, self.omega_S) if self.beta_S > 0 else I2 / 2

    def env_thermal_state(self):
        return thermal_state(self.beta_E, self.omega_E)

    def as_dict(self):
        return {
            "T_S": self.T_S,
            "T_E": self.T_E,
            "omega_S": self.omega_S,
            "omega_E": self.omega_E,
            "nu": self.nu,
            "epsilon": self.epsilon,
            "n_collisions": int(self.n_collisions),
            "strategy": self.strategy.value,
        }


def qubit_hamiltonian(omega):
    """``omega * sigma_z``; the level splitting is ``2 * omega``."""
    return omega * SIGMA_Z


def thermal_state(beta, omega):
    """Gibbs state of ``omega * sigma_z`` at inverse temperature ``beta``.

    ``beta = inf`` returns the ground-state projector ``diag(0, 1)`` (for
    ``omega > 0``) without evaluating overflowing exponentials.
    """
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if omega == 0:
        return I2 / 2
    if math.isinf(beta):
        p = np.array([0.0, 1.0]) if omega > 0 else np.array([1.0, 0.0])
    else:
        p = expit(np.array([-2.0, 2.0]) * beta * omega)
        p = p / p.sum()
    return np.diag(p).astype(complex)


def partial_swap(theta):
    """``cos(theta) * 1 + i sin(theta) * SWAP`` on two qubits."""
    return math.cos(theta) * np.eye(4, dtype=complex) + 1j * math.sin(theta) * SWAP


def embed_unitary(u, k, targets):
    """Full ``2**k`` matrix acting as the two-qubit ``u`` on ``targets``."""
    i, j = targets
    if i == j or not (0 <= i < k and 0 <= j < k):
        raise ValueError(f"invalid targets {targets} for {k} qubits")
    dim = 2 ** k
    eye = np.eye(dim, dtype=complex).reshape((2,) * k + (dim,))
    t = np.moveaxis(eye, (i, j), (0, 1))
    shape = t.shape
    t = (np.asarray(u, dtype=complex) @ t.reshape(4, -1)).reshape(shape)
    return np.moveaxis(t, (0, 1), (i, j)).reshape(dim, dim)


def step_unitary(params):
    """Composed one-step unitary on ``(S, E_i, E_{i+1})``: U_EE(eps) U_SE(nu)."""
    u_se = embed_unitary(partial_swap(params.nu), 3, (0, 1))
    u_ee = embed_unitary(partial_swap(params.effective_epsilon), 3, (1, 2))
    return u_ee @ u_se


def register_hamiltonian(omegas):
    """Sum of single-qubit ``omega * sigma_z`` terms, one per qubit."""
    k = len(omegas)
    h = np.zeros((2 ** k, 2 ** k), dtype=complex)
    for q, w in enumerate(omegas):
        ops = [I2] * k
        ops[q] = qubit_hamiltonian(w)
        h += tensor_all(*ops)
    return h


def check_energy_conservation(params):
    """Max-entry norm of ``[U_step, H_S + H_Ei + H_Ei+1]``.

    Zero (to rounding) means every collision step is a thermal operation.
    """
    u = step_unitary(params)
    h = register_hamiltonian([params.omega_S, params.omega_E, params.omega_E])
    return float(np.abs(u @ h - h @ u).max())


def bloch_state(r):
    """``(1 + r . sigma) / 2`` for a Bloch vector with ``|r| <= 1``."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValueError(f"Bloch vector must have 3 components, got shape {r.shape}")
    if np.linalg.norm(r) > 1 + 1e-12:
        raise ValueError(f"Bloch vector norm {np.linalg.norm(r):.6g} exceeds 1")
    return 0.5 * (I2 + r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z)

