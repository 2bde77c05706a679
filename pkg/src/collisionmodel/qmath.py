"""Dense linear algebra and information functionals for small qubit registers.

States are plain ``numpy`` complex arrays of shape ``(2**k, 2**k)``. Qubit 0
is the most significant tensor factor, so for ``a (x) b`` the row index is
``i * dim(b) + j``.

All entropies are in nats.
"""

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

MAX_QUBITS = 14

TOL_HERM = 1e-10
TOL_TRACE = 1e-10
TOL_PSD = 1e-10
EIG_FLOOR = 1e-14
SUPPORT_TOL = 1e-10

# below this dimension the block search costs more than a dense solve
_BLOCK_MIN_DIM = 64

_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


class ContractError(ValueError):
    """An input violates a documented precondition (Hermiticity, realness)."""


class SizeError(ValueError):
    """A register would exceed the configured qubit cap."""


class SupportError(ValueError):
    """Relative entropy is infinite: supp(rho) is not inside supp(sigma)."""


def num_qubits(m):
    """Number of qubits of a square matrix with power-of-two dimension."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    dim = m.shape[0]
    k = dim.bit_length() - 1
    if dim < 1 or (1 << k) != dim:
        raise ValueError(f"dimension {dim} is not a power of 2")
    return k


def dag(m):
    return m.conj().T


def is_hermitian(m, tol=TOL_HERM):
    return bool(np.abs(m - dag(m)).max() <= tol)


def check_density_matrix(rho, tol_herm=TOL_HERM, tol_tr=TOL_TRACE, tol_psd=TOL_PSD):
    """Validate a density matrix and return it as a complex array.

    Raises
    ------
    ValueError
        If ``rho`` is not finite, not Hermitian, not unit trace or not PSD
        within the given tolerances.
    """
    rho = np.asarray(rho, dtype=complex)
    num_qubits(rho)
    if not np.all(np.isfinite(rho)):
        raise ValueError("density matrix has non-finite entries")
    herm = np.abs(rho - dag(rho)).max()
    if herm > tol_herm:
        raise ValueError(f"density matrix is not Hermitian (max |M - M^+| = {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol_tr:
        raise ValueError(f"density matrix trace is {tr.real:.15g}, expected 1")
    lmin = _eigvalsh(rho).min()
    if lmin < -tol_psd:
        raise ValueError(f"density matrix has negative eigenvalue {lmin:.3e}")
    return rho


def tensor_product(a, b, max_qubits=MAX_QUBITS):
    """Kronecker product ``a (x) b`` with a cap on the resulting qubit count."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    k = num_qubits(a) + num_qubits(b)
    if k > max_qubits:
        raise SizeError(f"tensor product would have {k} qubits (max {max_qubits})")
    return np.kron(a, b)


def tensor_all(*ops, max_qubits=MAX_QUBITS):
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = tensor_product(out, op, max_qubits=max_qubits)
    return out


def partial_trace(rho, keep):
    """Reduced state on the qubits listed in ``keep``.

    The output factors follow the order given in ``keep``, so
    ``partial_trace(rho, [2, 0])`` returns the ``(q2, q0)`` marginal.

    Parameters
    ----------
    rho : ndarray, shape (2**k, 2**k)
    keep : sequence of int
        Distinct qubit indices in ``0..k-1``.

    Returns
    -------
    ndarray, shape (2**len(keep), 2**len(keep))
    """
    rho = np.asarray(rho)
    k = num_qubits(rho)
    keep = [int(q) for q in keep]
    if not keep:
        raise ValueError("keep must name at least one qubit")
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate qubit in keep={keep}")
    if any(q < 0 or q >= k for q in keep):
        raise ValueError(f"keep={keep} out of range for {k} qubits")
    if 2 * k > len(_LETTERS):
        raise SizeError(f"partial trace supports at most {len(_LETTERS) // 2} qubits")
    rows = list(_LETTERS[:k])
    cols = list(_LETTERS[k:2 * k])
    for q in range(k):
        if q not in keep:
            cols[q] = rows[q]
    out = "".join(rows[q] for q in keep) + "".join(cols[q] for q in keep)
    t = np.einsum("".join(rows) + "".join(cols) + "->" + out, rho.reshape((2,) * (2 * k)))
    d = 2 ** len(keep)
    return np.ascontiguousarray(t.reshape(d, d))


def apply_two_qubit_unitary(rho, u, targets):
    """Return ``U rho U^+`` where ``U`` acts as ``u`` on ``targets`` only.

    Works on the tensor shape directly, so the cost is linear in the size of
    ``rho`` rather than cubic.
    """
    rho = np.asarray(rho, dtype=complex)
    k = num_qubits(rho)
    i, j = targets
    if i == j or not (0 <= i < k and 0 <= j < k):
        raise ValueError(f"invalid targets {targets} for {k} qubits")
    u = np.asarray(u, dtype=complex)
    t = rho.reshape((2,) * (2 * k))
    t = _contract_left(t, u, (i, j))
    t = _contract_left(t, u.conj(), (k + i, k + j))
    return t.reshape(2 ** k, 2 ** k)


def _contract_left(t, u, axes):
    t = np.moveaxis(t, axes, (0, 1))
    shape = t.shape
    t = (u @ t.reshape(4, -1)).reshape(shape)
    return np.moveaxis(t, (0, 1), axes)


def _blocks(m):
    """Index sets of the connected blocks in the nonzero pattern of ``m``."""
    rows, cols = np.nonzero(m)
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=m.shape)
    n, labels = connected_components(graph, directed=False)
    order = np.argsort(labels, kind="stable")
    return np.split(order, np.cumsum(np.bincount(labels, minlength=n))[:-1])


def _hermitian_part(m):
    return (m + dag(m)) / 2


def _eigvalsh(m):
    """Eigenvalues (ascending) of the Hermitian part of ``m``."""
    if m.shape[0] < _BLOCK_MIN_DIM:
        return np.linalg.eigvalsh(_hermitian_part(m))
    vals = [np.linalg.eigvalsh(_hermitian_part(m[np.ix_(idx, idx)])) for idx in _blocks(m)]
    return np.sort(np.concatenate(vals))


def hermitian_eig(m):
    """Eigen-decomposition of a Hermitian matrix.

    Returns
    -------
    eigenvalues : ndarray
        Real, sorted in descending order.
    eigenvectors : ndarray
        Unitary matrix whose columns match ``eigenvalues``.

    Large matrices that are exactly block diagonal up to a permutation
    (energy-conserving dynamics of diagonal states) are solved block by block.
    """
    m = np.asarray(m, dtype=complex)
    num_qubits(m)
    if not is_hermitian(m):
        raise ContractError("hermitian_eig called on a non-Hermitian matrix")
    dim = m.shape[0]
    if dim < _BLOCK_MIN_DIM:
        w, v = np.linalg.eigh(_hermitian_part(m))
    else:
        w = np.empty(dim)
        v = np.zeros((dim, dim), dtype=complex)
        pos = 0
        for idx in _blocks(m):
            bw, bv = np.linalg.eigh(_hermitian_part(m[np.ix_(idx, idx)]))
            n = len(idx)
            w[pos:pos + n] = bw
            v[idx, pos:pos + n] = bv
            pos += n
    order = np.argsort(w, kind="stable")[::-1]
    return w[order], v[:, order]


def _entropy_from_eigs(w):
    w = w[w > EIG_FLOOR]
    return float(-np.sum(w * np.log(w)))


def von_neumann_entropy(rho):
    """``-tr(rho log rho)`` with eigenvalues below ``EIG_FLOOR`` dropped."""
    return _entropy_from_eigs(_eigvalsh(np.asarray(rho, dtype=complex)))


def relative_entropy(rho, sigma):
    """Quantum relative entropy ``S(rho || sigma)``.

    Raises
    ------
    SupportError
        If ``rho`` carries weight above ``SUPPORT_TOL`` on an eigenvector of
        ``sigma`` whose eigenvalue is below ``EIG_FLOOR``.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise ValueError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    ws, vs = hermitian_eig(sigma)
    # populations of rho in the eigenbasis of sigma
    weights = np.real(np.sum(vs.conj() * (rho @ vs), axis=0))
    null = ws < EIG_FLOOR
    if np.any(weights[null] > SUPPORT_TOL):
        raise SupportError("support of rho is not contained in support of sigma")
    cross = float(np.sum(weights[~null] * np.log(ws[~null])))
    return -von_neumann_entropy(rho) - cross


def trace_distance(rho, sigma):
    """Half the trace norm of ``rho - sigma``."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise ValueError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    return 0.5 * float(np.abs(_eigvalsh(rho - sigma)).sum())


def mutual_information(rho, split):
    """``S(A) + S(B) - S(AB)`` where ``A`` is the qubit list ``split``."""
    rho = np.asarray(rho, dtype=complex)
    k = num_qubits(rho)
    part_a = sorted(int(q) for q in split)
    part_b = [q for q in range(k) if q not in part_a]
    if not part_a or not part_b:
        raise ValueError(f"split {split} does not bipartition {k} qubits")
    return (von_neumann_entropy(partial_trace(rho, part_a))
            + von_neumann_entropy(partial_trace(rho, part_b))
            - von_neumann_entropy(rho))


def expectation(obs, rho):
    """Real expectation value ``tr(obs rho)`` of a Hermitian observable."""
    obs = np.asarray(obs, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if obs.shape != rho.shape:
        raise ValueError(f"shape mismatch {obs.shape} vs {rho.shape}")
    if not is_hermitian(obs):
        raise ContractError("observable is not Hermitian")
    val = np.sum(obs * rho.T)
    if abs(val.imag) > 1e-8:
        raise ContractError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)
