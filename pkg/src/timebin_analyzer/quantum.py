"""Dense complex linear algebra for small bipartite quantum systems.

Operators live on a 2-dimensional polarization factor (Alice, basis
{H, V}) tensored with a 2- or 3-dimensional time-bin factor (Bob).  The
3-dimensional Bob basis is {no photon, E, L} with the vacuum first.
All matrices are plain complex numpy arrays; :class:`DensityMatrix` is a
thin validated wrapper that remembers the factor dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-9

ALICE_BASIS = ("H", "V")
BOB_QUBIT_BASIS = ("E", "L")
BOB_LOSSY_BASIS = ("none", "E", "L")

IDENTITY_2 = np.eye(2, dtype=complex)
IDENTITY_3 = np.eye(3, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class NotHermitianError(ValueError):
    """Input matrix is not Hermitian within tolerance."""


class DimensionMismatchError(ValueError):
    """Operator dimensions do not match."""


def is_hermitian(m, tol=HERMITICITY_TOL):
    m = np.asarray(m)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol * max(1.0, np.max(np.abs(m))))


def tensor(a, b):
    """Kronecker product with Alice's factor leftmost."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_transpose(m, dim_a=2, dim_b=None):
    """Transpose the first (Alice) tensor factor of a bipartite operator.

    The operation is an involution and preserves trace and Hermiticity.
    """
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    if m.shape != (n, n):
        raise DimensionMismatchError(f"expected a square matrix, got {m.shape}")
    if dim_b is None:
        dim_b, rem = divmod(n, dim_a)
        if rem:
            raise DimensionMismatchError(f"dim_a={dim_a} does not divide size {n}")
    if dim_a * dim_b != n:
        raise DimensionMismatchError(
            f"dim_a*dim_b = {dim_a * dim_b} does not match size {n}"
        )
    blocks = m.reshape(dim_a, dim_b, dim_a, dim_b)
    return blocks.transpose(2, 1, 0, 3).reshape(n, n)


def eig_hermitian(m, tol=1e-10):
    """Eigendecomposition of a Hermitian matrix.

    Returns eigenvalues in ascending order and the matching orthonormal
    eigenvector columns.  Raises :class:`NotHermitianError` when the
    input is not Hermitian within ``tol`` (relative to its magnitude).
    """
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, tol):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(m)
    return w, v


def min_eigenvalue(m):
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(np.linalg.eigvalsh(np.asarray(m, dtype=complex))[0])


def expectation(rho, obs):
    """Tr(rho * obs) for Hermitian rho and obs; returns the real part.

    The imaginary residue must be below 1e-10 and is discarded after the
    check.
    """
    rho = np.asarray(rho, dtype=complex)
    obs = np.asarray(obs, dtype=complex)
    if rho.shape != obs.shape:
        raise DimensionMismatchError(
            f"state shape {rho.shape} does not match observable shape {obs.shape}"
        )
    val = np.trace(rho @ obs)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(f"expectation value has imaginary residue {val.imag}")
    return float(val.real)


@dataclass
class DensityMatrix:
    """Trace-one positive operator on a 2 x d bipartite space (d = 2 or 3)."""

    matrix: np.ndarray
    dim_a: int = 2
    dim_b: int = 2

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        n = self.dim_a * self.dim_b
        if self.matrix.shape != (n, n):
            raise DimensionMismatchError(
                f"matrix shape {self.matrix.shape} does not match dims "
                f"({self.dim_a}, {self.dim_b})"
            )

    def validate(self, psd_tol=PSD_TOL):
        if not is_hermitian(self.matrix, HERMITICITY_TOL):
            raise NotHermitianError("density matrix is not Hermitian")
        tr = np.trace(self.matrix).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr} differs from 1")
        if min_eigenvalue(self.matrix) < -psd_tol:
            raise ValueError("density matrix has a negative eigenvalue")
        return self

    def partial_transpose(self):
        return partial_transpose(self.matrix, self.dim_a, self.dim_b)

    def expectation(self, obs):
        return expectation(self.matrix, obs)

    def alice_marginal(self):
        blocks = self.matrix.reshape(self.dim_a, self.dim_b, self.dim_a, self.dim_b)
        return np.einsum("ibjb->ij", blocks)

    def bob_marginal(self):
        blocks = self.matrix.reshape(self.dim_a, self.dim_b, self.dim_a, self.dim_b)
        return np.einsum("aiaj->ij", blocks)


def operator_to_dict(m, dim_a, dim_b):
    """Serialize an operator to the {dim_a, dim_b, re, im} JSON schema."""
    m = np.asarray(m, dtype=complex)
    return {
        "dim_a": int(dim_a),
        "dim_b": int(dim_b),
        "re": m.real.tolist(),
        "im": m.imag.tolist(),
    }


def operator_from_dict(d):
    """Deserialize an operator from the {dim_a, dim_b, re, im} JSON schema."""
    m = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
    n = int(d["dim_a"]) * int(d["dim_b"])
    if m.shape != (n, n):
        raise DimensionMismatchError(
            f"serialized shape {m.shape} does not match dims "
            f"({d['dim_a']}, {d['dim_b']})"
        )
    return m


def density_matrix_to_dict(dm: DensityMatrix):
    return operator_to_dict(dm.matrix, dm.dim_a, dm.dim_b)


def density_matrix_from_dict(d):
    return DensityMatrix(operator_from_dict(d), int(d["dim_a"]), int(d["dim_b"]))


def hermitian_basis(dim):
    """Orthonormal real basis of the Hermitian dim x dim matrices.

    Ordered as: diagonal unit matrices, then for each i<j the symmetric
    pair (E_ij + E_ji)/sqrt(2), then the antisymmetric i(E_ij - E_ji)/sqrt(2).
    Orthonormal under the Frobenius inner product Tr(A B).
    """
    basis = []
    for i in range(dim):
        m = np.zeros((dim, dim), dtype=complex)
        m[i, i] = 1.0
        basis.append(m)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(dim):
        for j in range(i + 1, dim):
            m = np.zeros((dim, dim), dtype=complex)
            m[i, j] = inv_sqrt2
            m[j, i] = inv_sqrt2
            basis.append(m)
    for i in range(dim):
        for j in range(i + 1, dim):
            m = np.zeros((dim, dim), dtype=complex)
            m[i, j] = -1j * inv_sqrt2
            m[j, i] = 1j * inv_sqrt2
            basis.append(m)
    return basis


def vec_hermitian(m, basis):
    """Real coordinates of a Hermitian matrix in an orthonormal basis."""
    m = np.asarray(m, dtype=complex)
    return np.array([np.trace(b.conj().T @ m).real for b in basis])


def unvec_hermitian(x, basis):
    """Hermitian matrix from its real coordinates in an orthonormal basis."""
    m = np.zeros_like(basis[0])
    for c, b in zip(x, basis):
        m = m + c * b
    return m
