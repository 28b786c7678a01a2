import json
import math

import numpy as np
import pytest

from timebin_analyzer import quantum as q
from timebin_analyzer.measurement import AnalyzerEfficiencies, alice_povm, bob_povm

from oracles import (
    jacobi_eigvalsh,
    kron_loops,
    partial_transpose_loops,
    random_density_matrix,
)


def random_hermitian(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return m + m.conj().T


class TestTensor:
    def test_identity_product(self):
        assert np.array_equal(q.tensor(np.eye(2), np.eye(3)), np.eye(6))

    def test_single_entry_product(self):
        m = q.tensor(alice_povm()["H"], bob_povm(AnalyzerEfficiencies(1, 1))["E"])
        expected = np.zeros((6, 6))
        expected[1, 1] = 0.25
        assert np.max(np.abs(m - expected)) < 1e-15

    def test_mixed_product_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            a, c = random_hermitian(rng, 2), random_hermitian(rng, 2)
            b, d = random_hermitian(rng, 3), random_hermitian(rng, 3)
            lhs = q.tensor(a, b) @ q.tensor(c, d)
            rhs = q.tensor(a @ c, b @ d)
            assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_against_loop_oracle(self):
        rng = np.random.default_rng(8)
        a, b = random_hermitian(rng, 2), random_hermitian(rng, 3)
        assert np.max(np.abs(q.tensor(a, b) - kron_loops(a, b))) < 1e-13


def bell_state_2x3():
    psi = np.zeros(6, dtype=complex)
    psi[1] = 1 / math.sqrt(2)  # |H, E>
    psi[5] = 1 / math.sqrt(2)  # |V, L>
    return np.outer(psi, psi.conj())


class TestPartialTranspose:
    def test_product_state_stays_psd(self):
        rng = np.random.default_rng(9)
        rho_a = random_density_matrix(rng, 2)
        rho_b = random_density_matrix(rng, 3)
        pt = q.partial_transpose(q.tensor(rho_a, rho_b), 2, 3)
        expected = q.tensor(rho_a.T, rho_b)
        assert np.max(np.abs(pt - expected)) < 1e-13
        assert q.min_eigenvalue(pt) > -1e-12

    def test_bell_minimum_eigenvalue(self):
        pt = q.partial_transpose(bell_state_2x3(), 2, 3)
        assert q.min_eigenvalue(pt) == pytest.approx(-0.5, abs=1e-12)
        assert jacobi_eigvalsh(pt)[0] == pytest.approx(-0.5, abs=1e-9)

    def test_trace_preserved_and_involution(self):
        rng = np.random.default_rng(10)
        rho = random_density_matrix(rng, 6)
        pt = q.partial_transpose(rho, 2, 3)
        assert np.trace(pt) == pytest.approx(np.trace(rho), abs=1e-14)
        assert np.array_equal(q.partial_transpose(pt, 2, 3), rho)

    def test_against_loop_oracle(self):
        rng = np.random.default_rng(11)
        for dims in ((2, 2), (2, 3)):
            m = random_hermitian(rng, dims[0] * dims[1])
            assert np.max(
                np.abs(q.partial_transpose(m, *dims) - partial_transpose_loops(m, *dims))
            ) < 1e-14

    def test_pure_state_pt_spectrum_structure(self):
        # For a pure state with Schmidt coefficients s_i the partial
        # transpose has eigenvalues {s_i^2} plus pairs +/- s_i s_j.
        rng = np.random.default_rng(12)
        for _ in range(20):
            psi = rng.normal(size=6) + 1j * rng.normal(size=6)
            psi /= np.linalg.norm(psi)
            rho = np.outer(psi, psi.conj())
            s = np.linalg.svd(psi.reshape(2, 3), compute_uv=False)
            expected = [s[0] ** 2, s[1] ** 2, s[0] * s[1], -s[0] * s[1], 0.0, 0.0]
            w = np.linalg.eigvalsh(q.partial_transpose(rho, 2, 3))
            assert np.allclose(np.sort(w), np.sort(expected), atol=1e-10)


class TestEigHermitian:
    def test_diagonal(self):
        w, _ = q.eig_hermitian(np.diag([3.0, -1.0, 2.0]).astype(complex))
        assert np.allclose(w, [-1.0, 2.0, 3.0])

    def test_pauli_x(self):
        w, _ = q.eig_hermitian(q.PAULI_X)
        assert np.allclose(w, [-1.0, 1.0])

    def test_trace_identity_on_random(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            m = random_hermitian(rng, 6)
            w, _ = q.eig_hermitian(m)
            assert np.sum(w) == pytest.approx(np.trace(m).real, abs=1e-10)

    def test_reconstruction_and_orthonormality(self):
        rng = np.random.default_rng(14)
        m = random_hermitian(rng, 6)
        w, v = q.eig_hermitian(m)
        rebuilt = (v * w) @ v.conj().T
        assert np.linalg.norm(rebuilt - m) <= 1e-10 * np.linalg.norm(m)
        assert np.max(np.abs(v.conj().T @ v - np.eye(6))) <= 1e-10

    def test_matches_jacobi_oracle(self):
        rng = np.random.default_rng(15)
        for _ in range(5):
            m = random_hermitian(rng, 6)
            w, _ = q.eig_hermitian(m)
            assert np.allclose(w, jacobi_eigvalsh(m), atol=1e-8)

    def test_rejects_non_hermitian(self):
        with pytest.raises(q.NotHermitianError):
            q.eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_psd_inputs(self):
        rng = np.random.default_rng(16)
        for _ in range(20):
            rho = random_density_matrix(rng, 6)
            w, _ = q.eig_hermitian(rho)
            assert w[0] >= -1e-10


class TestExpectation:
    def test_identity(self):
        assert q.expectation(np.eye(6) / 6.0, np.eye(6)) == pytest.approx(1.0)

    def test_lossless_coincidence(self):
        rho = np.zeros((6, 6), dtype=complex)
        rho[1, 1] = 1.0  # |H, E>
        obs = q.tensor(alice_povm()["H"], bob_povm(AnalyzerEfficiencies(1, 1))["E"])
        assert q.expectation(rho, obs) == pytest.approx(0.25)

    def test_linearity_over_mixtures(self):
        rng = np.random.default_rng(17)
        obs = random_hermitian(rng, 6)
        r1 = random_density_matrix(rng, 6)
        r2 = random_density_matrix(rng, 6)
        for lam in (0.0, 0.3, 0.75, 1.0):
            mixed = lam * r1 + (1 - lam) * r2
            direct = q.expectation(mixed, obs)
            combo = lam * q.expectation(r1, obs) + (1 - lam) * q.expectation(r2, obs)
            assert direct == pytest.approx(combo, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(q.DimensionMismatchError):
            q.expectation(np.eye(4) / 4, np.eye(6))


class TestDensityMatrix:
    def test_validation_passes(self):
        q.DensityMatrix(bell_state_2x3(), 2, 3).validate()

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            q.DensityMatrix(2 * bell_state_2x3(), 2, 3).validate()

    def test_rejects_negative(self):
        m = np.diag([1.5, -0.5, 0, 0, 0, 0]).astype(complex)
        with pytest.raises(ValueError):
            q.DensityMatrix(m, 2, 3).validate()

    def test_marginals(self):
        rng = np.random.default_rng(18)
        rho_a = random_density_matrix(rng, 2)
        rho_b = random_density_matrix(rng, 3)
        dm = q.DensityMatrix(q.tensor(rho_a, rho_b), 2, 3)
        assert np.allclose(dm.alice_marginal(), rho_a, atol=1e-13)
        assert np.allclose(dm.bob_marginal(), rho_b, atol=1e-13)


class TestSerialization:
    def test_round_trip(self):
        rng = np.random.default_rng(19)
        m = random_hermitian(rng, 6)
        payload = json.dumps(q.operator_to_dict(m, 2, 3))
        back = q.operator_from_dict(json.loads(payload))
        assert np.allclose(back, m, atol=0)

    def test_density_matrix_round_trip(self):
        dm = q.DensityMatrix(bell_state_2x3(), 2, 3)
        back = q.density_matrix_from_dict(q.density_matrix_to_dict(dm))
        assert np.array_equal(back.matrix, dm.matrix)
        assert (back.dim_a, back.dim_b) == (2, 3)

    def test_shape_mismatch_rejected(self):
        d = q.operator_to_dict(np.eye(6), 2, 3)
        d["dim_b"] = 2
        with pytest.raises(q.DimensionMismatchError):
            q.operator_from_dict(d)


class TestHermitianBasis:
    def test_orthonormal_and_complete(self):
        basis = q.hermitian_basis(6)
        assert len(basis) == 36
        gram = np.array(
            [[np.trace(a.conj().T @ b).real for b in basis] for a in basis]
        )
        assert np.max(np.abs(gram - np.eye(36))) < 1e-14

    def test_vec_round_trip(self):
        rng = np.random.default_rng(20)
        basis = q.hermitian_basis(6)
        m = random_hermitian(rng, 6)
        x = q.vec_hermitian(m, basis)
        assert np.max(np.abs(q.unvec_hermitian(x, basis) - m)) < 1e-13
