"""Linear-algebra kernel tests against closed-form and dense-inverse oracles."""
import numpy as np
import pytest

from vibsense import (
    DimensionMismatch,
    NotPositiveDefinite,
    SingularBlock,
    factorize,
    pencil_eigenvalues,
    schur_complement_inverse,
    sym_generalized_eig,
)


def random_spd(n, rng, spread=10.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.exp(rng.uniform(0, np.log(spread), n))
    return q @ np.diag(d) @ q.T


class TestFactorize:
    def test_identity(self):
        f = factorize(np.eye(3))
        np.testing.assert_allclose(f.solve(np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])

    def test_diagonal(self):
        f = factorize(np.diag([2.0, 4.0]))
        np.testing.assert_allclose(f.solve(np.array([2.0, 4.0])), [1.0, 1.0])

    def test_2x2_closed_form(self):
        # inverse of [[4,1],[1,2]] is [[2,-1],[-1,4]]/7
        f = factorize(np.array([[4.0, 1.0], [1.0, 2.0]]))
        np.testing.assert_allclose(f.solve(np.array([1.0, 0.0])), [2 / 7, -1 / 7], atol=1e-14)

    def test_block_rhs(self):
        a = np.array([[4.0, 1.0], [1.0, 2.0]])
        f = factorize(a)
        np.testing.assert_allclose(a @ f.solve(np.eye(2)), np.eye(2), atol=1e-14)

    @pytest.mark.parametrize("n", [2, 7, 23, 50])
    def test_residual_property(self, n):
        rng = np.random.default_rng(n)
        for _ in range(5):
            a = random_spd(n, rng, spread=1e4)
            b = rng.standard_normal(n)
            x = factorize(a).solve(b)
            assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)

    def test_not_square(self):
        with pytest.raises(DimensionMismatch):
            factorize(np.ones((2, 3)))

    def test_singular(self):
        with pytest.raises(NotPositiveDefinite):
            factorize(np.diag([1.0, 0.0]))

    def test_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            factorize(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_near_singular_pivot(self):
        with pytest.raises(NotPositiveDefinite):
            factorize(np.diag([1.0, 1e-15]))

    def test_solve_dimension_mismatch(self):
        f = factorize(np.eye(3))
        with pytest.raises(DimensionMismatch):
            f.solve(np.ones(4))


class TestGeneralizedEig:
    def test_identity_pair(self):
        gamma, _ = sym_generalized_eig(np.eye(2), np.eye(2), 2)
        np.testing.assert_allclose(gamma, [1.0, 1.0])

    def test_diagonal(self):
        gamma, phi = sym_generalized_eig(np.diag([1.0, 4.0]), np.eye(2), 2)
        np.testing.assert_allclose(gamma, [1.0, 4.0])
        np.testing.assert_allclose(np.abs(phi), np.eye(2), atol=1e-14)

    def test_characteristic_polynomial_oracle(self):
        k = np.array([[2.0, -1.0], [-1.0, 1.0]])
        gamma, _ = sym_generalized_eig(k, np.eye(2), 2)
        expected = np.sort(np.roots([1.0, -3.0, 1.0]))  # lambda^2 - 3 lambda + 1
        np.testing.assert_allclose(gamma, expected, rtol=1e-12)
        np.testing.assert_allclose(gamma, [(3 - np.sqrt(5)) / 2, (3 + np.sqrt(5)) / 2])

    @pytest.mark.parametrize("n,count", [(6, 3), (12, 12), (30, 5)])
    def test_residual_and_orthonormality(self, n, count):
        rng = np.random.default_rng(n * 7 + count)
        k = random_spd(n, rng, spread=1e5)
        m = random_spd(n, rng, spread=100.0)
        gamma, phi = sym_generalized_eig(k, m, count)
        assert np.all(np.diff(gamma) >= -1e-12 * abs(gamma[-1]))
        np.testing.assert_allclose(phi.T @ m @ phi, np.eye(count), atol=1e-9)
        for i in range(count):
            res = np.linalg.norm(k @ phi[:, i] - gamma[i] * (m @ phi[:, i]))
            assert res <= 1e-8 * np.linalg.norm(k, 2) * np.linalg.norm(phi[:, i])

    def test_mass_not_spd(self):
        with pytest.raises(NotPositiveDefinite):
            sym_generalized_eig(np.eye(2), np.diag([1.0, -1.0]), 1)

    def test_count_out_of_range(self):
        with pytest.raises(ValueError):
            sym_generalized_eig(np.eye(2), np.eye(2), 3)

    def test_pencil_eigenvalues_match(self):
        rng = np.random.default_rng(5)
        k = random_spd(8, rng, spread=1e6)
        m = random_spd(8, rng)
        gamma, _ = sym_generalized_eig(k, m, 8)
        np.testing.assert_allclose(pencil_eigenvalues(k, m), gamma, rtol=1e-8)
        np.testing.assert_allclose(pencil_eigenvalues(k, m, 3), gamma[:3], rtol=1e-8)


class TestSchurComplementInverse:
    def test_decoupled_blocks(self):
        kmm = np.array([[4.0, 1.0], [1.0, 2.0]])
        h = schur_complement_inverse(kmm, np.zeros((2, 3)), np.eye(3))
        np.testing.assert_allclose(h, np.linalg.inv(kmm), atol=1e-12)

    def test_2x2_dense_inverse_oracle(self):
        # full matrix [[4,1],[1,2]], measured block {first}: 4 - 1*(1/2)*1 = 3.5
        h = schur_complement_inverse(
            np.array([[4.0]]), np.array([[1.0]]), np.array([[2.0]])
        )
        np.testing.assert_allclose(h, [[1 / 3.5]])

    @pytest.mark.parametrize("seed", range(5))
    def test_equals_block_of_full_inverse(self, seed):
        rng = np.random.default_rng(seed)
        a = random_spd(5, rng, spread=1e3)
        nm = 2
        h = schur_complement_inverse(a[:nm, :nm], a[:nm, nm:], a[nm:, nm:])
        expected = np.linalg.inv(a)[:nm, :nm]
        np.testing.assert_allclose(h, expected, rtol=1e-9, atol=1e-9 * np.abs(expected).max())

    def test_empty_unmeasured_block(self):
        kmm = np.array([[2.0]])
        h = schur_complement_inverse(kmm, np.zeros((1, 0)), np.zeros((0, 0)))
        np.testing.assert_allclose(h, [[0.5]])

    def test_symmetric_result(self):
        rng = np.random.default_rng(9)
        a = random_spd(6, rng)
        h = schur_complement_inverse(a[:3, :3], a[:3, 3:], a[3:, 3:])
        np.testing.assert_array_equal(h, h.T)

    def test_singular_unmeasured(self):
        with pytest.raises(SingularBlock):
            schur_complement_inverse(np.eye(2), np.ones((2, 2)), np.zeros((2, 2)))

    def test_singular_schur(self):
        # kmm - kc ku^-1 kc^T = 1 - 1 = 0
        with pytest.raises(SingularBlock):
            schur_complement_inverse(
                np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]])
            )

    def test_conformability(self):
        with pytest.raises(DimensionMismatch):
            schur_complement_inverse(np.eye(2), np.ones((3, 2)), np.eye(2))
